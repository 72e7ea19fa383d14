#pragma once
/**
 * @file quadrature.hpp
 * @brief Product Gauss-Legendre rules on boxes with dyadic refinement and
 *        excision around point singularities.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace stochwave {

struct QuadratureSpec {
    int subdivisions = 2;    ///< sub-cells per axis per cell
    int gauss_order = 1;     ///< points per axis; 1 is the midpoint rule
    int singular_depth = 1;  ///< extra dyadic levels around a singular point

    void validate() const {
        if (subdivisions < 1) throw std::invalid_argument("quadrature.subdivisions: must be >= 1");
        if (gauss_order < 1 || gauss_order > 16)
            throw std::invalid_argument("quadrature.gauss_order: must be in [1, 16]");
        if (singular_depth < 0) throw std::invalid_argument("quadrature.singular_depth: must be >= 0");
    }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
    if (n == 1) return {{0.0}, {2.0}};
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

/**
 * Integrates f over a box that may contain point singularities.
 *
 * The box is split into subdivisions^3 sub-boxes. A sub-box whose center lies
 * within two of its diameters of a singular point is split into 8 children
 * while depth remains; at the last level such boxes are dropped if the center
 * is within one diameter, otherwise the product rule is applied.
 */
class BoxQuadrature {
public:
    explicit BoxQuadrature(const QuadratureSpec& q) : q_(q), rule_(gauss_legendre(q.gauss_order)) {
        q_.validate();
    }

    const QuadratureSpec& spec() const { return q_; }

    template <class T, class F>
    T integrate(const Box& b, std::span<const Vec3> singular, F&& f) const {
        const int s = q_.subdivisions;
        Vec3 d{b.side(0) / s, b.side(1) / s, b.side(2) / s};
        T acc{};
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                for (int k = 0; k < s; ++k) {
                    Vec3 lo = b.lo + Vec3{i * d.x, j * d.y, k * d.z};
                    acc += adaptive<T>(Box{lo, lo + d}, singular, f, q_.singular_depth);
                }
        return acc;
    }

    template <class T, class F>
    T product_rule(const Box& b, F&& f) const {
        const int n = static_cast<int>(rule_.nodes.size());
        Vec3 half = 0.5 * (b.hi - b.lo);
        Vec3 mid = b.center();
        const double jac = half.x * half.y * half.z;
        T acc{};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Vec3 y{mid.x + half.x * rule_.nodes[i], mid.y + half.y * rule_.nodes[j],
                           mid.z + half.z * rule_.nodes[k]};
                    acc += (rule_.weights[i] * rule_.weights[j] * rule_.weights[k] * jac) * f(y);
                }
        return acc;
    }

private:
    template <class T, class F>
    T adaptive(const Box& b, std::span<const Vec3> singular, F& f, int depth) const {
        const Vec3 c = b.center();
        const double diam = norm(b.hi - b.lo);
        double nearest = std::numeric_limits<double>::infinity();
        for (const Vec3& p : singular) nearest = std::min(nearest, distance(c, p));
        if (nearest < 2.0 * diam) {
            if (depth > 0) {
                T acc{};
                Vec3 h = 0.5 * (b.hi - b.lo);
                for (int o = 0; o < 8; ++o) {
                    Vec3 lo = b.lo + Vec3{(o >> 2 & 1) * h.x, (o >> 1 & 1) * h.y, (o & 1) * h.z};
                    acc += adaptive<T>(Box{lo, lo + h}, singular, f, depth - 1);
                }
                return acc;
            }
            if (nearest < diam) return T{};
        }
        return product_rule<T>(b, f);
    }

    QuadratureSpec q_;
    GaussRule rule_;
};

}  // namespace stochwave
