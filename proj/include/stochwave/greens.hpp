#pragma once
/**
 * @file greens.hpp
 * @brief Free-space reference solutions: the retarded potential of the wave
 *        equation, the Laplace-domain convolution with G0(.,.; is), and the
 *        squared Green-difference integral over an annulus.
 *
 * Everything here assumes no obstacle; the Dirichlet Green function has no
 * closed form and obstacle runs are verified by self-convergence and
 * reciprocity instead.
 */

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "noise.hpp"
#include "quadrature.hpp"
#include "source.hpp"

namespace stochwave {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// G0(x, y; lambda) = exp(i lambda |x - y|) / (4 pi |x - y|).
inline cplx g0_kernel(Vec3 x, Vec3 y, cplx lambda) {
    const double r = distance(x, y);
    if (r == 0.0) throw std::invalid_argument("g0_kernel: coincident points");
    return std::exp(cplx(0.0, 1.0) * lambda * r) / (kFourPi * r);
}

namespace detail {
inline void require_free_space(const GridSpec& domain, const char* who) {
    if (domain.obstacle_radius > 0.0)
        throw std::invalid_argument(std::string(who) + ": reference solutions exist only without an obstacle");
}
}  // namespace detail

/**
 * int_K amplitude * g(y) * p(t - |x - y|) / (4 pi |x - y|) dy for one cell.
 * Returns exactly 0 when the retarded time window misses the temporal support.
 */
inline double retarded_cell_response(const Box& cell, Vec3 x, double t, const SourceProfile& src,
                                     const BoxQuadrature& quad) {
    const double rmin = cell.distance_to(x);
    const double rmax = cell.farthest_from(x);
    if (t - rmin <= src.t_on || t - rmax >= src.t_off) return 0.0;
    const std::array<Vec3, 1> sing{x};
    auto f = [&](Vec3 y) {
        const double r = distance(x, y);
        const double p = src.temporal(t - r);
        if (p == 0.0) return 0.0;
        return src.amplitude * src.spatial(y) * p / (kFourPi * r);
    };
    return quad.integrate<double>(cell, sing, f);
}

/// Cell responses for every cell of a partition (no noise weights applied).
inline std::vector<double> retarded_cell_responses(const CellPartition& part, Vec3 x, double t,
                                                   const SourceProfile& src, const BoxQuadrature& quad) {
    std::vector<double> out(part.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = retarded_cell_response(part.cell_box(c), x, t, src, quad);
    return out;
}

/// u^(h)(x, t) = (1/4pi) int_D f(y, t - |x-y|) W_h(y) / |x-y| dy in free space.
inline double retarded_potential(Vec3 x, double t, const NoiseField& noise, const SourceProfile& src,
                                 const QuadratureSpec& q, const GridSpec& domain) {
    detail::require_free_space(domain, "retarded_potential");
    if (t <= src.t_on + noise.partition.box.distance_to(x)) return 0.0;
    const BoxQuadrature quad(q);
    const double scale = 1.0 / std::sqrt(noise.partition.cell_volume());
    double u = 0.0;
    for (std::size_t c = 0; c < noise.xi.size(); ++c) {
        if (noise.xi[c] == 0.0) continue;
        u += noise.xi[c] * scale * retarded_cell_response(noise.partition.cell_box(c), x, t, src, quad);
    }
    return u;
}

/// u_L(x, s) = int_D G0(x, y; is) f_L(y, s) W_h(y) dy in free space, Re s > 0.
inline cplx helmholtz_convolution(Vec3 x, cplx s, const NoiseField& noise, const SourceProfile& src,
                                  const QuadratureSpec& q, const GridSpec& domain) {
    detail::require_free_space(domain, "helmholtz_convolution");
    if (!(s.real() > 0.0)) throw std::invalid_argument("helmholtz_convolution: requires Re s > 0");
    const BoxQuadrature quad(q);
    const cplx ps = src.temporal_laplace(s);
    const double scale = 1.0 / std::sqrt(noise.partition.cell_volume());
    const std::array<Vec3, 1> sing{x};
    auto f = [&](Vec3 y) -> cplx {
        const double g = src.spatial(y);
        if (g == 0.0) return {0.0, 0.0};
        const double r = distance(x, y);
        return src.amplitude * g * std::exp(-s * r) / (kFourPi * r);
    };
    cplx u{0.0, 0.0};
    for (std::size_t c = 0; c < noise.xi.size(); ++c) {
        if (noise.xi[c] == 0.0) continue;
        u += noise.xi[c] * scale * quad.integrate<cplx>(noise.partition.cell_box(c), sing, f);
    }
    return u * ps;
}

/// Spherical shell r_in < |x - center| < r_out.
struct Annulus {
    double r_in = 0.0;
    double r_out = 1.0;
    Vec3 center{};

    bool contains(Vec3 x) const {
        double r = distance(x, center);
        return r > r_in && r < r_out;
    }
};

/**
 * int_annulus |G0(x, y; is) - G0(x, z; is)|^2 dx for real s >= 0.
 *
 * The bounding cube is split into subdivisions^3 cells, each integrated with
 * the product rule and refined toward y and z for singular_depth levels.
 */
inline double green_continuity_integral(Vec3 y, Vec3 z, double s, const Annulus& domain, const QuadratureSpec& q) {
    if (y == z) return 0.0;
    const BoxQuadrature quad(QuadratureSpec{1, q.gauss_order, q.singular_depth});
    const std::array<Vec3, 2> sing{y, z};
    auto f = [&](Vec3 x) {
        if (!domain.contains(x)) return 0.0;
        const double ry = distance(x, y), rz = distance(x, z);
        const double d = std::exp(-s * ry) / (kFourPi * ry) - std::exp(-s * rz) / (kFourPi * rz);
        return d * d;
    };
    const int n = q.subdivisions;
    const double side = 2.0 * domain.r_out / n;
    const Vec3 lo0 = domain.center - Vec3{domain.r_out, domain.r_out, domain.r_out};
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 lo = lo0 + side * Vec3{double(i), double(j), double(k)};
                Box b{lo, lo + Vec3{side, side, side}};
                // Cells entirely outside the shell contribute nothing.
                if (b.distance_to(domain.center) >= domain.r_out) continue;
                if (b.farthest_from(domain.center) <= domain.r_in) continue;
                acc += quad.integrate<double>(b, sing, f);
            }
    return acc;
}

}  // namespace stochwave
