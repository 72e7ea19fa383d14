#pragma once
/**
 * @file source.hpp
 * @brief Separable source strength f(x, t) = amplitude * g(x) * p(t) built from
 *        classical mollifier bumps, and its Laplace transform in t.
 */

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "geometry.hpp"

namespace stochwave {

using cplx = std::complex<double>;

/// exp(-1 / (1 - y^2)) on (-1, 1), zero elsewhere.
inline double mollifier(double y) {
    double q = 1.0 - y * y;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

struct SourceProfile {
    Box box;
    double t_on = 0.0;
    double t_off = 1.0;
    double amplitude = 1.0;

    void validate() const {
        for (int a = 0; a < 3; ++a)
            if (!(box.side(a) > 0.0)) throw std::invalid_argument("source.box: must have positive sides");
        if (!(t_on >= 0.0)) throw std::invalid_argument("source.t_on: must be >= 0");
        if (!(t_off > t_on)) throw std::invalid_argument("source.t_off: must be > source.t_on");
    }

    double duration() const { return t_off - t_on; }

    /// Per-axis factor of g; y is the affine image of x[a] in (-1, 1).
    double spatial_axis(int a, double xa) const {
        double y = (2.0 * xa - (box.lo[a] + box.hi[a])) / box.side(a);
        return mollifier(y);
    }

    /// g(x); equals e^-3 at the box center (no peak normalization).
    double spatial(Vec3 x) const {
        double v = 1.0;
        for (int a = 0; a < 3 && v != 0.0; ++a) v *= spatial_axis(a, x[a]);
        return v;
    }

    /// p(t) with peak value 1 at the midpoint of (t_on, t_off).
    double temporal(double t) const {
        if (!(t > t_on && t < t_off)) return 0.0;
        const double w = duration();
        return std::exp(-1.0 / ((t - t_on) * (t_off - t)) + 4.0 / (w * w));
    }

    /// int_a^b g_a(x) dx along one axis, clipped to the support.
    double spatial_axis_integral(int a, double lo, double hi) const {
        lo = std::max(lo, box.lo[a]);
        hi = std::min(hi, box.hi[a]);
        if (!(hi > lo)) return 0.0;
        using boost::math::quadrature::gauss_kronrod;
        auto f = [&](double x) { return spatial_axis(a, x); };
        return gauss_kronrod<double, 31>::integrate(f, lo, hi, 8, 1e-12);
    }

    /// int_B g(y) dy over an axis-aligned box B.
    double spatial_box_integral(const Box& b) const {
        double v = 1.0;
        for (int a = 0; a < 3 && v != 0.0; ++a) v *= spatial_axis_integral(a, b.lo[a], b.hi[a]);
        return v;
    }

    /// int_0^inf p(t) e^{-st} dt by adaptive Gauss-Kronrod on [t_on, t_off].
    cplx temporal_laplace(cplx s) const {
        using boost::math::quadrature::gauss_kronrod;
        auto re = [&](double t) { return temporal(t) * std::exp(-s.real() * t) * std::cos(s.imag() * t); };
        auto im = [&](double t) { return -temporal(t) * std::exp(-s.real() * t) * std::sin(s.imag() * t); };
        // Split into panels so the oscillation per panel stays bounded.
        const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(s.imag()) * duration() / 8.0)));
        const double step = duration() / panels;
        double sr = 0.0, si = 0.0;
        for (int k = 0; k < panels; ++k) {
            double a = t_on + k * step, b = (k + 1 == panels) ? t_off : a + step;
            sr += gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-13);
            si += gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-13);
        }
        return {sr, si};
    }
};

inline double eval_f(const SourceProfile& src, Vec3 x, double t) {
    return src.amplitude * src.spatial(x) * src.temporal(t);
}

inline cplx eval_f_laplace(const SourceProfile& src, Vec3 x, cplx s) {
    if (s.real() < 0.0) throw std::invalid_argument("eval_f_laplace: requires Re s >= 0");
    double g = src.amplitude * src.spatial(x);
    if (g == 0.0) return {0.0, 0.0};
    return g * src.temporal_laplace(s);
}

/// RMS angular bandwidth sqrt(int p'^2 / int p^2) of the temporal bump.
inline double temporal_rms_bandwidth(const SourceProfile& src) {
    using boost::math::quadrature::gauss_kronrod;
    const double w = src.duration();
    auto dp = [&](double t) {
        double p = src.temporal(t);
        if (p == 0.0) return 0.0;
        double a = t - src.t_on, b = src.t_off - t;
        // d/dt [-1/(ab)] = (b - a) / (ab)^2
        double d = p * (b - a) / ((a * b) * (a * b));
        return d * d;
    };
    auto p2 = [&](double t) {
        double p = src.temporal(t);
        return p * p;
    };
    double num = gauss_kronrod<double, 61>::integrate(dp, src.t_on, src.t_on + w, 15, 1e-12);
    double den = gauss_kronrod<double, 61>::integrate(p2, src.t_on, src.t_on + w, 15, 1e-12);
    return std::sqrt(num / den);
}

}  // namespace stochwave
