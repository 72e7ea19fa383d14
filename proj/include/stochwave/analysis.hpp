#pragma once
/**
 * @file analysis.hpp
 * @brief Norms over the physical region, Laplace traces of probe series,
 *        run-to-run errors and rate fits.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "geometry.hpp"
#include "solver.hpp"
#include "source.hpp"

namespace stochwave {

/// sqrt(dx^3 sum u^2) over PHYSICAL nodes of a full-grid field.
inline double space_l2(const std::vector<double>& field, const Grid& grid) {
    if (field.size() != grid.size()) throw std::invalid_argument("space_l2: field does not match the grid");
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i)
        if (grid.tag(i) == Region::Physical) s += field[i] * field[i];
    return std::sqrt(s * std::pow(grid.dx(), 3));
}

/// Trapezoid rule over t of a sampled nonnegative quantity; returns sqrt(int q^2 dt).
inline double trapezoid_l2(const std::vector<double>& times, const std::vector<double>& norms) {
    if (times.size() != norms.size()) throw std::invalid_argument("trapezoid_l2: length mismatch");
    double acc = 0.0;
    for (std::size_t n = 1; n < times.size(); ++n)
        acc += 0.5 * (times[n] - times[n - 1]) * (norms[n] * norms[n] + norms[n - 1] * norms[n - 1]);
    return std::sqrt(acc);
}

/// ||u||_{L2(0, T; L2(B_R \ O))} from the per-step norms.
inline double time_space_l2(const SimulationResult& r) { return trapezoid_l2(r.times, r.norms); }

/**
 * Trapezoid approximation of int_0^T e^{-st} u(t) dt for samples u(n dt).
 * Throws if the neglected tail is not controlled: e^{-Re s T} max|u| over the
 * last tenth of the record must be <= tail_tol (set tail_tol <= 0 to skip).
 */
inline cplx laplace_trace(const std::vector<double>& series, double dt, cplx s, double tail_tol = 1e-8) {
    if (!(s.real() > 0.0)) throw std::invalid_argument("laplace_trace: requires Re s > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("laplace_trace: dt must be > 0");
    if (series.empty()) return {0.0, 0.0};
    const std::size_t N = series.size();
    if (tail_tol > 0.0) {
        const double T = (N - 1) * dt;
        double tail = 0.0;
        for (std::size_t n = N - std::max<std::size_t>(1, N / 10); n < N; ++n) tail = std::max(tail, std::abs(series[n]));
        const double bound = std::exp(-s.real() * T) * tail;
        if (bound > tail_tol)
            throw std::domain_error("laplace_trace: truncated tail bound " + std::to_string(bound) +
                                    " exceeds tolerance; extend the record or raise Re s");
    }
    // e^{-s n dt} by recurrence would drift; direct evaluation keeps it exact per sample.
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < N; ++n) {
        const double w = (n == 0 || n == N - 1) ? 0.5 : 1.0;
        acc += w * series[n] * std::exp(-s * (double(n) * dt));
    }
    return acc * dt;
}

namespace detail {

/// Index of every stored snapshot node in a dense lattice array (-1 when absent).
inline std::vector<std::int32_t> snapshot_lookup(const SimulationResult& r) {
    const std::size_t n = static_cast<std::size_t>(r.extent);
    std::vector<std::int32_t> map(n * n * n, -1);
    for (std::size_t q = 0; q < r.snapshot_nodes.size(); ++q) map[r.snapshot_nodes[q]] = static_cast<std::int32_t>(q);
    return map;
}

inline double snapshot_time(const SimulationResult& r, std::size_t k) { return r.snapshot_steps[k] * r.dt; }

}  // namespace detail

/**
 * ||a - b||_{L2(0,T;L2(B_R \ O))} over a's snapshot times, on a's PHYSICAL nodes.
 * When the grids differ, b is resampled onto a's nodes by trilinear interpolation.
 * Every snapshot time of a must also be a snapshot time of b; the initial state
 * (zero in both runs) is added as the first sample.
 */
inline double error_between(const SimulationResult& a, const SimulationResult& b) {
    if (a.snapshots.empty()) throw std::invalid_argument("error_between: first result has no snapshots");
    if (b.snapshots.empty()) throw std::invalid_argument("error_between: second result has no snapshots");
    if (!(a.grid.R == b.grid.R && a.grid.obstacle_radius == b.grid.obstacle_radius && a.grid.center == b.grid.center))
        throw std::invalid_argument("error_between: physical regions differ");

    // match times
    std::vector<std::size_t> match(a.snapshots.size());
    {
        std::size_t kb = 0;
        for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
            const double t = detail::snapshot_time(a, k);
            const double tol = 1e-9 * std::max(1.0, t);
            while (kb < b.snapshots.size() && detail::snapshot_time(b, kb) < t - tol) ++kb;
            if (kb == b.snapshots.size() || std::abs(detail::snapshot_time(b, kb) - t) > tol)
                throw std::invalid_argument("error_between: incompatible time ranges (no match for t = " +
                                            std::to_string(t) + ")");
            match[k] = kb;
        }
    }

    const Grid ga(a.grid);
    if (ga.extent() != a.extent) throw std::invalid_argument("error_between: inconsistent grid metadata");
    std::vector<std::size_t> rows;  // positions in a's snapshot vector that are PHYSICAL
    for (std::size_t q = 0; q < a.snapshot_nodes.size(); ++q)
        if (ga.tag(a.snapshot_nodes[q]) == Region::Physical) rows.push_back(q);

    const bool same = a.grid == b.grid && a.snapshot_nodes == b.snapshot_nodes;
    // For each physical node of a: 8 (position in b's snapshot, weight) pairs.
    std::vector<std::array<std::int32_t, 8>> pos;
    std::vector<std::array<double, 8>> wts;
    if (!same) {
        const auto lookup = detail::snapshot_lookup(b);
        const double dxb = b.grid.dx;
        const int half = (b.extent - 1) / 2;
        pos.resize(rows.size());
        wts.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Vec3 x = ga.coord(a.snapshot_nodes[rows[r]]);
            std::array<int, 3> i0{};
            std::array<double, 3> f{};
            for (int ax = 0; ax < 3; ++ax) {
                const double q = (x[ax] - b.grid.center[ax]) / dxb + half;
                i0[ax] = std::clamp(static_cast<int>(std::floor(q)), 0, b.extent - 2);
                f[ax] = q - i0[ax];
            }
            for (int o = 0; o < 8; ++o) {
                const int bx = o >> 2 & 1, by = o >> 1 & 1, bz = o & 1;
                const double w = (bx ? f[0] : 1 - f[0]) * (by ? f[1] : 1 - f[1]) * (bz ? f[2] : 1 - f[2]);
                const std::size_t idx = (static_cast<std::size_t>(i0[0] + bx) * b.extent + (i0[1] + by)) * b.extent +
                                        (i0[2] + bz);
                const std::int32_t p = lookup[idx];
                if (p < 0 && w != 0.0) throw std::invalid_argument("error_between: second result does not cover the physical region");
                pos[r][o] = p < 0 ? 0 : p;
                wts[r][o] = p < 0 ? 0.0 : w;
            }
        }
    }

    const double dx3 = std::pow(a.grid.dx, 3);
    std::vector<double> times{0.0}, norms{0.0};
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const auto& ua = a.snapshots[k];
        const auto& ub = b.snapshots[match[k]];
        double s = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double vb;
            if (same) {
                vb = ub[rows[r]];
            } else {
                vb = 0.0;
                for (int o = 0; o < 8; ++o) vb += wts[r][o] * ub[pos[r][o]];
            }
            const double d = ua[rows[r]] - vb;
            s += d * d;
        }
        times.push_back(detail::snapshot_time(a, k));
        norms.push_back(std::sqrt(s * dx3));
    }
    return trapezoid_l2(times, norms);
}

/// Fitted rate over (parameter, error) pairs.
struct RateReport {
    std::string kind;  ///< "loglog" (slope of ln e vs ln x) or "loglinear" (slope of ln e vs x)
    std::vector<double> params;
    std::vector<double> errors;
    std::vector<double> ci;     ///< per-point 95% half-widths (0 when deterministic)
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;      ///< RMS of the log-residuals
    double slope_halfwidth = 0.0;  ///< 95% half-width of the slope
};

namespace detail {

inline RateReport linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n) throw std::invalid_argument("rate fit: needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("rate fit: parameter values must not all coincide");
    RateReport r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (r.intercept + r.slope * x[i]);
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    const double se = std::sqrt(ss / (n - 2) / sxx);
    const boost::math::students_t t(static_cast<double>(n - 2));
    r.slope_halfwidth = boost::math::quantile(boost::math::complement(t, 0.025)) * se;
    return r;
}

inline void require_positive(const std::vector<double>& v, const char* what) {
    for (double e : v)
        if (!(e > 0.0)) throw std::invalid_argument(std::string("rate fit: ") + what + " must be positive");
}

}  // namespace detail

/// Least-squares slope of ln(error) against ln(param).
inline RateReport fit_loglog(const std::vector<double>& params, const std::vector<double>& errors) {
    detail::require_positive(params, "parameters");
    detail::require_positive(errors, "errors");
    std::vector<double> lx, ly;
    for (double p : params) lx.push_back(std::log(p));
    for (double e : errors) ly.push_back(std::log(e));
    RateReport r = detail::linear_fit(lx, ly);
    r.kind = "loglog";
    r.params = params;
    r.errors = errors;
    r.ci.assign(params.size(), 0.0);
    return r;
}

/// Least-squares slope of ln(error) against param.
inline RateReport fit_loglinear(const std::vector<double>& params, const std::vector<double>& errors) {
    detail::require_positive(errors, "errors");
    std::vector<double> ly;
    for (double e : errors) ly.push_back(std::log(e));
    RateReport r = detail::linear_fit(params, ly);
    r.kind = "loglinear";
    r.params = params;
    r.errors = errors;
    r.ci.assign(params.size(), 0.0);
    return r;
}

}  // namespace stochwave
