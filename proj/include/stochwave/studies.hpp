#pragma once
/**
 * @file studies.hpp
 * @brief The experiment drivers: oracle comparison, Laplace consistency,
 *        Green-difference integrals, the coupled h-rate study, the PML sweep,
 *        resolvent decay and reciprocity.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "greens.hpp"
#include "montecarlo.hpp"
#include "noise.hpp"
#include "pml.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "source.hpp"

namespace stochwave {

/// Largest distance from the center to a point of the source box.
inline double source_extent(const RunConfig& c) { return c.source.box.farthest_from(c.geometry.center); }

/**
 * Outer radius such that a wave emitted from the source after t_on, reflected
 * at |x| = radius and returning to |x| <= reach arrives after T_end.
 */
inline double causal_radius(double T_end, double t_on, double source_extent, double reach, double dx) {
    return 0.5 * (T_end - t_on + source_extent + reach) + 2.0 * dx;
}

inline NoiseField study_noise(const RunConfig& c, int level, std::uint64_t seed) {
    return sample_noise(cell_partition(c.source.box, level, c.noise_h0, c.geometry), seed);
}

inline SimulationResult simulate(const GridSpec& gs, const PmlParams& pml, double safety, const NoiseField& noise,
                                 const SourceProfile& src, const RunOptions& opt) {
    const Grid grid(gs);
    PmlParams p = pml;
    p.R = gs.R;
    p.rho = gs.rho;
    const WaveSolver solver(grid, p, cfl_dt(grid, p, safety));
    SimulationResult r = run(solver, noise_forcing(grid, noise, src), opt);
    r.metadata["grid_hash"] = hex64(grid.hash());
    r.metadata["seed"] = std::to_string(noise.seed);
    r.metadata["noise_level"] = std::to_string(noise.level);
    r.metadata["sigma0"] = config_detail::num(p.sigma0);
    r.metadata["dt"] = config_detail::num(r.dt);
    return r;
}

/// The configured run: noise at noise.level from noise.seed, probes and snapshots as configured.
inline SimulationResult single_run(const RunConfig& c) {
    RunOptions opt;
    opt.T_end = c.T_end;
    opt.probes = c.probes;
    opt.snapshot_every = c.snapshot_every;
    return simulate(c.geometry, c.pml, c.safety, study_noise(c, c.noise_level, c.seed), c.source, opt);
}

// ---------------------------------------------------------------- oracle

struct OracleCheckReport {
    std::vector<double> rel_errors;  ///< per probe, L2 in time
    double worst = 0.0;
    SimulationResult sim;
    std::vector<std::vector<double>> oracle;  ///< [probe][sample]
    RateReport order;                         ///< aggregate error vs dx (empty when not requested)
    bool order_done = false;
    bool pass = false;
};

namespace detail {

inline void require_unreached(const GridSpec& gs, const SourceProfile& src, const std::vector<Vec3>& probes,
                              double T_end) {
    double reach = 0.0;
    for (const Vec3& p : probes) reach = std::max(reach, distance(p, gs.center));
    const double arrival = src.t_on + 2.0 * gs.rho - src.box.farthest_from(gs.center) - reach;
    if (arrival < T_end)
        throw std::invalid_argument("geometry.rho: boundary reflections reach the probes before run.T_end");
}

/// Probe-by-probe relative L2-in-time error of a run against the retarded potential.
inline std::vector<double> oracle_errors(const SimulationResult& r, const NoiseField& noise, const SourceProfile& src,
                                         const QuadratureSpec& q, const GridSpec& gs,
                                         std::vector<std::vector<double>>* oracle_out, double* aggregate) {
    std::vector<double> rel;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < r.probes.size(); ++k) {
        std::vector<double> ref(r.times.size());
        double n2 = 0.0, d2 = 0.0;
        for (std::size_t i = 0; i < r.times.size(); ++i) {
            ref[i] = retarded_potential(r.probes[k], r.times[i], noise, src, q, gs);
            const double e = r.probe_series[k][i] - ref[i];
            n2 += e * e;
            d2 += ref[i] * ref[i];
        }
        if (!(d2 > 0.0)) throw std::invalid_argument("oracle check: reference signal vanishes at a probe");
        rel.push_back(std::sqrt(n2 / d2));
        num += n2;
        den += d2;
        if (oracle_out) oracle_out->push_back(std::move(ref));
    }
    if (aggregate) *aggregate = std::sqrt(num / den);
    return rel;
}

}  // namespace detail

/**
 * Solver against the retarded potential at the configured probes, then (if
 * oracle.order_dx is set) the same comparison on a noise field at
 * oracle.order_level across the listed dx, with a log-log order fit.
 */
inline OracleCheckReport oracle_check(const RunConfig& c) {
    detail::require_free_space(c.geometry, "oracle-check");
    if (c.probes.empty()) throw std::invalid_argument("run.probes: the oracle check needs probes");
    if (!(c.T_end > 0.0)) throw std::invalid_argument("run.T_end: must be > 0 for the oracle check");
    detail::require_unreached(c.geometry, c.source, c.probes, c.T_end);

    OracleCheckReport rep;
    const NoiseField noise = study_noise(c, c.noise_level, c.seed);
    RunOptions opt;
    opt.T_end = c.T_end;
    opt.probes = c.probes;
    rep.sim = simulate(c.geometry, c.pml, c.safety, noise, c.source, opt);
    rep.rel_errors = detail::oracle_errors(rep.sim, noise, c.source, c.quadrature, c.geometry, &rep.oracle, nullptr);
    rep.worst = *std::max_element(rep.rel_errors.begin(), rep.rel_errors.end());
    rep.pass = rep.worst <= c.oracle_tolerance;

    if (!c.oracle_order_dx.empty()) {
        const NoiseField coarse = study_noise(c, c.oracle_order_level, c.seed);
        std::vector<double> dxs, errs;
        for (double dx : c.oracle_order_dx) {
            GridSpec gs = c.geometry;
            gs.dx = dx;
            gs.validate();
            const SimulationResult r = simulate(gs, c.pml, c.safety, coarse, c.source, opt);
            double agg = 0.0;
            (void)detail::oracle_errors(r, coarse, c.source, c.quadrature, gs, nullptr, &agg);
            dxs.push_back(dx);
            errs.push_back(agg);
        }
        rep.order = fit_loglog(dxs, errs);
        rep.order_done = true;
        rep.pass = rep.pass && rep.order.slope >= c.oracle_min_order;
    }
    return rep;
}

// ---------------------------------------------------------------- Laplace consistency

struct LaplaceConsistencyReport {
    std::vector<cplx> s;
    std::vector<cplx> from_time;  ///< trapezoid transform of the sampled retarded potential
    std::vector<cplx> helmholtz;
    std::vector<double> rel_errors;
    bool pass = false;
};

/// At s = 1/T_end + i s2 for each laplace.s2, at the first probe.
inline LaplaceConsistencyReport laplace_consistency(const RunConfig& c) {
    detail::require_free_space(c.geometry, "laplace-consistency");
    if (c.probes.empty()) throw std::invalid_argument("run.probes: the Laplace check needs a probe");
    if (!(c.T_end > 0.0)) throw std::invalid_argument("run.T_end: must be > 0 for the Laplace check");
    const Vec3 x = c.probes.front();
    const NoiseField noise = study_noise(c, c.noise_level, c.seed);
    // The retarded potential vanishes identically after t_off + the farthest source distance.
    const double t_end = c.source.t_off + c.source.box.farthest_from(x);
    const std::size_t N = static_cast<std::size_t>(std::ceil(t_end / c.laplace_dt)) + 2;
    std::vector<double> series(N);
    for (std::size_t n = 0; n < N; ++n)
        series[n] = retarded_potential(x, n * c.laplace_dt, noise, c.source, c.quadrature, c.geometry);

    LaplaceConsistencyReport rep;
    rep.pass = true;
    for (double s2 : c.laplace_s2) {
        const cplx s(1.0 / c.T_end, s2);
        const cplx a = laplace_trace(series, c.laplace_dt, s);
        const cplx b = helmholtz_convolution(x, s, noise, c.source, c.quadrature, c.geometry);
        const double rel = std::abs(a - b) / std::abs(b);
        rep.s.push_back(s);
        rep.from_time.push_back(a);
        rep.helmholtz.push_back(b);
        rep.rel_errors.push_back(rel);
        rep.pass = rep.pass && rel <= c.laplace_tolerance;
    }
    return rep;
}

// ---------------------------------------------------------------- Green continuity

struct GreenContinuityReport {
    std::vector<double> separations;
    std::vector<double> integrals;
    std::vector<double> ratios;  ///< integral / separation
    double spread = 0.0;         ///< max ratio / min ratio
    bool monotone = false;       ///< integrals increase with separation
    bool pass = false;
};

/// Collinear pairs y, z = midpoint -/+ (eps/2) e_1 over the shell obstacle_radius < |x| < R.
inline GreenContinuityReport green_continuity_study(const RunConfig& c) {
    detail::require_free_space(c.geometry, "green-continuity");
    if (c.green_separations.size() < 2) throw std::invalid_argument("green.separations: needs at least two values");
    const Annulus shell{c.geometry.obstacle_radius, c.geometry.R, c.geometry.center};
    GreenContinuityReport rep;
    for (double eps : c.green_separations) {
        const Vec3 y = c.green_midpoint - Vec3{0.5 * eps, 0.0, 0.0};
        const Vec3 z = c.green_midpoint + Vec3{0.5 * eps, 0.0, 0.0};
        const double I = green_continuity_integral(y, z, c.green_s, shell, c.quadrature);
        rep.separations.push_back(eps);
        rep.integrals.push_back(I);
        rep.ratios.push_back(I / eps);
    }
    const auto [mn, mx] = std::minmax_element(rep.ratios.begin(), rep.ratios.end());
    rep.spread = *mx / *mn;
    rep.monotone = true;
    for (std::size_t i = 0; i < rep.separations.size(); ++i)
        for (std::size_t j = 0; j < rep.separations.size(); ++j)
            if (rep.separations[i] < rep.separations[j] && !(rep.integrals[i] < rep.integrals[j])) rep.monotone = false;
    rep.pass = rep.spread <= c.green_max_ratio;
    return rep;
}

// ---------------------------------------------------------------- h-rate

struct HRateReport {
    std::vector<int> levels;
    std::vector<double> h;
    McVectorEstimate mc;            ///< per-seed squared errors, one component per level
    std::vector<double> exact;      ///< Ito expectation of the same quadrature (no sampling error)
    RateReport fit;                 ///< fit of the Monte Carlo means
    RateReport exact_fit;           ///< fit of the exact expectations
    double slope_ci = 0.0;          ///< 95% half-width from the seed covariance
    int reference_level = 0;
    bool pass = false;
};

namespace detail {

/// Space-time sample points, uniform in (B_R \ O) x (0, T), from a keyed stream.
inline std::vector<std::array<double, 4>> spacetime_points(const GridSpec& gs, double T, int count,
                                                           std::uint64_t seed) {
    std::vector<std::array<double, 4>> pts;
    std::uint64_t k = 0;
    while (static_cast<int>(pts.size()) < count) {
        const Vec3 x{gs.center.x + gs.R * (2.0 * rng::uniform(seed, 0, k) - 1.0),
                     gs.center.y + gs.R * (2.0 * rng::uniform(seed, 1, k) - 1.0),
                     gs.center.z + gs.R * (2.0 * rng::uniform(seed, 2, k) - 1.0)};
        const double t = T * rng::uniform(seed, 3, k);
        ++k;
        const double r = distance(x, gs.center);
        if (r >= gs.R || r <= gs.obstacle_radius) continue;
        pts.push_back({x.x, x.y, x.z, t});
    }
    return pts;
}

}  // namespace detail

/**
 * Coupled multilevel error study with oracle solutions in free space.
 *
 * Per seed, noise is drawn at the reference level (level_max + reference_offset)
 * and coarsened to every measured level. The squared L2(0,T; L2(B_R)) error of
 * each level against the reference is estimated on a fixed set of space-time
 * points, using the same cell responses for every level and seed.
 */
inline HRateReport h_convergence_study(const RunConfig& c, unsigned workers = 0) {
    HRateReport rep;
    for (int l = c.hrate_level_min; l <= c.hrate_level_max; ++l) {
        rep.levels.push_back(l);
        rep.h.push_back(std::ldexp(c.noise_h0, -l));
    }
    const std::size_t L = rep.levels.size();
    if (L < 3) throw std::invalid_argument("hrate.level_max: the study needs at least 3 levels");
    rep.reference_level = c.hrate_level_max + c.hrate_reference_offset;

    if (c.hrate_manufactured) {
        // err^2 = h exactly; exercises the fitting and reporting path only.
        rep.exact = rep.h;
        rep.mc.mean = rep.h;
        rep.mc.ci_halfwidth.assign(L, 0.0);
        rep.fit = fit_loglog(rep.h, rep.h);
        rep.exact_fit = rep.fit;
        rep.pass = rep.fit.slope >= c.hrate_slope_lo && rep.fit.slope <= c.hrate_slope_hi;
        return rep;
    }

    detail::require_free_space(c.geometry, "h-rate");
    if (!(c.T_end > 0.0)) throw std::invalid_argument("run.T_end: must be > 0 for the h-rate study");
    if (workers == 0) workers = default_workers();

    const CellPartition ref = cell_partition(c.source.box, rep.reference_level, c.noise_h0, c.geometry);
    const std::size_t M = ref.size();
    const std::size_t N = static_cast<std::size_t>(c.mc_samples);

    // Ancestor of every reference cell at each measured level.
    std::vector<std::vector<std::uint32_t>> ancestor(L, std::vector<std::uint32_t>(M));
    std::vector<CellPartition> parts(L);
    for (std::size_t li = 0; li < L; ++li) {
        CellPartition p = ref;
        std::vector<std::uint32_t> idx(M);
        for (std::size_t m = 0; m < M; ++m) idx[m] = static_cast<std::uint32_t>(m);
        while (p.level > rep.levels[li]) {
            for (auto& v : idx) v = static_cast<std::uint32_t>(p.parent_index(v));
            p = p.coarser();
        }
        ancestor[li] = std::move(idx);
        parts[li] = p;
    }

    // Noise values xi / sqrt|K| per seed: reference level and every measured level.
    std::vector<std::vector<double>> v_ref(N);
    std::vector<std::vector<std::vector<double>>> v_lvl(N, std::vector<std::vector<double>>(L));
    parallel_for_index(N, workers, [&](std::size_t s) {
        NoiseField f = sample_noise(ref, c.seed + s);
        const double sr = 1.0 / std::sqrt(ref.cell_volume());
        v_ref[s].resize(M);
        for (std::size_t m = 0; m < M; ++m) v_ref[s][m] = f.xi[m] * sr;
        for (std::size_t li = L; li-- > 0;) {
            while (f.level > rep.levels[li]) f = coarsen_noise(f);
            const double sc = 1.0 / std::sqrt(f.partition.cell_volume());
            v_lvl[s][li].resize(f.xi.size());
            for (std::size_t k = 0; k < f.xi.size(); ++k) v_lvl[s][li][k] = f.xi[k] * sc;
        }
    });

    const auto pts = detail::spacetime_points(c.geometry, c.T_end, c.hrate_points, c.hrate_point_seed);
    const std::size_t P = pts.size();
    std::vector<double> sq(P * L * N, 0.0);  // [point][level][seed]
    std::vector<double> ex(P * L, 0.0);      // [point][level]
    const BoxQuadrature quad(c.quadrature);
    const double ref_vol = ref.cell_volume();

    parallel_for_index(P, workers, [&](std::size_t p) {
        const Vec3 x{pts[p][0], pts[p][1], pts[p][2]};
        const double t = pts[p][3];
        const std::vector<double> I = retarded_cell_responses(ref, x, t, c.source, quad);
        std::vector<double> ur(N, 0.0);
        for (std::size_t s = 0; s < N; ++s)
            for (std::size_t m = 0; m < M; ++m) ur[s] += v_ref[s][m] * I[m];
        for (std::size_t li = 0; li < L; ++li) {
            std::vector<double> Ic(parts[li].size(), 0.0);
            for (std::size_t m = 0; m < M; ++m) Ic[ancestor[li][m]] += I[m];
            const double share = std::ldexp(1.0, -3 * (rep.reference_level - rep.levels[li]));
            double e = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                const double d = I[m] - Ic[ancestor[li][m]] * share;
                e += d * d;
            }
            ex[p * L + li] = e / ref_vol;
            for (std::size_t s = 0; s < N; ++s) {
                double ul = 0.0;
                for (std::size_t k = 0; k < Ic.size(); ++k) ul += v_lvl[s][li][k] * Ic[k];
                sq[(p * L + li) * N + s] = (ul - ur[s]) * (ul - ur[s]);
            }
        }
    });

    const double r_obs = c.geometry.obstacle_radius;
    const double weight = 4.0 / 3.0 * std::numbers::pi *
                          (std::pow(c.geometry.R, 3) - std::pow(r_obs, 3)) * c.T_end / static_cast<double>(P);
    rep.exact.assign(L, 0.0);
    for (std::size_t li = 0; li < L; ++li) {
        for (std::size_t p = 0; p < P; ++p) rep.exact[li] += ex[p * L + li];
        rep.exact[li] *= weight;
    }
    // Reduce per seed in point order, then hand the fixed samples to the estimator.
    auto seed_errors = [&](std::uint64_t seed) {
        const std::size_t s = static_cast<std::size_t>(seed - c.seed);
        std::vector<double> e(L, 0.0);
        for (std::size_t li = 0; li < L; ++li) {
            for (std::size_t p = 0; p < P; ++p) e[li] += sq[(p * L + li) * N + s];
            e[li] *= weight;
        }
        return e;
    };
    rep.mc = mc_expectation_vector(seed_errors, N, c.seed, 1);

    rep.fit = fit_loglog(rep.h, rep.mc.mean);
    rep.fit.ci = rep.mc.ci_halfwidth;
    rep.exact_fit = fit_loglog(rep.h, rep.exact);

    // Delta-method CI of the slope from the seed covariance of the level means.
    double mx = 0.0;
    for (double hv : rep.h) mx += std::log(hv);
    mx /= L;
    double sxx = 0.0;
    for (double hv : rep.h) sxx += (std::log(hv) - mx) * (std::log(hv) - mx);
    std::vector<double> w(L);
    for (std::size_t i = 0; i < L; ++i) w[i] = (std::log(rep.h[i]) - mx) / sxx / rep.mc.mean[i];
    double var = 0.0;
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            double cov = 0.0;
            for (std::size_t s = 0; s < N; ++s)
                cov += (rep.mc.samples[s][i] - rep.mc.mean[i]) * (rep.mc.samples[s][j] - rep.mc.mean[j]);
            cov /= static_cast<double>(N - 1);
            var += w[i] * w[j] * cov / static_cast<double>(N);
        }
    rep.slope_ci = 1.96 * std::sqrt(var);
    rep.fit.slope_halfwidth = rep.slope_ci;
    rep.pass = rep.fit.slope - rep.slope_ci >= c.hrate_slope_lo && rep.fit.slope + rep.slope_ci <= c.hrate_slope_hi;
    return rep;
}

// ---------------------------------------------------------------- PML rate

struct PmlRateReport {
    std::vector<double> sigma0;
    std::vector<double> x;       ///< sigma0 * d / 2
    std::vector<double> errors;  ///< error_between(reference, PML run)
    std::vector<bool> used;      ///< above twice the floor
    double floor = 0.0;
    double reference_radius = 0.0;
    RateReport fit;
    bool fitted = false;
    bool pass = false;
};

/// Fits ln(error) against sigma0 d / 2 over the runs whose error exceeds twice the floor.
inline PmlRateReport pml_rate_from_runs(const SimulationResult& reference, double floor,
                                        const std::vector<double>& sigma0, const std::vector<SimulationResult>& runs,
                                        double d, double max_slope, int min_points) {
    if (reference.snapshots.empty()) throw std::invalid_argument("pml-rate: the padded reference run is missing");
    if (runs.size() != sigma0.size()) throw std::invalid_argument("pml-rate: one run per sigma0 value is required");
    PmlRateReport rep;
    rep.floor = floor;
    std::vector<double> fx, fe;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const double e = error_between(reference, runs[i]);
        rep.sigma0.push_back(sigma0[i]);
        rep.x.push_back(0.5 * sigma0[i] * d);
        rep.errors.push_back(e);
        const bool use = e > 2.0 * floor;
        rep.used.push_back(use);
        if (use) {
            fx.push_back(rep.x.back());
            fe.push_back(e);
        }
    }
    if (static_cast<int>(fx.size()) >= std::max(3, min_points)) {
        rep.fit = fit_loglinear(fx, fe);
        rep.fitted = true;
        rep.pass = rep.fit.slope <= max_slope;
    }
    return rep;
}

/**
 * Fixed noise realization; PML runs on B_rho for every pmlrate.sigma0 against a
 * reference on a ball large enough that its boundary cannot influence B_R before
 * T_end. The floor is the reference's own change under dx -> dx/2.
 */
inline PmlRateReport pml_convergence_study(const RunConfig& c) {
    if (c.pmlrate_sigma0.size() < 3) throw std::invalid_argument("pmlrate.sigma0: needs at least 3 values");
    if (!(c.T_end > 0.0)) throw std::invalid_argument("run.T_end: must be > 0 for the PML study");
    const int every = c.snapshot_every > 0 ? c.snapshot_every : 1;
    const NoiseField noise = study_noise(c, c.noise_level, c.seed);
    const double dx = c.geometry.dx;

    GridSpec pad = c.geometry;
    pad.rho = std::max(c.geometry.rho,
                       causal_radius(c.T_end, c.source.t_on, source_extent(c), c.geometry.R + 2.0 * dx, dx));
    PmlParams free_pml = c.pml;
    free_pml.sigma0 = 0.0;
    RunOptions opt;
    opt.T_end = c.T_end;
    opt.snapshot_every = every;
    opt.record_norms = false;
    const SimulationResult reference = simulate(pad, free_pml, c.safety, noise, c.source, opt);

    GridSpec fine = pad;
    fine.dx = 0.5 * dx;
    RunOptions fine_opt = opt;
    fine_opt.snapshot_every = 2 * every;
    const double floor = error_between(reference, simulate(fine, free_pml, c.safety, noise, c.source, fine_opt));

    std::vector<SimulationResult> runs;
    for (double s0 : c.pmlrate_sigma0) {
        PmlParams p = c.pml;
        p.sigma0 = s0;
        runs.push_back(simulate(c.geometry, p, c.safety, noise, c.source, opt));
    }
    PmlRateReport rep = pml_rate_from_runs(reference, floor, c.pmlrate_sigma0, runs, c.geometry.rho - c.geometry.R,
                                           c.pmlrate_max_slope, c.pmlrate_min_points);
    rep.reference_radius = pad.rho;
    return rep;
}

// ---------------------------------------------------------------- resolvent decay

struct ResolventReport {
    double bandwidth = 0.0;
    std::vector<double> s2;
    std::vector<double> magnitude;  ///< |laplace_trace(series, s1 + i s2)|
    RateReport fit;
    bool fitted = false;
    bool pass = false;
};

/// |u_L(s1 + i s2)| over the given s2 values and the log-log slope (if every value is nonzero).
inline ResolventReport resolvent_decay_check(const std::vector<double>& series, double dt, double s1,
                                             const std::vector<double>& s2_sweep, double max_slope = -4.0) {
    ResolventReport rep;
    rep.s2 = s2_sweep;
    bool positive = true;
    for (double s2 : s2_sweep) {
        const double m = std::abs(laplace_trace(series, dt, cplx(s1, s2)));
        rep.magnitude.push_back(m);
        positive = positive && m > 0.0;
    }
    if (positive && s2_sweep.size() >= 3) {
        rep.fit = fit_loglog(rep.s2, rep.magnitude);
        rep.fitted = true;
        rep.pass = rep.fit.slope <= max_slope;
    }
    return rep;
}

/// log-spaced values from a to b inclusive.
inline std::vector<double> log_space(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1)));
    return v;
}

/// Configured run, then the decay check at the first probe for s2 in [factor_min, factor_max] x bandwidth.
inline ResolventReport resolvent_study(const RunConfig& c, SimulationResult* sim_out = nullptr) {
    if (c.probes.empty()) throw std::invalid_argument("run.probes: the resolvent check needs a probe");
    RunOptions opt;
    opt.T_end = c.T_end;
    opt.probes = {c.probes.front()};
    const SimulationResult r =
        simulate(c.geometry, c.pml, c.safety, study_noise(c, c.noise_level, c.seed), c.source, opt);
    const double B = temporal_rms_bandwidth(c.source);
    ResolventReport rep = resolvent_decay_check(
        r.probe_series[0], r.dt, c.resolvent_s1,
        log_space(c.resolvent_factor_min * B, c.resolvent_factor_max * B, c.resolvent_points), c.resolvent_max_slope);
    rep.bandwidth = B;
    if (sim_out) *sim_out = r;
    return rep;
}

// ---------------------------------------------------------------- reciprocity

struct SymmetryReport {
    std::size_t node_a = 0, node_b = 0;
    Vec3 point_a, point_b;
    std::vector<double> trace_ab;  ///< impulse at a, observed at b
    std::vector<double> trace_ba;
    double rel_difference = 0.0;
    bool pass = false;
};

/// Nearest node to p, which must be an active (non-Dirichlet) node.
inline std::size_t nearest_node(const Grid& g, Vec3 p) {
    const Vec3 q = g.to_lattice(p);
    const int i = static_cast<int>(std::lround(q.x)), j = static_cast<int>(std::lround(q.y)),
              k = static_cast<int>(std::lround(q.z));
    if (std::min({i, j, k}) < 0 || std::max({i, j, k}) >= g.extent())
        throw std::invalid_argument("nearest_node: point outside the grid");
    return g.index(i, j, k);
}

/**
 * Impulse (one node, smooth pulse of width symmetry.pulse_width) at a observed
 * at b, against the swapped experiment. Relative l2 difference of the traces.
 */
inline SymmetryReport green_symmetry_check(const RunConfig& c) {
    const Grid grid(c.geometry);
    PmlParams p = c.pml;
    const WaveSolver solver(grid, p, cfl_dt(grid, p, c.safety));
    SymmetryReport rep;
    rep.node_a = nearest_node(grid, c.symmetry_a);
    rep.node_b = nearest_node(grid, c.symmetry_b);
    rep.point_a = grid.coord(rep.node_a);
    rep.point_b = grid.coord(rep.node_b);
    for (std::size_t n : {rep.node_a, rep.node_b})
        if (grid.tag(n) != Region::Physical) throw std::invalid_argument("symmetry: points must lie in the physical region");

    SourceProfile pulse;
    pulse.t_on = 0.0;
    pulse.t_off = c.symmetry_pulse_width;
    auto temporal = [pulse](double t) { return pulse.temporal(t); };
    const long steps = static_cast<long>(std::floor(c.T_end / solver.dt() + 1e-9));
    auto trace = [&](std::size_t from, std::size_t to) {
        const Forcing F = point_forcing(grid, from, temporal);
        WaveState s = solver.initial_state();
        std::vector<double> out{s.u_curr[to]};
        for (long n = 0; n < steps; ++n) {
            solver.step(s, F);
            out.push_back(s.u_curr[to]);
        }
        return out;
    };
    rep.trace_ab = trace(rep.node_a, rep.node_b);
    rep.trace_ba = trace(rep.node_b, rep.node_a);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rep.trace_ab.size(); ++i) {
        num += (rep.trace_ab[i] - rep.trace_ba[i]) * (rep.trace_ab[i] - rep.trace_ba[i]);
        den += rep.trace_ab[i] * rep.trace_ab[i];
    }
    rep.rel_difference = den > 0.0 ? std::sqrt(num / den) : 0.0;
    rep.pass = rep.rel_difference <= c.symmetry_tolerance;
    return rep;
}

}  // namespace stochwave
