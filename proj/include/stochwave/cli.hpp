#pragma once
/**
 * @file cli.hpp
 * @brief Study dispatch for the command-line runner: runs the configured study,
 *        writes CSV and key=value artifacts into output.dir and returns the exit
 *        status (0 pass, 1 gate failed).
 */

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "studies.hpp"

namespace stochwave {

namespace cli_detail {

inline std::string yes_no(bool b) { return b ? "PASS" : "FAIL"; }

inline void write_rate_csv(const std::string& path, const std::string& hash, const RateReport& r) {
    CsvWriter csv(path, hash, {"parameter", "error", "ci"});
    for (std::size_t i = 0; i < r.params.size(); ++i) csv.row({r.params[i], r.errors[i], r.ci[i]});
}

inline void add_fit(std::map<std::string, std::string>& kv, const std::string& prefix, const RateReport& r) {
    kv[prefix + "kind"] = r.kind;
    kv[prefix + "slope"] = format_number(r.slope);
    kv[prefix + "intercept"] = format_number(r.intercept);
    kv[prefix + "residual"] = format_number(r.residual);
    kv[prefix + "slope_halfwidth"] = format_number(r.slope_halfwidth);
}

inline void write_run_artifacts(const std::string& dir, const std::string& hash, const SimulationResult& r,
                                const Grid* grid) {
    {
        std::vector<std::string> head{"step", "t"};
        for (std::size_t p = 0; p < r.probes.size(); ++p) head.push_back("probe" + std::to_string(p));
        CsvWriter csv(dir + "/probes.csv", hash, head);
        for (std::size_t n = 0; n < r.times.size(); ++n) {
            std::vector<double> row{double(n), r.times[n]};
            for (const auto& s : r.probe_series) row.push_back(s[n]);
            csv.row(row);
        }
    }
    {
        CsvWriter csv(dir + "/norms.csv", hash, {"step", "t", "physical_l2"});
        for (std::size_t n = 0; n < r.norms.size(); ++n) csv.row({double(n), r.times[n], r.norms[n]});
    }
    if (r.snapshot_every > 0 && grid) {
        CsvWriter csv(dir + "/snapshots.csv", hash, {"step", "t", "i", "j", "k", "u"});
        for (std::size_t s = 0; s < r.snapshots.size(); ++s)
            for (std::size_t q = 0; q < r.snapshot_nodes.size(); ++q) {
                const auto ijk = grid->ijk(r.snapshot_nodes[q]);
                csv.row({double(r.snapshot_steps[s]), r.snapshot_steps[s] * r.dt, double(ijk[0]), double(ijk[1]),
                         double(ijk[2]), r.snapshots[s][q]});
            }
    }
}

}  // namespace cli_detail

/// Runs the configured study and writes its artifacts. Returns 0 when every gate passes.
inline int run_study(const RunConfig& c, std::ostream& log, unsigned workers = 0) {
    using namespace cli_detail;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + c.output_dir + "': " + ec.message());
    const std::string dir = c.output_dir;
    const std::string hash = hex64(config_hash(c));
    write_text(dir + "/effective_config.txt", "# config_hash=" + hash, emit_config(c));

    std::map<std::string, std::string> meta{{"study", to_string(c.study)},
                                            {"seed", std::to_string(c.seed)},
                                            {"noise.level", std::to_string(c.noise_level)},
                                            {"noise.h0", format_number(c.noise_h0)},
                                            {"geometry.dx", format_number(c.geometry.dx)},
                                            {"geometry.R", format_number(c.geometry.R)},
                                            {"geometry.rho", format_number(c.geometry.rho)},
                                            {"geometry.obstacle_radius", format_number(c.geometry.obstacle_radius)},
                                            {"pml.sigma0", format_number(c.pml.sigma0)},
                                            {"pml.m", std::to_string(c.pml.m)},
                                            {"pml.s1", format_number(c.pml.s1)}};
    std::map<std::string, std::string> summary;
    bool pass = true;

    switch (c.study) {
        case Study::SingleRun: {
            const Grid grid(c.geometry);
            const SimulationResult r = single_run(c);
            write_run_artifacts(dir, hash, r, &grid);
            {
                std::ofstream os(dir + "/noise.csv");
                os << "# config_hash=" << hash << '\n';
                write_noise_csv(os, study_noise(c, c.noise_level, c.seed));
            }
            for (const auto& [k, v] : r.metadata) meta[k] = v;
            meta["samples"] = std::to_string(r.times.size());
            meta["snapshots"] = std::to_string(r.snapshots.size());
            summary["time_space_l2"] = format_number(time_space_l2(r));
            log << "single-run: " << r.times.size() << " samples, " << r.snapshots.size() << " snapshots\n";
            break;
        }
        case Study::OracleCheck: {
            const OracleCheckReport rep = oracle_check(c);
            {
                CsvWriter csv(dir + "/oracle.csv", hash, {"probe", "t", "solver", "oracle"});
                for (std::size_t p = 0; p < rep.oracle.size(); ++p)
                    for (std::size_t n = 0; n < rep.sim.times.size(); ++n)
                        csv.row({double(p), rep.sim.times[n], rep.sim.probe_series[p][n], rep.oracle[p][n]});
            }
            for (std::size_t p = 0; p < rep.rel_errors.size(); ++p)
                summary["rel_error.probe" + std::to_string(p)] = format_number(rep.rel_errors[p]);
            summary["rel_error.worst"] = format_number(rep.worst);
            summary["rel_error.threshold"] = format_number(c.oracle_tolerance);
            if (rep.order_done) {
                write_rate_csv(dir + "/order.csv", hash, rep.order);
                add_fit(summary, "order.", rep.order);
                summary["order.threshold"] = format_number(c.oracle_min_order);
            }
            for (const auto& [k, v] : rep.sim.metadata) meta[k] = v;
            pass = rep.pass;
            log << "oracle-check: worst relative error " << rep.worst;
            if (rep.order_done) log << ", order " << rep.order.slope;
            log << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::HRate: {
            const HRateReport rep = h_convergence_study(c, workers);
            {
                CsvWriter csv(dir + "/hrate.csv", hash, {"parameter", "error", "ci", "level", "exact"});
                for (std::size_t i = 0; i < rep.h.size(); ++i)
                    csv.row({rep.h[i], rep.mc.mean[i], rep.mc.ci_halfwidth[i], double(rep.levels[i]), rep.exact[i]});
            }
            add_fit(summary, "fit.", rep.fit);
            add_fit(summary, "exact_fit.", rep.exact_fit);
            summary["reference_level"] = std::to_string(rep.reference_level);
            summary["gate"] = "[" + format_number(c.hrate_slope_lo) + ", " + format_number(c.hrate_slope_hi) + "]";
            pass = rep.pass;
            log << "h-rate: slope " << rep.fit.slope << " +/- " << rep.slope_ci << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::PmlRate: {
            const PmlRateReport rep = pml_convergence_study(c);
            {
                CsvWriter csv(dir + "/pmlrate.csv", hash, {"parameter", "error", "ci", "sigma0", "used"});
                for (std::size_t i = 0; i < rep.x.size(); ++i)
                    csv.row({rep.x[i], rep.errors[i], 0.0, rep.sigma0[i], rep.used[i] ? 1.0 : 0.0});
            }
            summary["floor"] = format_number(rep.floor);
            summary["reference_radius"] = format_number(rep.reference_radius);
            summary["fitted"] = rep.fitted ? "true" : "false";
            if (rep.fitted) add_fit(summary, "fit.", rep.fit);
            summary["threshold"] = format_number(c.pmlrate_max_slope);
            pass = rep.pass;
            log << "pml-rate: " << (rep.fitted ? "slope " + format_number(rep.fit.slope) : "too few points above floor")
                << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::Symmetry: {
            const SymmetryReport rep = green_symmetry_check(c);
            {
                CsvWriter csv(dir + "/symmetry.csv", hash, {"step", "a_to_b", "b_to_a"});
                for (std::size_t n = 0; n < rep.trace_ab.size(); ++n)
                    csv.row({double(n), rep.trace_ab[n], rep.trace_ba[n]});
            }
            summary["rel_difference"] = format_number(rep.rel_difference);
            summary["threshold"] = format_number(c.symmetry_tolerance);
            pass = rep.pass;
            log << "symmetry: relative difference " << rep.rel_difference << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::ResolventDecay: {
            SimulationResult sim;
            const ResolventReport rep = resolvent_study(c, &sim);
            {
                CsvWriter csv(dir + "/resolvent.csv", hash, {"parameter", "error", "ci"});
                for (std::size_t i = 0; i < rep.s2.size(); ++i) csv.row({rep.s2[i], rep.magnitude[i], 0.0});
            }
            write_run_artifacts(dir, hash, sim, nullptr);
            summary["bandwidth"] = format_number(rep.bandwidth);
            summary["fitted"] = rep.fitted ? "true" : "false";
            if (rep.fitted) add_fit(summary, "fit.", rep.fit);
            summary["threshold"] = format_number(c.resolvent_max_slope);
            pass = rep.pass;
            log << "resolvent-decay: slope " << rep.fit.slope << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::LaplaceConsistency: {
            const LaplaceConsistencyReport rep = laplace_consistency(c);
            {
                CsvWriter csv(dir + "/laplace.csv", hash,
                              {"s_re", "s_im", "time_re", "time_im", "helmholtz_re", "helmholtz_im", "rel_error"});
                for (std::size_t i = 0; i < rep.s.size(); ++i)
                    csv.row({rep.s[i].real(), rep.s[i].imag(), rep.from_time[i].real(), rep.from_time[i].imag(),
                             rep.helmholtz[i].real(), rep.helmholtz[i].imag(), rep.rel_errors[i]});
            }
            double worst = 0.0;
            for (double e : rep.rel_errors) worst = std::max(worst, e);
            summary["rel_error.worst"] = format_number(worst);
            summary["threshold"] = format_number(c.laplace_tolerance);
            pass = rep.pass;
            log << "laplace-consistency: worst relative error " << worst << " -> " << yes_no(pass) << '\n';
            break;
        }
        case Study::GreenContinuity: {
            const GreenContinuityReport rep = green_continuity_study(c);
            {
                CsvWriter csv(dir + "/green.csv", hash, {"separation", "integral", "ratio"});
                for (std::size_t i = 0; i < rep.separations.size(); ++i)
                    csv.row({rep.separations[i], rep.integrals[i], rep.ratios[i]});
            }
            summary["ratio_spread"] = format_number(rep.spread);
            summary["monotone"] = rep.monotone ? "true" : "false";
            summary["threshold"] = format_number(c.green_max_ratio);
            pass = rep.pass;
            log << "green-continuity: ratio spread " << rep.spread << " -> " << yes_no(pass) << '\n';
            break;
        }
    }
    summary["status"] = yes_no(pass);
    write_key_values(dir + "/metadata.txt", hash, meta);
    write_key_values(dir + "/summary.txt", hash, summary);
    return pass ? 0 : 1;
}

/// Fit sanity on manufactured data; returns 0 when every check holds.
inline int selftest(std::ostream& log) {
    int failures = 0;
    auto check = [&](const std::string& what, bool ok, double value) {
        log << (ok ? "ok   " : "FAIL ") << what << " = " << format_number(value) << '\n';
        if (!ok) ++failures;
    };
    const std::vector<double> h{1.0, 0.5, 0.25, 0.125};
    const RateReport r1 = fit_loglog(h, h);
    check("loglog slope of err = h", std::abs(r1.slope - 1.0) < 1e-12 && r1.residual < 1e-12, r1.slope);
    std::vector<double> x{0.0, 0.25, 0.5, 0.75, 1.0}, e;
    for (double v : x) e.push_back(std::exp(-v));
    const RateReport r2 = fit_loglinear(x, e);
    check("loglinear slope of err = exp(-x)", std::abs(r2.slope + 1.0) < 1e-12 && r2.residual < 1e-12, r2.slope);
    const McEstimate m = mc_expectation([](std::uint64_t) { return 3.5; }, 16, 0, 1);
    check("constant runner mean", m.mean == 3.5 && m.ci_halfwidth == 0.0, m.mean);
    RunConfig c;
    c.hrate_manufactured = true;
    const HRateReport hr = h_convergence_study(c);
    check("manufactured h-rate slope", std::abs(hr.fit.slope - 1.0) < 1e-12, hr.fit.slope);
    return failures == 0 ? 0 : 1;
}

}  // namespace stochwave
