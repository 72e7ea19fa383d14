#pragma once
/**
 * @file config.hpp
 * @brief Run configuration: a flat "key = value" text format, validation with
 *        field-named messages, and a canonical effective-config emitter whose
 *        output re-parses to the identical configuration.
 */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "pml.hpp"
#include "quadrature.hpp"
#include "source.hpp"

namespace stochwave {

enum class Study { SingleRun, OracleCheck, HRate, PmlRate, Symmetry, ResolventDecay, LaplaceConsistency, GreenContinuity };

inline const char* to_string(Study s) {
    switch (s) {
        case Study::SingleRun: return "single-run";
        case Study::OracleCheck: return "oracle-check";
        case Study::HRate: return "h-rate";
        case Study::PmlRate: return "pml-rate";
        case Study::Symmetry: return "symmetry";
        case Study::ResolventDecay: return "resolvent-decay";
        case Study::LaplaceConsistency: return "laplace-consistency";
        case Study::GreenContinuity: return "green-continuity";
    }
    return "?";
}

inline Study parse_study(const std::string& v) {
    for (Study s : {Study::SingleRun, Study::OracleCheck, Study::HRate, Study::PmlRate, Study::Symmetry,
                    Study::ResolventDecay, Study::LaplaceConsistency, Study::GreenContinuity})
        if (v == to_string(s)) return s;
    throw std::invalid_argument("study: unknown study '" + v + "'");
}

struct RunConfig {
    GridSpec geometry;
    PmlParams pml{1.0, 2.0, 0.0, 2, 0.5};  ///< R and rho are copied from geometry
    bool s1_set = false;     ///< false: pml.s1 defaults to 1/run.T_end
    SourceProfile source{Box{{-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}}, 0.0, 1.0, 1.0};
    double noise_h0 = 0.5;
    int noise_level = 1;
    std::uint64_t seed = 1;
    Study study = Study::SingleRun;
    int mc_samples = 64;
    double T_end = 2.0;
    double safety = 0.9;
    std::vector<Vec3> probes;
    int snapshot_every = 0;
    QuadratureSpec quadrature{2, 3, 3};
    std::string output_dir = "out";

    // oracle-check
    std::vector<double> oracle_order_dx;  ///< empty: skip the order study
    int oracle_order_level = 0;
    double oracle_tolerance = 0.05;
    double oracle_min_order = 1.8;
    // h-rate
    int hrate_level_min = 0;
    int hrate_level_max = 3;
    int hrate_reference_offset = 2;
    int hrate_points = 512;
    std::uint64_t hrate_point_seed = 2024;
    bool hrate_manufactured = false;
    double hrate_slope_lo = 0.7;
    double hrate_slope_hi = 1.3;
    // pml-rate
    std::vector<double> pmlrate_sigma0;
    double pmlrate_max_slope = -0.5;
    int pmlrate_min_points = 4;
    // symmetry
    Vec3 symmetry_a{0.3, 0.0, 0.0};
    Vec3 symmetry_b{-0.2, 0.4, 0.1};
    double symmetry_pulse_width = 0.4;
    double symmetry_tolerance = 1e-6;
    // resolvent-decay
    double resolvent_s1 = 0.5;
    double resolvent_factor_min = 2.0;
    double resolvent_factor_max = 8.0;
    int resolvent_points = 16;
    double resolvent_max_slope = -4.0;
    // laplace-consistency
    std::vector<double> laplace_s2{0.0, 2.0, 5.0};
    double laplace_dt = 0.01;
    double laplace_tolerance = 1e-3;
    // green-continuity
    std::vector<double> green_separations{0.2, 0.1, 0.05, 0.025, 0.0125};
    Vec3 green_midpoint{0.1, 0.05, 0.0};
    double green_s = 1.0;
    double green_max_ratio = 3.0;

    double s1() const { return pml.s1; }
    Box support() const { return source.box; }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    }
    if (trim(v.substr(pos)) != "") throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    if (!std::isfinite(d)) throw std::invalid_argument(key + ": must be finite");
    return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": value out of range");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

inline Vec3 to_vec(const std::string& key, const std::string& v) {
    const auto l = to_list(key, v);
    if (l.size() != 3) throw std::invalid_argument(key + ": expected three comma-separated numbers");
    return {l[0], l[1], l[2]};
}

inline std::vector<Vec3> to_points(const std::string& key, const std::string& v) {
    std::vector<Vec3> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_vec(key, item));
    }
    return out;
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string vec(Vec3 v) { return num(v.x) + "," + num(v.y) + "," + num(v.z); }

inline std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

inline std::string points(const std::vector<Vec3>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + vec(v[i]);
    return s;
}

}  // namespace config_detail

/// Cross-field validation; messages name the offending key.
inline void validate(const RunConfig& c) {
    c.geometry.validate();
    c.pml.validate();
    c.source.validate();
    c.quadrature.validate();
    if (!(c.T_end >= 0.0)) throw std::invalid_argument("run.T_end: must be >= 0");
    if (!(c.safety > 0.0 && c.safety < 1.0)) throw std::invalid_argument("run.safety: must lie in (0, 1)");
    if (c.T_end > 0.0 && !(c.source.t_off < c.T_end))
        throw std::invalid_argument("source.t_off: must be < run.T_end");
    if (c.snapshot_every < 0) throw std::invalid_argument("run.snapshot_every: must be >= 0");
    if (c.mc_samples < 2) throw std::invalid_argument("mc.samples: must be >= 2");
    if (!(c.noise_h0 > 0.0)) throw std::invalid_argument("noise.h0: must be > 0");
    if (c.noise_level < 0) throw std::invalid_argument("noise.level: must be >= 0");
    try {
        (void)cell_partition(c.source.box, 0, c.noise_h0, c.geometry);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("source.box: ") + e.what());
    }
    for (const Vec3& p : c.probes) {
        const double r = distance(p, c.geometry.center);
        if (!(r < c.geometry.R) || (c.geometry.obstacle_radius > 0.0 && r <= c.geometry.obstacle_radius))
            throw std::invalid_argument("run.probes: every probe must lie in the physical region");
    }
    if (c.hrate_level_max - c.hrate_level_min + 1 < 3)
        throw std::invalid_argument("hrate.level_max: the study needs at least 3 levels");
    if (c.hrate_level_min < 0) throw std::invalid_argument("hrate.level_min: must be >= 0");
    if (c.hrate_reference_offset < 1) throw std::invalid_argument("hrate.reference_offset: must be >= 1");
    if (c.hrate_points < 1) throw std::invalid_argument("hrate.points: must be >= 1");
    if (c.resolvent_points < 3) throw std::invalid_argument("resolvent.points: must be >= 3");
    if (!(c.resolvent_factor_max > c.resolvent_factor_min && c.resolvent_factor_min > 0.0))
        throw std::invalid_argument("resolvent.factor_max: must exceed resolvent.factor_min > 0");
    if (!(c.resolvent_s1 > 0.0)) throw std::invalid_argument("resolvent.s1: must be > 0");
    if (!(c.laplace_dt > 0.0)) throw std::invalid_argument("laplace.dt: must be > 0");
    if (!(c.symmetry_pulse_width > 0.0)) throw std::invalid_argument("symmetry.pulse_width: must be > 0");
    for (double d : c.oracle_order_dx)
        if (!(d > 0.0)) throw std::invalid_argument("oracle.order_dx: entries must be > 0");
    for (double s : c.pmlrate_sigma0)
        if (!(s >= 0.0)) throw std::invalid_argument("pmlrate.sigma0: entries must be >= 0");
}

/// Parses "key = value" text. Unknown keys, malformed values and invalid combinations are rejected.
inline RunConfig parse_config_text(const std::string& text) {
    using namespace config_detail;
    RunConfig c;
    c.probes.clear();
    std::map<std::string, std::string> kv;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (kv.count(key)) throw std::invalid_argument(key + ": given more than once");
        kv[key] = trim(line.substr(eq + 1));
    }

    for (const auto& [k, v] : kv) {
        if (k == "geometry.R") c.geometry.R = to_double(k, v);
        else if (k == "geometry.rho") c.geometry.rho = to_double(k, v);
        else if (k == "geometry.obstacle_radius") c.geometry.obstacle_radius = to_double(k, v);
        else if (k == "geometry.dx") c.geometry.dx = to_double(k, v);
        else if (k == "geometry.center") c.geometry.center = to_vec(k, v);
        else if (k == "pml.sigma0") c.pml.sigma0 = to_double(k, v);
        else if (k == "pml.m") c.pml.m = static_cast<int>(to_int(k, v));
        else if (k == "pml.s1") { c.pml.s1 = to_double(k, v); c.s1_set = true; }
        else if (k == "source.box_lo") c.source.box.lo = to_vec(k, v);
        else if (k == "source.box_hi") c.source.box.hi = to_vec(k, v);
        else if (k == "source.t_on") c.source.t_on = to_double(k, v);
        else if (k == "source.t_off") c.source.t_off = to_double(k, v);
        else if (k == "source.amplitude") c.source.amplitude = to_double(k, v);
        else if (k == "noise.h0") c.noise_h0 = to_double(k, v);
        else if (k == "noise.level") c.noise_level = static_cast<int>(to_int(k, v));
        else if (k == "noise.seed") c.seed = to_u64(k, v);
        else if (k == "study") c.study = parse_study(v);
        else if (k == "mc.samples") c.mc_samples = static_cast<int>(to_int(k, v));
        else if (k == "run.T_end") c.T_end = to_double(k, v);
        else if (k == "run.safety") c.safety = to_double(k, v);
        else if (k == "run.probes") c.probes = to_points(k, v);
        else if (k == "run.snapshot_every") c.snapshot_every = static_cast<int>(to_int(k, v));
        else if (k == "quadrature.subdivisions") c.quadrature.subdivisions = static_cast<int>(to_int(k, v));
        else if (k == "quadrature.gauss_order") c.quadrature.gauss_order = static_cast<int>(to_int(k, v));
        else if (k == "quadrature.singular_depth") c.quadrature.singular_depth = static_cast<int>(to_int(k, v));
        else if (k == "output.dir") c.output_dir = v;
        else if (k == "oracle.order_dx") c.oracle_order_dx = to_list(k, v);
        else if (k == "oracle.order_level") c.oracle_order_level = static_cast<int>(to_int(k, v));
        else if (k == "oracle.tolerance") c.oracle_tolerance = to_double(k, v);
        else if (k == "oracle.min_order") c.oracle_min_order = to_double(k, v);
        else if (k == "hrate.level_min") c.hrate_level_min = static_cast<int>(to_int(k, v));
        else if (k == "hrate.level_max") c.hrate_level_max = static_cast<int>(to_int(k, v));
        else if (k == "hrate.reference_offset") c.hrate_reference_offset = static_cast<int>(to_int(k, v));
        else if (k == "hrate.points") c.hrate_points = static_cast<int>(to_int(k, v));
        else if (k == "hrate.point_seed") c.hrate_point_seed = to_u64(k, v);
        else if (k == "hrate.manufactured") c.hrate_manufactured = to_bool(k, v);
        else if (k == "hrate.slope_lo") c.hrate_slope_lo = to_double(k, v);
        else if (k == "hrate.slope_hi") c.hrate_slope_hi = to_double(k, v);
        else if (k == "pmlrate.sigma0") c.pmlrate_sigma0 = to_list(k, v);
        else if (k == "pmlrate.max_slope") c.pmlrate_max_slope = to_double(k, v);
        else if (k == "pmlrate.min_points") c.pmlrate_min_points = static_cast<int>(to_int(k, v));
        else if (k == "symmetry.a") c.symmetry_a = to_vec(k, v);
        else if (k == "symmetry.b") c.symmetry_b = to_vec(k, v);
        else if (k == "symmetry.pulse_width") c.symmetry_pulse_width = to_double(k, v);
        else if (k == "symmetry.tolerance") c.symmetry_tolerance = to_double(k, v);
        else if (k == "resolvent.s1") c.resolvent_s1 = to_double(k, v);
        else if (k == "resolvent.factor_min") c.resolvent_factor_min = to_double(k, v);
        else if (k == "resolvent.factor_max") c.resolvent_factor_max = to_double(k, v);
        else if (k == "resolvent.points") c.resolvent_points = static_cast<int>(to_int(k, v));
        else if (k == "resolvent.max_slope") c.resolvent_max_slope = to_double(k, v);
        else if (k == "laplace.s2") c.laplace_s2 = to_list(k, v);
        else if (k == "laplace.dt") c.laplace_dt = to_double(k, v);
        else if (k == "laplace.tolerance") c.laplace_tolerance = to_double(k, v);
        else if (k == "green.separations") c.green_separations = to_list(k, v);
        else if (k == "green.midpoint") c.green_midpoint = to_vec(k, v);
        else if (k == "green.s") c.green_s = to_double(k, v);
        else if (k == "green.max_ratio") c.green_max_ratio = to_double(k, v);
        else throw std::invalid_argument(k + ": unknown key");
    }

    c.pml.R = c.geometry.R;
    c.pml.rho = c.geometry.rho;
    if (!c.s1_set) c.pml.s1 = c.T_end > 0.0 ? 1.0 / c.T_end : 1.0;
    validate(c);
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical text of every key, including defaults. parse_config_text(emit_config(c)) reproduces c.
inline std::string emit_config(const RunConfig& c) {
    using namespace config_detail;
    std::string o;
    auto put = [&o](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    put("study", to_string(c.study));
    put("geometry.R", num(c.geometry.R));
    put("geometry.rho", num(c.geometry.rho));
    put("geometry.obstacle_radius", num(c.geometry.obstacle_radius));
    put("geometry.dx", num(c.geometry.dx));
    put("geometry.center", vec(c.geometry.center));
    put("pml.sigma0", num(c.pml.sigma0));
    put("pml.m", std::to_string(c.pml.m));
    put("pml.s1", num(c.pml.s1));
    put("source.box_lo", vec(c.source.box.lo));
    put("source.box_hi", vec(c.source.box.hi));
    put("source.t_on", num(c.source.t_on));
    put("source.t_off", num(c.source.t_off));
    put("source.amplitude", num(c.source.amplitude));
    put("noise.h0", num(c.noise_h0));
    put("noise.level", std::to_string(c.noise_level));
    put("noise.seed", std::to_string(c.seed));
    put("mc.samples", std::to_string(c.mc_samples));
    put("run.T_end", num(c.T_end));
    put("run.safety", num(c.safety));
    put("run.probes", points(c.probes));
    put("run.snapshot_every", std::to_string(c.snapshot_every));
    put("quadrature.subdivisions", std::to_string(c.quadrature.subdivisions));
    put("quadrature.gauss_order", std::to_string(c.quadrature.gauss_order));
    put("quadrature.singular_depth", std::to_string(c.quadrature.singular_depth));
    put("output.dir", c.output_dir);
    put("oracle.order_dx", list(c.oracle_order_dx));
    put("oracle.order_level", std::to_string(c.oracle_order_level));
    put("oracle.tolerance", num(c.oracle_tolerance));
    put("oracle.min_order", num(c.oracle_min_order));
    put("hrate.level_min", std::to_string(c.hrate_level_min));
    put("hrate.level_max", std::to_string(c.hrate_level_max));
    put("hrate.reference_offset", std::to_string(c.hrate_reference_offset));
    put("hrate.points", std::to_string(c.hrate_points));
    put("hrate.point_seed", std::to_string(c.hrate_point_seed));
    put("hrate.manufactured", c.hrate_manufactured ? "true" : "false");
    put("hrate.slope_lo", num(c.hrate_slope_lo));
    put("hrate.slope_hi", num(c.hrate_slope_hi));
    put("pmlrate.sigma0", list(c.pmlrate_sigma0));
    put("pmlrate.max_slope", num(c.pmlrate_max_slope));
    put("pmlrate.min_points", std::to_string(c.pmlrate_min_points));
    put("symmetry.a", vec(c.symmetry_a));
    put("symmetry.b", vec(c.symmetry_b));
    put("symmetry.pulse_width", num(c.symmetry_pulse_width));
    put("symmetry.tolerance", num(c.symmetry_tolerance));
    put("resolvent.s1", num(c.resolvent_s1));
    put("resolvent.factor_min", num(c.resolvent_factor_min));
    put("resolvent.factor_max", num(c.resolvent_factor_max));
    put("resolvent.points", std::to_string(c.resolvent_points));
    put("resolvent.max_slope", num(c.resolvent_max_slope));
    put("laplace.s2", list(c.laplace_s2));
    put("laplace.dt", num(c.laplace_dt));
    put("laplace.tolerance", num(c.laplace_tolerance));
    put("green.separations", list(c.green_separations));
    put("green.midpoint", vec(c.green_midpoint));
    put("green.s", num(c.green_s));
    put("green.max_ratio", num(c.green_max_ratio));
    return o;
}

/// FNV-1a over the canonical effective configuration; the output directory is excluded.
inline std::uint64_t config_hash(const RunConfig& c) {
    RunConfig canon = c;
    canon.output_dir.clear();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : emit_config(canon)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace stochwave
