#include <gtest/gtest.h>

#include <cmath>

#include "stochwave/analysis.hpp"
#include "stochwave/montecarlo.hpp"
#include "stochwave/studies.hpp"

using namespace stochwave;

namespace {
GridSpec small_grid() {
    GridSpec g;
    g.R = 1.0;
    g.rho = 1.5;
    g.dx = 0.125;
    return g;
}

SimulationResult noisy_run(const GridSpec& g, std::uint64_t seed, int every, double T = 1.2) {
    PmlParams p;
    p.R = g.R;
    p.rho = g.rho;
    p.sigma0 = 1.0;
    p.s1 = 0.5;
    SourceProfile src;
    src.box = Box{{-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}};
    src.t_off = 0.8;
    const NoiseField w = sample_noise(cell_partition(src.box, 1, 0.5, g), seed);
    RunOptions opt;
    opt.T_end = T;
    opt.snapshot_every = every;
    return simulate(g, p, 0.9, w, src, opt);
}
}  // namespace

TEST(Norms, SpaceAndTime) {
    const Grid g(small_grid());
    std::vector<double> ones(g.size(), 1.0);
    const double n = space_l2(ones, g);
    EXPECT_NEAR(n * n, g.count(Region::Physical) * std::pow(g.dx(), 3), 1e-12);
    EXPECT_EQ(space_l2(std::vector<double>(g.size(), 0.0), g), 0.0);
    // int_0^1 t^2 dt = 1/3 (trapezoid error is O(dt^2))
    std::vector<double> t, v;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(i * 1e-3);
        v.push_back(i * 1e-3);
    }
    EXPECT_NEAR(trapezoid_l2(t, v), std::sqrt(1.0 / 3.0), 1e-6);
}

TEST(LaplaceTrace, Exponential) {
    const double dt = 1e-3;
    std::vector<double> s;
    for (int n = 0; n * dt <= 30.0; ++n) s.push_back(std::exp(-n * dt));
    EXPECT_NEAR(laplace_trace(s, dt, 1.0).real(), 0.5, 1e-6);
    const cplx z = laplace_trace(s, dt, cplx(1.0, 2.0));
    const cplx expect = 1.0 / cplx(2.0, 2.0);
    EXPECT_NEAR(std::abs(z - expect), 0.0, 1e-6);
}

TEST(LaplaceTrace, Guards) {
    std::vector<double> flat(101, 1.0);
    EXPECT_THROW(laplace_trace(flat, 0.01, 0.5), std::domain_error);  // e^{-0.5} tail is far from negligible
    EXPECT_NO_THROW(laplace_trace(flat, 0.01, 0.5, 0.0));
    EXPECT_THROW(laplace_trace(flat, 0.01, 0.0), std::invalid_argument);
    EXPECT_THROW(laplace_trace(flat, 0.01, cplx(-1.0, 1.0)), std::invalid_argument);
    EXPECT_EQ(laplace_trace({}, 0.01, 1.0), cplx(0.0, 0.0));
    EXPECT_EQ(laplace_trace(std::vector<double>(50, 0.0), 0.01, cplx(0.5, 7.0)), cplx(0.0, 0.0));
}

TEST(ErrorBetween, Pseudometric) {
    const GridSpec g = small_grid();
    const SimulationResult a = noisy_run(g, 1, 4), b = noisy_run(g, 2, 4), c = noisy_run(g, 3, 4);
    EXPECT_EQ(error_between(a, a), 0.0);
    const double ab = error_between(a, b), ba = error_between(b, a);
    EXPECT_GT(ab, 0.0);
    EXPECT_NEAR(ab, ba, 1e-14 * ab);
    EXPECT_LE(ab, error_between(a, c) + error_between(c, b) + 1e-14);
}

TEST(ErrorBetween, SnapshotSubsetsAndMismatch) {
    const GridSpec g = small_grid();
    const SimulationResult every4 = noisy_run(g, 1, 4), every8 = noisy_run(g, 1, 8), every3 = noisy_run(g, 1, 3);
    // a's times are a subset of b's, and the data agree there
    EXPECT_EQ(error_between(every8, every4), 0.0);
    EXPECT_THROW(error_between(every4, every8), std::invalid_argument);
    EXPECT_THROW(error_between(every4, every3), std::invalid_argument);
    const SimulationResult none = noisy_run(g, 1, 0);
    EXPECT_THROW(error_between(none, every4), std::invalid_argument);
}

TEST(ErrorBetween, ResamplesFinerGrid) {
    // fields linear in space are interpolated exactly
    GridSpec gc = small_grid();
    GridSpec gf = gc;
    gf.dx = gc.dx / 2;
    const Grid coarse(gc), fine(gf);
    auto make = [](const Grid& g, double scale) {
        SimulationResult r;
        r.grid = g.spec();
        r.extent = g.extent();
        r.dt = 0.1;
        r.snapshot_every = 1;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (norm(g.coord(i)) < g.spec().R + 2 * g.dx()) r.snapshot_nodes.push_back(i);
        for (int k = 1; k <= 3; ++k) {
            std::vector<double> s;
            for (std::size_t i : r.snapshot_nodes) {
                const Vec3 x = g.coord(i);
                s.push_back(scale * k * (1.0 + x.x - 2.0 * x.z));
            }
            r.snapshots.push_back(s);
            r.snapshot_steps.push_back(k);
        }
        return r;
    };
    EXPECT_NEAR(error_between(make(coarse, 1.0), make(fine, 1.0)), 0.0, 1e-13);
    EXPECT_GT(error_between(make(coarse, 1.0), make(fine, 1.1)), 0.0);
}

TEST(Fits, ManufacturedSlopes) {
    const std::vector<double> h{1.0, 0.5, 0.25, 0.125};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * x);
    const RateReport r = fit_loglog(h, e);
    EXPECT_NEAR(r.slope, 1.0, 1e-12);
    EXPECT_NEAR(r.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(r.residual, 0.0, 1e-12);

    const std::vector<double> x{0.0, 0.5, 1.0, 1.5};
    std::vector<double> d;
    for (double v : x) d.push_back(std::exp(-v));
    EXPECT_NEAR(fit_loglinear(x, d).slope, -1.0, 1e-12);

    EXPECT_THROW(fit_loglog({1.0, 0.5}, {1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(fit_loglog({1.0, 0.5, 0.25}, {1.0, 0.0, 0.5}), std::invalid_argument);
}

TEST(Fits, SlopeHalfwidthGrowsWithScatter) {
    const std::vector<double> h{1.0, 0.5, 0.25, 0.125, 0.0625};
    const std::vector<double> e{1.0, 0.55, 0.24, 0.13, 0.06};
    const RateReport r = fit_loglog(h, e);
    EXPECT_GT(r.slope_halfwidth, 0.0);
    EXPECT_NEAR(r.slope, 1.0, 0.1);
}

TEST(MonteCarlo, ConstantAndLinearRunners) {
    const McEstimate c = mc_expectation([](std::uint64_t) { return 2.5; }, 10, 0, 1);
    EXPECT_EQ(c.mean, 2.5);
    EXPECT_EQ(c.ci_halfwidth, 0.0);
    const McEstimate l = mc_expectation([](std::uint64_t s) { return double(s); }, 5, 10, 1);
    EXPECT_DOUBLE_EQ(l.mean, 12.0);
    // sd of {10..14} is sqrt(2.5)
    EXPECT_NEAR(l.ci_halfwidth, 1.96 * std::sqrt(2.5) / std::sqrt(5.0), 1e-12);
    EXPECT_THROW(mc_expectation([](std::uint64_t) { return 0.0; }, 1, 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
    auto runner = [](std::uint64_t s) {
        double acc = 0.0;
        for (int i = 0; i < 100; ++i) acc += rng::normal(s, 0, i) * 1e-3;
        return acc;
    };
    const McEstimate a = mc_expectation(runner, 64, 100, 1);
    const McEstimate b = mc_expectation(runner, 64, 100, 4);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.ci_halfwidth, b.ci_halfwidth);
}

TEST(MonteCarlo, PropagatesErrors) {
    auto bad = [](std::uint64_t s) -> double {
        if (s == 7) throw std::runtime_error("boom");
        return 0.0;
    };
    EXPECT_THROW(mc_expectation(bad, 16, 0, 3), std::runtime_error);
}

TEST(HRate, ManufacturedSlopeIsOne) {
    RunConfig c;
    c.hrate_manufactured = true;
    c.mc_samples = 8;
    const HRateReport r = h_convergence_study(c, 1);
    EXPECT_NEAR(r.fit.slope, 1.0, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(PmlRate, FloorAndFit) {
    const GridSpec g = small_grid();
    const SimulationResult ref = noisy_run(g, 1, 4);
    // manufactured runs: reference scaled by (1 + e^{-x}) perturbation
    std::vector<double> sigma{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<SimulationResult> runs;
    for (double s : sigma) {
        SimulationResult r = ref;
        for (auto& snap : r.snapshots)
            for (double& v : snap) v *= 1.0 + std::exp(-0.5 * s * 0.5);
        runs.push_back(r);
    }
    const double base = error_between(ref, runs[0]);
    const PmlRateReport rep = pml_rate_from_runs(ref, base * 1e-3, sigma, runs, 0.5, -0.5, 4);
    ASSERT_TRUE(rep.fitted);
    EXPECT_NEAR(rep.fit.slope, -1.0, 1e-10);
    EXPECT_TRUE(rep.pass);
    // with a floor above most errors there are too few points to fit
    const PmlRateReport starved = pml_rate_from_runs(ref, base, sigma, runs, 0.5, -0.5, 4);
    EXPECT_FALSE(starved.fitted);
    EXPECT_FALSE(starved.pass);
    SimulationResult empty = ref;
    empty.snapshots.clear();
    EXPECT_THROW(pml_rate_from_runs(empty, 0.0, sigma, runs, 0.5, -0.5, 4), std::invalid_argument);
}

TEST(Resolvent, ZeroAndSmoothSeries) {
    const ResolventReport z = resolvent_decay_check(std::vector<double>(200, 0.0), 0.01, 0.5, {4, 8, 16});
    EXPECT_FALSE(z.fitted);
    EXPECT_FALSE(z.pass);
    // a smooth bump has a transform decaying faster than any power
    SourceProfile p;
    p.t_on = 0.0;
    p.t_off = 1.0;
    std::vector<double> s;
    const double dt = 1e-3;
    for (int n = 0; n * dt <= 3.0; ++n) s.push_back(p.temporal(n * dt));
    const ResolventReport r = resolvent_decay_check(s, dt, 0.5, log_space(10.0, 40.0, 8), -4.0);
    ASSERT_TRUE(r.fitted);
    EXPECT_LT(r.fit.slope, -4.0);
    EXPECT_TRUE(r.pass);
}

TEST(Studies, CausalRadiusCoversReach) {
    // reference boundary signal cannot return to B_R + 2dx before T
    const double rad = causal_radius(3.0, 0.0, 0.433, 1.1, 0.05);
    EXPECT_GE(2.0 * rad - 0.433 - 1.1, 3.0);
}
