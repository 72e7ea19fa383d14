#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stochwave/analysis.hpp"
#include "stochwave/solver.hpp"

using namespace stochwave;

namespace {
GridSpec small_grid(double obstacle = 0.0) {
    GridSpec g;
    g.R = 1.0;
    g.rho = 1.5;
    g.dx = 0.125;
    g.obstacle_radius = obstacle;
    return g;
}

PmlParams pml_for(const GridSpec& g, double sigma0) {
    PmlParams p;
    p.R = g.R;
    p.rho = g.rho;
    p.sigma0 = sigma0;
    p.m = 2;
    p.s1 = 0.5;
    return p;
}

SourceProfile source() {
    SourceProfile s;
    s.box = Box{{-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}};
    s.t_off = 0.8;
    return s;
}

WaveSolver make_solver(const GridSpec& g, double sigma0) {
    const Grid grid(g);
    const PmlParams p = pml_for(g, sigma0);
    return WaveSolver(grid, p, cfl_dt(grid, p, 0.9));
}

Forcing noisy_forcing(const WaveSolver& s, std::uint64_t seed) {
    const SourceProfile src = source();
    const CellPartition part = cell_partition(src.box, 1, 0.5, s.grid().spec());
    return noise_forcing(s.grid(), sample_noise(part, seed), src);
}

std::vector<double> pseudo_random_field(const Grid& g, std::uint64_t seed) {
    std::vector<double> u(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.is_dirichlet(i)) u[i] = rng::normal(seed, 9, i);
    return u;
}
}  // namespace

TEST(WaveSolver, ZeroForcingStaysZero) {
    const WaveSolver s = make_solver(small_grid(), 1.0);
    Forcing none;
    const SimulationResult r = run(s, none, RunOptions{1.0, {{0.3, 0, 0}}, 2, true});
    for (double v : r.probe_series[0]) EXPECT_EQ(v, 0.0);
    for (double v : r.norms) EXPECT_EQ(v, 0.0);
}

TEST(WaveSolver, DirichletNodesStayZero) {
    const WaveSolver s = make_solver(small_grid(0.3), 1.0);
    const Forcing f = [&] {
        SourceProfile src;
        src.box = Box{{0.375, -0.125, -0.125}, {0.625, 0.125, 0.125}};
        src.t_off = 0.8;
        const CellPartition part = cell_partition(src.box, 0, 0.25, s.grid().spec());
        return noise_forcing(s.grid(), sample_noise(part, 4), src);
    }();
    WaveState st = s.initial_state();
    for (int n = 0; n < 60; ++n) s.step(st, f);
    double interior = 0.0;
    for (std::size_t i = 0; i < s.grid().size(); ++i) {
        if (s.grid().is_dirichlet(i)) {
            ASSERT_EQ(st.u_curr[i], 0.0);
        } else {
            interior = std::max(interior, std::abs(st.u_curr[i]));
        }
    }
    EXPECT_GT(interior, 0.0);
}

TEST(WaveSolver, RejectsCflViolation) {
    const Grid g(small_grid());
    const PmlParams p = pml_for(small_grid(), 0.0);
    EXPECT_THROW(WaveSolver(g, p, g.dx() / std::sqrt(3.0)), std::invalid_argument);
    EXPECT_THROW(WaveSolver(g, p, 0.0), std::invalid_argument);
    PmlParams bad = p;
    bad.rho = 1.7;
    EXPECT_THROW(WaveSolver(g, bad, 0.01), std::invalid_argument);
}

TEST(WaveSolver, OperatorIsSymmetricAndNonPositive) {
    const WaveSolver s = make_solver(small_grid(0.2), 2.0);
    EXPECT_GT(s.anisotropic_cell_count(), 0u);
    const auto u = pseudo_random_field(s.grid(), 1), v = pseudo_random_field(s.grid(), 2);
    std::vector<double> lu, lv;
    s.apply_operator(u, lu);
    s.apply_operator(v, lv);
    const double a = std::inner_product(v.begin(), v.end(), lu.begin(), 0.0);
    const double b = std::inner_product(u.begin(), u.end(), lv.begin(), 0.0);
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    EXPECT_LT(std::inner_product(u.begin(), u.end(), lu.begin(), 0.0), 0.0);
}

TEST(WaveSolver, EnergyConservedAfterSourceSwitchesOff) {
    for (double sigma0 : {0.0, 2.0}) {
        const WaveSolver s = make_solver(small_grid(), sigma0);
        const Forcing f = noisy_forcing(s, 7);
        WaveState st = s.initial_state();
        while (st.t <= source().t_off + s.dt()) s.step(st, f);
        const double e0 = s.energy(st);
        ASSERT_GT(e0, 0.0);
        double worst = 0.0;
        const Forcing none;
        for (int n = 0; n < 200; ++n) {
            s.step(st, none);
            worst = std::max(worst, std::abs(s.energy(st) - e0));
        }
        EXPECT_LE(worst / e0, 1e-10) << "sigma0=" << sigma0;
    }
}

TEST(WaveSolver, MirrorSymmetry) {
    const WaveSolver s = make_solver(small_grid(), 1.0);
    const SourceProfile src = source();
    const CellPartition part = cell_partition(src.box, 1, 0.5, s.grid().spec());
    const Forcing f = noise_forcing(s.grid(), constant_noise(part, 1.0), src);
    WaveState st = s.initial_state();
    for (int n = 0; n < 80; ++n) s.step(st, f);
    const Grid& g = s.grid();
    const int e = g.extent();
    double peak = 0.0, diff = 0.0;
    for (int i = 0; i < e; ++i)
        for (int j = 0; j < e; ++j)
            for (int k = 0; k < e; ++k) {
                const double u = st.u_curr[g.index(i, j, k)];
                peak = std::max(peak, std::abs(u));
                diff = std::max(diff, std::abs(u - st.u_curr[g.index(e - 1 - i, j, k)]));
                diff = std::max(diff, std::abs(u - st.u_curr[g.index(j, i, k)]));
                diff = std::max(diff, std::abs(u - st.u_curr[g.index(i, k, j)]));
            }
    ASSERT_GT(peak, 0.0);
    EXPECT_LE(diff, 1e-12 * peak);
}

TEST(WaveSolver, NoiseForcingIntegratesSource) {
    // sum of nodal weights * dx^3 equals int g W exactly for a constant noise field
    const WaveSolver s = make_solver(small_grid(), 0.0);
    const SourceProfile src = source();
    const CellPartition part = cell_partition(src.box, 1, 0.5, s.grid().spec());
    const Forcing f = noise_forcing(s.grid(), constant_noise(part, 1.0), src);
    const double total = std::accumulate(f.weights.begin(), f.weights.end(), 0.0) * std::pow(s.grid().dx(), 3);
    const double expect = src.spatial_box_integral(src.box) / std::sqrt(part.cell_volume());
    EXPECT_NEAR(total, expect, 1e-12 * expect);
}

TEST(Run, EmptyHorizon) {
    const WaveSolver s = make_solver(small_grid(), 1.0);
    const SimulationResult r = run(s, noisy_forcing(s, 1), RunOptions{0.0, {{0.2, 0, 0}}, 1, true});
    EXPECT_TRUE(r.times.empty());
    EXPECT_TRUE(r.probe_series[0].empty());
    EXPECT_TRUE(r.snapshots.empty());
}

TEST(Run, SeriesLengthAndSnapshots) {
    const WaveSolver s = make_solver(small_grid(), 1.0);
    const double T = 1.0;
    const SimulationResult r = run(s, noisy_forcing(s, 1), RunOptions{T, {{0.2, 0, 0}}, 4, true});
    const std::size_t n = static_cast<std::size_t>(std::floor(T / s.dt())) + 1;
    EXPECT_EQ(r.times.size(), n);
    EXPECT_EQ(r.probe_series[0].size(), n);
    EXPECT_EQ(r.norms.size(), n);
    EXPECT_EQ(r.times.front(), 0.0);
    EXPECT_EQ(r.snapshots.size(), (n - 1) / 4);
    for (long step : r.snapshot_steps) EXPECT_EQ(step % 4, 0);

    const SimulationResult half = run(s, noisy_forcing(s, 1), RunOptions{T, {{0.2, 0, 0}}, 8, true});
    EXPECT_EQ(half.snapshots.size(), (n - 1) / 8);
    // same seed, same trajectory
    EXPECT_EQ(half.probe_series, r.probe_series);
    EXPECT_THROW(run(s, noisy_forcing(s, 1), RunOptions{T, {{1.2, 0, 0}}, 0, true}), std::invalid_argument);
}

TEST(Run, PmlDampsLateTimeNorm) {
    GridSpec g = small_grid();
    g.rho = 2.0;
    const WaveSolver damped = make_solver(g, 4.0), bare = make_solver(g, 0.0);
    const RunOptions opt{4.0, {}, 0, true};
    const SimulationResult a = run(damped, noisy_forcing(damped, 3), opt);
    const SimulationResult b = run(bare, noisy_forcing(bare, 3), opt);
    auto late = [](const SimulationResult& r) {
        double m = 0.0;
        for (std::size_t i = r.norms.size() * 3 / 4; i < r.norms.size(); ++i) m = std::max(m, r.norms[i]);
        return m;
    };
    EXPECT_LT(late(a), late(b));
}

TEST(ProbeStencil, InterpolatesLinearFields) {
    const Grid g(small_grid());
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 x = g.coord(i);
        u[i] = 1.0 + 2.0 * x.x - x.y + 0.5 * x.z;
    }
    const Vec3 p{0.31, -0.17, 0.44};
    EXPECT_NEAR(probe_stencil(g, p).sample(u), 1.0 + 0.62 + 0.17 + 0.22, 1e-13);
}
