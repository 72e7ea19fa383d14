#include <gtest/gtest.h>

#include <cmath>

#include "stochwave/source.hpp"

using namespace stochwave;

namespace {
SourceProfile unit_source() {
    SourceProfile s;
    s.box = Box{{-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}};
    s.t_on = 0.0;
    s.t_off = 1.0;
    return s;
}
}  // namespace

TEST(EvalF, SpatialPeakIsEMinus3) {
    const SourceProfile s = unit_source();
    EXPECT_NEAR(s.spatial({0, 0, 0}), std::exp(-3.0), 1e-15);
    EXPECT_NEAR(s.spatial({0, 0, 0}), 0.049787068, 1e-9);
}

TEST(EvalF, TemporalPeakAndSupport) {
    const SourceProfile s = unit_source();
    EXPECT_NEAR(s.temporal(0.5), 1.0, 1e-15);
    EXPECT_EQ(s.temporal(0.0), 0.0);
    EXPECT_EQ(s.temporal(1.0), 0.0);
    EXPECT_EQ(s.temporal(-0.3), 0.0);
    EXPECT_EQ(s.temporal(1.7), 0.0);
    EXPECT_NEAR(s.temporal(0.25), s.temporal(0.75), 1e-15);
}

TEST(EvalF, VanishesOnBoundaryAndOutside) {
    const SourceProfile s = unit_source();
    EXPECT_EQ(eval_f(s, {0.25, 0, 0}, 0.5), 0.0);
    EXPECT_EQ(eval_f(s, {0, -0.25, 0.1}, 0.5), 0.0);
    EXPECT_EQ(eval_f(s, {0, 0, 0.3}, 0.5), 0.0);
    EXPECT_GT(eval_f(s, {0.24, 0.1, -0.2}, 0.4), 0.0);
    EXPECT_NEAR(eval_f(s, {0, 0, 0}, 0.5), std::exp(-3.0), 1e-15);
}

TEST(EvalF, AmplitudeScales) {
    SourceProfile s = unit_source();
    s.amplitude = 2.5;
    EXPECT_NEAR(eval_f(s, {0.1, 0, 0}, 0.3), 2.5 * s.spatial({0.1, 0, 0}) * s.temporal(0.3), 1e-15);
}

TEST(EvalFLaplace, AtZeroIsTemporalIntegral) {
    const SourceProfile s = unit_source();
    const cplx v = eval_f_laplace(s, {0, 0, 0}, 0.0);
    EXPECT_NEAR(v.real(), std::exp(-3.0) * 0.383817263995834, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(EvalFLaplace, FrozenValues) {
    const SourceProfile s = unit_source();
    const cplx p = s.temporal_laplace({0.5, 3.0});
    EXPECT_NEAR(p.real(), 0.0274179846754758, 1e-11);
    EXPECT_NEAR(p.imag(), -0.273388595936606, 1e-11);
    EXPECT_NEAR(s.temporal_laplace(1.0).real(), 0.235031591604876, 1e-11);
}

TEST(EvalFLaplace, RealAxisIsReal) {
    const SourceProfile s = unit_source();
    for (double sr : {0.1, 1.0, 4.0}) EXPECT_EQ(s.temporal_laplace(sr).imag(), 0.0);
}

TEST(EvalFLaplace, ConjugateSymmetry) {
    const SourceProfile s = unit_source();
    const cplx a = s.temporal_laplace({0.7, 5.0});
    const cplx b = s.temporal_laplace({0.7, -5.0});
    EXPECT_NEAR(a.real(), b.real(), 1e-14);
    EXPECT_NEAR(a.imag(), -b.imag(), 1e-14);
}

TEST(EvalFLaplace, DecaysFasterThanAnyPower) {
    const SourceProfile s = unit_source();
    const double a = std::abs(eval_f_laplace(s, {0, 0, 0}, {1.0, 10.0}));
    const double b = std::abs(eval_f_laplace(s, {0, 0, 0}, {1.0, 40.0}));
    EXPECT_GT(a / b, 100.0);
}

TEST(EvalFLaplace, RejectsLeftHalfPlane) {
    EXPECT_THROW(eval_f_laplace(unit_source(), {0, 0, 0}, {-0.1, 1.0}), std::invalid_argument);
}

TEST(SourceProfile, SpatialIntegrals) {
    const SourceProfile s = unit_source();
    // per-axis integral: (side/2) * int_{-1}^{1} exp(-1/(1-y^2)) dy
    const double axis = 0.25 * 0.443993816168079;
    EXPECT_NEAR(s.spatial_axis_integral(0, -1.0, 1.0), axis, 1e-13);
    EXPECT_NEAR(s.spatial_box_integral(s.box), axis * axis * axis, 1e-14);
    EXPECT_NEAR(s.spatial_axis_integral(1, -0.25, 0.0), axis / 2.0, 1e-13);
    EXPECT_EQ(s.spatial_axis_integral(2, 0.3, 0.6), 0.0);
}

TEST(SourceProfile, RmsBandwidth) {
    SourceProfile s = unit_source();
    EXPECT_NEAR(temporal_rms_bandwidth(s), 4.75128577164222, 1e-8);
    s.t_off = 4.0 / 3.0;
    EXPECT_NEAR(temporal_rms_bandwidth(s), 3.00250146841396, 1e-8);
    s.t_on = 2.0;
    s.t_off = 2.0 + 4.0 / 3.0;
    EXPECT_NEAR(temporal_rms_bandwidth(s), 3.00250146841396, 1e-8);
}

TEST(SourceProfile, Validation) {
    SourceProfile s = unit_source();
    s.t_off = 0.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = unit_source();
    s.box.hi.x = s.box.lo.x;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}
