#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "stochwave/pml.hpp"

using namespace stochwave;

namespace {
PmlParams params(double sigma0, int m = 2, double s1 = 0.5) {
    PmlParams p;
    p.R = 1.0;
    p.rho = 2.0;
    p.sigma0 = sigma0;
    p.m = m;
    p.s1 = s1;
    return p;
}
}  // namespace

TEST(SigmaProfile, Examples) {
    const PmlParams p = params(1.0, 2);
    EXPECT_EQ(sigma_profile(0.5, p), 0.0);
    EXPECT_EQ(sigma_profile(1.0, p), 0.0);
    EXPECT_NEAR(sigma_profile(1.5, p), 0.25, 1e-15);
    EXPECT_NEAR(sigma_profile(2.0, p), 1.0, 1e-15);
    EXPECT_NEAR(sigma_profile(3.0, p), 1.0, 1e-15);
}

TEST(AlphaBeta, Examples) {
    const PmlParams p = params(1.0, 2, 0.5);
    const AlphaBeta in = alpha_beta(0.5, p);
    EXPECT_EQ(in.alpha, 1.0);
    EXPECT_EQ(in.beta, 1.0);
    const AlphaBeta mid = alpha_beta(1.5, p);
    EXPECT_NEAR(mid.alpha, 1.5, 1e-15);
    // beta = (1.5 + (1/0.5) * 0.125/3) / 1.5
    EXPECT_NEAR(mid.beta, (1.5 + 2.0 * 0.125 / 3.0) / 1.5, 1e-15);
    EXPECT_EQ(alpha_beta(0.0, p).beta, 1.0);
}

TEST(AlphaBeta, ClosedFormMatchesQuadrature) {
    for (int m : {1, 2, 3}) {
        const PmlParams p = params(1.7, m, 0.4);
        for (double r : {1.1, 1.37, 1.8, 2.0, 2.4}) {
            const int n = 20000;
            double integral = 0.0;
            for (int i = 0; i < n; ++i) {
                const double t = (i + 0.5) * r / n;
                integral += alpha_beta(t, p).alpha * r / n;
            }
            EXPECT_NEAR(alpha_beta(r, p).beta, integral / r, 1e-6) << "m=" << m << " r=" << r;
        }
    }
}

TEST(AlphaBeta, MonotoneAndBounded) {
    const PmlParams p = params(2.0, 2, 0.5);
    double prev = 1.0;
    for (double r = 0.0; r <= 2.5; r += 0.01) {
        const AlphaBeta ab = alpha_beta(r, p);
        EXPECT_GE(ab.alpha, 1.0);
        EXPECT_GE(ab.beta, 1.0);
        EXPECT_LE(ab.beta, ab.alpha + 1e-14);
        EXPECT_GE(ab.beta, prev - 1e-14);
        prev = ab.beta;
    }
}

TEST(PmlTensor, IdentityInsideAndWhenSigmaZero) {
    EXPECT_EQ(pml_tensor({0.3, 0.2, 0.1}, params(1.0)), identity3());
    EXPECT_EQ(pml_tensor({1.5, 0.2, 0.1}, params(0.0)), identity3());
    EXPECT_EQ(pml_tensor({0, 0, 0}, params(1.0)), identity3());
}

TEST(PmlTensor, SpectrumIsRadialAndTangential) {
    const PmlParams p = params(1.5, 2, 0.5);
    for (Vec3 x : {Vec3{1.2, 0.3, -0.4}, Vec3{0.0, 1.9, 0.1}, Vec3{-1.1, -0.9, 0.8}}) {
        const Mat3 a = pml_tensor(x, p);
        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
        EXPECT_NEAR((m - m.transpose()).norm(), 0.0, 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
        const AlphaBeta ab = alpha_beta(norm(x), p);
        std::vector<double> expect{ab.beta * ab.beta / ab.alpha, ab.alpha, ab.alpha};
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues()(i), expect[i], 1e-12);
        EXPECT_GT(es.eigenvalues()(0), 0.0);
        // largest eigenvalue never exceeds the mass alpha*beta^2
        EXPECT_LE(es.eigenvalues()(2), ab.alpha * ab.beta * ab.beta + 1e-12);
        // radial direction is an eigenvector
        Eigen::Vector3d e(x.x, x.y, x.z);
        e.normalize();
        EXPECT_NEAR((m * e - (ab.beta * ab.beta / ab.alpha) * e).norm(), 0.0, 1e-12);
    }
}

TEST(CflDt, Example) {
    GridSpec s;
    s.R = 1.0;
    s.rho = 2.0;
    s.dx = 0.1;
    const Grid g(s);
    EXPECT_NEAR(cfl_dt(g, params(1.0), 0.9), 0.0519615, 1e-7);
    EXPECT_THROW(cfl_dt(g, params(1.0), 1.0), std::invalid_argument);
    EXPECT_THROW(cfl_dt(g, params(-1.0), 0.5), std::invalid_argument);
}
