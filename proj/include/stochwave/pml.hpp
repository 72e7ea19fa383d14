#pragma once
/**
 * @file pml.hpp
 * @brief Radial real-stretching absorbing layer: sigma, alpha, beta and the
 *        anisotropic tensor A, plus the explicit time-step bound.
 */

#include <array>
#include <cmath>
#include <stdexcept>

#include "geometry.hpp"

namespace stochwave {

struct PmlParams {
    double R = 1.0;
    double rho = 2.0;
    double sigma0 = 0.0;
    int m = 2;
    double s1 = 1.0;

    void validate() const {
        if (!(R > 0.0)) throw std::invalid_argument("pml.R: must be > 0");
        if (!(rho > R)) throw std::invalid_argument("pml.rho: must be > R");
        if (!(sigma0 >= 0.0)) throw std::invalid_argument("pml.sigma0: must be >= 0");
        if (m < 1) throw std::invalid_argument("pml.m: must be >= 1");
        if (!(s1 > 0.0)) throw std::invalid_argument("pml.s1: must be > 0");
    }
    double thickness() const { return rho - R; }
};

inline double sigma_profile(double r, const PmlParams& p) {
    if (r <= p.R) return 0.0;
    if (r >= p.rho) return p.sigma0;
    return p.sigma0 * std::pow((r - p.R) / (p.rho - p.R), p.m);
}

struct AlphaBeta {
    double alpha = 1.0;
    double beta = 1.0;
};

/// alpha = 1 + sigma/s1 and beta = (1/r) int_0^r alpha, with beta(0) = 1.
inline AlphaBeta alpha_beta(double r, const PmlParams& p) {
    AlphaBeta ab;
    ab.alpha = 1.0 + sigma_profile(r, p) / p.s1;
    if (r <= p.R) return ab;
    const double d = p.thickness();
    const double k = p.sigma0 / p.s1;
    // int_R^r sigma/s1 for the polynomial branch, then the constant branch.
    double stretch = 0.0;
    if (r <= p.rho) {
        stretch = k * d / (p.m + 1) * std::pow((r - p.R) / d, p.m + 1);
    } else {
        stretch = k * d / (p.m + 1) + k * (r - p.rho);
    }
    ab.beta = (r + stretch) / r;
    return ab;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

/// Cartesian A(x) = (beta^2/alpha) e_r e_r^T + alpha (I - e_r e_r^T); x relative to the center.
inline Mat3 pml_tensor(Vec3 x, const PmlParams& p) {
    const double r = norm(x);
    if (r == 0.0) return identity3();
    const AlphaBeta ab = alpha_beta(r, p);
    if (ab.alpha == 1.0 && ab.beta == 1.0) return identity3();
    const double radial = ab.beta * ab.beta / ab.alpha;
    const double tangential = ab.alpha;
    const Vec3 e = (1.0 / r) * x;
    Mat3 a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a[i][j] = (radial - tangential) * e[i] * e[j] + (i == j ? tangential : 0.0);
    return a;
}

/// dt = safety * dx / sqrt(3); valid everywhere since lambda_max(A) <= alpha beta^2.
inline double cfl_dt(const Grid& grid, const PmlParams& p, double safety) {
    p.validate();
    if (!(safety > 0.0 && safety < 1.0)) throw std::invalid_argument("cfl_dt: safety must lie in (0, 1)");
    return safety * grid.dx() / std::sqrt(3.0);
}

}  // namespace stochwave
