#pragma once
/**
 * @file noise.hpp
 * @brief Piecewise-constant white noise W_h = sum_K |K|^{-1/2} xi_K chi_K.
 *
 * Coarser levels are never sampled fresh: they are obtained from a finer
 * realization by exact aggregation, so every level of a study sees the same
 * underlying Brownian sheet.
 */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace stochwave {

struct NoiseField {
    CellPartition partition;
    std::vector<double> xi;
    std::uint64_t seed = 0;
    int level = 0;

    /// Value of W_h at x (0 outside the support box).
    double value_at(Vec3 x) const {
        long long c = partition.locate(x);
        if (c < 0) return 0.0;
        return xi[static_cast<std::size_t>(c)] / std::sqrt(partition.cell_volume());
    }

    /// ||W_h||^2_{L^2(D)}; the volume factors cancel exactly.
    double squared_l2() const {
        double s = 0.0;
        for (double v : xi) s += v * v;
        return s;
    }
};

inline NoiseField sample_noise(const CellPartition& partition, std::uint64_t seed) {
    NoiseField f;
    f.partition = partition;
    f.seed = seed;
    f.level = partition.level;
    f.xi.resize(partition.size());
    for (std::size_t c = 0; c < f.xi.size(); ++c)
        f.xi[c] = rng::normal(seed, static_cast<std::uint32_t>(partition.level), c);
    return f;
}

/// Field with every coefficient set to `value` (deterministic fixtures, unit responses).
inline NoiseField constant_noise(const CellPartition& partition, double value) {
    NoiseField f;
    f.partition = partition;
    f.level = partition.level;
    f.xi.assign(partition.size(), value);
    return f;
}

/// Parent coefficient is (1/sqrt 8) * sum of its 8 children.
inline NoiseField coarsen_noise(const NoiseField& fine) {
    if (fine.level < 1) throw std::invalid_argument("coarsen_noise: fine.level must be >= 1");
    NoiseField coarse;
    coarse.partition = fine.partition.coarser();
    coarse.seed = fine.seed;
    coarse.level = fine.level - 1;
    coarse.xi.assign(coarse.partition.size(), 0.0);
    // Children are accumulated in fine-index order, which fixes the summation order.
    for (std::size_t c = 0; c < fine.xi.size(); ++c)
        coarse.xi[fine.partition.parent_index(c)] += fine.xi[c];
    const double inv_sqrt8 = 1.0 / std::sqrt(8.0);
    for (double& v : coarse.xi) v *= inv_sqrt8;
    return coarse;
}

/// Repeated coarsening down to `level`.
inline NoiseField coarsen_to(const NoiseField& fine, int level) {
    if (level > fine.level || level < 0) throw std::invalid_argument("coarsen_to: invalid target level");
    NoiseField f = fine;
    while (f.level > level) f = coarsen_noise(f);
    return f;
}

/// (W_h, phi) = sum_K |K|^{-1/2} xi_K * int_K phi, with the cell integral by the midpoint rule.
inline double pair_with_function(const NoiseField& field, const std::function<double(Vec3)>& phi) {
    const double vol = field.partition.cell_volume();
    const double w = std::sqrt(vol);
    double s = 0.0;
    for (std::size_t c = 0; c < field.xi.size(); ++c)
        s += field.xi[c] * w * phi(field.partition.cell_center(c));
    return s;
}

/// CSV dump "cell_index,i,j,k,xi" at 17 significant digits.
inline void write_noise_csv(std::ostream& os, const NoiseField& field) {
    os << "cell_index,i,j,k,xi\n";
    char buf[64];
    for (std::size_t c = 0; c < field.xi.size(); ++c) {
        auto [i, j, k] = field.partition.ijk(c);
        std::snprintf(buf, sizeof buf, "%.17g", field.xi[c]);
        os << c << ',' << i << ',' << j << ',' << k << ',' << buf << '\n';
    }
}

}  // namespace stochwave
