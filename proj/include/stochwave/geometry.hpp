#pragma once
/**
 * @file geometry.hpp
 * @brief Voxel grid over the truncated ball and the dyadic cube partition of
 *        the noise support.
 *
 * The grid is node based: node (i, j, k) sits at center + (i - n, j - n, k - n) * dx
 * with n = ceil(rho / dx), so the outermost layer is always EXTERIOR and acts
 * as the homogeneous Dirichlet boundary on the sphere |x| = rho.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochwave {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
    constexpr double& operator[](int a) { return a == 0 ? x : (a == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

/// Axis-aligned box [lo, hi].
struct Box {
    Vec3 lo;
    Vec3 hi;

    double side(int a) const { return hi[a] - lo[a]; }
    double volume() const { return side(0) * side(1) * side(2); }
    Vec3 center() const { return 0.5 * (lo + hi); }
    bool contains(Vec3 p) const {
        for (int a = 0; a < 3; ++a)
            if (p[a] < lo[a] || p[a] > hi[a]) return false;
        return true;
    }
    /// Euclidean distance from p to the box (0 inside).
    double distance_to(Vec3 p) const {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            double d = std::max({lo[a] - p[a], 0.0, p[a] - hi[a]});
            s += d * d;
        }
        return std::sqrt(s);
    }
    /// Largest distance from p to any point of the box.
    double farthest_from(Vec3 p) const {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            double d = std::max(std::abs(p[a] - lo[a]), std::abs(p[a] - hi[a]));
            s += d * d;
        }
        return std::sqrt(s);
    }
    friend bool operator==(const Box&, const Box&) = default;
};

struct GridSpec {
    double rho = 2.0;
    double R = 1.0;
    double obstacle_radius = 0.0;
    double dx = 0.1;
    Vec3 center{};

    void validate() const {
        if (!(obstacle_radius >= 0.0))
            throw std::invalid_argument("geometry.obstacle_radius: must be >= 0");
        if (!(obstacle_radius < R))
            throw std::invalid_argument("geometry.obstacle_radius: must be < geometry.R");
        if (!(R < rho)) throw std::invalid_argument("geometry.R: must be < geometry.rho");
        if (!(dx > 0.0)) throw std::invalid_argument("geometry.dx: must be > 0");
        if (!(rho / dx >= 8.0 - 1e-12))
            throw std::invalid_argument("geometry.dx: rho/dx must be >= 8");
        if (!(dx < rho - R))
            throw std::invalid_argument("geometry.dx: must be < rho - R (PML needs one cell)");
    }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class Region : std::uint8_t { Obstacle = 0, Physical = 1, Pml = 2, Exterior = 3 };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::Obstacle: return "OBSTACLE";
        case Region::Physical: return "PHYSICAL";
        case Region::Pml: return "PML";
        case Region::Exterior: return "EXTERIOR";
    }
    return "?";
}

inline Region classify(double r, const GridSpec& s) {
    if (s.obstacle_radius > 0.0 && r <= s.obstacle_radius) return Region::Obstacle;
    if (r < s.R) return Region::Physical;
    if (r < s.rho) return Region::Pml;
    return Region::Exterior;
}

class Grid {
public:
    Grid() = default;

    explicit Grid(const GridSpec& spec) : spec_(spec) {
        spec_.validate();
        half_ = static_cast<int>(std::ceil(spec_.rho / spec_.dx - 1e-9));
        if (half_ * spec_.dx < spec_.rho) ++half_;
        n_ = 2 * half_ + 1;
        tags_.resize(size());
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) {
                    Vec3 p = coord(i, j, k);
                    tags_[index(i, j, k)] = classify(distance(p, spec_.center), spec_);
                }
    }

    const GridSpec& spec() const { return spec_; }
    double dx() const { return spec_.dx; }
    /// Nodes per axis (identical on all three axes).
    int extent() const { return n_; }
    int half_extent() const { return half_; }
    std::array<int, 3> dims() const { return {n_, n_, n_}; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }
    std::array<int, 3> ijk(std::size_t idx) const {
        int k = static_cast<int>(idx % n_);
        idx /= n_;
        int j = static_cast<int>(idx % n_);
        int i = static_cast<int>(idx / n_);
        return {i, j, k};
    }
    Vec3 coord(int i, int j, int k) const {
        return spec_.center + spec_.dx * Vec3{double(i - half_), double(j - half_), double(k - half_)};
    }
    Vec3 coord(std::size_t idx) const {
        auto [i, j, k] = ijk(idx);
        return coord(i, j, k);
    }
    /// Stride in the flat node array for a unit step along axis a.
    std::size_t stride(int a) const {
        return a == 0 ? static_cast<std::size_t>(n_) * n_ : (a == 1 ? static_cast<std::size_t>(n_) : 1u);
    }

    Region tag(std::size_t idx) const { return tags_[idx]; }
    const std::vector<Region>& tags() const { return tags_; }
    bool is_dirichlet(std::size_t idx) const {
        return tags_[idx] == Region::Obstacle || tags_[idx] == Region::Exterior;
    }
    std::size_t count(Region r) const {
        std::size_t c = 0;
        for (Region t : tags_) c += (t == r);
        return c;
    }

    /// Continuous (fractional) node coordinates of a point.
    Vec3 to_lattice(Vec3 p) const {
        Vec3 q = (1.0 / spec_.dx) * (p - spec_.center);
        return q + Vec3{double(half_), double(half_), double(half_)};
    }

    /// FNV-1a over the defining parameters; used for provenance records.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](double v) {
            unsigned char b[sizeof(double)];
            std::memcpy(b, &v, sizeof(double));
            for (unsigned char c : b) {
                h ^= c;
                h *= 1099511628211ull;
            }
        };
        mix(spec_.rho);
        mix(spec_.R);
        mix(spec_.obstacle_radius);
        mix(spec_.dx);
        mix(spec_.center.x);
        mix(spec_.center.y);
        mix(spec_.center.z);
        mix(double(n_));
        return h;
    }

private:
    GridSpec spec_{};
    int half_ = 0;
    int n_ = 0;
    std::vector<Region> tags_;
};

inline Grid build_grid(const GridSpec& spec) { return Grid(spec); }

/**
 * Dyadic partition of an axis-aligned support box into cubes of side
 * h = h0 * 2^-level. Cells are indexed lexicographically, i slowest.
 */
struct CellPartition {
    Box box;
    double h0 = 1.0;
    int level = 0;
    std::array<int, 3> cells{1, 1, 1};

    double h() const { return std::ldexp(h0, -level); }
    double cell_volume() const {
        double s = h();
        return s * s * s;
    }
    std::size_t size() const {
        return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2];
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * cells[1] + j) * cells[2] + k;
    }
    std::array<int, 3> ijk(std::size_t idx) const {
        int k = static_cast<int>(idx % cells[2]);
        idx /= cells[2];
        int j = static_cast<int>(idx % cells[1]);
        int i = static_cast<int>(idx / cells[1]);
        return {i, j, k};
    }
    Box cell_box(std::size_t idx) const {
        auto [i, j, k] = ijk(idx);
        double s = h();
        Vec3 lo = box.lo + s * Vec3{double(i), double(j), double(k)};
        return {lo, lo + Vec3{s, s, s}};
    }
    Vec3 cell_center(std::size_t idx) const { return cell_box(idx).center(); }

    /// Index of the cell containing p, or -1 outside the box.
    long long locate(Vec3 p) const {
        if (!box.contains(p)) return -1;
        std::array<int, 3> c{};
        for (int a = 0; a < 3; ++a) {
            int v = static_cast<int>(std::floor((p[a] - box.lo[a]) / h()));
            c[a] = std::clamp(v, 0, cells[a] - 1);
        }
        return static_cast<long long>(index(c[0], c[1], c[2]));
    }

    /// Parent index at level-1 of a cell of this partition.
    std::size_t parent_index(std::size_t idx) const {
        auto [i, j, k] = ijk(idx);
        int ny = cells[1] / 2, nz = cells[2] / 2;
        return (static_cast<std::size_t>(i / 2) * ny + j / 2) * nz + k / 2;
    }

    CellPartition coarser() const {
        if (level < 1) throw std::invalid_argument("CellPartition: level 0 has no coarser partition");
        CellPartition c = *this;
        c.level = level - 1;
        for (int a = 0; a < 3; ++a) c.cells[a] = cells[a] / 2;
        return c;
    }
    CellPartition finer() const {
        CellPartition c = *this;
        c.level = level + 1;
        for (int a = 0; a < 3; ++a) c.cells[a] = cells[a] * 2;
        return c;
    }
    friend bool operator==(const CellPartition&, const CellPartition&) = default;
};

/// Partition without geometric admissibility checks (box sides must be multiples of h0).
inline CellPartition cell_partition(const Box& support_box, int level, double h0) {
    if (level < 0) throw std::invalid_argument("cell_partition: level must be >= 0");
    if (!(h0 > 0.0)) throw std::invalid_argument("cell_partition: h0 must be > 0");
    CellPartition p;
    p.box = support_box;
    p.h0 = h0;
    p.level = level;
    for (int a = 0; a < 3; ++a) {
        double q = support_box.side(a) / h0;
        long long m = std::llround(q);
        if (m < 1 || std::abs(q - double(m)) > 1e-9 * std::max(1.0, q))
            throw std::invalid_argument("cell_partition: support box side " + std::to_string(a) +
                                        " is not a positive multiple of h0");
        p.cells[a] = static_cast<int>(m) << level;
    }
    return p;
}

/// Partition of a support box that must lie strictly inside B_R minus the obstacle.
inline CellPartition cell_partition(const Box& support_box, int level, double h0, const GridSpec& domain) {
    if (support_box.farthest_from(domain.center) >= domain.R)
        throw std::invalid_argument("cell_partition: support box exceeds B_R");
    if (domain.obstacle_radius > 0.0 && support_box.distance_to(domain.center) <= domain.obstacle_radius)
        throw std::invalid_argument("cell_partition: support box intersects the obstacle");
    return cell_partition(support_box, level, h0);
}

}  // namespace stochwave
