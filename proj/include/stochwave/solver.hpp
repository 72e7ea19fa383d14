#pragma once
/**
 * @file solver.hpp
 * @brief Explicit leapfrog solver for  alpha beta^2 u_tt - div(A grad u) = f(x,t) W_h
 *        on the node grid of B_rho with u = 0 on the obstacle and on |x| = rho.
 *
 * The spatial operator is the gradient of the discrete energy
 *
 *   a(u, v) = sum_cells dx^3 [ sum_i A_ii (1/4) sum_{edges e || i} D_e u D_e v
 *                            + sum_{i != j} A_ij gbar_i(u) gbar_j(v) ],
 *
 * where D_e is the edge difference and gbar_i the mean of the four i-edge
 * differences of a cell. The form is symmetric and positive semidefinite for
 * any SPD tensor field, so the discrete problem is self-adjoint (reciprocity
 * holds to rounding) and leapfrog conserves a discrete energy. With A = I it
 * reduces to the standard 7-point Laplacian.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "noise.hpp"
#include "pml.hpp"
#include "source.hpp"

namespace stochwave {

/// Sparse spatial weights times a scalar time profile: S_n(t) = weight_n * temporal(t).
struct Forcing {
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    std::function<double(double)> temporal;

    bool empty() const { return nodes.empty() || !temporal; }
};

/**
 * Node forcing from f * W_h: weight_n = (1/dx^3) int_{V_n} amplitude g(y) W_h(y) dy over
 * the node's control volume V_n, so the projection is exact for the piecewise-constant noise.
 */
inline Forcing noise_forcing(const Grid& grid, const NoiseField& noise, const SourceProfile& src) {
    const CellPartition& part = noise.partition;
    const double dx = grid.dx();
    const double h = part.h();
    const Vec3 lat_lo = grid.to_lattice(part.box.lo);
    const Vec3 lat_hi = grid.to_lattice(part.box.hi);

    // Per axis: node lattice index -> list of (cell index, int over V_n cap cell of g_a).
    struct Overlap {
        int cell;
        double integral;
    };
    std::array<int, 3> first{};
    std::array<std::vector<std::vector<Overlap>>, 3> axis;
    for (int a = 0; a < 3; ++a) {
        int i0 = std::max(1, static_cast<int>(std::floor(lat_lo[a] - 0.5)));
        int i1 = std::min(grid.extent() - 2, static_cast<int>(std::ceil(lat_hi[a] + 0.5)));
        first[a] = i0;
        for (int i = i0; i <= i1; ++i) {
            const double xc = grid.spec().center[a] + (i - grid.half_extent()) * dx;
            const double vlo = xc - 0.5 * dx, vhi = xc + 0.5 * dx;
            std::vector<Overlap> ov;
            for (int c = 0; c < part.cells[a]; ++c) {
                const double clo = part.box.lo[a] + c * h, chi = clo + h;
                const double lo = std::max(vlo, clo), hi = std::min(vhi, chi);
                if (hi <= lo) continue;
                const double v = src.spatial_axis_integral(a, lo, hi);
                if (v != 0.0) ov.push_back({c, v});
            }
            axis[a].push_back(std::move(ov));
        }
    }

    Forcing F;
    const double scale = src.amplitude / (std::sqrt(part.cell_volume()) * dx * dx * dx);
    for (std::size_t ii = 0; ii < axis[0].size(); ++ii)
        for (std::size_t jj = 0; jj < axis[1].size(); ++jj)
            for (std::size_t kk = 0; kk < axis[2].size(); ++kk) {
                const auto& ox = axis[0][ii];
                const auto& oy = axis[1][jj];
                const auto& oz = axis[2][kk];
                if (ox.empty() || oy.empty() || oz.empty()) continue;
                const std::size_t n = grid.index(first[0] + int(ii), first[1] + int(jj), first[2] + int(kk));
                if (grid.is_dirichlet(n)) continue;
                double w = 0.0;
                for (const auto& a : ox)
                    for (const auto& b : oy)
                        for (const auto& c : oz)
                            w += noise.xi[part.index(a.cell, b.cell, c.cell)] * a.integral * b.integral * c.integral;
                if (w == 0.0) continue;
                F.nodes.push_back(n);
                F.weights.push_back(w * scale);
            }
    F.temporal = [src](double t) { return src.temporal(t); };
    return F;
}

/// Unit impulse at one node: weight 1/dx^3 (discrete delta) times a temporal pulse.
inline Forcing point_forcing(const Grid& grid, std::size_t node, std::function<double(double)> temporal) {
    if (grid.is_dirichlet(node)) throw std::invalid_argument("point_forcing: node is on a Dirichlet boundary");
    const double dx = grid.dx();
    return Forcing{{node}, {1.0 / (dx * dx * dx)}, std::move(temporal)};
}

struct WaveState {
    std::vector<double> u_prev;
    std::vector<double> u_curr;
    double t = 0.0;
    double dt = 0.0;
    long step = 0;
};

struct SimulationResult {
    GridSpec grid;
    int extent = 0;
    double dt = 0.0;
    double T_end = 0.0;
    std::vector<double> times;
    std::vector<Vec3> probes;
    std::vector<std::vector<double>> probe_series;  ///< [probe][time sample]
    int snapshot_every = 0;
    std::vector<long> snapshot_steps;
    std::vector<std::size_t> snapshot_nodes;        ///< grid nodes stored in each snapshot
    std::vector<std::vector<double>> snapshots;     ///< [snapshot][snapshot node]
    std::vector<double> norms;                      ///< ||u(t_n)||_{L2(B_R \ O)} per sample
    std::map<std::string, std::string> metadata;
};

class WaveSolver {
public:
    WaveSolver(Grid grid, PmlParams pml, double dt) : grid_(std::move(grid)), pml_(pml), dt_(dt) {
        pml_.validate();
        const GridSpec& gs = grid_.spec();
        if (std::abs(gs.R - pml_.R) > 1e-12 || std::abs(gs.rho - pml_.rho) > 1e-12)
            throw std::invalid_argument("WaveSolver: grid and PML radii disagree");
        if (!(dt_ > 0.0) || dt_ >= grid_.dx() / std::sqrt(3.0))
            throw std::invalid_argument("WaveSolver: dt violates the CFL bound dx/sqrt(3)");
        assemble();
        if (!aniso_cells_.empty()) check_spectral_stability();
    }

    const Grid& grid() const { return grid_; }
    const PmlParams& pml() const { return pml_; }
    double dt() const { return dt_; }

    WaveState initial_state() const {
        WaveState s;
        s.u_prev.assign(grid_.size(), 0.0);
        s.u_curr.assign(grid_.size(), 0.0);
        s.dt = dt_;
        return s;
    }

    /// (L u)_n = -(1/dx^3) d a(u, v) / d v_n at non-Dirichlet nodes, 0 elsewhere.
    void apply_operator(const std::vector<double>& u, std::vector<double>& out) const {
        out.assign(grid_.size(), 0.0);
        // separate buffer: extra_ must stay clean between steps
        std::vector<double> cross(grid_.size(), 0.0);
        accumulate_cross(u, cross);
        const int n = grid_.extent();
        const std::size_t sx = grid_.stride(0), sy = grid_.stride(1);
        const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
        for (int i = 1; i < n - 1; ++i)
            for (int j = 1; j < n - 1; ++j) {
                const std::size_t base = grid_.index(i, j, 0);
                for (int k = 1; k < n - 1; ++k) {
                    const std::size_t idx = base + k;
                    out[idx] = mask_[idx] * (laplacian(u, idx, sx, sy) * inv_dx2 + cross[idx]);
                }
            }
    }

    /// One leapfrog step; Dirichlet nodes stay exactly zero.
    void step(WaveState& s, const Forcing& forcing) const {
        const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
        accumulate_cross(s.u_curr, extra_);
        if (!forcing.empty()) {
            const double amp = forcing.temporal(s.t);
            if (amp != 0.0)
                for (std::size_t q = 0; q < forcing.nodes.size(); ++q) extra_[forcing.nodes[q]] += forcing.weights[q] * amp;
        }
        next_.resize(grid_.size());
        const std::vector<double>& u = s.u_curr;
        const std::vector<double>& up = s.u_prev;
        const int n = grid_.extent();
        const std::size_t sx = grid_.stride(0), sy = grid_.stride(1);
        for (int i = 1; i < n - 1; ++i)
            for (int j = 1; j < n - 1; ++j) {
                const std::size_t base = grid_.index(i, j, 0);
                for (int k = 1; k < n - 1; ++k) {
                    const std::size_t idx = base + k;
                    const double rhs = laplacian(u, idx, sx, sy) * inv_dx2 + extra_[idx];
                    next_[idx] = mask_[idx] * (2.0 * u[idx] - up[idx]) + dt2_inv_mass_[idx] * rhs;
                    extra_[idx] = 0.0;
                }
            }
        std::swap(s.u_prev, s.u_curr);
        std::swap(s.u_curr, next_);
        s.t = (s.step + 1) * dt_;
        ++s.step;
    }

    /**
     * Leapfrog-conserved energy
     *   E = 1/2 sum M ((u - u_prev)/dt)^2 dx^3 + 1/2 a(u, u_prev).
     */
    double energy(const WaveState& s) const {
        std::vector<double> lu;
        apply_operator(s.u_curr, lu);
        const double dx3 = std::pow(grid_.dx(), 3);
        double kin = 0.0, pot = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (mask_[i] == 0.0) continue;
            const double v = (s.u_curr[i] - s.u_prev[i]) / dt_;
            kin += mass_[i] * v * v;
            pot -= s.u_prev[i] * lu[i];
        }
        return 0.5 * dx3 * (kin + pot);
    }

    /// sqrt(dx^3 sum u^2) over PHYSICAL nodes, summed in index order.
    double physical_norm(const std::vector<double>& u) const {
        double s = 0.0;
        for (std::size_t i : physical_) s += u[i] * u[i];
        return std::sqrt(s * std::pow(grid_.dx(), 3));
    }

    const std::vector<std::size_t>& physical_nodes() const { return physical_; }
    double mass(std::size_t idx) const { return mass_[idx]; }
    std::size_t anisotropic_cell_count() const { return aniso_cells_.size(); }

private:
    static double laplacian_term(double c_hi, double c_lo, double u0, double uh, double ul) {
        return c_hi * (uh - u0) - c_lo * (u0 - ul);
    }

    double laplacian(const std::vector<double>& u, std::size_t idx, std::size_t sx, std::size_t sy) const {
        const double u0 = u[idx];
        return laplacian_term(cx_[idx], cx_[idx - sx], u0, u[idx + sx], u[idx - sx]) +
               laplacian_term(cy_[idx], cy_[idx - sy], u0, u[idx + sy], u[idx - sy]) +
               laplacian_term(cz_[idx], cz_[idx - 1], u0, u[idx + 1], u[idx - 1]);
    }

    struct AnisoCell {
        std::size_t corner;  ///< lowest node of the cell
        double axy, axz, ayz;
    };

    /// Cross-derivative part of L u scattered into acc (mixed terms only).
    void accumulate_cross(const std::vector<double>& u, std::vector<double>& acc) const {
        if (aniso_cells_.empty()) return;
        const std::size_t sx = grid_.stride(0), sy = grid_.stride(1), sz = 1;
        const double dx = grid_.dx();
        const double inv4dx = 1.0 / (4.0 * dx);
        for (const AnisoCell& c : aniso_cells_) {
            const std::size_t n0 = c.corner;
            double v[8];
            for (int o = 0; o < 8; ++o) v[o] = u[n0 + (o >> 2 & 1) * sx + (o >> 1 & 1) * sy + (o & 1) * sz];
            // mean edge differences; bit 2 = x, bit 1 = y, bit 0 = z
            const double gx = ((v[4] - v[0]) + (v[5] - v[1]) + (v[6] - v[2]) + (v[7] - v[3])) * inv4dx;
            const double gy = ((v[2] - v[0]) + (v[3] - v[1]) + (v[6] - v[4]) + (v[7] - v[5])) * inv4dx;
            const double gz = ((v[1] - v[0]) + (v[3] - v[2]) + (v[5] - v[4]) + (v[7] - v[6])) * inv4dx;
            const double fx = c.axy * gy + c.axz * gz;
            const double fy = c.axy * gx + c.ayz * gz;
            const double fz = c.axz * gx + c.ayz * gy;
            for (int o = 0; o < 8; ++o) {
                const double sgx = (o >> 2 & 1) ? 1.0 : -1.0;
                const double sgy = (o >> 1 & 1) ? 1.0 : -1.0;
                const double sgz = (o & 1) ? 1.0 : -1.0;
                acc[n0 + (o >> 2 & 1) * sx + (o >> 1 & 1) * sy + (o & 1) * sz] -=
                    (sgx * fx + sgy * fy + sgz * fz) * inv4dx;
            }
        }
    }

    void assemble() {
        const std::size_t N = grid_.size();
        const int n = grid_.extent();
        const Vec3 center = grid_.spec().center;
        mask_.assign(N, 0.0);
        mass_.assign(N, 1.0);
        dt2_inv_mass_.assign(N, 0.0);
        cx_.assign(N, 0.0);
        cy_.assign(N, 0.0);
        cz_.assign(N, 0.0);
        extra_.assign(N, 0.0);
        next_.assign(N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const Region t = grid_.tag(i);
            if (t == Region::Physical) physical_.push_back(i);
            if (grid_.is_dirichlet(i)) continue;
            const AlphaBeta ab = alpha_beta(distance(grid_.coord(i), center), pml_);
            mass_[i] = ab.alpha * ab.beta * ab.beta;
            mask_[i] = 1.0;
            dt2_inv_mass_[i] = dt_ * dt_ / mass_[i];
        }
        const double half = 0.5 * grid_.dx();
        const std::size_t sx = grid_.stride(0), sy = grid_.stride(1);
        for (int i = 0; i < n - 1; ++i)
            for (int j = 0; j < n - 1; ++j)
                for (int k = 0; k < n - 1; ++k) {
                    const std::size_t n0 = grid_.index(i, j, k);
                    const Vec3 cc = grid_.coord(i, j, k) + Vec3{half, half, half};
                    const Mat3 A = pml_tensor(cc - center, pml_);
                    // each cell owns four edges per axis
                    for (int e = 0; e < 4; ++e) {
                        const int b1 = e >> 1 & 1, b0 = e & 1;
                        cx_[n0 + b1 * sy + b0] += 0.25 * A[0][0];
                        cy_[n0 + b1 * sx + b0] += 0.25 * A[1][1];
                        cz_[n0 + b1 * sx + b0 * sy] += 0.25 * A[2][2];
                    }
                    const double off = std::abs(A[0][1]) + std::abs(A[0][2]) + std::abs(A[1][2]);
                    if (off > 0.0) aniso_cells_.push_back({n0, A[0][1], A[0][2], A[1][2]});
                }
    }

    /// Power iteration on M^{-1}(-L); rejects dt if dt^2 lambda_max > 4.
    void check_spectral_stability() const {
        std::vector<double> x(grid_.size(), 0.0), y;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (mask_[i] != 0.0) x[i] = ((i * 2654435761u) % 1000) / 1000.0 - 0.5;
        double lambda = 0.0;
        for (int it = 0; it < 60; ++it) {
            apply_operator(x, y);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (mask_[i] == 0.0) continue;
                num -= x[i] * y[i];
                den += mass_[i] * x[i] * x[i];
                y[i] = -y[i] / mass_[i];
            }
            lambda = num / den;
            double nrm = 0.0;
            for (double v : y) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) return;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / nrm;
        }
        // Rayleigh quotients approach lambda_max from below; keep a 2% margin.
        if (dt_ * dt_ * lambda * 1.02 > 4.0)
            throw std::invalid_argument("WaveSolver: dt exceeds the stability limit of the layered operator (" +
                                        std::to_string(2.0 / std::sqrt(lambda * 1.02)) + ")");
    }

    Grid grid_;
    PmlParams pml_;
    double dt_;
    std::vector<double> mask_, mass_, dt2_inv_mass_;
    std::vector<double> cx_, cy_, cz_;
    std::vector<AnisoCell> aniso_cells_;
    std::vector<std::size_t> physical_;
    mutable std::vector<double> extra_;
    mutable std::vector<double> next_;
};

/// Trilinear interpolation weights of a point on the node lattice.
struct ProbeStencil {
    std::array<std::size_t, 8> nodes{};
    std::array<double, 8> weights{};

    double sample(const std::vector<double>& u) const {
        double s = 0.0;
        for (int o = 0; o < 8; ++o) s += weights[o] * u[nodes[o]];
        return s;
    }
};

inline ProbeStencil probe_stencil(const Grid& grid, Vec3 p) {
    const Vec3 q = grid.to_lattice(p);
    std::array<int, 3> i0{};
    std::array<double, 3> f{};
    for (int a = 0; a < 3; ++a) {
        i0[a] = std::clamp(static_cast<int>(std::floor(q[a])), 0, grid.extent() - 2);
        f[a] = q[a] - i0[a];
    }
    ProbeStencil s;
    for (int o = 0; o < 8; ++o) {
        const int bx = o >> 2 & 1, by = o >> 1 & 1, bz = o & 1;
        s.nodes[o] = grid.index(i0[0] + bx, i0[1] + by, i0[2] + bz);
        s.weights[o] = (bx ? f[0] : 1 - f[0]) * (by ? f[1] : 1 - f[1]) * (bz ? f[2] : 1 - f[2]);
    }
    return s;
}

struct RunOptions {
    double T_end = 0.0;
    std::vector<Vec3> probes;
    int snapshot_every = 0;  ///< 0 disables snapshots
    bool record_norms = true;
};

/**
 * Runs from rest to T_end. Samples are taken at t_n = n dt for n = 0..floor(T_end/dt);
 * T_end = 0 yields an empty result. Snapshots cover every node within R + 2 dx of the
 * center and are taken at steps n >= 1 with n % snapshot_every == 0 (the initial
 * state is identically zero).
 */
inline SimulationResult run(const WaveSolver& solver, const Forcing& forcing, const RunOptions& opt) {
    const Grid& grid = solver.grid();
    const GridSpec& gs = grid.spec();
    if (opt.T_end < 0.0) throw std::invalid_argument("run: T_end must be >= 0");
    if (opt.snapshot_every < 0) throw std::invalid_argument("run: snapshot_every must be >= 0");

    SimulationResult res;
    res.grid = gs;
    res.extent = grid.extent();
    res.dt = solver.dt();
    res.T_end = opt.T_end;
    res.probes = opt.probes;
    res.snapshot_every = opt.snapshot_every;
    res.probe_series.assign(opt.probes.size(), {});

    std::vector<ProbeStencil> stencils;
    for (const Vec3& p : opt.probes) {
        const double r = distance(p, gs.center);
        if (!(r < gs.R) || (gs.obstacle_radius > 0.0 && r <= gs.obstacle_radius))
            throw std::invalid_argument("run: probe lies outside the physical region");
        stencils.push_back(probe_stencil(grid, p));
    }
    if (opt.snapshot_every > 0)
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (distance(grid.coord(i), gs.center) < gs.R + 2.0 * gs.dx) res.snapshot_nodes.push_back(i);

    if (opt.T_end == 0.0) return res;
    const long nsteps = static_cast<long>(std::floor(opt.T_end / solver.dt() + 1e-9));

    WaveState s = solver.initial_state();
    auto record = [&]() {
        res.times.push_back(s.t);
        for (std::size_t p = 0; p < stencils.size(); ++p) res.probe_series[p].push_back(stencils[p].sample(s.u_curr));
        if (opt.record_norms) {
            const double nrm = solver.physical_norm(s.u_curr);
            if (!std::isfinite(nrm)) throw std::runtime_error("run: solution became non-finite");
            res.norms.push_back(nrm);
        }
        if (opt.snapshot_every > 0 && s.step > 0 && s.step % opt.snapshot_every == 0) {
            std::vector<double> snap(res.snapshot_nodes.size());
            for (std::size_t q = 0; q < snap.size(); ++q) snap[q] = s.u_curr[res.snapshot_nodes[q]];
            res.snapshots.push_back(std::move(snap));
            res.snapshot_steps.push_back(s.step);
        }
    };
    record();
    for (long n = 0; n < nsteps; ++n) {
        solver.step(s, forcing);
        record();
    }
    return res;
}

}  // namespace stochwave
