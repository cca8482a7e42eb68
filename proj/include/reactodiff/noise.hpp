#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "reactodiff/grid.hpp"
#include "reactodiff/rng.hpp"
#include "reactodiff/time_grid.hpp"

namespace reactodiff {

/// Per-mode noise amplitudes b_k(t). The gamma kind realizes (−A)^{−γ} on the
/// (0,π) Dirichlet Laplacian eigenbasis: b_k = k^{−2γ}, so γ ≥ 0 smooths and
/// larger γ is easier — the inequality direction of the γ > d/4 − 1/2
/// condition.
struct BkSpec {
    enum class Kind { constant, power, gamma_fractional, custom };
    Kind kind = Kind::constant;
    double value = 1.0;     // constant amplitude
    double exponent = 0.0;  // power: b_k = value·k^{−exponent}
    double gamma = 0.0;     // gamma_fractional: b_k = k^{−2γ}
    std::function<double(int, double)> fn; // custom(k, t)

    double eval(int k, double t) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::power: return value * std::pow(static_cast<double>(k), -exponent);
            case Kind::gamma_fractional: return std::pow(static_cast<double>(k), -2.0 * gamma);
            case Kind::custom: return fn(k, t);
        }
        return 0.0;
    }
};

/// Basis truncation, the action of B(t), and the factorization exponent α for
/// the cylindrical Wiener layer. Basis Fields are H-orthonormal.
struct NoiseModel {
    std::vector<Field> basis;
    int K = 1;
    double alpha = 0.2;
    BkSpec bk;
    std::function<Field(double, const Field&)> b_action; // optional override

    bool is_zero() const { return bk.kind == BkSpec::Kind::constant && bk.value == 0.0 && !b_action; }

    /// B(t) applied to Σ_k inc_k e_k, accumulated into `out` (preallocated by
    /// the stepping loops). Diagonal fast path unless an action callback is
    /// installed.
    void accumulate_B(double t, const Vec& mode_increments, Vec& out) const {
        if (b_action) {
            Field w = make_field(basis.front().grid);
            for (int k = 0; k < K; ++k)
                axpy(mode_increments[static_cast<std::size_t>(k)], basis[static_cast<std::size_t>(k)], w);
            const Field bw = b_action(t, w);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += bw.values[i];
            return;
        }
        for (int k = 0; k < K; ++k) {
            const double amp = bk.eval(k + 1, t) * mode_increments[static_cast<std::size_t>(k)];
            if (amp == 0.0) continue;
            const Vec& ek = basis[static_cast<std::size_t>(k)].values;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += amp * ek[i];
        }
    }

    Field apply_B(double t, const Vec& mode_increments) const {
        Field out = make_field(basis.front().grid);
        accumulate_B(t, mode_increments, out.values);
        return out;
    }
};

/// Discrete sine basis — the eigenvectors of the assembled Dirichlet
/// Laplacian — normalized to ‖e_k‖_H = 1. Exactly H-orthonormal up to
/// roundoff, which makes the diagonal oracles exact.
inline std::vector<Field> sine_basis(const SpatialGrid& grid, int K) {
    std::vector<Field> basis;
    basis.reserve(static_cast<std::size_t>(K));
    if (grid.dimension == 1) {
        const int n = grid.n[0];
        const double L = grid.hi[0] - grid.lo[0];
        for (int k = 1; k <= K; ++k) {
            Field e = make_field(grid);
            for (int i = 0; i < n; ++i)
                e.values[static_cast<std::size_t>(i)] =
                    std::sin(k * 3.14159265358979323846 * (i + 1) / (n + 1));
            const double nrm = norm_h(e);
            for (auto& v : e.values) v /= nrm;
            basis.push_back(std::move(e));
            (void)L;
        }
        return basis;
    }
    // d = 2: tensor products ordered by kx² + ky², then kx.
    struct ModeRef { int kx, ky; double order; };
    std::vector<ModeRef> modes;
    const int cap = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(K)))) + 2;
    for (int kx = 1; kx <= cap; ++kx)
        for (int ky = 1; ky <= cap; ++ky)
            modes.push_back({kx, ky, static_cast<double>(kx * kx + ky * ky) + 1e-3 * kx});
    std::sort(modes.begin(), modes.end(), [](const ModeRef& a, const ModeRef& b) {
        return a.order < b.order;
    });
    for (int k = 0; k < K; ++k) {
        const ModeRef m = modes[static_cast<std::size_t>(k)];
        Field e = make_field(grid);
        for (int i = 0; i < grid.total_nodes(); ++i) {
            const int ix = i % grid.n[0], iy = i / grid.n[0];
            e.values[static_cast<std::size_t>(i)] =
                std::sin(m.kx * 3.14159265358979323846 * (ix + 1) / (grid.n[0] + 1)) *
                std::sin(m.ky * 3.14159265358979323846 * (iy + 1) / (grid.n[1] + 1));
        }
        const double nrm = norm_h(e);
        for (auto& v : e.values) v /= nrm;
        basis.push_back(std::move(e));
    }
    return basis;
}

inline NoiseModel make_sine_noise_model(const SpatialGrid& grid, int K, double alpha, BkSpec bk) {
    if (K < 1) throw NonPositiveExtent("make_sine_noise_model: K must be >= 1");
    if (!(alpha > 0.0 && alpha < 0.5))
        throw AlphaOutOfRange("make_sine_noise_model: alpha must lie in (0, 1/2)");
    NoiseModel m;
    m.basis = sine_basis(grid, K);
    m.K = K;
    m.alpha = alpha;
    m.bk = std::move(bk);
    return m;
}

/// Gaussian increment table: per (step, mode) draws scaled by sqrt(dt),
/// reproducible bit-for-bit from (seed, grid, K). Generation order is fixed:
/// steps outer, modes inner.
struct WienerPath {
    std::uint64_t seed = 0;
    TimeGrid time_grid;
    int K = 1;
    Vec increments; // [step*K + mode]

    double inc(int step, int mode) const {
        return increments[static_cast<std::size_t>(step) * static_cast<std::size_t>(K) +
                          static_cast<std::size_t>(mode)];
    }
};

inline WienerPath sample_wiener(const NoiseModel& model, const TimeGrid& tg, std::uint64_t seed) {
    WienerPath p;
    p.seed = seed;
    p.time_grid = tg;
    p.K = model.K;
    const double sdt = std::sqrt(tg.dt());
    p.increments.resize(static_cast<std::size_t>(tg.n_steps) * static_cast<std::size_t>(model.K));
    GaussianStream g(seed);
    for (auto& v : p.increments) v = sdt * g.next();
    return p;
}

/// Restriction of a fine path to a coarser grid: sums of consecutive
/// increments, so both resolutions see the same Brownian path.
inline WienerPath coarsen(const WienerPath& fine, int factor) {
    if (fine.time_grid.n_steps % factor != 0)
        throw DimensionMismatch("coarsen: factor must divide the step count");
    WienerPath c;
    c.seed = fine.seed;
    c.K = fine.K;
    c.time_grid = TimeGrid{fine.time_grid.s, fine.time_grid.T, fine.time_grid.n_steps / factor};
    c.increments.assign(static_cast<std::size_t>(c.time_grid.n_steps) *
                            static_cast<std::size_t>(c.K), 0.0);
    for (int s = 0; s < fine.time_grid.n_steps; ++s)
        for (int k = 0; k < fine.K; ++k)
            c.increments[static_cast<std::size_t>(s / factor) * static_cast<std::size_t>(c.K) +
                         static_cast<std::size_t>(k)] += fine.inc(s, k);
    return c;
}

/// Splittable seeds for independent paths: path i depends only on
/// (master_seed, i).
struct PathEnsemble {
    std::uint64_t master_seed = 0;
    int n_paths = 1;

    std::uint64_t path_seed(int i) const {
        return derive_seed(master_seed, static_cast<std::uint64_t>(i));
    }
};

} // namespace reactodiff
