#pragma once

#include <string>
#include <vector>

#include "reactodiff/errors.hpp"
#include "reactodiff/grid.hpp"

namespace reactodiff {

/// Uniform time grid on [s, T]. node(i) always uses the same arithmetic so
/// times are bit-identical wherever they are recomputed (factorization caches
/// key on them).
struct TimeGrid {
    double s = 0.0;
    double T = 1.0;
    int n_steps = 1;

    double dt() const { return (T - s) / n_steps; }
    double node(int i) const { return s + (T - s) * i / n_steps; }
    int n_nodes() const { return n_steps + 1; }
};

inline TimeGrid make_time_grid(double s, double T, int n_steps) {
    if (T < s) throw NegativeInterval("make_time_grid: T < s");
    if (n_steps < 1 || T == s) throw NonPositiveExtent("make_time_grid: need n_steps >= 1 and T > s");
    return TimeGrid{s, T, n_steps};
}

struct SolveMeta {
    double k = 0.0;       // Yosida index of the reaction (0 when exact/none)
    double n = 0.0;       // linear Yosida index (0 when stepping on A itself)
    std::string scheme;
    std::string mode;
    double tol = 0.0;
    int sweeps = 0;       // total Picard sweeps
    double cascade_distance = 0.0;
};

/// Time-indexed sequence of Fields, one per node; states[0] is the datum.
struct Trajectory {
    TimeGrid time_grid;
    std::vector<Field> states;
    SolveMeta meta;

    const Field& at(int i) const { return states[static_cast<std::size_t>(i)]; }
    const Field& back() const { return states.back(); }
};

/// Grid-aligned forcing samples f(t_i); in the stochastic layer this slot
/// carries the convolution Z.
struct ForcingPath {
    TimeGrid time_grid;
    std::vector<Field> values;

    static ForcingPath zero(const TimeGrid& tg, const SpatialGrid& g) {
        ForcingPath f;
        f.time_grid = tg;
        f.values.assign(static_cast<std::size_t>(tg.n_nodes()), make_field(g));
        return f;
    }

    bool is_zero = false;
    const Field& at(int i) const { return values[static_cast<std::size_t>(i)]; }
};

inline ForcingPath zero_forcing(const TimeGrid& tg, const SpatialGrid& g) {
    ForcingPath f = ForcingPath::zero(tg, g);
    f.is_zero = true;
    return f;
}

inline double sup_distance(const Trajectory& a, const Trajectory& b,
                           double (*norm)(const Field&) = &norm_sup) {
    if (a.states.size() != b.states.size())
        throw GridMismatch("sup_distance: trajectories have different lengths");
    double d = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        d = std::max(d, norm(a.states[i] - b.states[i]));
    return d;
}

} // namespace reactodiff
