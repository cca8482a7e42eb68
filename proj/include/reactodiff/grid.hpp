#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "reactodiff/errors.hpp"
#include "reactodiff/linalg.hpp"

namespace reactodiff {

/// Uniform interior-node grid on an interval (d = 1) or a square box (d = 2).
/// Node i on an axis sits at lo + (i+1)·spacing; the boundary carries no
/// unknowns.
struct SpatialGrid {
    int dimension = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{1, 1};          // interior nodes per axis
    std::array<double, 2> spacing{0.0, 0.0};

    int total_nodes() const { return dimension == 1 ? n[0] : n[0] * n[1]; }

    double cell_volume() const {
        return dimension == 1 ? spacing[0] : spacing[0] * spacing[1];
    }

    double coord(int axis, int i) const { return lo[axis] + (i + 1) * spacing[axis]; }

    /// Coordinates of the flat node index (x-fastest ordering in 2-d).
    std::array<double, 2> node_coords(int flat) const {
        if (dimension == 1) return {coord(0, flat), 0.0};
        const int ix = flat % n[0];
        const int iy = flat / n[0];
        return {coord(0, ix), coord(1, iy)};
    }

    int flat_index(int ix, int iy) const { return ix + n[0] * iy; }

    bool operator==(const SpatialGrid&) const = default;
};

inline SpatialGrid build_grid(double domain_lo, double domain_hi, int n_interior, int dimension) {
    if (dimension != 1 && dimension != 2)
        throw UnsupportedDimension("build_grid: dimension must be 1 or 2");
    if (!(domain_hi > domain_lo))
        throw NonPositiveExtent("build_grid: domain_hi must exceed domain_lo");
    if (n_interior < 1)
        throw NonPositiveExtent("build_grid: need at least one interior node");
    SpatialGrid g;
    g.dimension = dimension;
    for (int a = 0; a < dimension; ++a) {
        g.lo[a] = domain_lo;
        g.hi[a] = domain_hi;
        g.n[a] = n_interior;
        g.spacing[a] = (domain_hi - domain_lo) / (n_interior + 1);
    }
    return g;
}

/// State vector sampled at the interior nodes.
struct Field {
    SpatialGrid grid;
    Vec values;
};

inline Field make_field(const SpatialGrid& g, double fill = 0.0) {
    return Field{g, Vec(static_cast<std::size_t>(g.total_nodes()), fill)};
}

inline Field make_field(const SpatialGrid& g, const std::function<double(double, double)>& f) {
    Field out = make_field(g);
    for (int i = 0; i < g.total_nodes(); ++i) {
        const auto xy = g.node_coords(i);
        out.values[static_cast<std::size_t>(i)] = f(xy[0], xy[1]);
    }
    return out;
}

inline void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size())
        throw GridMismatch(std::string(where) + ": fields live on different grids");
}

inline void require_finite(const Field& f, const char* where) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw InvalidField(std::string(where) + ": non-finite entry");
}

/// Discrete L2 norm: sqrt(sum v_i^2 · cell_volume).
inline double norm_h(const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v * v;
    return std::sqrt(acc * f.grid.cell_volume());
}

inline double inner_h(const Field& a, const Field& b) {
    require_same_grid(a, b, "inner_h");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return acc * a.grid.cell_volume();
}

inline double norm_sup(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Discrete L^p norm, the E-norm of the L^{2(2m+1)} mode.
inline double norm_lp(const Field& f, double p) {
    double acc = 0.0;
    for (double v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

inline Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b, "Field::operator+");
    Field c = a;
    for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] += b.values[i];
    return c;
}

inline Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b, "Field::operator-");
    Field c = a;
    for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] -= b.values[i];
    return c;
}

inline Field operator*(const Field& a, double s) {
    Field c = a;
    for (auto& v : c.values) v *= s;
    return c;
}

inline void axpy(double a, const Field& x, Field& y) {
    require_same_grid(x, y, "axpy");
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

} // namespace reactodiff
