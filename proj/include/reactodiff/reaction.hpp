#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "reactodiff/coefficients.hpp"
#include "reactodiff/grid.hpp"
#include "reactodiff/polynomial.hpp"

namespace reactodiff {

/// Nemytskii polynomial reaction
///   b(t, ξ, s) = −C_{2m+1}(t,ξ) s^{2m+1} + Σ_{k≤2m} C_k(t,ξ) s^k,
/// with inf C_{2m+1} > leading_floor > 0. zeta is the dissipativity shift of
/// b − ζ·s; it is resolved at construction (computed or user-supplied).
struct ReactionPolynomial {
    int m = 1;
    std::vector<ScalarCoefficient> C;  // size 2m+2, index k = power of s
    double leading_floor = 0.0;
    double zeta = 0.0;
    bool zeta_user_supplied = false;

    int degree() const { return 2 * m + 1; }

    double b(double t, double x, double y, double s) const {
        const int d = degree();
        double acc = -C[static_cast<std::size_t>(d)](t, x, y);
        for (int k = d - 1; k >= 0; --k) acc = acc * s + C[static_cast<std::size_t>(k)](t, x, y);
        return acc;
    }

    double db_ds(double t, double x, double y, double s) const {
        const int d = degree();
        double acc = -d * C[static_cast<std::size_t>(d)](t, x, y);
        for (int k = d - 1; k >= 1; --k) acc = acc * s + k * C[static_cast<std::size_t>(k)](t, x, y);
        return acc;
    }

    /// Coefficients of s ↦ b(t,ξ,s) frozen at one (t,ξ).
    Poly poly_in_s(double t, double x, double y) const {
        Poly p;
        p.c.resize(static_cast<std::size_t>(degree()) + 1);
        for (int k = 0; k <= degree(); ++k)
            p.c[static_cast<std::size_t>(k)] = C[static_cast<std::size_t>(k)](t, x, y);
        p.c.back() = -p.c.back();
        return p;
    }

    /// Upper bound for |b(t,·,s) − ζ s| over |s| ≤ radius, any node in the box.
    double bound_abs(double t_max, double x_max, double y_max, double radius) const {
        double acc = std::abs(zeta) * radius;
        double p = 1.0;
        for (int k = 0; k <= degree(); ++k) {
            acc += C[static_cast<std::size_t>(k)].bound_abs(t_max, x_max, y_max) * p;
            p *= radius;
        }
        return acc;
    }

    /// The dissipativity translation Ã = A − αI, F̃ = F + αI realized inside the
    /// type: adds α·s to b and α to ζ.
    ReactionPolynomial shifted_by(double alpha) const {
        ReactionPolynomial out = *this;
        if (alpha != 0.0) {
            out.C[1].add_constant(alpha);
            out.zeta += alpha;
        }
        return out;
    }
};

/// Convenience builder for constant-coefficient reactions: coeffs[k] is the
/// plain coefficient of s^k in b (so cubic −s³ + s is {0, 1, 0, 1} with m = 1,
/// since the leading entry is stored as C_{2m+1} with the minus sign applied
/// by b()).
inline ReactionPolynomial make_constant_reaction(int m, const Vec& b_coeffs_with_leading_positive,
                                                 double leading_floor, double zeta) {
    ReactionPolynomial r;
    r.m = m;
    r.leading_floor = leading_floor;
    r.zeta = zeta;
    r.C.resize(static_cast<std::size_t>(2 * m + 2));
    for (int k = 0; k <= 2 * m + 1; ++k)
        r.C[static_cast<std::size_t>(k)] =
            ScalarCoefficient::constant(b_coeffs_with_leading_positive[static_cast<std::size_t>(k)]);
    return r;
}

inline Field eval_reaction(const ReactionPolynomial& poly, double t, const Field& x) {
    Field out = x;
    for (int i = 0; i < x.grid.total_nodes(); ++i) {
        const auto xy = x.grid.node_coords(i);
        out.values[static_cast<std::size_t>(i)] =
            poly.b(t, xy[0], xy[1], x.values[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Sampling lattice for coefficient suprema: the grid nodes crossed with a
/// list of times.
struct SamplingLattice {
    std::vector<double> times;
};

inline SamplingLattice uniform_times(double s, double T, int count) {
    SamplingLattice lat;
    lat.times.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        lat.times.push_back(count == 1 ? s : s + (T - s) * i / (count - 1));
    return lat;
}

/// ζ = max over sampled (t,ξ) of the global maximum of s ↦ ∂_s b. The max over
/// s is located through the real roots of ∂²_s b; since the leading term of
/// ∂_s b is negative of even degree, the supremum sits at a critical point.
inline double dissipativity_constant(const ReactionPolynomial& poly, const SpatialGrid& grid,
                                     const SamplingLattice& lattice) {
    double zeta = -std::numeric_limits<double>::infinity();
    for (double t : lattice.times) {
        for (int i = 0; i < grid.total_nodes(); ++i) {
            const auto xy = grid.node_coords(i);
            if (poly.C[static_cast<std::size_t>(poly.degree())](t, xy[0], xy[1]) < poly.leading_floor)
                throw LeadingCoefficientViolation(
                    "dissipativity_constant: C_{2m+1} dips below the leading floor");
            const Poly dbds = poly.poly_in_s(t, xy[0], xy[1]).derivative();
            if (dbds.degree() <= 0) {
                zeta = std::max(zeta, dbds.c.empty() ? 0.0 : dbds.c[0]);
                continue;
            }
            double local = -std::numeric_limits<double>::infinity();
            for (double root : real_roots(dbds.derivative()))
                local = std::max(local, dbds.eval(root));
            if (!std::isfinite(local)) local = dbds.eval(0.0);
            zeta = std::max(zeta, local);
        }
    }
    return zeta;
}

} // namespace reactodiff
