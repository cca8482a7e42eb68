#pragma once

#include <vector>

#include "reactodiff/linalg.hpp"

namespace reactodiff {

/// One separable term p(t)·q(ξ₁)·r(ξ₂) of a coefficient function. Keeping
/// coefficients as sums of such terms makes configs serializable without an
/// expression language.
struct SeparableTerm {
    Vec poly_t{1.0};
    Vec poly_x{1.0};
    Vec poly_y{1.0};
};

class ScalarCoefficient {
public:
    ScalarCoefficient() = default;
    explicit ScalarCoefficient(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {}

    static ScalarCoefficient zero() { return ScalarCoefficient(); }

    static ScalarCoefficient constant(double v) {
        if (v == 0.0) return zero();
        SeparableTerm t;
        t.poly_t = {v};
        return ScalarCoefficient({t});
    }

    double operator()(double t, double x, double y = 0.0) const {
        double acc = 0.0;
        for (const auto& term : terms_)
            acc += eval_poly(term.poly_t, t) * eval_poly(term.poly_x, x) * eval_poly(term.poly_y, y);
        return acc;
    }

    bool is_zero() const { return terms_.empty(); }

    bool time_dependent() const {
        for (const auto& term : terms_)
            for (std::size_t i = 1; i < term.poly_t.size(); ++i)
                if (term.poly_t[i] != 0.0) return true;
        return false;
    }

    /// Sum over terms of max |p| · max |q| · max |r| on [0,T] × box; a cheap
    /// upper bound for bracket sizing in the scalar resolvent.
    double bound_abs(double t_max, double x_max, double y_max) const {
        double acc = 0.0;
        for (const auto& term : terms_)
            acc += bound_poly(term.poly_t, t_max) * bound_poly(term.poly_x, x_max) *
                   bound_poly(term.poly_y, y_max);
        return acc;
    }

    ScalarCoefficient& add_constant(double v) {
        if (v != 0.0) {
            SeparableTerm t;
            t.poly_t = {v};
            terms_.push_back(t);
        }
        return *this;
    }

    const std::vector<SeparableTerm>& terms() const { return terms_; }

private:
    static double eval_poly(const Vec& c, double s) {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
        return acc;
    }

    static double bound_poly(const Vec& c, double s_max) {
        double acc = 0.0, p = 1.0;
        const double a = std::abs(s_max);
        for (double ci : c) {
            acc += std::abs(ci) * p;
            p *= a;
        }
        return acc;
    }

    std::vector<SeparableTerm> terms_;
};

enum class BcKind { dirichlet, neumann, robin };

/// Robin draws its boundary coefficient from a0, mirroring the boundary
/// operator's definition.
struct BoundaryCondition {
    BcKind kind = BcKind::dirichlet;
};

/// Coefficients of the second-order operator
///   a11 D²_xx + a22 D²_yy + 2 a12 D²_xy + drift1 D_x + drift2 D_y + a0.
/// a12 is stored once, so a_ij = a_ji holds by construction.
struct CoefficientSet {
    int dimension = 1;
    ScalarCoefficient a11 = ScalarCoefficient::constant(1.0);
    ScalarCoefficient a22 = ScalarCoefficient::zero();
    ScalarCoefficient a12 = ScalarCoefficient::zero();
    ScalarCoefficient drift1 = ScalarCoefficient::zero();
    ScalarCoefficient drift2 = ScalarCoefficient::zero();
    ScalarCoefficient a0 = ScalarCoefficient::zero();
    double ellipticity_floor = 1e-8;

    bool time_dependent() const {
        return a11.time_dependent() || a22.time_dependent() || a12.time_dependent() ||
               drift1.time_dependent() || drift2.time_dependent() || a0.time_dependent();
    }
};

inline CoefficientSet laplacian_coefficients(int dimension = 1, double diffusivity = 1.0) {
    CoefficientSet c;
    c.dimension = dimension;
    c.a11 = ScalarCoefficient::constant(diffusivity);
    if (dimension == 2) c.a22 = ScalarCoefficient::constant(diffusivity);
    c.ellipticity_floor = diffusivity * 0.5;
    return c;
}

} // namespace reactodiff
