#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "reactodiff/assembly.hpp"
#include "reactodiff/grid.hpp"
#include "reactodiff/reaction.hpp"

namespace reactodiff {

struct ResolventResult {
    Field value;
    int iterations = 0;   // max Newton iterations over the nodes
    double residual = 0.0; // sup-norm residual of the defining equation
};

namespace detail {

/// Root of a strictly increasing scalar map g on an expanding bracket around
/// `center`, by Newton with bisection fallback. g' >= 1 is guaranteed by the
/// callers (k > ζ resp. dt·ζ < 1), so a sign change always shows up.
template <typename G, typename DG>
inline double increasing_root(G g, DG dg, double center, double half_width, double tol,
                              int max_iter, int& iters_out) {
    double lo = center - half_width, hi = center + half_width;
    double glo = g(lo), ghi = g(hi);
    int expand = 0;
    while (glo > 0.0 || ghi < 0.0) {
        half_width *= 2.0;
        lo = center - half_width;
        hi = center + half_width;
        glo = g(lo);
        ghi = g(hi);
        if (++expand > 200) throw NoConvergence("scalar root: bracket expansion failed");
    }
    double y = std::clamp(center, lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        const double gy = g(y);
        if (std::abs(gy) <= tol) {
            iters_out = std::max(iters_out, it);
            return y;
        }
        if (gy > 0.0) hi = y; else lo = y;
        const double slope = dg(y);
        double next = (slope > 0.0) ? y - gy / slope : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        y = next;
    }
    throw NoConvergence("scalar root: iteration cap exceeded (tolerance/bracket misconfigured)");
}

} // namespace detail

/// Nonlinear Yosida resolvent: per node the unique real root y of
///   y − (1/k)(b(t,ξ,y) − ζ y) = x_node.
/// The map is strictly increasing in y because k > ζ, so the root is unique
/// and bracket expansion always succeeds.
inline ResolventResult resolvent_J(const ReactionPolynomial& poly, double k, double t,
                                   const Field& x, double resolvent_tol = 1e-12,
                                   int max_iter = 100) {
    if (!(k > poly.zeta))
        throw IndexBelowShift("resolvent_J: requires k > zeta");
    ResolventResult res;
    res.value = x;
    const double radius = norm_sup(x) + 1.0;
    const double tmax = std::abs(t);
    const double xmax = std::max(std::abs(x.grid.lo[0]), std::abs(x.grid.hi[0]));
    const double ymax = x.grid.dimension == 2
                            ? std::max(std::abs(x.grid.lo[1]), std::abs(x.grid.hi[1]))
                            : 0.0;
    const double half_width = poly.bound_abs(tmax, xmax, ymax, radius) / k + 1e-12;
    int iters = 0;
    for (int i = 0; i < x.grid.total_nodes(); ++i) {
        const auto xy = x.grid.node_coords(i);
        const double xi = x.values[static_cast<std::size_t>(i)];
        auto g = [&](double y) { return y - (poly.b(t, xy[0], xy[1], y) - poly.zeta * y) / k - xi; };
        auto dg = [&](double y) { return 1.0 - (poly.db_ds(t, xy[0], xy[1], y) - poly.zeta) / k; };
        res.value.values[static_cast<std::size_t>(i)] =
            detail::increasing_root(g, dg, xi, half_width, resolvent_tol, max_iter, iters);
    }
    res.iterations = iters;
    double resid = 0.0;
    for (int i = 0; i < x.grid.total_nodes(); ++i) {
        const auto xy = x.grid.node_coords(i);
        const double j = res.value.values[static_cast<std::size_t>(i)];
        resid = std::max(resid, std::abs(j - (poly.b(t, xy[0], xy[1], j) - poly.zeta * j) / k -
                                         x.values[static_cast<std::size_t>(i)]));
    }
    res.residual = resid;
    return res;
}

/// F_k(t,x) = F(t, J_k(t,x)).
inline Field yosida_F(const ReactionPolynomial& poly, double k, double t, const Field& x,
                      double resolvent_tol = 1e-12, int max_iter = 100) {
    return eval_reaction(poly, t, resolvent_J(poly, k, t, x, resolvent_tol, max_iter).value);
}

/// Linear Yosida approximant A_n = n A (nI − A)^{-1} = n² (nI − A)^{-1} − n I,
/// computed from one LU factorization. Bounded for every n when A is
/// (shifted) dissipative.
inline AssembledOperator linear_yosida(const AssembledOperator& op, double n) {
    if (!(n > 0.0)) throw SingularResolvent("linear_yosida: index must be positive");
    const std::size_t dim = op.matrix.rows();
    Matrix shifted(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            shifted(i, j) = (i == j ? n : 0.0) - op.matrix(i, j);
    DenseLU lu;
    try {
        lu = DenseLU::factor(std::move(shifted));
    } catch (const SingularMatrix&) {
        throw SingularResolvent("linear_yosida: nI - A singular (input not shifted dissipative?)");
    }
    AssembledOperator out = op;
    out.tridiagonal = false;
    out.matrix = Matrix(dim, dim);
    Vec col(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) col[i] = (i == j) ? 1.0 : 0.0;
        lu.solve_in_place(col);
        for (std::size_t i = 0; i < dim; ++i)
            out.matrix(i, j) = n * n * col[i] - (i == j ? n : 0.0);
    }
    return out;
}

} // namespace reactodiff
