#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "reactodiff/linalg.hpp"

namespace reactodiff {

/// Real polynomial in one variable, c[i] the coefficient of s^i.
struct Poly {
    Vec c;

    double eval(double s) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
        return acc;
    }

    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) return d;
        d.c.resize(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i)
            d.c[i - 1] = static_cast<double>(i) * c[i];
        return d;
    }

    /// Degree after trimming numerically-zero leading coefficients.
    int degree(double tol = 0.0) const {
        for (std::size_t i = c.size(); i-- > 0;)
            if (std::abs(c[i]) > tol) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline double poly_bisect(const Poly& p, double lo, double hi) {
    double flo = p.eval(lo);
    if (flo == 0.0) return lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p.eval(mid);
        if (fm == 0.0 || hi - lo < 1e-15 * (1.0 + std::abs(mid))) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// All real roots of p, found by recursing on the derivative: p is monotone
/// between consecutive critical points, so each sign change brackets exactly
/// one root. Exact up to bisection tolerance — no grid search involved.
inline std::vector<double> real_roots(const Poly& p) {
    const int deg = p.degree(0.0);
    std::vector<double> roots;
    if (deg <= 0) return roots;
    const double lead = p.c[static_cast<std::size_t>(deg)];
    if (deg == 1) {
        roots.push_back(-p.c[0] / lead);
        return roots;
    }
    // Cauchy bound on root magnitudes
    double bound = 0.0;
    for (int i = 0; i < deg; ++i) bound = std::max(bound, std::abs(p.c[static_cast<std::size_t>(i)] / lead));
    bound += 1.0;

    std::vector<double> crit = real_roots(p.derivative());
    std::sort(crit.begin(), crit.end());
    std::vector<double> grid;
    grid.push_back(-bound);
    for (double c : crit)
        if (c > -bound && c < bound) grid.push_back(c);
    grid.push_back(bound);

    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i], b = grid[i + 1];
        const double fa = p.eval(a), fb = p.eval(b);
        const double scale = 1.0 + std::abs(fa) + std::abs(fb);
        if (fa == 0.0) roots.push_back(a);
        if ((fa < 0) != (fb < 0)) {
            roots.push_back(detail::poly_bisect(p, a, b));
        } else if (i + 1 < grid.size() - 1 && std::abs(p.eval(b)) < 1e-12 * scale) {
            roots.push_back(b); // tangential root at a critical point
        }
    }
    if (!roots.empty() && p.eval(grid.back()) == 0.0) roots.push_back(grid.back());
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12 * (1.0 + std::abs(a)); }),
                roots.end());
    return roots;
}

} // namespace reactodiff
