#include <doctest.h>

#include <cmath>

#include "reactodiff/assembly.hpp"
#include "reactodiff/reaction.hpp"
#include "reactodiff/rng.hpp"
#include "reactodiff/yosida.hpp"

using namespace reactodiff;

namespace {
constexpr double kPi = 3.14159265358979323846;

// b(s) = -s^3
ReactionPolynomial cubic() { return make_constant_reaction(1, {0.0, 0.0, 0.0, 1.0}, 0.5, 0.0); }
// b(s) = -s^3 + s, zeta = 1
ReactionPolynomial chafee_infante() { return make_constant_reaction(1, {0.0, 1.0, 0.0, 1.0}, 0.5, 1.0); }

Field random_field(const SpatialGrid& g, GaussianStream& rng, double scale = 1.0) {
    Field f = make_field(g);
    for (auto& v : f.values) v = scale * rng.next();
    return f;
}
} // namespace

TEST_CASE("eval_reaction: pointwise polynomial evaluation") {
    const SpatialGrid g = build_grid(0.0, kPi, 8, 1);
    const Field two = make_field(g, 2.0);
    const Field r1 = eval_reaction(cubic(), 0.0, two);
    for (double v : r1.values) CHECK(v == doctest::Approx(-8.0).epsilon(1e-15));

    // b(t,ξ,s) = -(1+t) s^3 at t = 1: C3 = 1 + t
    ReactionPolynomial tdep = cubic();
    SeparableTerm lin;
    lin.poly_t = {1.0, 1.0};
    tdep.C[3] = ScalarCoefficient({lin});
    const Field r2 = eval_reaction(tdep, 1.0, two);
    for (double v : r2.values) CHECK(v == doctest::Approx(-16.0).epsilon(1e-15));

    ReactionPolynomial ci = chafee_infante();
    const Field zero = make_field(g, 0.0);
    CHECK(norm_sup(eval_reaction(ci, 0.3, zero)) == 0.0);
}

TEST_CASE("dissipativity_constant: exact root-based maxima of ∂_s b") {
    const SpatialGrid g = build_grid(0.0, kPi, 4, 1);
    const SamplingLattice lat = uniform_times(0.0, 1.0, 3);

    CHECK(dissipativity_constant(cubic(), g, lat) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dissipativity_constant(chafee_infante(), g, lat) == doctest::Approx(1.0).epsilon(1e-12));

    // b(s) = -s^3 + 3 s^2: ∂b = -3s² + 6s, max at s = 1 → 3
    const ReactionPolynomial r = make_constant_reaction(1, {0.0, 0.0, 3.0, 1.0}, 0.5, 3.0);
    CHECK(dissipativity_constant(r, g, lat) == doctest::Approx(3.0).epsilon(1e-12));

    ReactionPolynomial bad = cubic();
    bad.C[3] = ScalarCoefficient::constant(0.1); // below the declared floor 0.5
    CHECK_THROWS_AS(dissipativity_constant(bad, g, lat), LeadingCoefficientViolation);
}

TEST_CASE("resolvent_J: exact roots, fixed point, 1/k decay with the proximity constant") {
    const SpatialGrid g = build_grid(0.0, kPi, 6, 1);
    const ReactionPolynomial b3 = cubic();

    // b(s) = -s³, ζ = 0, k = 1, x ≡ 2 → J ≡ 1 (1 + 1³ = 2)
    const ResolventResult r = resolvent_J(b3, 1.0, 0.0, make_field(g, 2.0));
    for (double v : r.value.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.residual <= 1e-12);

    // fixed point: b(t,·,0) = 0, x ≡ 0 → J ≡ 0
    const ResolventResult r0 = resolvent_J(chafee_infante(), 3.0, 0.5, make_field(g, 0.0));
    CHECK(norm_sup(r0.value) <= 1e-12);

    // ‖J_k − x‖∞ ≤ (1/k)‖F(x)‖∞ = 8/k, decreasing at rate 1/k
    const Field x2 = make_field(g, 2.0);
    Vec ks{10.0, 100.0, 1000.0, 10000.0}, dists;
    for (double k : ks) {
        const ResolventResult rk = resolvent_J(b3, k, 0.0, x2);
        const double d = norm_sup(rk.value - x2);
        CHECK(d <= 8.0 / k + 1e-12);
        dists.push_back(d);
    }
    const double slope = fit_loglog_slope(ks, dists);
    CHECK(slope > -1.2);
    CHECK(slope < -0.8);

    CHECK_THROWS_AS(resolvent_J(chafee_infante(), 0.5, 0.0, x2), IndexBelowShift);
}

TEST_CASE("resolvent fixed point at a nonzero equilibrium") {
    // b(s) = zeta·s − (s − x0)³ has b(x0) = zeta·x0 and max ∂b = zeta at x0,
    // so J_k must leave the constant field x0 untouched for every k > zeta
    const double x0 = 0.5, zeta = 1.0;
    const ReactionPolynomial r =
        make_constant_reaction(1, {x0 * x0 * x0, zeta - 3.0 * x0 * x0, 3.0 * x0, 1.0}, 0.5, zeta);
    const SpatialGrid g = build_grid(0.0, kPi, 6, 1);
    const SamplingLattice lat = uniform_times(0.0, 1.0, 2);
    CHECK(dissipativity_constant(r, g, lat) == doctest::Approx(zeta).epsilon(1e-12));
    const Field eq = make_field(g, x0);
    for (double k : {2.0, 8.0, 64.0}) {
        const ResolventResult res = resolvent_J(r, k, 0.4, eq);
        CHECK(norm_sup(res.value - eq) <= 1e-11);
    }
}

TEST_CASE("yosida_F: regularized map values and fixed point") {
    const SpatialGrid g = build_grid(0.0, kPi, 5, 1);
    const Field f1 = yosida_F(cubic(), 1.0, 0.0, make_field(g, 2.0));
    for (double v : f1.values) CHECK(v == doctest::Approx(-1.0).epsilon(1e-11));
    CHECK(norm_sup(yosida_F(chafee_infante(), 4.0, 0.1, make_field(g, 0.0))) <= 1e-12);
}

TEST_CASE("yosida approximation inequalities hold on random samples in both norms") {
    const SpatialGrid g = build_grid(0.0, kPi, 16, 1);
    const ReactionPolynomial ci = chafee_infante();
    const double zeta = ci.zeta;
    GaussianStream rng(314);
    const double slack = 1e-10;

    for (int trial = 0; trial < 300; ++trial) {
        const Field x = random_field(g, rng, 1.5);
        const Field y = random_field(g, rng, 1.5);
        // log-uniform indices spanning zeta + 1 up to 1e4
        const double k = (1.0 + zeta) * std::pow(10.0, 3.7 * rng.uniform01());
        const double h = (1.0 + zeta) * std::pow(10.0, 3.7 * rng.uniform01());
        const double t = rng.uniform01();

        const Field jx = resolvent_J(ci, k, t, x).value;
        const Field jy = resolvent_J(ci, k, t, y).value;
        const Field jhy = resolvent_J(ci, h, t, y).value;
        const Field fkx = eval_reaction(ci, t, jx);
        const Field fky = eval_reaction(ci, t, jy);
        const Field fx = eval_reaction(ci, t, x);
        const Field fy = eval_reaction(ci, t, y);

        for (auto norm : {&norm_sup, &norm_h}) {
            // resolvent proximity
            CHECK(norm(jx - x) <= (norm(fx) + std::max(0.0, zeta) * norm(x)) / k + slack);
            // regularized growth bound
            CHECK(norm(fkx) <= 3.0 * (norm(fx) + std::max(0.0, zeta) * norm(x)) + slack);
            // global 3k-Lipschitz bound
            CHECK(norm(fkx - fky) <= 3.0 * k * norm(x - y) + slack);
            // resolvent nonexpansiveness
            CHECK(norm(jx - jy) <= norm(x - y) + slack);
            // cross-index bound
            CHECK(norm(jx - jhy) <=
                  norm(x - y) +
                      (1.0 / k + 1.0 / h) * (norm(fy) + norm(fx) + std::abs(zeta) * norm(y) +
                                             std::abs(zeta) * norm(x)) +
                      slack);
        }
    }
}

TEST_CASE("hilbert cross estimate: fitted C_zeta is stable") {
    const SpatialGrid g = build_grid(0.0, kPi, 12, 1);
    const ReactionPolynomial ci = chafee_infante();
    const double zeta = ci.zeta;
    GaussianStream rng(2718);

    auto ratio = [&](const Field& x, const Field& y, double k, double h, double t) {
        const Field fkx = eval_reaction(ci, t, resolvent_J(ci, k, t, x).value);
        const Field fhy = eval_reaction(ci, t, resolvent_J(ci, h, t, y).value);
        const double lhs = std::abs(inner_h(fkx - fhy, x - y));
        const double base = std::abs(zeta) * norm_h(x - y) * norm_h(x - y);
        const double fx = norm_h(eval_reaction(ci, t, x));
        const double fy = norm_h(eval_reaction(ci, t, y));
        const double weight = (1.0 / k + 1.0 / h) *
                              (fx * fx + fy * fy + norm_h(x) * norm_h(x) + norm_h(y) * norm_h(y));
        return std::max(0.0, lhs - base) / weight;
    };

    double c_fit = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Field x = random_field(g, rng);
        const Field y = random_field(g, rng);
        const double k = 2.0 + 30.0 * rng.uniform01();
        const double h = 2.0 + 30.0 * rng.uniform01();
        c_fit = std::max(c_fit, ratio(x, y, k, h, 0.5));
    }
    CHECK(std::isfinite(c_fit));
    MESSAGE("fitted C_zeta (max over 100 fitting samples): ", c_fit);
    for (int trial = 0; trial < 100; ++trial) {
        const Field x = random_field(g, rng);
        const Field y = random_field(g, rng);
        const double k = 2.0 + 30.0 * rng.uniform01();
        const double h = 2.0 + 30.0 * rng.uniform01();
        CHECK(ratio(x, y, k, h, 0.5) <= 2.0 * c_fit + 1e-12);
    }
}

TEST_CASE("linear_yosida: scalar algebra, 1/n rate, spectral mapping") {
    // scalar A = -4, n = 4 → A_4 = -2
    AssembledOperator scalar;
    scalar.grid = build_grid(0.0, 1.0, 1, 1);
    scalar.tridiagonal = true;
    scalar.matrix = Matrix(1, 1);
    scalar.matrix(0, 0) = -4.0;
    CHECK(linear_yosida(scalar, 4.0).matrix(0, 0) == doctest::Approx(-2.0).epsilon(1e-14));

    // scalar A = -λ: A_n → -λ at rate λ²/n, exactly λ²/(n+λ)
    const double lam = 3.0;
    scalar.matrix(0, 0) = -lam;
    Vec ns{100.0, 1000.0, 10000.0}, errs;
    for (double n : ns) {
        const double an = linear_yosida(scalar, n).matrix(0, 0);
        CHECK(an == doctest::Approx(-n * lam / (n + lam)).epsilon(1e-13));
        const double err = std::abs(an + lam);
        CHECK(err == doctest::Approx(lam * lam / (n + lam)).epsilon(1e-10));
        CHECK(err <= lam * lam / n);
        errs.push_back(err);
    }
    CHECK(fit_loglog_slope(ns, errs) == doctest::Approx(-1.0).epsilon(0.02));

    // Dirichlet Laplacian eigenvector: A_n e_j = (n λ_j /(n − λ_j)) e_j
    const SpatialGrid g = build_grid(0.0, kPi, 20, 1);
    const AssembledOperator lap =
        assemble_operator(laplacian_coefficients(1), g, BoundaryCondition{BcKind::dirichlet}, 0.0);
    const AssembledOperator an = linear_yosida(lap, 50.0);
    const double h = g.spacing[0];
    for (int j = 1; j <= 3; ++j) {
        const double lam_j = -(2.0 / (h * h)) * (1.0 - std::cos(j * h));
        const Field ej = make_field(g, [j](double x, double) { return std::sin(j * x); });
        const Field anej = apply_operator(an, ej);
        const double expected = 50.0 * lam_j / (50.0 - lam_j);
        for (std::size_t i = 0; i < ej.values.size(); ++i)
            CHECK(anej.values[i] == doctest::Approx(expected * ej.values[i])
                                        .epsilon(1e-10)
                                        .scale(std::abs(expected)));
    }

    // eigenvalues of A_n equal the spectral map of eigenvalues of A
    const SymmetricEigen ea = sym_eigen(lap.matrix, false);
    const SymmetricEigen ean = sym_eigen(an.matrix, false);
    for (std::size_t i = 0; i < ea.values.size(); ++i) {
        const double mapped = 50.0 * ea.values[i] / (50.0 - ea.values[i]);
        bool found = false;
        for (double v : ean.values)
            if (std::abs(v - mapped) <= 1e-8 * (1.0 + std::abs(mapped))) found = true;
        CHECK(found);
    }

    AssembledOperator bad = scalar;
    bad.matrix(0, 0) = 5.0; // nI - A singular at n = 5
    CHECK_THROWS_AS(linear_yosida(bad, 5.0), SingularResolvent);
}
