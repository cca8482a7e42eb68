#include <doctest.h>

#include <cmath>

#include "reactodiff/linalg.hpp"
#include "reactodiff/polynomial.hpp"
#include "reactodiff/rng.hpp"

using namespace reactodiff;

TEST_CASE("dense LU solves and transposed-solves against known systems") {
    Matrix a(3, 3);
    a(0, 0) = 4; a(0, 1) = 1; a(0, 2) = -1;
    a(1, 0) = 2; a(1, 1) = 5; a(1, 2) = 1;
    a(2, 0) = -1; a(2, 1) = 2; a(2, 2) = 6;
    const Vec x{1.0, -2.0, 3.0};
    Vec b = matvec(a, x);
    const DenseLU lu = DenseLU::factor(a);
    lu.solve_in_place(b);
    for (int i = 0; i < 3; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-13));

    Vec bt = matvec_transposed(a, x);
    lu.solve_transposed_in_place(bt);
    for (int i = 0; i < 3; ++i) CHECK(bt[i] == doctest::Approx(x[i]).epsilon(1e-13));

    Matrix singular(2, 2);
    singular(0, 0) = 1; singular(0, 1) = 2;
    singular(1, 0) = 2; singular(1, 1) = 4;
    CHECK_THROWS_AS(DenseLU::factor(singular), SingularMatrix);
}

TEST_CASE("tridiagonal LU matches the dense solver") {
    const std::size_t n = 12;
    Vec sub(n - 1), diag(n), sup(n - 1);
    GaussianStream g(7);
    Matrix dense(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 4.0 + 0.1 * g.next();
        dense(i, i) = diag[i];
        if (i + 1 < n) {
            sub[i] = 0.5 * g.next();
            sup[i] = 0.5 * g.next();
            dense(i + 1, i) = sub[i];
            dense(i, i + 1) = sup[i];
        }
    }
    Vec x(n);
    for (auto& v : x) v = g.next();
    const TridiagLU tri = TridiagLU::factor(sub, diag, sup);
    const DenseLU lu = DenseLU::factor(dense);

    Vec b1 = matvec(dense, x), b2 = b1;
    tri.solve_in_place(b1);
    lu.solve_in_place(b2);
    for (std::size_t i = 0; i < n; ++i) CHECK(b1[i] == doctest::Approx(b2[i]).epsilon(1e-12));

    Vec c1 = matvec_transposed(dense, x), c2 = c1;
    tri.solve_transposed_in_place(c1);
    lu.solve_transposed_in_place(c2);
    for (std::size_t i = 0; i < n; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));
}

TEST_CASE("jacobi eigensolver reproduces the Laplacian spectrum") {
    const std::size_t n = 20;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = -2.0;
        if (i + 1 < n) {
            a(i, i + 1) = 1.0;
            a(i + 1, i) = 1.0;
        }
    }
    const SymmetricEigen eig = sym_eigen(a);
    for (std::size_t j = 0; j < n; ++j) {
        const double expected = -2.0 * (1.0 - std::cos((j + 1) * 3.14159265358979323846 / (n + 1)));
        // ascending order: most negative first
        CHECK(eig.values[n - 1 - j] == doctest::Approx(expected).epsilon(1e-12));
    }
    // residual check A v = λ v on the top eigenpair
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = eig.vectors(i, n - 1);
    const Vec av = matvec(a, v);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(av[i] == doctest::Approx(eig.values[n - 1] * v[i]).epsilon(1e-10));
}

TEST_CASE("expm agrees with the scalar and diagonal exponential") {
    Matrix a(1, 1);
    a(0, 0) = -3.7;
    CHECK(expm(a)(0, 0) == doctest::Approx(std::exp(-3.7)).epsilon(1e-13));

    Matrix d(3, 3);
    d(0, 0) = -40.0; d(1, 1) = -1.0; d(2, 2) = 0.5;
    const Matrix e = expm(d);
    CHECK(e(0, 0) == doctest::Approx(std::exp(-40.0)).epsilon(1e-10));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(e(2, 2) == doctest::Approx(std::exp(0.5)).epsilon(1e-13));
    CHECK(std::abs(e(0, 1)) < 1e-14);

    // non-diagonal: exp of a rotation generator
    Matrix r(2, 2);
    r(0, 1) = -1.3; r(1, 0) = 1.3;
    const Matrix er = expm(r);
    CHECK(er(0, 0) == doctest::Approx(std::cos(1.3)).epsilon(1e-13));
    CHECK(er(1, 0) == doctest::Approx(std::sin(1.3)).epsilon(1e-13));
}

TEST_CASE("pairwise sum is order-stable and exact on integers") {
    Vec v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 7) - 3.0;
    double ref = 0.0;
    for (double x : v) ref += x;
    CHECK(pairwise_sum(v) == doctest::Approx(ref).epsilon(1e-15));
}

TEST_CASE("line fit recovers a known slope") {
    Vec xs, ys;
    for (int i = 1; i <= 8; ++i) {
        xs.push_back(std::log(static_cast<double>(i)));
        ys.push_back(2.5 * xs.back() - 0.7);
    }
    const LineFit f = fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("polynomial real roots: cubic and derivative chain") {
    // (s-1)(s+2)(s-3) = s^3 - 2 s^2 - 5 s + 6
    Poly p{{6.0, -5.0, -2.0, 1.0}};
    const auto roots = real_roots(p);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(roots[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(roots[2] == doctest::Approx(3.0).epsilon(1e-10));

    // no real roots
    Poly q{{1.0, 0.0, 1.0}};
    CHECK(real_roots(q).empty());

    // quintic with known roots 0, ±1, ±2: s(s²−1)(s²−4) = s^5 −5s^3 +4s
    Poly r{{0.0, 4.0, 0.0, -5.0, 0.0, 1.0}};
    const auto rr = real_roots(r);
    REQUIRE(rr.size() == 5);
    CHECK(rr[0] == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(rr[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rr[4] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("rng streams are deterministic and mode-independent") {
    GaussianStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.next(), vb = b.next(), vc = c.next();
        all_equal = all_equal && (va == vb);
        any_diff = any_diff || (va != vc);
    }
    CHECK(all_equal);
    CHECK(any_diff);

    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("gaussian stream moments are sane") {
    GaussianStream g(2024);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = g.next();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}
