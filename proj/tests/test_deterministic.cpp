#include <doctest.h>

#include <cmath>
#include <limits>

#include "reactodiff/deterministic.hpp"

using namespace reactodiff;

namespace {
constexpr double kPi = 3.14159265358979323846;

Problem chafee_infante_problem(int n) {
    Problem p;
    p.coeffs = laplacian_coefficients(1);
    p.grid = build_grid(0.0, kPi, n, 1);
    p.bc = BoundaryCondition{BcKind::dirichlet};
    p.reaction = make_constant_reaction(1, {0.0, 1.0, 0.0, 1.0}, 0.5, 1.0); // -s³ + s
    return p;
}

/// Single-node Neumann grid: the assembled operator is exactly [0], so the
/// solve reduces to the scalar ODE y' = b(y).
Problem scalar_ode_problem(const ReactionPolynomial& r) {
    Problem p;
    p.coeffs = laplacian_coefficients(1);
    p.grid = build_grid(0.0, 1.0, 1, 1);
    p.bc = BoundaryCondition{BcKind::neumann};
    p.reaction = r;
    return p;
}

SolverOptions default_opts(double dt = 1e-3) {
    SolverOptions o;
    o.scheme = PropagatorScheme{SchemeKind::implicit_euler, dt, 0.0};
    return o;
}
} // namespace

TEST_CASE("gronwall_bound: closed forms and monotonicity") {
    const TimeGrid tg = make_time_grid(0.0, 2.0, 200);
    const Vec ones(static_cast<std::size_t>(tg.n_nodes()), 1.0);
    const Vec zeros(static_cast<std::size_t>(tg.n_nodes()), 0.0);

    const Vec b0 = gronwall_bound(0.0, 0.0, ones, tg);
    for (int i = 0; i <= tg.n_steps; ++i)
        CHECK(b0[static_cast<std::size_t>(i)] == doctest::Approx(tg.node(i)).epsilon(1e-13));

    const Vec b1 = gronwall_bound(1.0, 2.0, zeros, tg);
    for (int i = 0; i <= tg.n_steps; ++i)
        CHECK(b1[static_cast<std::size_t>(i)] ==
              doctest::Approx(2.0 * std::exp(tg.node(i))).epsilon(1e-12));

    const Vec bm = gronwall_bound(-1.0, 0.0, ones, tg);
    for (int i = 0; i <= tg.n_steps; ++i)
        CHECK(bm[static_cast<std::size_t>(i)] ==
              doctest::Approx(1.0 - std::exp(-tg.node(i))).epsilon(5e-5).scale(1.0));

    // pointwise monotone in gamma0 and g
    Vec g2 = ones;
    g2[50] += 1.0;
    const Vec larger = gronwall_bound(0.0, 0.1, g2, tg);
    for (std::size_t i = 0; i < larger.size(); ++i) CHECK(larger[i] >= b0[i]);
}

TEST_CASE("picard and mild_solve_k: F ≡ 0 reduces to pure propagation") {
    Problem p = chafee_infante_problem(24);
    p.reaction.reset();
    const TimeGrid tg = make_time_grid(0.0, 0.5, 100);
    const Field x = make_field(p.grid, [](double xi, double) { return std::sin(xi); });
    const ForcingPath f = zero_forcing(tg, p.grid);
    const SolverOptions opts = default_opts(tg.dt());

    const Trajectory t1 = mild_solve_k(p, 2.0, x, f, tg, opts);
    const Field direct = propagate(p.coeffs, p.grid, p.bc, opts.scheme, tg.s, tg.T, x);
    CHECK(norm_sup(t1.back() - direct) < 1e-13);

    const Trajectory t2 = picard_solve_regularized(p, 2.0, 500.0, x, f, tg, opts);
    PropagatorScheme ys{SchemeKind::yosida_product, tg.dt(), 500.0};
    const Field direct_n = propagate(p.coeffs, p.grid, p.bc, ys, tg.s, tg.T, x);
    CHECK(norm_sup(t2.back() - direct_n) < 1e-13);

    // zero datum, zero forcing, b(t,·,0) = 0 → zero trajectory
    Problem pr = chafee_infante_problem(24);
    const Trajectory t3 = mild_solve_k(pr, 4.0, make_field(pr.grid), f, tg, opts);
    CHECK(norm_sup(t3.back()) == 0.0);
}

TEST_CASE("scalar-grid affine reaction matches the closed-form ODE") {
    // m = 0: b(s) = -2s + 1; y' = -2y + 1, y(0) = 2 → y = 0.5 + 1.5 e^{-2t}
    const ReactionPolynomial affine = make_constant_reaction(0, {1.0, 2.0}, 0.5, -2.0);
    Problem p = scalar_ode_problem(affine);
    const TimeGrid tg = make_time_grid(0.0, 1.0, 1000);
    const Field x = make_field(p.grid, 2.0);
    const ForcingPath f = zero_forcing(tg, p.grid);

    const Trajectory traj = mild_solve_k(p, 50.0, x, f, tg, default_opts(tg.dt()));
    const double exact = 0.5 + 1.5 * std::exp(-2.0);
    // O(dt) in the stepper plus O(1/k) in the reaction regularization
    CHECK(std::abs(traj.back().values[0] - exact) < 5.0 * (tg.dt() + 1.0 / 50.0));

    // with A = 0 the yosida_product stepper is exact, so the regularized
    // route coincides with the k-level solve
    const Trajectory reg = picard_solve_regularized(p, 50.0, 100.0, x, f, tg, default_opts(tg.dt()));
    CHECK(std::abs(reg.back().values[0] - traj.back().values[0]) < 1e-10);
}

TEST_CASE("scalar-grid cubic ODE y' = -y³ matches (1+2t)^{-1/2} at O(dt)") {
    const ReactionPolynomial cubic = make_constant_reaction(1, {0.0, 0.0, 0.0, 1.0}, 0.5, 0.0);
    Problem p = scalar_ode_problem(cubic);
    const double dt = 1e-3;
    const TimeGrid tg = make_time_grid(0.0, 1.0, 1000);
    const Field x = make_field(p.grid, 1.0);
    const ForcingPath f = zero_forcing(tg, p.grid);
    const SolverOptions opts = default_opts(dt);

    const Trajectory traj = mild_solve(p, x, f, tg, MildMode::yosida_cascade, opts);
    double worst = 0.0;
    for (int i = 0; i <= tg.n_steps; ++i)
        worst = std::max(worst, std::abs(traj.at(i).values[0] -
                                         1.0 / std::sqrt(1.0 + 2.0 * tg.node(i))));
    // max |y''| = 3 at t = 0
    CHECK(worst < 2.0 * dt * 3.0);
}

TEST_CASE("n-cascade: regularized solves approach the k-level solve monotonically") {
    Problem p = chafee_infante_problem(16);
    const TimeGrid tg = make_time_grid(0.0, 0.5, 500);
    const Field x = make_field(p.grid, [](double xi, double) { return 0.5 * std::sin(xi); });
    const ForcingPath f = zero_forcing(tg, p.grid);
    const SolverOptions opts = default_opts(tg.dt());
    const double k = 8.0;

    const Trajectory ref = mild_solve_k(p, k, x, f, tg, opts);
    Vec dists;
    for (double n : {100.0, 1000.0, 10000.0}) {
        const Trajectory yn = picard_solve_regularized(p, k, n, x, f, tg, opts);
        dists.push_back(sup_distance(yn, ref));
    }
    CHECK(dists[1] < dists[0]);
    CHECK(dists[2] < dists[1]);
}

TEST_CASE("mild_solve: two modes agree and the cross-check passes") {
    Problem p = chafee_infante_problem(24);
    const TimeGrid tg = make_time_grid(0.0, 1.0, 500);
    const Field x = make_field(p.grid, [](double xi, double) { return 0.5 * std::sin(xi); });
    const ForcingPath f = zero_forcing(tg, p.grid);
    SolverOptions opts = default_opts(tg.dt());
    opts.cascade_tol = 1e-4;

    double disagreement = 0.0;
    const Trajectory traj = mild_solve_cross_checked(p, x, f, tg, opts, &disagreement);
    CHECK(disagreement <= 10.0 * (opts.cascade_tol + tg.dt()));
    CHECK(traj.meta.mode == "yosida_cascade");

    // F ≡ 0: both modes are the same propagation
    Problem p0 = p;
    p0.reaction.reset();
    const Trajectory a = mild_solve(p0, x, f, tg, MildMode::yosida_cascade, opts);
    const Trajectory b = mild_solve(p0, x, f, tg, MildMode::semi_implicit, opts);
    CHECK(sup_distance(a, b) < 1e-10);
}

TEST_CASE("time-splitting consistency on aligned grids") {
    Problem p = chafee_infante_problem(16);
    const TimeGrid tg = make_time_grid(0.0, 1.0, 512);
    const Field x = make_field(p.grid, [](double xi, double) { return 0.4 * std::sin(xi); });
    const SolverOptions opts = default_opts(tg.dt());

    const Trajectory whole = mild_solve_k(p, 16.0, x, zero_forcing(tg, p.grid), tg, opts);
    const TimeGrid tg1 = make_time_grid(0.0, 0.5, 256), tg2 = make_time_grid(0.5, 1.0, 256);
    const Trajectory first = mild_solve_k(p, 16.0, x, zero_forcing(tg1, p.grid), tg1, opts);
    const Trajectory second =
        mild_solve_k(p, 16.0, first.back(), zero_forcing(tg2, p.grid), tg2, opts);
    CHECK(norm_sup(second.back() - whole.back()) < 5.0 * tg.dt());
}

TEST_CASE("envelope audits: specializations, pinned values, monotone forcing") {
    Problem p = chafee_infante_problem(32);
    const TimeGrid tg = make_time_grid(0.0, 1.0, 1000);
    const SolverOptions opts = default_opts(tg.dt());
    const ForcingPath f = zero_forcing(tg, p.grid);

    // ζ = 0 specialization: -s³ reaction, F(0) = 0, ‖x‖_H = 1 → envelope ≡ 1
    Problem pure = p;
    pure.reaction = make_constant_reaction(1, {0.0, 0.0, 0.0, 1.0}, 0.5, 0.0);
    Field x = make_field(p.grid, [](double xi, double) { return std::sin(xi); });
    const double nrm = norm_h(x);
    for (auto& v : x.values) v /= nrm;
    const Trajectory traj = mild_solve_k(pure, 4.0, x, f, tg, opts);
    const EstimateReport rep = audit_state_envelope(traj, pure, f, NormKind::H, "state_bound_H");
    CHECK(rep.all_pass);
    for (const auto& row : rep.rows) CHECK(row.envelope == doctest::Approx(1.0).epsilon(1e-12));

    // Lipschitz envelope value straight from the bound's formula: ‖x−z‖·e^{ζ·1}
    const Field z = x + make_field(p.grid, [&](double xi, double) {
                        return 0.1 * std::sin(xi) / nrm;
                    });
    const Trajectory ta = mild_solve_k(p, 32.0, x, f, tg, opts);
    const Trajectory tb = mild_solve_k(p, 32.0, z, f, tg, opts);
    const double dist0 = norm_h(z - x);
    const EstimateReport lip = audit_lipschitz_envelope(ta, tb, p, NormKind::H, "lipschitz_H");
    CHECK(lip.all_pass);
    CHECK(lip.rows.back().envelope == doctest::Approx(dist0 * std::exp(1.0)).epsilon(1e-10));

    for (const auto& r : verify_estimates(ta, tb, p, f)) CHECK(r.all_pass);

    // monotone forcing: enlarging |f| never decreases the state envelope
    ForcingPath fbig = zero_forcing(tg, p.grid);
    fbig.is_zero = false;
    for (auto& field : fbig.values)
        for (auto& v : field.values) v = 0.3;
    const Trajectory tf = mild_solve_k(p, 32.0, x, fbig, tg, opts);
    const EstimateReport small_env = audit_state_envelope(ta, p, f, NormKind::H, "state_bound_H");
    const EstimateReport big_env = audit_state_envelope(tf, p, fbig, NormKind::H, "state_bound_H");
    for (std::size_t i = 0; i < small_env.rows.size(); ++i)
        CHECK(big_env.rows[i].envelope >= small_env.rows[i].envelope);
    CHECK(big_env.all_pass);
}

TEST_CASE("k-sweep: squared-distance structure with slope near -1") {
    Problem p = chafee_infante_problem(24);
    const TimeGrid tg = make_time_grid(0.0, 1.0, 500);
    const Field x = make_field(p.grid, [](double xi, double) { return 0.5 * std::sin(xi); });
    const SolverOptions opts = default_opts(tg.dt());

    const KConvergence kc =
        k_convergence_study(p, x, zero_forcing(tg, p.grid), tg, opts, {4.0, 8.0, 16.0, 32.0, 64.0});
    CHECK(kc.slope > -1.4);
    CHECK(kc.slope < -0.6);
}

TEST_CASE("cubic decay: sup norm of the regularized trajectory is nonincreasing") {
    // zeta = 0 and F(r, 0) = 0: the sup-norm state envelope freezes at ||x||, so the
    // discrete trajectory must not grow
    Problem p = chafee_infante_problem(16);
    p.reaction = make_constant_reaction(1, {0.0, 0.0, 0.0, 1.0}, 0.5, 0.0);
    const TimeGrid tg = make_time_grid(0.0, 0.5, 200);
    const Field x = make_field(p.grid, 2.0);
    const Trajectory traj =
        picard_solve_regularized(p, 8.0, 1000.0, x, zero_forcing(tg, p.grid), tg,
                                 default_opts(tg.dt()));
    for (std::size_t i = 1; i < traj.states.size(); ++i)
        CHECK(norm_sup(traj.states[i]) <= norm_sup(traj.states[i - 1]) + 1e-12);
}

TEST_CASE("cascade cap raises NoConvergence; misaligned gronwall input is rejected") {
    Problem p = chafee_infante_problem(8);
    const TimeGrid tg = make_time_grid(0.0, 0.25, 50);
    SolverOptions opts = default_opts(tg.dt());
    opts.cascade_tol = 1e-14;
    opts.k_cap = 8.0;
    const Field x = make_field(p.grid, [](double xi, double) { return 0.5 * std::sin(xi); });
    CHECK_THROWS_AS(mild_solve(p, x, zero_forcing(tg, p.grid), tg, MildMode::yosida_cascade, opts),
                    NoConvergence);

    const Vec misaligned(7, 1.0);
    CHECK_THROWS_AS(gronwall_bound(0.0, 0.0, misaligned, tg), GridMismatch);
}

TEST_CASE("degenerate input is rejected at the boundary") {
    Problem p = chafee_infante_problem(8);
    const TimeGrid tg = make_time_grid(0.0, 0.1, 10);
    Field bad = make_field(p.grid, 1.0);
    bad.values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(mild_solve_k(p, 4.0, bad, zero_forcing(tg, p.grid), tg, default_opts(0.01)),
                    InvalidField);
}

TEST_CASE("auto shift folds a positive potential into zeta") {
    Problem p = chafee_infante_problem(12);
    p.coeffs.a0 = ScalarCoefficient::constant(5.0);
    const Problem shifted = with_auto_shift(p, 0.0, 1.0);
    CHECK(shifted.shift > 3.9); // 5 + λ₁ ≈ 4.01
    CHECK(shifted.zeta_eff() == doctest::Approx(1.0 + shifted.shift));

    // shifted stepping contracts in H
    PropagatorScheme scheme{SchemeKind::implicit_euler, 0.01, 0.0};
    Stepper st(shifted.coeffs, shifted.grid, shifted.bc, scheme, shifted.shift);
    GaussianStream rng(4);
    Vec u(static_cast<std::size_t>(shifted.grid.total_nodes()));
    for (auto& v : u) v = rng.next();
    Vec u0 = u;
    st.step(0.0, 0.01, u);
    double n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        n0 += u0[i] * u0[i];
        n1 += u[i] * u[i];
    }
    CHECK(std::sqrt(n1) <= std::sqrt(n0) * (1.0 + 1e-12));

    // fold identity: the shifted problem reproduces the unshifted dynamics
    const TimeGrid tg = make_time_grid(0.0, 0.2, 400);
    const Field x = make_field(p.grid, [](double xi, double) { return 0.3 * std::sin(xi); });
    const ForcingPath f = zero_forcing(tg, p.grid);
    const Trajectory a = mild_solve_k(p, 256.0, x, f, tg, default_opts(tg.dt()));
    const Trajectory b = mild_solve_k(shifted, 256.0, x, f, tg, default_opts(tg.dt()));
    CHECK(sup_distance(a, b) < 0.02);
}
