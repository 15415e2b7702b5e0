#include "support.hpp"

#include "warpgraph/krylov.hpp"

#include <Eigen/Dense>
#include <doctest.h>

using namespace wgtest;

namespace {

WarpedProduct warped_torus(int n, double (*h)(const Point&)) {
    auto fib = flat_torus(n);
    const GridPtr g = fib.grid;
    return WarpedProduct(std::move(fib), sample(g, h));
}

double cos_warp(const Point& x) { return 1.0 + 0.3 * std::cos(x[0]); }
double unit(const Point&) { return 1.0; }

}  // namespace

TEST_CASE("GMRES reproduces a dense direct solve") {
    const int n = 60;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 4.0;
    for (int i = 0; i + 1 < n; ++i) {
        A(i, i + 1) = -1.0;
        A(i + 1, i) = -1.3;
    }
    A(0, n - 1) = 0.5;
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
    const Eigen::VectorXd exact = A.partialPivLu().solve(b);
    Eigen::VectorXd x;
    const auto res = krylov::gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = A * v; }, {}, b, x,
                                   {1e-12, 500, 20});
    CHECK(res.converged);
    CHECK((x - exact).norm() <= 1e-10 * exact.norm());

    // Jacobi right preconditioner
    Eigen::VectorXd xp;
    const auto rp = krylov::gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = A * v; },
                                  [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = v / 4.0; }, b, xp,
                                  {1e-12, 500, 20});
    CHECK(rp.converged);
    CHECK((xp - exact).norm() <= 1e-10 * exact.norm());
}

TEST_CASE("matrix-free Jacobian action agrees with the exact derivative") {
    const auto wp = warped_torus(24, cos_warp);
    const auto u = random_field(wp.grid_ptr(), 4, 0.5);
    const auto v = random_field(wp.grid_ptr(), 8, 1.0);
    const auto jv = jacobian_action(wp, u, v);
    const auto exact = residual_directional_derivative(wp, u, v);
    double err = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
        err = std::max(err, std::abs(jv[p] - exact[p]));
    }
    CHECK(err <= 1e-6 * exact.max_abs());
}

TEST_CASE("Newton converges to a constant on the warped torus with H = 0") {
    const auto wp = warped_torus(32, cos_warp);
    const auto u0 = sample(wp.grid_ptr(), [](const Point& x) { return 0.3 * std::sin(x[0]) + 0.1 * std::cos(x[1]); });
    const ScalarField H(wp.grid_ptr());
    const auto [st, rep] = newton_solve(wp, H, u0);
    CHECK(rep.verdict == Verdict::converged);
    CHECK(rep.u_oscillation <= 1e-6);
    CHECK(st.residual.max_abs() <= 1e-10);
    // fix_mean keeps the weighted mean of the start
    CHECK(weighted_mean(st.u, wp.metric()) == doctest::Approx(weighted_mean(u0, wp.metric())).epsilon(1e-9));
    REQUIRE_FALSE(rep.residual_history.empty());
    CHECK(rep.residual_history.back() == doctest::Approx(st.residual.max_abs()));
}

TEST_CASE("Newton without the predictor still converges from a smooth start") {
    const auto wp = warped_torus(24, cos_warp);
    const auto u0 = sample(wp.grid_ptr(), [](const Point& x) { return 0.2 * std::sin(x[0] + x[1]); });
    SolveOptions o;
    o.picard_predictor = false;
    const auto [st, rep] = newton_solve(wp, ScalarField(wp.grid_ptr()), u0, o);
    CHECK(rep.verdict == Verdict::converged);
    CHECK(rep.u_oscillation <= 1e-6);
}

TEST_CASE("incompatible H on a closed fiber is reported as obstructed") {
    const auto wp = warped_torus(32, unit);
    const ScalarField H(wp.grid_ptr(), 0.1);
    const auto [st, rep] = newton_solve(wp, H, ScalarField(wp.grid_ptr()));
    CHECK(rep.verdict == Verdict::obstructed);
    CHECK(rep.witness_evaluated);
    CHECK(std::abs(rep.obstruction_witness) == doctest::Approx(2.0 * 0.1 * two_pi * two_pi).epsilon(1e-12));
}

TEST_CASE("compatible non-zero H is solved, not flagged") {
    const auto wp = warped_torus(32, cos_warp);
    const auto H = sample(wp.grid_ptr(), [](const Point& x) { return 0.1 * (std::sin(x[0]) + std::sin(x[1])); });
    const auto [st, rep] = newton_solve(wp, H, ScalarField(wp.grid_ptr()));
    CHECK(rep.verdict == Verdict::converged);
    CHECK(st.residual.max_abs() <= 1e-10);
}

TEST_CASE("flow drifts at -n H for constant warping") {
    const auto wp = warped_torus(16, unit);
    const ScalarField H(wp.grid_ptr(), 0.1);
    const auto [st, rep] = flow_solve(wp, H, ScalarField(wp.grid_ptr()), {}, 2.0);
    CHECK(rep.verdict == Verdict::obstructed);
    CHECK(rep.mean_drift_rate == doctest::Approx(-0.2).epsilon(1e-8));
}

TEST_CASE("flow relaxes a compatible problem") {
    const auto wp = warped_torus(16, cos_warp);
    const auto u0 = sample(wp.grid_ptr(), [](const Point& x) { return 0.1 * std::sin(x[0]); });
    const auto [st, rep] = flow_solve(wp, ScalarField(wp.grid_ptr()), u0, {}, 200.0);
    CHECK(rep.verdict == Verdict::converged);
    CHECK(rep.u_oscillation < 1e-6);
    CHECK(flow_time_step(wp, {}) > 0.0);
}

TEST_CASE("maximum principle check compares states of the same problem") {
    auto fib = geometry::build_hyperbolic_disk(12, 24, 0.8);
    const GridPtr g = fib.grid;
    const WarpedProduct wp(std::move(fib), ScalarField(g, 1.0));
    const ScalarField H(g);
    auto start = [&](std::uint64_t seed) {
        auto u = random_field(g, seed, 0.3);
        for (std::size_t p = 0; p < u.size(); ++p) {
            if (g->pinned(p)) {
                u[p] = 0.5 * std::sin(3.0 * g->coords(p)[1]);
            }
        }
        return u;
    };
    const auto a = newton_solve(wp, H, start(1)).first;
    const auto b = newton_solve(wp, H, start(2)).first;
    CHECK(maximum_principle_check(a, b) <= 1e-8);
    const auto c = newton_solve(wp, ScalarField(g, -0.01), start(1)).first;
    CHECK_THROWS_AS(maximum_principle_check(a, c), ValidationError);
}

TEST_CASE("solve options are validated") {
    SolveOptions o;
    o.tol_abs = 0.0;
    CHECK_THROWS_AS(o.validate(), ValidationError);
    o = {};
    o.armijo_c = 0.7;
    CHECK_THROWS_AS(o.validate(), ValidationError);
    CHECK(gauge_from_string("pin_node") == Gauge::pin_node);
    CHECK_THROWS_AS(gauge_from_string("mean"), ValidationError);
}

TEST_CASE("pin_node gauge keeps node 0 fixed") {
    const auto wp = warped_torus(24, cos_warp);
    const auto u0 = sample(wp.grid_ptr(), [](const Point& x) { return 0.2 * std::cos(x[1]); });
    SolveOptions o;
    o.gauge = Gauge::pin_node;
    const auto [st, rep] = newton_solve(wp, ScalarField(wp.grid_ptr()), u0, o);
    CHECK(rep.verdict == Verdict::converged);
    CHECK(st.u[0] == doctest::Approx(u0[0]).epsilon(1e-12));
}

TEST_CASE("solves are deterministic") {
    const auto wp = warped_torus(24, cos_warp);
    const auto u0 = random_field(wp.grid_ptr(), 77, 0.5);
    const auto a = newton_solve(wp, ScalarField(wp.grid_ptr()), u0);
    const auto b = newton_solve(wp, ScalarField(wp.grid_ptr()), u0);
    CHECK(a.second.residual_history == b.second.residual_history);
    for (std::size_t p = 0; p < u0.size(); ++p) {
        REQUIRE(a.first.u[p] == b.first.u[p]);
    }
}
