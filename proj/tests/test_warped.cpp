#include "support.hpp"

#include <doctest.h>

using namespace wgtest;

namespace {

double warp(const Point& x) { return 1.0 + 0.3 * std::cos(x[0]); }

Jet2 warp_jet(const Point& x) {
    return {warp(x), {-0.3 * std::sin(x[0]), 0.0}, {-0.3 * std::cos(x[0]), 0.0, 0.0}};
}

Jet2 u_jet(const Point& x) {
    const double s = std::sin(x[0]), c = std::cos(x[0]);
    const double sy = std::sin(x[1]), cy = std::cos(x[1]);
    return {0.3 * s * cy, {0.3 * c * cy, -0.3 * s * sy}, {-0.3 * s * cy, -0.3 * c * sy, -0.3 * s * cy}};
}

}  // namespace

TEST_CASE("warping must be positive and finite") {
    const auto fib = flat_torus(8);
    auto h = ScalarField(fib.grid, 1.0);
    h[13] = 0.0;
    CHECK_THROWS_AS(WarpedProduct(fib, h), ValidationError);
    h[13] = NAN;
    CHECK_THROWS_AS(WarpedProduct(fib, h), ValidationError);
}

TEST_CASE("residual with h = 1 matches the Euclidean minimal surface operator") {
    double err[2] = {};
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        const auto fib = flat_torus(ns[k]);
        const WarpedProduct wp(fib, ScalarField(fib.grid, 1.0));
        const auto u = sample(fib.grid, [](const Point& x) { return u_jet(x).v; });
        const auto F = mean_curvature_residual(wp, u, ScalarField(fib.grid));
        for (std::size_t p = 0; p < u.size(); ++p) {
            err[k] = std::max(err[k], std::abs(F[p] - euclidean_operator(u_jet(fib.grid->coords(p)))));
        }
    }
    CHECK(err[1] < 1e-3);
    CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("residual with non-constant h matches the analytic warped operator") {
    double err[2] = {};
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        const auto fib = flat_torus(ns[k]);
        const WarpedProduct wp(fib, sample(fib.grid, warp));
        const auto u = sample(fib.grid, [](const Point& x) { return u_jet(x).v; });
        const ScalarField H(fib.grid, 0.02);
        const auto F = mean_curvature_residual(wp, u, H);
        for (std::size_t p = 0; p < u.size(); ++p) {
            const auto x = fib.grid->coords(p);
            const double exact = analytic_operator(u_jet(x), warp_jet(x)) - 2.0 * 0.02;
            err[k] = std::max(err[k], std::abs(F[p] - exact));
        }
    }
    CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("weighted residual integral is independent of u") {
    const auto fib = flat_torus(32);
    const WarpedProduct wp(fib, sample(fib.grid, warp));
    const auto H = sample(fib.grid, [](const Point& x) { return 0.1 + 0.2 * std::cos(x[0]); });
    // -n int h H = -2 (0.1 + 0.03) 4 pi^2 in closed form
    const double expected = -2.0 * 0.13 * two_pi * two_pi;
    CHECK(weighted_compatibility(wp, H) == doctest::Approx(expected).epsilon(1e-12));
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto u = random_field(fib.grid, s, 1.0);
        const auto F = mean_curvature_residual(wp, u, H);
        ScalarField hF(fib.grid);
        for (std::size_t p = 0; p < u.size(); ++p) {
            hF[p] = wp.warping()[p] * F[p];
        }
        CHECK(geometry::integrate(hF, fib.metric) == doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("Scherk patch is recovered at second order on a box") {
    auto scherk = [](const Point& x) { return std::log(std::cos(x[1]) / std::cos(x[0])); };
    double err[2] = {};
    const int ns[2] = {33, 65};
    for (int k = 0; k < 2; ++k) {
        const int dims[2] = {ns[k], ns[k]};
        const double ext[2] = {2.4, 2.4};
        const double org[2] = {-1.2, -1.2};
        auto fib = geometry::build_box(dims, ext, org);
        const GridPtr g = fib.grid;
        const WarpedProduct wp(std::move(fib), ScalarField(g, 1.0));
        auto u0 = ScalarField::from_function(g, [&](const FiberGrid& grid, std::size_t p) {
            return grid.pinned(p) ? scherk(grid.coords(p)) : 0.0;
        });
        const auto [st, rep] = newton_solve(wp, ScalarField(g), u0);
        REQUIRE(rep.verdict == Verdict::converged);
        for (std::size_t p = 0; p < g->size(); ++p) {
            err[k] = std::max(err[k], std::abs(st.u[p] - scherk(g->coords(p))));
        }
    }
    CHECK(err[1] < 5e-3);
    CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("forward-mode directional derivative agrees with a central difference") {
    const auto fib = flat_torus(20);
    const WarpedProduct wp(fib, sample(fib.grid, warp));
    const auto u = random_field(fib.grid, 5, 0.4);
    const auto v = random_field(fib.grid, 6, 1.0);
    const ScalarField H(fib.grid);
    const auto d = residual_directional_derivative(wp, u, v);
    const double e = 1e-5;
    auto shifted = [&](double s) {
        ScalarField w = u;
        for (std::size_t p = 0; p < w.size(); ++p) {
            w[p] += s * v[p];
        }
        return mean_curvature_residual(wp, w, H);
    };
    const auto fp = shifted(e);
    const auto fm = shifted(-e);
    double err = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
        err = std::max(err, std::abs((fp[p] - fm[p]) / (2.0 * e) - d[p]));
    }
    CHECK(err <= 1e-6 * (1.0 + d.max_abs()));
}

TEST_CASE("unit normal has unit length and angle h / W") {
    const auto fib = flat_torus(16);
    const WarpedProduct wp(fib, sample(fib.grid, warp));
    const auto u = sample(fib.grid, [](const Point& x) { return u_jet(x).v; });
    const auto n = unit_normal(wp, u);
    const auto W = area_factor(wp, u);
    const auto len = geometry::norm_sq(n.fiber_part, fib.metric);
    for (std::size_t p = 0; p < u.size(); ++p) {
        const double h = wp.warping()[p];
        CHECK(len[p] + h * h * n.r_part[p] * n.r_part[p] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(n.angle.theta[p] == doctest::Approx(h / W[p]).epsilon(1e-14));
        CHECK(n.angle.theta[p] > 0.0);
        CHECK(n.angle.theta[p] <= h);
    }
}

TEST_CASE("quasi-isometry constants match the rank-one closed form") {
    const auto fib = flat_torus(24);
    const WarpedProduct wp(fib, sample(fib.grid, warp));
    const auto u = random_field(fib.grid, 17, 0.5);
    const auto q = quasi_isometry_constants(wp, u);
    // sigma' = I + h^2 du du^T on a flat fiber: eigenvalues 1 and 1 + h^2 |du|^2.
    double top = 1.0;
    const auto& g = *fib.grid;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double dx = g.axis(0).spacing;
        const double ux = (u[g.neighbor(p, 0, 1)] - u[g.neighbor(p, 0, -1)]) / (2.0 * dx);
        const double uy = (u[g.neighbor(p, 1, 1)] - u[g.neighbor(p, 1, -1)]) / (2.0 * dx);
        const double h = wp.warping()[p];
        top = std::max(top, 1.0 + h * h * (ux * ux + uy * uy));
    }
    CHECK(q.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.lambda_max == doctest::Approx(top).epsilon(1e-12));
    CHECK(q.lambda_max == doctest::Approx(1.0 + q.B * q.B).epsilon(1e-12));
}

TEST_CASE("radial Ricci matches a brute-force Christoffel computation") {
    // sigma = exp(0.2 sin x2) delta, h = 1 + 0.3 cos x1; the warped 3-metric is
    // assembled in closed form and differentiated numerically.
    auto conf = [](const Point& x) { return std::exp(0.2 * std::sin(x[1])); };
    auto metric3 = [&](const Point& x) {
        std::array<double, 9> m{};
        m[0] = m[4] = conf(x);
        m[8] = warp(x) * warp(x);
        return m;
    };
    double err[2] = {};
    const int ns[2] = {16, 32};
    for (int k = 0; k < 2; ++k) {
        const int n = ns[k];
        const double dx = two_pi / n;
        const auto oracle = brute_force_ricci(metric3, n, dx, 2);
        const int dims[2] = {n, n};
        const double ext[2] = {two_pi, two_pi};
        auto fib = geometry::build_torus(dims, ext, [&](const Point& x) {
            Tensor t = identity_tensor(2);
            at(t, 0, 0) = at(t, 1, 1) = conf(x);
            return t;
        });
        const GridPtr g = fib.grid;
        const WarpedProduct wp(std::move(fib), sample(g, warp));
        const auto ric = radial_ricci(wp);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                err[k] = std::max(err[k], std::abs(ric[g->index(i, j)] - oracle[static_cast<std::size_t>(i + n * j)]));
            }
        }
    }
    CHECK(err[0] < 0.05);
    CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("radial Ricci vanishes for constant warping") {
    const auto fib = flat_torus(16);
    const WarpedProduct wp(fib, ScalarField(fib.grid, 2.5));
    CHECK(radial_ricci(wp).max_abs() == 0.0);
}

TEST_CASE("conformal identity needs a 3-D fiber and a positive factor") {
    const auto fib = flat_torus(8);
    const ScalarField one(fib.grid, 1.0);
    CHECK_THROWS_AS(check_conformal_laplacian(fib.metric, one, one), PreconditionError);
    const int dims[3] = {8, 8, 8};
    const double ext[3] = {two_pi, two_pi, two_pi};
    const auto f3 = geometry::build_torus(dims, ext);
    ScalarField phi(f3.grid, 1.0);
    phi[3] = -1.0;
    CHECK_THROWS_AS(conformal_scale(f3.metric, phi), ValidationError);
}

TEST_CASE("conformal identity vanishes for constant phi") {
    const int dims[3] = {10, 10, 10};
    const double ext[3] = {two_pi, two_pi, two_pi};
    const auto f3 = geometry::build_torus(dims, ext);
    const auto f = random_field(f3.grid, 2, 1.0);
    CHECK(check_conformal_laplacian(f3.metric, ScalarField(f3.grid, 3.0), f).max_abs() < 1e-12);
}

TEST_CASE("height identity refuses unsolved states") {
    const auto fib = flat_torus(16);
    const WarpedProduct wp(fib, sample(fib.grid, warp));
    const auto u = random_field(fib.grid, 1, 0.3);
    CHECK_THROWS_AS(check_identity_eq7(wp, u, ScalarField(fib.grid)), PreconditionError);
}

TEST_CASE("compatibility integrals need a closed fiber") {
    const int dims[2] = {9, 9};
    const double ext[2] = {1.0, 1.0};
    const double org[2] = {0.0, 0.0};
    const auto fib = geometry::build_box(dims, ext, org);
    const WarpedProduct wp(fib, ScalarField(fib.grid, 1.0));
    const ScalarField z(fib.grid);
    CHECK_THROWS_AS(compatibility_integral(wp, z, z), PreconditionError);
    CHECK_THROWS_AS(weighted_compatibility(wp, z), PreconditionError);
}

TEST_CASE("height of a graph with H <= 0 is superharmonic after the conformal change") {
    const int dims[2] = {64, 64};
    const double ext[2] = {2.0, 2.0};
    const double org[2] = {-1.0, -1.0};
    auto fib = geometry::build_box(dims, ext, org);
    const GridPtr g = fib.grid;
    const WarpedProduct wp(std::move(fib), sample(g, [](const Point& x) { return 1.0 + 0.2 * x[0] * x[0]; }));
    const ScalarField H(g, -0.05);
    auto u0 = ScalarField::from_function(g, [](const FiberGrid& grid, std::size_t p) {
        return grid.pinned(p) ? 0.2 * grid.coords(p)[1] : 0.0;
    });
    const auto [st, rep] = newton_solve(wp, H, u0);
    REQUIRE(rep.verdict == Verdict::converged);
    const auto sh = check_superharmonic(wp, st.u, H);
    CHECK(sh.max_positive_violation <= 1e-6);
    CHECK_THROWS_AS(check_superharmonic(wp, st.u, ScalarField(g, 0.05)), PreconditionError);
}
