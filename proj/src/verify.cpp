#include "warpgraph/scenario.hpp"

#include <cmath>
#include <numbers>

namespace warpgraph {

using json = nlohmann::json;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

geometry::Fiber flat_torus(int n) {
    const int dims[2] = {n, n};
    const double ext[2] = {two_pi, two_pi};
    return geometry::build_torus(dims, ext);
}

ScalarField field(const GridPtr& g, double (*fn)(const Point&)) {
    return ScalarField::from_function(g, [fn](const FiberGrid& grid, std::size_t p) {
        return fn(grid.coords(p));
    });
}

double order(double coarse, double fine, double ratio) {
    return std::log(coarse / fine) / std::log(ratio);
}

bool order_ok(double o) { return o >= 1.7 && o <= 2.3; }

double max_free(const ScalarField& f) {
    double m = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
        if (!f.grid()->pinned(p)) {
            m = std::max(m, std::abs(f[p]));
        }
    }
    return m;
}

json operator_orders() {
    double grad_err[2] = {};
    double lap_err[2] = {};
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        const auto fib = flat_torus(ns[k]);
        const auto f = field(fib.grid, [](const Point& x) { return std::sin(x[0]) * std::cos(x[1]); });
        const auto g = geometry::gradient(f, fib.metric);
        const auto l = geometry::laplace_beltrami(f, fib.metric);
        for (std::size_t p = 0; p < f.size(); ++p) {
            const Point x = fib.grid->coords(p);
            grad_err[k] = std::max({grad_err[k], std::abs(g(p, 0) - std::cos(x[0]) * std::cos(x[1])),
                                    std::abs(g(p, 1) + std::sin(x[0]) * std::sin(x[1]))});
            lap_err[k] = std::max(lap_err[k], std::abs(l[p] + 2.0 * std::sin(x[0]) * std::cos(x[1])));
        }
    }
    const double gf = grad_err[0] / grad_err[1];
    const double lf = lap_err[0] / lap_err[1];
    return {{"check", "operator_order"},
            {"resolutions", {32, 64}},
            {"gradient_error", {grad_err[0], grad_err[1]}},
            {"laplacian_error", {lap_err[0], lap_err[1]}},
            {"gradient_factor", gf},
            {"laplacian_factor", lf},
            {"passed", gf >= 3.5 && lf >= 3.5}};
}

json divergence_theorem() {
    const auto fib = flat_torus(64);
    VectorField x(fib.grid);
    for (std::size_t p = 0; p < fib.grid->size(); ++p) {
        const Point c = fib.grid->coords(p);
        x(p, 0) = std::exp(std::sin(c[0] + 2.0 * c[1]));
        x(p, 1) = std::cos(3.0 * c[0]) * std::sin(c[1]) + 0.5;
    }
    const double total = geometry::integrate(geometry::divergence(x, fib.metric), fib.metric);
    const auto n2 = geometry::norm_sq(x, fib.metric);
    ScalarField mag(fib.grid);
    for (std::size_t p = 0; p < mag.size(); ++p) {
        mag[p] = std::sqrt(n2[p]);
    }
    const double bound = 1e-12 * (geometry::integrate(mag, fib.metric) + 1.0);
    return {{"check", "divergence_theorem"}, {"integral", total}, {"bound", bound},
            {"passed", std::abs(total) <= bound}};
}

json eq7_order(const char* name, double (*h)(const Point&)) {
    double res[2] = {};
    bool solved = true;
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        auto fib = flat_torus(ns[k]);
        const GridPtr grid = fib.grid;
        WarpedProduct wp(std::move(fib), field(grid, h));
        const auto H = field(grid, [](const Point& x) { return 0.1 * (std::sin(x[0]) + std::sin(x[1])); });
        const auto [st, rep] = newton_solve(wp, H, ScalarField(grid));
        solved = solved && rep.verdict == Verdict::converged;
        res[k] = solved ? max_free(check_identity_eq7(wp, st.u, H)) : NAN;
    }
    const double o = order(res[0], res[1], 2.0);
    return {{"check", name}, {"resolutions", {32, 64}}, {"max_residual", {res[0], res[1]}},
            {"order", o}, {"passed", solved && order_ok(o)}};
}

// The rings next to the polar centre lose an order (wide stencil through the
// phantom node), so the order is judged on the annulus 0.25 R <= rho <= 0.9 R and
// the full-grid maximum is reported alongside.
json eq7_disk() {
    constexpr double R = 0.875;
    double all[2] = {};
    double annulus[2] = {};
    bool solved = true;
    const int nr[2] = {16, 32};
    for (int k = 0; k < 2; ++k) {
        auto fib = geometry::build_hyperbolic_disk(nr[k], 2 * nr[k], R);
        const GridPtr grid = fib.grid;
        WarpedProduct wp(std::move(fib), ScalarField(grid, 1.0));
        const ScalarField H(grid);
        auto u0 = ScalarField::from_function(grid, [](const FiberGrid& g, std::size_t p) {
            return g.pinned(p) ? 0.5 * std::sin(3.0 * g.coords(p)[1]) : 0.0;
        });
        const auto [st, rep] = newton_solve(wp, H, u0);
        solved = solved && rep.verdict == Verdict::converged;
        if (!solved) {
            all[k] = annulus[k] = NAN;
            continue;
        }
        const auto r = check_identity_eq7(wp, st.u, H);
        all[k] = max_free(r);
        for (std::size_t p = 0; p < r.size(); ++p) {
            const double rho = grid->coords(p)[0];
            if (rho >= 0.25 * R && rho <= 0.9 * R) {
                annulus[k] = std::max(annulus[k], std::abs(r[p]));
            }
        }
    }
    const double o = order(annulus[0], annulus[1], 2.0);
    return {{"check", "eq7_hyperbolic_disk"}, {"resolutions", {16, 32}},
            {"max_residual", {all[0], all[1]}}, {"order_all_nodes", order(all[0], all[1], 2.0)},
            {"max_residual_annulus", {annulus[0], annulus[1]}}, {"order", o},
            {"passed", solved && order_ok(o)}};
}

json conformal_order() {
    double res[2] = {};
    const int ns[2] = {16, 24};
    for (int k = 0; k < 2; ++k) {
        const int dims[3] = {ns[k], ns[k], ns[k]};
        const double ext[3] = {two_pi, two_pi, two_pi};
        const auto fib = geometry::build_torus(dims, ext);
        const auto phi = field(fib.grid, [](const Point& x) { return std::pow(1.0 + 0.3 * std::cos(x[0]), 4.0); });
        const auto f = field(fib.grid, [](const Point& x) { return std::sin(x[0]); });
        res[k] = check_conformal_laplacian(fib.metric, phi, f).max_abs();
    }
    const double o = order(res[0], res[1], 24.0 / 16.0);
    return {{"check", "conformal13"}, {"resolutions", {16, 24}}, {"max_residual", {res[0], res[1]}},
            {"order", o}, {"passed", order_ok(o)}};
}

json ricci_checks() {
    double err[2] = {};
    double rmin = 0.0;
    double rmax = 0.0;
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        auto fib = flat_torus(ns[k]);
        const GridPtr grid = fib.grid;
        WarpedProduct wp(std::move(fib), field(grid, [](const Point& x) { return 1.0 + 0.3 * std::cos(x[0]); }));
        const auto ric = radial_ricci(wp);
        for (std::size_t p = 0; p < ric.size(); ++p) {
            const double x = grid->coords(p)[0];
            const double exact = 0.3 * (1.0 + 0.3 * std::cos(x)) * std::cos(x);
            err[k] = std::max(err[k], std::abs(ric[p] - exact));
        }
        rmin = ric.min();
        rmax = ric.max();
    }
    const double o = order(err[0], err[1], 2.0);
    return {{"check", "ricci_sign"}, {"resolutions", {32, 64}}, {"ricci_min", rmin},
            {"ricci_max", rmax}, {"error", {err[0], err[1]}}, {"order", o},
            {"passed", rmin < 0.0 && rmax > 0.0 && order_ok(o)}};
}

json ricci_constant() {
    auto fib = flat_torus(32);
    const GridPtr grid = fib.grid;
    WarpedProduct wp(std::move(fib), ScalarField(grid, 1.7));
    const double m = radial_ricci(wp).max_abs();
    return {{"check", "ricci_constant_h"}, {"max_abs", m}, {"passed", m <= 1e-14}};
}

json quasi_isometry() {
    bool ok = true;
    double worst_low = 0.0;
    double worst_high = 0.0;
    const auto fib = flat_torus(32);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto u = random_field(fib.grid, 1000 + s, 0.5);
        auto h = random_field(fib.grid, 2000 + s, 0.5);
        for (std::size_t p = 0; p < h.size(); ++p) {
            h[p] += 1.0;
        }
        const WarpedProduct wp(fib, h);
        const auto q = quasi_isometry_constants(wp, u);
        worst_low = std::max(worst_low, 1.0 - q.lambda_min);
        worst_high = std::max(worst_high, q.lambda_max - (1.0 + q.B * q.B));
        ok = ok && q.lambda_min >= 1.0 - 1e-12 && q.lambda_max <= 1.0 + q.B * q.B + 1e-10;
    }
    return {{"check", "quasi_isometry"}, {"pairs", 20}, {"max_lambda_min_deficit", worst_low},
            {"max_lambda_max_excess", worst_high}, {"passed", ok}};
}

}  // namespace

std::vector<json> run_verification_suite() {
    std::vector<json> out;
    out.push_back(operator_orders());
    out.push_back(divergence_theorem());
    out.push_back(eq7_order("eq7_flat", [](const Point&) { return 1.0; }));
    out.push_back(eq7_order("eq7_warped", [](const Point& x) { return 1.0 + 0.3 * std::cos(x[0]); }));
    out.push_back(eq7_disk());
    out.push_back(conformal_order());
    out.push_back(ricci_checks());
    out.push_back(ricci_constant());
    out.push_back(quasi_isometry());
    return out;
}

}  // namespace warpgraph
