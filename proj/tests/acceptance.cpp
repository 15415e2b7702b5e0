// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <string>

using namespace wgtest;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed;
    std::string detail;
};

int failures = 0;

template <class Fn>
void criterion(int id, const char* title, double budget_s, Fn&& fn) {
    const auto t0 = Clock::now();
    Outcome o{false, ""};
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = dt < budget_s;
    const bool ok = o.passed && in_time;
    failures += ok ? 0 : 1;
    std::printf("criterion %2d %-4s %-34s %s [%.2f s / %.0f s]\n", id, ok ? "PASS" : "FAIL", title,
                o.detail.c_str(), dt, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double warp(const Point& x) { return 1.0 + 0.3 * std::cos(x[0]); }

WarpedProduct warped_torus(int n, double (*h)(const Point&)) {
    auto fib = flat_torus(n);
    const GridPtr g = fib.grid;
    return WarpedProduct(std::move(fib), sample(g, h));
}

Outcome divergence_exactness() {
    const auto fib = flat_torus(64);
    double worst = 0.0;
    bool ok = true;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto a = random_field(fib.grid, 2 * s, 1.0);
        const auto b = random_field(fib.grid, 2 * s + 1, 1.0);
        VectorField x(fib.grid);
        ScalarField mag(fib.grid);
        for (std::size_t p = 0; p < a.size(); ++p) {
            x(p, 0) = a[p];
            x(p, 1) = b[p];
            mag[p] = std::hypot(a[p], b[p]);
        }
        const double total = std::abs(geometry::integrate(geometry::divergence(x, fib.metric), fib.metric));
        const double bound = 1e-12 * (geometry::integrate(mag, fib.metric) + 1.0);
        worst = std::max(worst, total / bound);
        ok = ok && total <= bound;
    }
    return {ok, fmt("max |int div X| / bound = %.2e over 100 fields", worst)};
}

Outcome operator_order() {
    double ge[2] = {};
    double le[2] = {};
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        const auto fib = flat_torus(ns[k]);
        const auto f = sample(fib.grid, [](const Point& x) { return std::sin(x[0]) * std::cos(x[1]); });
        const auto g = geometry::gradient(f, fib.metric);
        const auto l = geometry::laplace_beltrami(f, fib.metric);
        for (std::size_t p = 0; p < f.size(); ++p) {
            const auto x = fib.grid->coords(p);
            ge[k] = std::max({ge[k], std::abs(g(p, 0) - std::cos(x[0]) * std::cos(x[1])),
                              std::abs(g(p, 1) + std::sin(x[0]) * std::sin(x[1]))});
            le[k] = std::max(le[k], std::abs(l[p] + 2.0 * std::sin(x[0]) * std::cos(x[1])));
        }
    }
    const double gf = ge[0] / ge[1];
    const double lf = le[0] / le[1];
    return {gf >= 3.5 && lf >= 3.5, fmt("gradient factor %.3f, Laplacian factor %.3f", gf, lf)};
}

Outcome height_identity() {
    double res[2] = {};
    const int ns[2] = {32, 64};
    for (int k = 0; k < 2; ++k) {
        const auto wp = warped_torus(ns[k], warp);
        const auto H = sample(wp.grid_ptr(), [](const Point& x) { return 0.1 * (std::sin(x[0]) + std::sin(x[1])); });
        const auto [st, rep] = newton_solve(wp, H, ScalarField(wp.grid_ptr()));
        if (rep.verdict != Verdict::converged) {
            return {false, "solve did not converge at " + std::to_string(ns[k])};
        }
        res[k] = max_abs_free(check_identity_eq7(wp, st.u, H));
    }
    const double o = std::log2(res[0] / res[1]);
    return {o >= 1.7 && o <= 2.3, fmt("residual %.3e -> %.3e, order %.3f", res[0], res[1], o)};
}

Outcome conformal_identity() {
    double res[2] = {};
    const int ns[2] = {16, 24};
    for (int k = 0; k < 2; ++k) {
        const auto base = flat_torus(ns[k]);
        const auto lift = geometry::lift_to_circle(base, sample(base.grid, warp), ns[k]);
        const auto h = lift.lift(sample(base.grid, warp));
        ScalarField phi(lift.grid());
        for (std::size_t p = 0; p < phi.size(); ++p) {
            phi[p] = std::pow(h[p], 4.0);
        }
        const auto f = sample(lift.grid(), [](const Point& x) { return std::sin(x[0]); });
        res[k] = check_conformal_laplacian(lift.metric(), phi, f).max_abs();
    }
    const double o = std::log(res[0] / res[1]) / std::log(1.5);
    const bool bound = res[0] <= 1e-3;
    const bool order = o >= 1.7 && o <= 2.3;
    return {bound && order, fmt("16^3 residual %.3e (bound 1e-3 %s), 24^3 %.3e, order %.3f", res[0],
                                bound ? "met" : "missed", res[1], o)};
}

Outcome uniqueness() {
    const auto wp = warped_torus(64, warp);
    const ScalarField H(wp.grid_ptr());
    double worst_osc = 0.0;
    double worst_res = 0.0;
    bool ok = true;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto [st, rep] = newton_solve(wp, H, random_field(wp.grid_ptr(), seed, 0.5));
        ok = ok && rep.verdict == Verdict::converged;
        worst_osc = std::max(worst_osc, rep.u_oscillation);
        worst_res = std::max(worst_res, st.residual.max_abs());
    }
    ok = ok && worst_osc <= 1e-6 && worst_res <= 1e-10;
    return {ok, fmt("3 seeds: max oscillation %.2e, max |F| %.2e", worst_osc, worst_res)};
}

Outcome obstruction() {
    const auto wp = warped_torus(64, [](const Point&) { return 1.0; });
    const ScalarField H(wp.grid_ptr(), 0.1);
    const auto [st, rep] = newton_solve(wp, H, ScalarField(wp.grid_ptr()));
    const double expected = 2.0 * 0.1 * two_pi * two_pi;
    const double werr = std::abs(std::abs(rep.obstruction_witness) - expected);
    const auto flow = flow_solve(wp, H, ScalarField(wp.grid_ptr()), {}, 3.0).second;
    const double rate = std::abs(flow.mean_drift_rate);
    const bool ok = rep.verdict == Verdict::obstructed && werr <= 1e-10 && std::abs(rate - 0.2) <= 0.02;
    return {ok, fmt("verdict %s, |witness| err %.1e, drift rate %.6f", to_string(rep.verdict).c_str(), werr,
                    flow.mean_drift_rate)};
}

Outcome hyperbolic_example() {
    constexpr double R = 0.875;
    auto fib = geometry::build_hyperbolic_disk(32, 64, R);
    const GridPtr g = fib.grid;
    const WarpedProduct wp(std::move(fib), ScalarField(g, 1.0));
    const ScalarField H(g);
    auto start = [&](std::uint64_t seed) {
        auto u = random_field(g, seed, 0.5);
        for (std::size_t p = 0; p < u.size(); ++p) {
            if (g->pinned(p)) {
                u[p] = 0.5 * std::sin(3.0 * g->coords(p)[1]);
            }
        }
        return u;
    };
    const auto [a, ra] = newton_solve(wp, H, start(11));
    const auto [b, rb] = newton_solve(wp, H, start(12));
    if (ra.verdict != Verdict::converged || rb.verdict != Verdict::converged) {
        return {false, "solve did not converge"};
    }
    double bmin = 1e300, bmax = -1e300;
    for (std::size_t p = 0; p < g->size(); ++p) {
        if (g->pinned(p)) {
            bmin = std::min(bmin, a.u[p]);
            bmax = std::max(bmax, a.u[p]);
        }
    }
    const bool bounded = a.u.min() >= bmin - 1e-8 && a.u.max() <= bmax + 1e-8;
    const bool nonconstant = ra.u_oscillation > 0.5;
    const auto n2 = geometry::norm_sq(geometry::gradient(a.u, wp.metric()), wp.metric());
    double outer = 0.0, mid = 0.0;
    int no = 0, nm = 0;
    for (std::size_t p = 0; p < g->size(); ++p) {
        const double rho = g->coords(p)[0];
        if (rho >= 0.8 * R && rho < R) {
            outer += std::sqrt(n2[p]);
            ++no;
        } else if (rho >= 0.4 * R && rho <= 0.6 * R) {
            mid += std::sqrt(n2[p]);
            ++nm;
        }
    }
    const double ratio = (outer / no) / (mid / nm);
    const double agree = maximum_principle_check(a, b);
    const bool ok = bounded && nonconstant && std::isfinite(ra.grad_sup) && ratio < 0.5 && agree <= 1e-8;
    return {ok, fmt("osc %.3f, range [%.6f, %.6f], grad_sup %.3f, outer/mid gradient %.3f (need < 0.5), "
                    "starts differ %.1e",
                    ra.u_oscillation, a.u.min(), a.u.max(), ra.grad_sup, ratio, agree)};
}

Outcome ricci_sign() {
    const auto wp = warped_torus(64, warp);
    const double rmin = radial_ricci(wp).min();
    const auto flat = warped_torus(64, [](const Point&) { return 1.7; });
    const double rconst = radial_ricci(flat).max_abs();
    constexpr int n = 16;
    const double dx = two_pi / n;
    const auto oracle = brute_force_ricci(
        [](const Point& x) {
            std::array<double, 9> m{};
            m[0] = m[4] = 1.0;
            m[8] = warp(x) * warp(x);
            return m;
        },
        n, dx, 2);
    const auto small = warped_torus(n, warp);
    const auto ric = radial_ricci(small);
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            err = std::max(err, std::abs(ric[small.grid().index(i, j)] - oracle[static_cast<std::size_t>(i + n * j)]));
        }
    }
    const bool ok = rmin < -1e-3 && rconst <= 1e-14 && err <= dx * dx;
    return {ok, fmt("min %.4f, constant-h max %.1e, oracle err %.2e (dx^2 = %.3f)", rmin, rconst, err, dx * dx)};
}

Outcome quasi_isometry() {
    const auto fib = flat_torus(32);
    double deficit = 0.0, excess = -1e300;
    bool ok = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto u = random_field(fib.grid, 500 + s, 1.0);
        auto h = random_field(fib.grid, 900 + s, 0.6);
        for (std::size_t p = 0; p < h.size(); ++p) {
            h[p] += 1.0;
        }
        const auto q = quasi_isometry_constants(WarpedProduct(fib, h), u);
        deficit = std::max(deficit, 1.0 - q.lambda_min);
        excess = std::max(excess, q.lambda_max - 1.0 - q.B * q.B);
        ok = ok && q.lambda_min >= 1.0 - 1e-12 && q.lambda_max <= 1.0 + q.B * q.B + 1e-10;
    }
    return {ok, fmt("max (1 - lambda_min) %.1e, max (lambda_max - 1 - B^2) %.1e", deficit, excess)};
}

Outcome jacobian_consistency() {
    const auto wp = warped_torus(32, warp);
    const auto u = sample(wp.grid_ptr(), [](const Point& x) { return 0.3 * std::sin(x[0]) * std::cos(x[1]); });
    const auto v = sample(wp.grid_ptr(), [](const Point& x) { return std::cos(x[0] + 2.0 * x[1]); });
    const auto exact = residual_directional_derivative(wp, u, v);
    double err[3] = {};
    const double eps[3] = {1e-3, 1e-4, 1e-5};
    for (int k = 0; k < 3; ++k) {
        const auto jv = jacobian_action(wp, u, v, eps[k]);
        for (std::size_t p = 0; p < u.size(); ++p) {
            err[k] = std::max(err[k], std::abs(jv[p] - exact[p]));
        }
    }
    const double o1 = std::log10(err[0] / err[1]);
    const double o2 = std::log10(err[1] / err[2]);
    const bool ok = o1 >= 1.7 && o1 <= 2.3 && o2 >= 1.7 && o2 <= 2.3;
    return {ok, fmt("errors %.2e %.2e %.2e, orders %.3f %.3f", err[0], err[1], err[2], o1, o2)};
}

}  // namespace

int main() {
    criterion(1, "divergence theorem", 5, divergence_exactness);
    criterion(2, "operator order", 5, operator_order);
    criterion(3, "height identity order", 60, height_identity);
    criterion(4, "conformal Laplacian identity", 60, conformal_identity);
    criterion(5, "uniqueness on the warped torus", 60, uniqueness);
    criterion(6, "obstruction for constant H", 120, obstruction);
    criterion(7, "bounded hyperbolic minimal graph", 120, hyperbolic_example);
    criterion(8, "radial Ricci sign", 60, ricci_sign);
    criterion(9, "quasi-isometry bounds", 10, quasi_isometry);
    criterion(10, "Jacobian consistency", 10, jacobian_consistency);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
