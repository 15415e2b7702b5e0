#include "warpgraph/solver.hpp"

#include "warpgraph/error.hpp"
#include "warpgraph/krylov.hpp"
#include "warpgraph/stencil.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace warpgraph {

std::string to_string(Gauge g) {
    switch (g) {
    case Gauge::fix_mean: return "fix_mean";
    case Gauge::pin_node: return "pin_node";
    case Gauge::none: return "none";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::obstructed: return "obstructed";
    case Verdict::diverged: return "diverged";
    case Verdict::max_iter: return "max_iter";
    }
    return "?";
}

Gauge gauge_from_string(const std::string& s) {
    if (s == "fix_mean") return Gauge::fix_mean;
    if (s == "pin_node") return Gauge::pin_node;
    if (s == "none") return Gauge::none;
    throw ValidationError("unknown gauge '" + s + "' (expected fix_mean, pin_node or none)");
}

void SolveOptions::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string("solver option ") + name + " must be > 0");
        }
    };
    positive(tol_abs, "tol_abs");
    positive(linear_rtol, "linear_rtol");
    positive(min_step, "min_step");
    positive(flow_dt_safety, "flow_dt_safety");
    positive(compat_rtol, "compat_rtol");
    if (!(armijo_c > 0.0 && armijo_c < 0.5)) {
        throw ValidationError("solver option armijo_c must lie in (0, 0.5)");
    }
    if (max_newton < 1 || max_linear < 1 || gmres_restart < 1) {
        throw ValidationError("solver iteration limits must be >= 1");
    }
    if (min_step >= 1.0) {
        throw ValidationError("solver option min_step must be < 1");
    }
}

double weighted_mean(const ScalarField& f, const MetricField& metric) {
    ScalarField one(f.grid(), 1.0);
    return geometry::integrate(f, metric) / geometry::integrate(one, metric);
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double merit(const ScalarField& F) {
    double s = 0.0;
    for (double x : F.values()) {
        s += x * x;
    }
    return 0.5 * s;
}

double oscillation(const ScalarField& u) { return u.max() - u.min(); }

// Picard linearisation of the conservative residual with W frozen at the current
// iterate and only the diagonal metric entry across each face, factored once per
// Newton step. On closed fibers node 0 is anchored and the result projected to
// zero mean.
class FrozenPreconditioner {
public:
    FrozenPreconditioner(const WarpedProduct& wp, const ScalarField& u, Gauge gauge)
        : wp_(wp), gauge_(gauge) {
        const FiberGrid& grid = wp.grid();
        const auto count = grid.size();
        const int d = grid.dim();
        const bool closed = grid.closed();
        const double* uv = u.values().data();

        std::vector<double> du(count * static_cast<std::size_t>(d));
        for (std::size_t p = 0; p < count; ++p) {
            for (int b = 0; b < d; ++b) {
                du[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)] =
                    stencil::partial(grid, uv, p, b);
            }
        }
        auto free_row = [&](std::size_t p) { return !grid.pinned(p) && !(closed && p == 0); };

        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(count * static_cast<std::size_t>(2 * d + 1));
        for (int a = 0; a < d; ++a) {
            const double dx = grid.axis(a).spacing;
            const auto& faces = wp.faces().faces[static_cast<std::size_t>(a)];
            for (std::size_t lo = 0; lo < count; ++lo) {
                const std::size_t hi = grid.neighbor(lo, a, +1);
                if (hi == FiberGrid::npos) {
                    continue;
                }
                const FaceGeometry::Face& f = faces[lo];
                std::array<double, 3> g{};
                for (int b = 0; b < d; ++b) {
                    const auto bi = static_cast<std::size_t>(b);
                    g[bi] = b == a ? (uv[hi] - uv[lo]) / dx
                                   : 0.5 * (du[lo * static_cast<std::size_t>(d) + bi] +
                                            du[hi * static_cast<std::size_t>(d) + bi]);
                }
                double norm2 = 0.0;
                for (int b = 0; b < d; ++b) {
                    for (int c = 0; c < d; ++c) {
                        norm2 += g[static_cast<std::size_t>(b)] * at(f.inv, b, c) *
                                 g[static_cast<std::size_t>(c)];
                    }
                }
                const double W = std::sqrt(1.0 + f.h2 * norm2);
                const double k = f.sqrt_det * f.h2 * at(f.inv, a, a) / (W * dx * dx);
                auto add = [&](std::size_t row, std::size_t other) {
                    if (!free_row(row)) {
                        return;
                    }
                    const double s = k / (wp.warping()[row] * wp.metric().sqrt_det(row));
                    trips.emplace_back(static_cast<int>(row), static_cast<int>(row), -s);
                    if (!grid.pinned(other)) {
                        trips.emplace_back(static_cast<int>(row), static_cast<int>(other), s);
                    }
                };
                add(lo, hi);
                add(hi, lo);
            }
        }
        for (std::size_t p = 0; p < count; ++p) {
            if (!free_row(p)) {
                trips.emplace_back(static_cast<int>(p), static_cast<int>(p), 1.0);
            }
        }
        Eigen::SparseMatrix<double> A(static_cast<int>(count), static_cast<int>(count));
        A.setFromTriplets(trips.begin(), trips.end());
        A.makeCompressed();
        lu_.analyzePattern(A);
        lu_.factorize(A);
        ok_ = lu_.info() == Eigen::Success;
    }

    void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
        if (!ok_) {
            z = r;
            return;
        }
        z = lu_.solve(r);
        project(wp_, gauge_, z);
    }

    static void project(const WarpedProduct& wp, Gauge gauge, Eigen::VectorXd& z) {
        const FiberGrid& grid = wp.grid();
        if (!grid.closed()) {
            for (std::size_t p = 0; p < grid.size(); ++p) {
                if (grid.pinned(p)) {
                    z[static_cast<Eigen::Index>(p)] = 0.0;
                }
            }
            return;
        }
        if (gauge == Gauge::fix_mean) {
            double num = 0.0;
            double den = 0.0;
            for (std::size_t p = 0; p < grid.size(); ++p) {
                const double w = wp.metric().sqrt_det(p) * grid.measure(p);
                num += w * z[static_cast<Eigen::Index>(p)];
                den += w;
            }
            z.array() -= num / den;
        } else if (gauge == Gauge::pin_node) {
            z.array() -= z[0];
        }
    }

private:
    const WarpedProduct& wp_;
    Gauge gauge_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool ok_ = false;
};

Eigen::Map<const Eigen::VectorXd> as_eigen(const ScalarField& f) {
    return {f.values().data(), static_cast<Eigen::Index>(f.size())};
}

void require_problem(const WarpedProduct& wp, const ScalarField& H, const ScalarField& u0,
                     const char* where) {
    if (!same_grid(H.grid(), wp.grid_ptr()) || !same_grid(u0.grid(), wp.grid_ptr())) {
        throw GridMismatch(where);
    }
    if (!u0.all_finite()) {
        throw ValidationError(std::string(where) + ": initial guess contains non-finite values");
    }
    if (!H.all_finite()) {
        throw ValidationError(std::string(where) + ": H_target contains non-finite values");
    }
}

std::pair<GraphState, SolveReport> finish(const WarpedProduct& wp, ScalarField u,
                                          const ScalarField& H, SolveReport report) {
    GraphState s = make_graph_state(wp, std::move(u), H);
    report.u_oscillation = oscillation(s.u);
    report.grad_sup = s.grad_sup;
    return {std::move(s), std::move(report)};
}

}  // namespace

ScalarField jacobian_action(const WarpedProduct& wp, const ScalarField& u, const ScalarField& v,
                            double eps, Exec exec) {
    if (!same_grid(u.grid(), wp.grid_ptr()) || !same_grid(v.grid(), wp.grid_ptr())) {
        throw GridMismatch("jacobian_action");
    }
    const FiberGrid& grid = wp.grid();
    ScalarField vv = v;
    for (std::size_t p = 0; p < vv.size(); ++p) {
        if (grid.pinned(p)) {
            vv[p] = 0.0;
        }
    }
    const double vn = inf_norm(vv.values());
    if (vn == 0.0) {
        return ScalarField(wp.grid_ptr());
    }
    if (eps <= 0.0) {
        eps = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + inf_norm(u.values())) /
              std::max(vn, 1e-300);
    }
    ScalarField up = u;
    ScalarField um = u;
    for (std::size_t p = 0; p < u.size(); ++p) {
        up[p] += eps * vv[p];
        um[p] -= eps * vv[p];
    }
    const ScalarField zero(wp.grid_ptr());
    const auto fp = mean_curvature_residual(wp, up, zero, exec);
    const auto fm = mean_curvature_residual(wp, um, zero, exec);
    ScalarField jv(wp.grid_ptr());
    const double inv = 0.5 / eps;
    for (std::size_t p = 0; p < jv.size(); ++p) {
        jv[p] = (fp[p] - fm[p]) * inv;
    }
    return jv;
}

std::pair<double, bool> obstruction_witness(const WarpedProduct& wp, const ScalarField& u,
                                            const ScalarField& H_target,
                                            const SolveOptions& opts) {
    if (!wp.grid().closed()) {
        return {0.0, false};
    }
    const double w = wp.h_constant() ? compatibility_integral(wp, u, H_target)
                                     : weighted_compatibility(wp, H_target);
    ScalarField scale(wp.grid_ptr());
    for (std::size_t p = 0; p < scale.size(); ++p) {
        scale[p] = wp.n() * wp.warping()[p] * std::abs(H_target[p]) / wp.h_inf();
    }
    const double ref = geometry::integrate(scale, wp.metric());
    return {w, std::abs(w) > opts.compat_rtol * ref && std::abs(w) > 0.0 && ref > 0.0};
}

std::pair<GraphState, SolveReport> newton_solve(const WarpedProduct& wp,
                                                const ScalarField& H_target,
                                                const ScalarField& u0, const SolveOptions& opts) {
    opts.validate();
    require_problem(wp, H_target, u0, "newton_solve");
    const FiberGrid& grid = wp.grid();
    SolveReport report;
    ScalarField u = u0;
    ScalarField F = mean_curvature_residual(wp, u, H_target);
    double phi = merit(F);
    report.residual_history.push_back(F.max_abs());
    report.merit_history.push_back(phi);

    if (grid.closed()) {
        const auto [w, obstructed] = obstruction_witness(wp, u, H_target, opts);
        report.obstruction_witness = w;
        report.witness_evaluated = true;
        if (obstructed) {
            report.verdict = Verdict::obstructed;
            return finish(wp, std::move(u), H_target, std::move(report));
        }
    }

    const auto N = static_cast<Eigen::Index>(grid.size());
    krylov::GmresOptions gopts{opts.linear_rtol, opts.max_linear, opts.gmres_restart};
    bool decided = false;
    for (int it = 0; it < opts.max_newton; ++it) {
        if (!F.all_finite()) {
            report.verdict = Verdict::diverged;
            report.diverged_step = it;
            decided = true;
            break;
        }
        if (F.max_abs() <= opts.tol_abs) {
            report.verdict = Verdict::converged;
            decided = true;
            break;
        }
        const FrozenPreconditioner pre(wp, u, opts.gauge);
        ScalarField trial(wp.grid_ptr());
        ScalarField Ft;
        double phit = 0.0;
        auto try_step = [&](const Eigen::VectorXd& dir, double t) {
            for (std::size_t p = 0; p < trial.size(); ++p) {
                trial[p] = u[p] + t * dir[static_cast<Eigen::Index>(p)];
            }
            Ft = mean_curvature_residual(wp, trial, H_target);
            phit = merit(Ft);
            return std::isfinite(phit) && phit <= phi * (1.0 - 2.0 * opts.armijo_c * t);
        };
        auto line_search = [&](const Eigen::VectorXd& dir) {
            for (double t = 1.0; t >= opts.min_step; t *= 0.5) {
                if (try_step(dir, t)) {
                    return true;
                }
            }
            return false;
        };

        // Frozen-coefficient (Picard) step first: one factored solve, and it
        // removes rough components far faster than Newton from noisy starts.
        const Eigen::VectorXd rhs = -as_eigen(F);
        Eigen::VectorXd picard(N);
        pre.apply(rhs, picard);
        bool accepted = opts.picard_predictor && picard.allFinite() && try_step(picard, 1.0) &&
                        phit <= 0.01 * phi;

        if (!accepted) {
            krylov::LinearMap A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
                ScalarField v(wp.grid_ptr(), std::vector<double>(x.data(), x.data() + x.size()));
                const auto jv = jacobian_action(wp, u, v);
                y = as_eigen(jv);
            };
            krylov::LinearMap M = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
                pre.apply(x, y);
            };
            Eigen::VectorXd delta(N);
            const auto lin = krylov::gmres(A, M, rhs, delta, gopts);
            report.linear_iterations += lin.iterations;
            FrozenPreconditioner::project(wp, opts.gauge, delta);
            if (!delta.allFinite()) {
                report.verdict = Verdict::diverged;
                report.diverged_step = it;
                decided = true;
                break;
            }
            accepted = line_search(delta);
            if (!accepted && picard.allFinite()) {
                accepted = line_search(picard);
            }
            if (!accepted) {
                try_step(delta, opts.min_step);
            }
        }
        if (accepted) {
            report.stagnant_steps = 0;
        } else {
            ++report.stagnant_steps;
        }
        u = std::move(trial);
        F = std::move(Ft);
        phi = phit;
        ++report.iterations;
        report.residual_history.push_back(F.max_abs());
        report.merit_history.push_back(phi);
        if (!u.all_finite() || !F.all_finite()) {
            report.verdict = Verdict::diverged;
            report.diverged_step = report.iterations;
            decided = true;
            break;
        }
        if (report.stagnant_steps >= 10 && F.max_abs() > opts.tol_abs) {
            report.verdict = Verdict::obstructed;
            decided = true;
            break;
        }
    }
    if (!decided) {
        report.verdict = F.max_abs() <= opts.tol_abs ? Verdict::converged : Verdict::max_iter;
    }
    return finish(wp, std::move(u), H_target, std::move(report));
}

double flow_time_step(const WarpedProduct& wp, const SolveOptions& opts) {
    const FiberGrid& grid = wp.grid();
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        for (int a = 0; a < grid.dim(); ++a) {
            // physical length of the coordinate step; on disks sigma_theta_theta carries rho^2
            s = std::min(s, grid.axis(a).spacing * std::sqrt(at(wp.metric().cov(p), a, a)));
        }
    }
    return opts.flow_dt_safety * s * s * wp.h_inf() / (1.0 + wp.h_sup() * wp.h_sup());
}

std::pair<GraphState, SolveReport> flow_solve(const WarpedProduct& wp,
                                              const ScalarField& H_target,
                                              const ScalarField& u0, const SolveOptions& opts,
                                              double t_max) {
    opts.validate();
    require_problem(wp, H_target, u0, "flow_solve");
    if (!(t_max > 0.0)) {
        throw ValidationError("flow_solve: t_max must be > 0");
    }
    const FiberGrid& grid = wp.grid();
    SolveReport report;
    bool obstructed = false;
    if (grid.closed()) {
        const auto [w, obs] = obstruction_witness(wp, u0, H_target, opts);
        report.obstruction_witness = w;
        report.witness_evaluated = true;
        obstructed = obs;
    }

    const double dt = flow_time_step(wp, opts);
    const long steps = static_cast<long>(std::ceil(t_max / dt));
    const long sample = std::max(1L, steps / 200);
    ScalarField u = u0;
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(steps) + 1);
    means.push_back(weighted_mean(u, wp.metric()));

    ScalarField F = mean_curvature_residual(wp, u, H_target);
    const double f0 = F.max_abs();
    const double blowup = 1e8 * std::max(1.0, f0);
    report.residual_history.push_back(f0);
    report.verdict = obstructed ? Verdict::obstructed : Verdict::max_iter;
    long s = 0;
    for (; s < steps; ++s) {
        const double fn = F.max_abs();
        if (!std::isfinite(fn) || fn > blowup) {
            report.verdict = Verdict::diverged;
            report.diverged_step = s;
            break;
        }
        if (fn <= opts.tol_abs) {
            report.verdict = Verdict::converged;
            break;
        }
        for (std::size_t p = 0; p < u.size(); ++p) {
            u[p] += dt * F[p];
        }
        means.push_back(weighted_mean(u, wp.metric()));
        F = mean_curvature_residual(wp, u, H_target);
        if ((s + 1) % sample == 0) {
            report.residual_history.push_back(F.max_abs());
        }
    }
    report.iterations = static_cast<int>(s);
    if (report.verdict == Verdict::max_iter && F.max_abs() <= opts.tol_abs) {
        report.verdict = Verdict::converged;
    }
    if (report.residual_history.back() != F.max_abs()) {
        report.residual_history.push_back(F.max_abs());
    }
    const auto done = static_cast<long>(means.size()) - 1;
    if (done > 0 && report.verdict != Verdict::diverged) {
        const long k0 = std::min(done - 1, static_cast<long>(std::floor(0.8 * done)));
        report.mean_drift_rate = (means.back() - means[static_cast<std::size_t>(k0)]) /
                                 (static_cast<double>(done - k0) * dt);
    }
    if (!finite(u.values())) {
        report.verdict = Verdict::diverged;
        if (report.diverged_step < 0) {
            report.diverged_step = s;
        }
        report.u_oscillation = std::numeric_limits<double>::infinity();
        GraphState st;
        st.u = std::move(u);
        st.H_target = H_target;
        return {std::move(st), std::move(report)};
    }
    return finish(wp, std::move(u), H_target, std::move(report));
}

double maximum_principle_check(const GraphState& a, const GraphState& b) {
    if (!same_grid(a.u.grid(), b.u.grid()) || !same_grid(a.H_target.grid(), b.H_target.grid()) ||
        !same_grid(a.u.grid(), a.H_target.grid())) {
        throw ValidationError("maximum_principle_check: states live on different grids");
    }
    const FiberGrid& grid = *a.u.grid();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        if (a.H_target[p] != b.H_target[p]) {
            throw ValidationError("maximum_principle_check: states solve different H_target");
        }
        if (grid.pinned(p) && a.u[p] != b.u[p]) {
            throw ValidationError("maximum_principle_check: states carry different boundary data");
        }
    }
    double m = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        m = std::max(m, std::abs(a.u[p] - b.u[p]));
    }
    return m;
}

}  // namespace warpgraph
