#include "warpgraph/warped.hpp"

#include "warpgraph/error.hpp"
#include "warpgraph/stencil.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace warpgraph {

using geometry::gradient;
using geometry::inner;
using geometry::integrate;
using geometry::laplace_beltrami;

namespace {

void require_on(const WarpedProduct& wp, const ScalarField& f, const char* where) {
    if (!same_grid(f.grid(), wp.grid_ptr())) {
        throw GridMismatch(where);
    }
}

FaceGeometry build_faces(const FiberGrid& grid, const MetricField& metric, const ScalarField& h) {
    FaceGeometry fg;
    const int d = grid.dim();
    fg.faces.resize(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        auto& faces = fg.faces[static_cast<std::size_t>(a)];
        faces.resize(grid.size());
        for (std::size_t lo = 0; lo < grid.size(); ++lo) {
            const std::size_t hi = grid.neighbor(lo, a, +1);
            if (hi == FiberGrid::npos) {
                continue;
            }
            FaceGeometry::Face& f = faces[lo];
            f.sqrt_det = 0.5 * (metric.sqrt_det(lo) + metric.sqrt_det(hi));
            f.h2 = 0.5 * (h[lo] * h[lo] + h[hi] * h[hi]);
            for (std::size_t k = 0; k < f.inv.size(); ++k) {
                f.inv[k] = 0.5 * (metric.inv(lo)[k] + metric.inv(hi)[k]);
            }
        }
    }
    return fg;
}

std::array<double, 3> partials(const FiberGrid& grid, const ScalarField& f, std::size_t p) {
    std::array<double, 3> df{};
    for (int a = 0; a < grid.dim(); ++a) {
        df[static_cast<std::size_t>(a)] = stencil::partial(grid, f.values().data(), p, a);
    }
    return df;
}

void require_solved(const WarpedProduct& wp, const ScalarField& u, const ScalarField& H,
                    double tol_solve, const char* where) {
    const double res = mean_curvature_residual(wp, u, H).max_abs();
    if (!(res <= tol_solve)) {
        std::ostringstream os;
        os << where << ": u does not solve the mean-curvature equation (max residual " << res
           << " > " << tol_solve << ")";
        throw PreconditionError(os.str());
    }
}

}  // namespace

WarpedProduct::WarpedProduct(geometry::Fiber fiber, ScalarField h)
    : fiber_(std::move(fiber)), h_(std::move(h)) {
    if (!same_grid(h_.grid(), fiber_.grid)) {
        throw GridMismatch("WarpedProduct");
    }
    h_inf_ = std::numeric_limits<double>::infinity();
    h_sup_ = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < h_.size(); ++p) {
        const double v = h_[p];
        if (!(v > 0.0) || !std::isfinite(v)) {
            const auto x = fiber_.grid->cartesian(p);
            std::ostringstream os;
            os << "warping function must be positive and finite; h = " << v << " at node " << p
               << " (x1=" << x[0] << ", x2=" << x[1] << ")";
            throw ValidationError(os.str());
        }
        h_inf_ = std::min(h_inf_, v);
        h_sup_ = std::max(h_sup_, v);
    }
    faces_ = build_faces(*fiber_.grid, fiber_.metric, h_);
}

ScalarField area_factor(const WarpedProduct& wp, const ScalarField& u) {
    require_on(wp, u, "area_factor");
    const auto grad = gradient(u, wp.metric());
    const auto n2 = geometry::norm_sq(grad, wp.metric());
    ScalarField W(wp.grid_ptr());
    for (std::size_t p = 0; p < W.size(); ++p) {
        const double h = wp.warping()[p];
        W[p] = std::sqrt(1.0 + h * h * n2[p]);
    }
    return W;
}

GraphState make_graph_state(const WarpedProduct& wp, ScalarField u, ScalarField H_target) {
    require_on(wp, u, "make_graph_state");
    require_on(wp, H_target, "make_graph_state");
    GraphState s;
    s.W = area_factor(wp, u);
    s.residual = mean_curvature_residual(wp, u, H_target);
    const auto n2 = geometry::norm_sq(gradient(u, wp.metric()), wp.metric());
    s.grad_sup = std::sqrt(std::max(0.0, n2.max()));
    s.u = std::move(u);
    s.H_target = std::move(H_target);
    return s;
}

UnitNormal unit_normal(const WarpedProduct& wp, const ScalarField& u) {
    require_on(wp, u, "unit_normal");
    const auto grad = gradient(u, wp.metric());
    const auto W = area_factor(wp, u);
    UnitNormal n{VectorField(wp.grid_ptr()), ScalarField(wp.grid_ptr()),
                 AngleFunction{ScalarField(wp.grid_ptr())}};
    for (std::size_t p = 0; p < W.size(); ++p) {
        const double h = wp.warping()[p];
        const double s = h / W[p];
        for (int i = 0; i < wp.n(); ++i) {
            n.fiber_part(p, i) = -s * grad(p, i);
        }
        n.r_part[p] = 1.0 / (h * W[p]);
        n.angle.theta[p] = s;
    }
    return n;
}

MetricField induced_metric(const WarpedProduct& wp, const ScalarField& u) {
    require_on(wp, u, "induced_metric");
    const FiberGrid& grid = wp.grid();
    const int d = grid.dim();
    std::vector<Tensor> cov(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto du = partials(grid, u, p);
        const double h2 = wp.warping()[p] * wp.warping()[p];
        Tensor t = wp.metric().cov(p);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                at(t, i, j) += h2 * du[static_cast<std::size_t>(i)] * du[static_cast<std::size_t>(j)];
            }
        }
        cov[p] = t;
    }
    return MetricField(wp.grid_ptr(), std::move(cov));
}

QuasiIsometry quasi_isometry_constants(const WarpedProduct& wp, const ScalarField& u) {
    require_on(wp, u, "quasi_isometry_constants");
    const int d = wp.n();
    const auto induced = induced_metric(wp, u);
    const auto n2 = geometry::norm_sq(gradient(u, wp.metric()), wp.metric());
    QuasiIsometry q{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), 0.0};
    Eigen::MatrixXd A(d, d);
    Eigen::MatrixXd B(d, d);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    for (std::size_t p = 0; p < u.size(); ++p) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                A(i, j) = at(induced.cov(p), i, j);
                B(i, j) = at(wp.metric().cov(p), i, j);
            }
        }
        solver.compute(A, B, Eigen::EigenvaluesOnly);
        const auto& ev = solver.eigenvalues();
        q.lambda_min = std::min(q.lambda_min, ev.minCoeff());
        q.lambda_max = std::max(q.lambda_max, ev.maxCoeff());
        q.B = std::max(q.B, wp.warping()[p] * std::sqrt(std::max(0.0, n2[p])));
    }
    return q;
}

MetricField conformal_scale(const MetricField& metric, const ScalarField& phi) {
    if (!same_grid(metric.grid(), phi.grid())) {
        throw GridMismatch("conformal_scale");
    }
    std::vector<Tensor> cov(phi.size());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        if (!(phi[p] > 0.0) || !std::isfinite(phi[p])) {
            throw ValidationError("conformal factor must be positive; phi = " +
                                  std::to_string(phi[p]) + " at node " + std::to_string(p));
        }
        Tensor t = metric.cov(p);
        for (double& v : t) {
            v *= phi[p];
        }
        cov[p] = t;
    }
    return MetricField(metric.grid(), std::move(cov));
}

ScalarField check_conformal_laplacian(const MetricField& metric, const ScalarField& phi,
                                      const ScalarField& f) {
    if (metric.dim() < 3) {
        throw PreconditionError(
            "check_conformal_laplacian needs dim >= 3; lift 2-D fibers with lift_to_circle first");
    }
    if (!same_grid(metric.grid(), f.grid())) {
        throw GridMismatch("check_conformal_laplacian");
    }
    const auto scaled = conformal_scale(metric, phi);
    const auto lap_scaled = laplace_beltrami(f, scaled);
    const auto lap = laplace_beltrami(f, metric);
    ScalarField ln_phi(phi.grid());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        ln_phi[p] = std::log(phi[p]);
    }
    const auto cross = inner(gradient(f, metric), gradient(ln_phi, metric), metric);
    const double c = 0.5 * (metric.dim() - 2);
    ScalarField r(phi.grid());
    for (std::size_t p = 0; p < r.size(); ++p) {
        if (metric.grid()->pinned(p)) {
            continue;
        }
        r[p] = lap_scaled[p] - (lap[p] + c * cross[p]) / phi[p];
    }
    return r;
}

ScalarField check_identity_eq7(const WarpedProduct& wp, const ScalarField& u,
                               const ScalarField& H_target, double tol_solve) {
    require_on(wp, u, "check_identity_eq7");
    require_on(wp, H_target, "check_identity_eq7");
    require_solved(wp, u, H_target, tol_solve, "check_identity_eq7");

    const auto sigma_p = induced_metric(wp, u);
    ScalarField ln_h(wp.grid_ptr());
    for (std::size_t p = 0; p < ln_h.size(); ++p) {
        ln_h[p] = std::log(wp.warping()[p]);
    }
    const auto lap = laplace_beltrami(u, sigma_p);
    const auto cross = inner(gradient(u, sigma_p), gradient(ln_h, sigma_p), sigma_p);
    const auto W = area_factor(wp, u);
    const double n = wp.n();
    ScalarField r(wp.grid_ptr());
    for (std::size_t p = 0; p < r.size(); ++p) {
        if (wp.grid().pinned(p)) {
            continue;
        }
        const double h = wp.warping()[p];
        const double theta = h / W[p];
        r[p] = lap[p] + 2.0 * cross[p] - n * H_target[p] * theta / (h * h);
    }
    return r;
}

SuperharmonicCheck check_superharmonic(const WarpedProduct& wp, const ScalarField& u,
                                       const ScalarField& H_target, int n_theta,
                                       double tol_solve) {
    require_on(wp, u, "check_superharmonic");
    require_on(wp, H_target, "check_superharmonic");
    if (H_target.max() > 0.0) {
        throw PreconditionError("check_superharmonic needs H_target <= 0; max H_target = " +
                                std::to_string(H_target.max()));
    }
    require_solved(wp, u, H_target, tol_solve, "check_superharmonic");

    const auto lift = geometry::lift_to_circle(wp.fiber(), wp.warping(), n_theta);
    const WarpedProduct lifted(geometry::Fiber{lift.grid(), lift.metric()}, lift.warping());
    const auto u_bar = lift.lift(u);
    const auto sigma_p = induced_metric(lifted, u_bar);
    ScalarField phi(lift.grid());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double h = lift.warping()[p];
        phi[p] = h * h * h * h;
    }
    const auto lap = laplace_beltrami(u_bar, conformal_scale(sigma_p, phi));
    SuperharmonicCheck out{-std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t p = 0; p < lap.size(); ++p) {
        if (!lift.grid()->pinned(p)) {
            out.max_value = std::max(out.max_value, lap[p]);
        }
    }
    out.max_positive_violation = std::max(0.0, out.max_value);
    return out;
}

ScalarField radial_ricci(const WarpedProduct& wp) {
    const auto lap = laplace_beltrami(wp.warping(), wp.metric());
    ScalarField ric(wp.grid_ptr());
    for (std::size_t p = 0; p < ric.size(); ++p) {
        ric[p] = -wp.warping()[p] * lap[p];
    }
    return ric;
}

double compatibility_integral(const WarpedProduct& wp, const ScalarField& u,
                              const ScalarField& H_target) {
    require_on(wp, u, "compatibility_integral");
    require_on(wp, H_target, "compatibility_integral");
    if (!wp.grid().closed()) {
        throw PreconditionError("compatibility_integral needs a closed (fully periodic) fiber");
    }
    const auto cross = inner(gradient(wp.warping(), wp.metric()), gradient(u, wp.metric()),
                             wp.metric());
    const auto W = area_factor(wp, u);
    const double n = wp.n();
    ScalarField integrand(wp.grid_ptr());
    for (std::size_t p = 0; p < integrand.size(); ++p) {
        integrand[p] = cross[p] / W[p] - n * H_target[p];
    }
    return integrate(integrand, wp.metric());
}

double weighted_compatibility(const WarpedProduct& wp, const ScalarField& H_target) {
    require_on(wp, H_target, "weighted_compatibility");
    if (!wp.grid().closed()) {
        throw PreconditionError("weighted_compatibility needs a closed (fully periodic) fiber");
    }
    ScalarField integrand(wp.grid_ptr());
    for (std::size_t p = 0; p < integrand.size(); ++p) {
        integrand[p] = -wp.n() * wp.warping()[p] * H_target[p];
    }
    return integrate(integrand, wp.metric());
}

}  // namespace warpgraph
