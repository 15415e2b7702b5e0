#include "warpgraph/geometry.hpp"

#include "warpgraph/error.hpp"
#include "warpgraph/stencil.hpp"

#include <cmath>

namespace warpgraph::geometry {

namespace {

MetricField metric_from_spec(const GridPtr& grid, const MetricSpec& spec) {
    if (!spec) {
        return MetricField::flat(grid);
    }
    return MetricField::from_function(
        grid, [&](const FiberGrid& g, std::size_t p) { return spec(g.coords(p)); });
}

void require_same(const GridPtr& a, const GridPtr& b, const char* where) {
    if (!same_grid(a, b)) {
        throw GridMismatch(where);
    }
}

}  // namespace

Fiber build_torus(std::span<const int> dims, std::span<const double> extents,
                  const MetricSpec& metric, std::span<const double> origin) {
    auto grid = FiberGrid::torus(dims, extents, origin);
    return Fiber{grid, metric_from_spec(grid, metric)};
}

Fiber build_box(std::span<const int> dims, std::span<const double> extents,
                std::span<const double> origin, const MetricSpec& metric) {
    auto grid = FiberGrid::box(dims, extents, origin);
    return Fiber{grid, metric_from_spec(grid, metric)};
}

Fiber build_disk(int n_r, int n_theta, double R, const ConformalSpec& conformal) {
    auto grid = FiberGrid::disk(n_r, n_theta, R);
    if (!conformal) {
        return Fiber{grid, MetricField::flat(grid)};
    }
    auto metric = MetricField::from_function(grid, [&](const FiberGrid& g, std::size_t p) {
        const Point x = g.coords(p);
        const double c = conformal(x[0], x[1]);
        Tensor t{};
        at(t, 0, 0) = c;
        at(t, 1, 1) = c * x[0] * x[0];
        return t;
    });
    return Fiber{grid, std::move(metric)};
}

double hyperbolic_conformal_factor(double rho) {
    const double s = 1.0 - rho * rho;
    return 4.0 / (s * s);
}

Fiber build_hyperbolic_disk(int n_r, int n_theta, double R) {
    if (!(R < 1.0)) {
        throw ValidationError("hyperbolic disk radius must satisfy R < 1 (Poincare model), got " +
                              std::to_string(R));
    }
    return build_disk(n_r, n_theta, R,
                      [](double rho, double) { return hyperbolic_conformal_factor(rho); });
}

VectorField gradient(const ScalarField& f, const MetricField& metric, Exec exec) {
    require_same(f.grid(), metric.grid(), "gradient");
    const FiberGrid& grid = *f.grid();
    const int d = grid.dim();
    VectorField v(f.grid());
    const double* data = f.values().data();
    for_each_node(exec, grid.size(), [&](std::size_t p) {
        std::array<double, 3> df{};
        for (int a = 0; a < d; ++a) {
            df[static_cast<std::size_t>(a)] = stencil::partial(grid, data, p, a);
        }
        const Tensor& inv = metric.inv(p);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) {
                s += at(inv, i, j) * df[static_cast<std::size_t>(j)];
            }
            v(p, i) = s;
        }
    });
    return v;
}

ScalarField divergence(const VectorField& x, const MetricField& metric, Exec exec) {
    require_same(x.grid(), metric.grid(), "divergence");
    const FiberGrid& grid = *x.grid();
    const int d = grid.dim();
    ScalarField out(x.grid());
    for_each_node(exec, grid.size(), [&](std::size_t p) {
        if (grid.pinned(p)) {
            return;
        }
        const double sg = metric.sqrt_det(p);
        double acc = 0.0;
        for (int a = 0; a < d; ++a) {
            const std::size_t hi = grid.neighbor(p, a, +1);
            const std::size_t lo = grid.neighbor(p, a, -1);
            const double f_hi = 0.25 * (sg + metric.sqrt_det(hi)) * (x(p, a) + x(hi, a));
            double f_lo = 0.0;
            if (!grid.degenerate_lower_face(p, a)) {
                f_lo = 0.25 * (metric.sqrt_det(lo) + sg) * (x(lo, a) + x(p, a));
            }
            acc += (f_hi - f_lo) / grid.axis(a).spacing;
        }
        out[p] = acc / sg;
    });
    return out;
}

ScalarField laplace_beltrami(const ScalarField& f, const MetricField& metric, Exec exec) {
    return divergence(gradient(f, metric, exec), metric, exec);
}

ScalarField inner(const VectorField& x, const VectorField& y, const MetricField& metric) {
    require_same(x.grid(), metric.grid(), "inner");
    require_same(y.grid(), metric.grid(), "inner");
    const int d = metric.dim();
    ScalarField out(x.grid());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const Tensor& g = metric.cov(p);
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                s += at(g, i, j) * x(p, i) * y(p, j);
            }
        }
        out[p] = s;
    }
    return out;
}

ScalarField norm_sq(const VectorField& x, const MetricField& metric) {
    return inner(x, x, metric);
}

double integrate(const ScalarField& f, const MetricField& metric) {
    require_same(f.grid(), metric.grid(), "integrate");
    const FiberGrid& grid = *f.grid();
    double sum = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        sum += f[p] * metric.sqrt_det(p) * grid.measure(p);
    }
    return sum;
}

CircleLift::CircleLift(const Fiber& base, const ScalarField& h, int n_theta)
    : base_(base.grid) {
    require_same(h.grid(), base.grid, "lift_to_circle");
    if (base.grid->kind() != GridKind::torus2d && base.grid->kind() != GridKind::box2d) {
        throw ValidationError("lift_to_circle needs a 2-D torus or box fiber; got " +
                              to_string(base.grid->kind()));
    }
    grid_ = FiberGrid::lifted(*base.grid, n_theta);
    metric_ = lift(base.metric);
    h_ = lift(h);
}

ScalarField CircleLift::lift(const ScalarField& f) const {
    require_same(f.grid(), base_, "lift");
    const std::size_t n2 = base_->size();
    std::vector<double> v(grid_->size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        v[p] = f[p % n2];
    }
    return ScalarField(grid_, std::move(v));
}

MetricField CircleLift::lift(const MetricField& m) const {
    require_same(m.grid(), base_, "lift");
    const std::size_t n2 = base_->size();
    std::vector<Tensor> cov(grid_->size());
    for (std::size_t p = 0; p < cov.size(); ++p) {
        Tensor t{};
        const Tensor& b = m.cov(p % n2);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                at(t, i, j) = at(b, i, j);
            }
        }
        at(t, 2, 2) = 1.0;
        cov[p] = t;
    }
    return MetricField(grid_, std::move(cov));
}

ScalarField CircleLift::restrict(const ScalarField& f) const {
    require_same(f.grid(), grid_, "restrict");
    std::vector<double> v(base_->size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        v[p] = f[p];
    }
    return ScalarField(base_, std::move(v));
}

CircleLift lift_to_circle(const Fiber& base, const ScalarField& h, int n_theta) {
    return CircleLift(base, h, n_theta);
}

}  // namespace warpgraph::geometry
