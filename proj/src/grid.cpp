#include "warpgraph/grid.hpp"

#include "warpgraph/error.hpp"
#include "warpgraph/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

namespace warpgraph {

int max_threads() { return omp_get_max_threads(); }

double Axis::extent() const {
    switch (kind) {
    case AxisKind::periodic:
        return n * spacing;
    case AxisKind::dirichlet:
        return (n - 1) * spacing;
    case AxisKind::radial:
        return (n - 0.5) * spacing;
    }
    return 0.0;
}

double Axis::weight(int i) const {
    switch (kind) {
    case AxisKind::periodic:
        return spacing;
    case AxisKind::dirichlet:
        return (i == 0 || i == n - 1) ? 0.5 * spacing : spacing;
    case AxisKind::radial:
        return i == n - 1 ? 0.5 * spacing : spacing;
    }
    return 0.0;
}

std::string to_string(GridKind kind) {
    switch (kind) {
    case GridKind::torus2d:
        return "torus2d";
    case GridKind::disk_polar:
        return "disk_polar";
    case GridKind::torus3d_lifted:
        return "torus3d_lifted";
    case GridKind::box2d:
        return "box2d";
    case GridKind::box3d_lifted:
        return "box3d_lifted";
    }
    return "unknown";
}

std::string to_string(BoundaryKind kind) {
    switch (kind) {
    case BoundaryKind::periodic_all:
        return "periodic_all";
    case BoundaryKind::dirichlet_radial:
        return "dirichlet_radial";
    case BoundaryKind::dirichlet_box:
        return "dirichlet_box";
    }
    return "unknown";
}

namespace {

void check_dims(std::span<const int> dims, std::span<const double> extents) {
    if (dims.size() < 2 || dims.size() > 3) {
        throw ValidationError("grid must have 2 or 3 axes");
    }
    if (extents.size() != dims.size()) {
        throw ValidationError("extents must match the number of axes");
    }
    for (std::size_t a = 0; a < dims.size(); ++a) {
        if (dims[a] < FiberGrid::min_nodes) {
            throw ValidationError("axis " + std::to_string(a) + " has " +
                                  std::to_string(dims[a]) + " nodes; at least " +
                                  std::to_string(FiberGrid::min_nodes) + " required");
        }
        if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
            throw ValidationError("axis " + std::to_string(a) + " extent must be positive");
        }
    }
}

}  // namespace

FiberGrid::FiberGrid(GridKind kind, BoundaryKind boundary, std::vector<Axis> axes)
    : kind_(kind), boundary_(boundary), axes_(std::move(axes)) {
    size_ = 1;
    for (const auto& ax : axes_) {
        size_ *= static_cast<std::size_t>(ax.n);
    }
    const std::size_t d = axes_.size();
    neighbors_.assign(size_ * d * 2, npos);
    pinned_.assign(size_, 0);

    for (std::size_t node = 0; node < size_; ++node) {
        const auto idx = multi_index(node);
        bool pin = false;
        for (std::size_t a = 0; a < d; ++a) {
            const Axis& ax = axes_[a];
            for (int dir : {-1, 1}) {
                auto nb = idx;
                int& i = nb[a];
                i += dir;
                std::size_t target = npos;
                switch (ax.kind) {
                case AxisKind::periodic:
                    i = (i + ax.n) % ax.n;
                    target = index(nb[0], nb[1], d > 2 ? nb[2] : 0);
                    break;
                case AxisKind::dirichlet:
                    if (i >= 0 && i < ax.n) {
                        target = index(nb[0], nb[1], d > 2 ? nb[2] : 0);
                    }
                    break;
                case AxisKind::radial:
                    if (i < 0) {
                        // across the centre: (r_0, theta) pairs with (r_0, theta + pi)
                        const int nth = axes_[1].n;
                        nb[a] = 0;
                        nb[1] = (nb[1] + nth / 2) % nth;
                        target = index(nb[0], nb[1], d > 2 ? nb[2] : 0);
                    } else if (i < ax.n) {
                        target = index(nb[0], nb[1], d > 2 ? nb[2] : 0);
                    }
                    break;
                }
                neighbors_[(node * d + a) * 2 + (dir > 0 ? 1 : 0)] = target;
            }
            if (ax.kind == AxisKind::dirichlet && (idx[a] == 0 || idx[a] == ax.n - 1)) {
                pin = true;
            }
            if (ax.kind == AxisKind::radial && idx[a] == ax.n - 1) {
                pin = true;
            }
        }
        pinned_[node] = pin ? 1 : 0;
        pinned_count_ += pin ? 1 : 0;
    }
}

std::shared_ptr<const FiberGrid> FiberGrid::torus(std::span<const int> dims,
                                                  std::span<const double> extents,
                                                  std::span<const double> origin) {
    check_dims(dims, extents);
    std::vector<Axis> axes;
    for (std::size_t a = 0; a < dims.size(); ++a) {
        axes.push_back(Axis{AxisKind::periodic, dims[a], origin.empty() ? 0.0 : origin[a],
                            extents[a] / dims[a]});
    }
    const GridKind kind = dims.size() == 2 ? GridKind::torus2d : GridKind::torus3d_lifted;
    return std::shared_ptr<const FiberGrid>(
        new FiberGrid(kind, BoundaryKind::periodic_all, std::move(axes)));
}

std::shared_ptr<const FiberGrid> FiberGrid::disk(int n_r, int n_theta, double R) {
    if (n_r < min_nodes || n_theta < min_nodes) {
        throw ValidationError("disk needs at least 8 radial and 8 angular nodes");
    }
    if (n_theta % 2 != 0) {
        throw ValidationError("disk needs an even number of angular nodes");
    }
    if (!(R > 0.0) || !std::isfinite(R)) {
        throw ValidationError("disk radius must be positive");
    }
    std::vector<Axis> axes{
        Axis{AxisKind::radial, n_r, 0.0, R / (n_r - 0.5)},
        Axis{AxisKind::periodic, n_theta, 0.0, 2.0 * std::numbers::pi / n_theta},
    };
    return std::shared_ptr<const FiberGrid>(
        new FiberGrid(GridKind::disk_polar, BoundaryKind::dirichlet_radial, std::move(axes)));
}

std::shared_ptr<const FiberGrid> FiberGrid::box(std::span<const int> dims,
                                                std::span<const double> extents,
                                                std::span<const double> origin) {
    check_dims(dims, extents);
    if (dims.size() != 2) {
        throw ValidationError("box grids are two-dimensional; use lifted() for 3-D");
    }
    std::vector<Axis> axes;
    for (std::size_t a = 0; a < 2; ++a) {
        axes.push_back(Axis{AxisKind::dirichlet, dims[a], origin.empty() ? 0.0 : origin[a],
                            extents[a] / (dims[a] - 1)});
    }
    return std::shared_ptr<const FiberGrid>(
        new FiberGrid(GridKind::box2d, BoundaryKind::dirichlet_box, std::move(axes)));
}

std::shared_ptr<const FiberGrid> FiberGrid::lifted(const FiberGrid& base, int n_theta) {
    if (base.dim() != 2) {
        throw ValidationError("only 2-D grids can be lifted");
    }
    if (base.kind() == GridKind::disk_polar) {
        throw ValidationError("disk fibers are not lifted to 3-D; lift a torus or box");
    }
    if (n_theta < min_nodes) {
        throw ValidationError("lifted circle needs at least 8 nodes");
    }
    std::vector<Axis> axes = base.axes_;
    axes.push_back(Axis{AxisKind::periodic, n_theta, 0.0, 2.0 * std::numbers::pi / n_theta});
    const GridKind kind =
        base.kind() == GridKind::torus2d ? GridKind::torus3d_lifted : GridKind::box3d_lifted;
    return std::shared_ptr<const FiberGrid>(new FiberGrid(kind, base.boundary(), std::move(axes)));
}

std::array<int, 3> FiberGrid::multi_index(std::size_t node) const {
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const auto n = static_cast<std::size_t>(axes_[a].n);
        idx[a] = static_cast<int>(node % n);
        node /= n;
    }
    return idx;
}

Point FiberGrid::coords(std::size_t node) const {
    const auto idx = multi_index(node);
    Point p{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        p[a] = axes_[a].coord(idx[a]);
    }
    return p;
}

Point FiberGrid::cartesian(std::size_t node) const {
    Point p = coords(node);
    if (kind_ == GridKind::disk_polar) {
        const double rho = p[0];
        const double theta = p[1];
        p[0] = rho * std::cos(theta);
        p[1] = rho * std::sin(theta);
    }
    return p;
}

double FiberGrid::measure(std::size_t node) const {
    const auto idx = multi_index(node);
    double w = 1.0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        w *= axes_[a].weight(idx[a]);
    }
    return w;
}

double FiberGrid::min_spacing() const {
    double s = axes_[0].spacing;
    for (const auto& ax : axes_) {
        s = std::min(s, ax.spacing);
    }
    return s;
}

double FiberGrid::max_spacing() const {
    double s = axes_[0].spacing;
    for (const auto& ax : axes_) {
        s = std::max(s, ax.spacing);
    }
    return s;
}

}  // namespace warpgraph
