#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace warpgraph {

enum class GridKind { torus2d, disk_polar, torus3d_lifted, box2d, box3d_lifted };
enum class BoundaryKind { periodic_all, dirichlet_radial, dirichlet_box };

/// Topology of one coordinate axis.
///  - periodic: node n-1 neighbours node 0.
///  - dirichlet: both end nodes are pinned; interior nodes have two neighbours.
///  - radial: cell-centred r_i = (i + 1/2) dr; the lower neighbour of i = 0 is the
///    node across the centre (theta + pi); the outer node sits at r = R and is pinned.
enum class AxisKind { periodic, dirichlet, radial };

struct Axis {
    AxisKind kind = AxisKind::periodic;
    int n = 0;
    double origin = 0.0;
    double spacing = 0.0;

    double coord(int i) const {
        return kind == AxisKind::radial ? (i + 0.5) * spacing : origin + i * spacing;
    }
    /// Coordinate length covered by the axis.
    double extent() const;
    /// 1-D quadrature weight of node i (trapezoid at Dirichlet ends, half cell at r = R).
    double weight(int i) const;

    bool operator==(const Axis&) const = default;
};

using Point = std::array<double, 3>;

std::string to_string(GridKind kind);
std::string to_string(BoundaryKind kind);

/// Structured grid over the fiber P. Immutable after construction; shared
/// between fields through `GridPtr`.
class FiberGrid {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    static constexpr int min_nodes = 8;

    /// Periodic 2-D or 3-D torus; nodes at origin + i * extent / n.
    static std::shared_ptr<const FiberGrid> torus(std::span<const int> dims,
                                                  std::span<const double> extents,
                                                  std::span<const double> origin = {});
    /// Polar disk of Euclidean radius R: axis 0 radial, axis 1 periodic in theta
    /// (n_theta must be even for the across-centre pairing).
    static std::shared_ptr<const FiberGrid> disk(int n_r, int n_theta, double R);
    /// Rectangle [origin, origin + extent] with nodes on both ends; boundary pinned.
    static std::shared_ptr<const FiberGrid> box(std::span<const int> dims,
                                                std::span<const double> extents,
                                                std::span<const double> origin = {});
    /// Product of a 2-D torus or box with a periodic circle of length 2 pi.
    static std::shared_ptr<const FiberGrid> lifted(const FiberGrid& base, int n_theta);

    GridKind kind() const { return kind_; }
    BoundaryKind boundary() const { return boundary_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }

    std::size_t index(int i, int j, int k = 0) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(axes_[0].n) *
                   (static_cast<std::size_t>(j) +
                    static_cast<std::size_t>(axes_[1].n) * static_cast<std::size_t>(k));
    }
    std::array<int, 3> multi_index(std::size_t node) const;

    /// Axis coordinates of a node: (x1, x2[, x3]) on tori and boxes, (rho, theta) on disks.
    Point coords(std::size_t node) const;
    /// Cartesian embedding (x1, x2[, x3]); on disks x1 = rho cos theta, x2 = rho sin theta.
    Point cartesian(std::size_t node) const;

    /// Neighbour along `axis` in direction `dir` (+1/-1); npos past a Dirichlet end.
    std::size_t neighbor(std::size_t node, int axis, int dir) const {
        return neighbors_[(node * axes_.size() + static_cast<std::size_t>(axis)) * 2 +
                          (dir > 0 ? 1 : 0)];
    }
    /// True for the radial face at r = 0 below node i = 0, whose measure vanishes.
    bool degenerate_lower_face(std::size_t node, int axis) const {
        return axes_[static_cast<std::size_t>(axis)].kind == AxisKind::radial &&
               multi_index(node)[static_cast<std::size_t>(axis)] == 0;
    }

    bool pinned(std::size_t node) const { return pinned_[node] != 0; }
    bool closed() const { return pinned_count_ == 0; }
    std::size_t pinned_count() const { return pinned_count_; }

    /// Coordinate quadrature weight (product of per-axis weights), without sqrt(det).
    double measure(std::size_t node) const;
    /// Smallest coordinate spacing over all axes.
    double min_spacing() const;
    /// Largest coordinate spacing over all axes.
    double max_spacing() const;

    bool operator==(const FiberGrid& other) const {
        return kind_ == other.kind_ && axes_ == other.axes_;
    }

private:
    FiberGrid(GridKind kind, BoundaryKind boundary, std::vector<Axis> axes);

    GridKind kind_;
    BoundaryKind boundary_;
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
    std::vector<std::size_t> neighbors_;
    std::vector<unsigned char> pinned_;
    std::size_t pinned_count_ = 0;
};

using GridPtr = std::shared_ptr<const FiberGrid>;

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace warpgraph
