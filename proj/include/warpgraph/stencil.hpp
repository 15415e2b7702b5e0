#pragma once

#include "warpgraph/grid.hpp"

namespace warpgraph::stencil {

/// Second-order partial derivative of nodal data along one axis: centred in the
/// interior and across the polar centre, one-sided at Dirichlet ends.
template <class T>
T partial(const FiberGrid& grid, const T* f, std::size_t p, int axis) {
    const double inv2h = 0.5 / grid.axis(axis).spacing;
    const std::size_t lo = grid.neighbor(p, axis, -1);
    const std::size_t hi = grid.neighbor(p, axis, +1);
    if (lo != FiberGrid::npos && hi != FiberGrid::npos) {
        return (f[hi] - f[lo]) * inv2h;
    }
    if (lo == FiberGrid::npos) {
        const std::size_t hi2 = grid.neighbor(hi, axis, +1);
        return (-3.0 * f[p] + 4.0 * f[hi] - f[hi2]) * inv2h;
    }
    const std::size_t lo2 = grid.neighbor(lo, axis, -1);
    return (3.0 * f[p] - 4.0 * f[lo] + f[lo2]) * inv2h;
}

}  // namespace warpgraph::stencil
