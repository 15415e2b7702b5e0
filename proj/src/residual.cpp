#include "warpgraph/dual.hpp"
#include "warpgraph/error.hpp"
#include "warpgraph/stencil.hpp"
#include "warpgraph/warped.hpp"

#include <cmath>

namespace warpgraph {

namespace {

using std::sqrt;

// Conservative residual (1/(h sqrt g)) sum_a delta_a(flux_a) / dx_a - n H.
// Face flux along axis a: sqrt(g)_f h2_f sigma_f^{ab} g_b / W_f, with the normal
// derivative g_a compact across the face and tangential g_b averaged from the
// adjacent nodes' centred derivatives.
template <class T>
void residual_kernel(const WarpedProduct& wp, const T* u, const double* H, T* out, Exec exec) {
    const FiberGrid& grid = wp.grid();
    const int d = grid.dim();
    const auto du_stride = static_cast<std::size_t>(d);
    const std::size_t count = grid.size();

    std::vector<T> du(count * du_stride);
    for_each_node(exec, count, [&](std::size_t p) {
        for (int b = 0; b < d; ++b) {
            du[p * du_stride + static_cast<std::size_t>(b)] = stencil::partial(grid, u, p, b);
        }
    });

    std::vector<std::vector<T>> flux(static_cast<std::size_t>(d), std::vector<T>(count));
    for (int a = 0; a < d; ++a) {
        const double inv_dx = 1.0 / grid.axis(a).spacing;
        const auto& faces = wp.faces().faces[static_cast<std::size_t>(a)];
        auto& fa = flux[static_cast<std::size_t>(a)];
        for_each_node(exec, count, [&](std::size_t lo) {
            const std::size_t hi = grid.neighbor(lo, a, +1);
            if (hi == FiberGrid::npos) {
                return;
            }
            const FaceGeometry::Face& f = faces[lo];
            std::array<T, 3> g{};
            for (int b = 0; b < d; ++b) {
                const auto bi = static_cast<std::size_t>(b);
                g[bi] = b == a ? (u[hi] - u[lo]) * inv_dx
                               : 0.5 * (du[lo * du_stride + bi] + du[hi * du_stride + bi]);
            }
            T q = T(0.0);
            T norm2 = T(0.0);
            for (int b = 0; b < d; ++b) {
                T row = T(0.0);
                for (int c = 0; c < d; ++c) {
                    row += at(f.inv, b, c) * g[static_cast<std::size_t>(c)];
                }
                if (b == a) {
                    q = row;
                }
                norm2 += g[static_cast<std::size_t>(b)] * row;
            }
            const T W = sqrt(1.0 + f.h2 * norm2);
            fa[lo] = (f.sqrt_det * f.h2) * q / W;
        });
    }

    const MetricField& metric = wp.metric();
    const ScalarField& h = wp.warping();
    const double n = static_cast<double>(d);
    for_each_node(exec, count, [&](std::size_t p) {
        if (grid.pinned(p)) {
            out[p] = T(0.0);
            return;
        }
        T acc = T(0.0);
        for (int a = 0; a < d; ++a) {
            const auto& fa = flux[static_cast<std::size_t>(a)];
            T lower = T(0.0);
            if (!grid.degenerate_lower_face(p, a)) {
                lower = fa[grid.neighbor(p, a, -1)];
            }
            acc += (fa[p] - lower) / grid.axis(a).spacing;
        }
        out[p] = acc / (h[p] * metric.sqrt_det(p)) - n * H[p];
    });
}

}  // namespace

ScalarField mean_curvature_residual(const WarpedProduct& wp, const ScalarField& u,
                                    const ScalarField& H_target, Exec exec) {
    if (!same_grid(u.grid(), wp.grid_ptr()) || !same_grid(H_target.grid(), wp.grid_ptr())) {
        throw GridMismatch("mean_curvature_residual");
    }
    ScalarField out(wp.grid_ptr());
    residual_kernel<double>(wp, u.values().data(), H_target.values().data(),
                            out.values().data(), exec);
    return out;
}

ScalarField residual_directional_derivative(const WarpedProduct& wp, const ScalarField& u,
                                            const ScalarField& v, Exec exec) {
    if (!same_grid(u.grid(), wp.grid_ptr()) || !same_grid(v.grid(), wp.grid_ptr())) {
        throw GridMismatch("residual_directional_derivative");
    }
    const std::size_t count = wp.grid().size();
    std::vector<Dual> ud(count);
    for (std::size_t p = 0; p < count; ++p) {
        ud[p] = Dual(u[p], wp.grid().pinned(p) ? 0.0 : v[p]);
    }
    const std::vector<double> zero(count, 0.0);
    std::vector<Dual> out(count);
    residual_kernel<Dual>(wp, ud.data(), zero.data(), out.data(), exec);
    ScalarField jv(wp.grid_ptr());
    for (std::size_t p = 0; p < count; ++p) {
        jv[p] = out[p].d;
    }
    return jv;
}

}  // namespace warpgraph
