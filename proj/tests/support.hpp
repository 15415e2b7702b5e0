#pragma once

// Test-side oracles. Nothing here calls into the library's discrete operators.

#include "warpgraph/error.hpp"
#include "warpgraph/scenario.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace wgtest {

using namespace warpgraph;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline geometry::Fiber flat_torus(int n) {
    const int dims[2] = {n, n};
    const double ext[2] = {two_pi, two_pi};
    return geometry::build_torus(dims, ext);
}

inline ScalarField sample(const GridPtr& g, const std::function<double(const Point&)>& fn) {
    return ScalarField::from_function(g, [&](const FiberGrid& grid, std::size_t p) {
        return fn(grid.coords(p));
    });
}

inline double max_abs_free(const ScalarField& f) {
    double m = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
        if (!f.grid()->pinned(p)) {
            m = std::max(m, std::abs(f[p]));
        }
    }
    return m;
}

/// Value, gradient and Hessian of a function on R^2.
struct Jet2 {
    double v;
    std::array<double, 2> d;
    std::array<double, 3> dd;  // xx, xy, yy
};

/// Flat-fiber prescribed-curvature operator for analytic u, h (H = 0):
///   (1/h) d_i (h^2 u_i / W),  W^2 = 1 + h^2 |du|^2,
/// expanded by the chain rule.
inline double analytic_operator(const Jet2& u, const Jet2& h) {
    const double ux = u.d[0], uy = u.d[1];
    const double g2 = ux * ux + uy * uy;
    const double W = std::sqrt(1.0 + h.v * h.v * g2);
    const double lap = u.dd[0] + u.dd[2];
    // d_i (|du|^2) = 2 u_j u_ij
    const double dg2x = 2.0 * (ux * u.dd[0] + uy * u.dd[1]);
    const double dg2y = 2.0 * (ux * u.dd[1] + uy * u.dd[2]);
    const double dWx = (h.v * h.d[0] * g2 + 0.5 * h.v * h.v * dg2x) / W;
    const double dWy = (h.v * h.d[1] * g2 + 0.5 * h.v * h.v * dg2y) / W;
    const double dAx = 2.0 * h.v * h.d[0] / W - h.v * h.v * dWx / (W * W);
    const double dAy = 2.0 * h.v * h.d[1] / W - h.v * h.v * dWy / (W * W);
    const double A = h.v * h.v / W;
    return (A * lap + dAx * ux + dAy * uy) / h.v;
}

/// The Euclidean minimal-surface operator in non-divergence form.
inline double euclidean_operator(const Jet2& u) {
    const double ux = u.d[0], uy = u.d[1];
    const double W2 = 1.0 + ux * ux + uy * uy;
    return ((1.0 + uy * uy) * u.dd[0] - 2.0 * ux * uy * u.dd[1] + (1.0 + ux * ux) * u.dd[2]) /
           (W2 * std::sqrt(W2));
}

/// Ric(e_c, e_c) of a 3-D periodic metric g(x) given in closed form, by
/// Christoffel symbols and their derivatives from centred differences on an
/// n^3 grid with spacing dx. Returns the value at every grid node in
/// x-fastest order.
inline std::vector<double> brute_force_ricci(const std::function<std::array<double, 9>(const Point&)>& g,
                                             int n, double dx, int c) {
    const auto N = static_cast<std::size_t>(n) * n * n;
    auto idx = [n](int i, int j, int k) {
        auto w = [n](int a) { return ((a % n) + n) % n; };
        return static_cast<std::size_t>(w(i) + n * (w(j) + n * w(k)));
    };
    std::vector<std::array<double, 9>> gm(N);
    std::vector<std::array<double, 9>> gi(N);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const auto p = idx(i, j, k);
                gm[p] = g({i * dx, j * dx, k * dx});
                const auto& m = gm[p];
                const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                                   m[1] * (m[3] * m[8] - m[5] * m[6]) +
                                   m[2] * (m[3] * m[7] - m[4] * m[6]);
                auto& v = gi[p];
                v[0] = (m[4] * m[8] - m[5] * m[7]) / det;
                v[1] = (m[2] * m[7] - m[1] * m[8]) / det;
                v[2] = (m[1] * m[5] - m[2] * m[4]) / det;
                v[3] = (m[5] * m[6] - m[3] * m[8]) / det;
                v[4] = (m[0] * m[8] - m[2] * m[6]) / det;
                v[5] = (m[2] * m[3] - m[0] * m[5]) / det;
                v[6] = (m[3] * m[7] - m[4] * m[6]) / det;
                v[7] = (m[1] * m[6] - m[0] * m[7]) / det;
                v[8] = (m[0] * m[4] - m[1] * m[3]) / det;
            }
        }
    }
    auto shift = [&](std::size_t p, int axis, int dir) {
        const int i = static_cast<int>(p % n);
        const int j = static_cast<int>((p / n) % n);
        const int k = static_cast<int>(p / (static_cast<std::size_t>(n) * n));
        int ijk[3] = {i, j, k};
        ijk[axis] += dir;
        return idx(ijk[0], ijk[1], ijk[2]);
    };
    // Gamma^a_bc = 1/2 g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)
    using Gam = std::array<double, 27>;
    std::vector<Gam> G(N);
    for (std::size_t p = 0; p < N; ++p) {
        double dg[3][9];
        for (int a = 0; a < 3; ++a) {
            const auto& hi = gm[shift(p, a, 1)];
            const auto& lo = gm[shift(p, a, -1)];
            for (int e = 0; e < 9; ++e) {
                dg[a][e] = (hi[e] - lo[e]) / (2.0 * dx);
            }
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                for (int cc = 0; cc < 3; ++cc) {
                    double s = 0.0;
                    for (int d = 0; d < 3; ++d) {
                        s += gi[p][3 * a + d] *
                             (dg[b][3 * d + cc] + dg[cc][3 * d + b] - dg[d][3 * b + cc]);
                    }
                    G[p][9 * a + 3 * b + cc] = 0.5 * s;
                }
            }
        }
    }
    // R_cc = d_a Gamma^a_cc - d_c Gamma^a_ac + Gamma^a_ad Gamma^d_cc - Gamma^a_cd Gamma^d_ac
    std::vector<double> out(N);
    for (std::size_t p = 0; p < N; ++p) {
        double r = 0.0;
        for (int a = 0; a < 3; ++a) {
            r += (G[shift(p, a, 1)][9 * a + 3 * c + c] - G[shift(p, a, -1)][9 * a + 3 * c + c]) /
                 (2.0 * dx);
            r -= (G[shift(p, c, 1)][9 * a + 3 * a + c] - G[shift(p, c, -1)][9 * a + 3 * a + c]) /
                 (2.0 * dx);
            for (int d = 0; d < 3; ++d) {
                r += G[p][9 * a + 3 * a + d] * G[p][9 * d + 3 * c + c];
                r -= G[p][9 * a + 3 * c + d] * G[p][9 * d + 3 * a + c];
            }
        }
        out[p] = r;
    }
    return out;
}

}  // namespace wgtest
