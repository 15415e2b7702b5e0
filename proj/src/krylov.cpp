#include "warpgraph/krylov.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace warpgraph::krylov {

GmresResult gmres(const LinearMap& A, const LinearMap& precond, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts) {
    const Eigen::Index n = b.size();
    x = Eigen::VectorXd::Zero(n);
    GmresResult res;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.relative_residual = 0.0;
        res.converged = true;
        return res;
    }
    const int m = std::max(1, opts.restart);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1);
    Eigen::VectorXd w(n), z(n), Ax(n);

    auto apply_precond = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        if (precond) {
            precond(in, out);
        } else {
            out = in;
        }
    };

    Eigen::VectorXd r = b;
    double beta = bnorm;
    while (res.iterations < opts.max_iterations) {
        V.col(0) = r / beta;
        g.setZero();
        g(0) = beta;
        Hm.setZero();
        int k = 0;
        for (; k < m && res.iterations < opts.max_iterations; ++k) {
            ++res.iterations;
            apply_precond(V.col(k), z);
            A(z, w);
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                Hm(i, k) = w.dot(V.col(i));
                w -= Hm(i, k) * V.col(i);
            }
            Hm(k + 1, k) = w.norm();
            if (Hm(k + 1, k) > 0.0) {
                V.col(k + 1) = w / Hm(k + 1, k);
            }
            for (int i = 0; i < k; ++i) {
                const double t = cs(i) * Hm(i, k) + sn(i) * Hm(i + 1, k);
                Hm(i + 1, k) = -sn(i) * Hm(i, k) + cs(i) * Hm(i + 1, k);
                Hm(i, k) = t;
            }
            const double denom = std::hypot(Hm(k, k), Hm(k + 1, k));
            cs(k) = denom > 0.0 ? Hm(k, k) / denom : 1.0;
            sn(k) = denom > 0.0 ? Hm(k + 1, k) / denom : 0.0;
            Hm(k, k) = denom;
            Hm(k + 1, k) = 0.0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);
            res.relative_residual = std::abs(g(k + 1)) / bnorm;
            if (res.relative_residual <= opts.rtol || denom == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution on the k x k triangle
        Eigen::VectorXd y = Hm.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        Eigen::VectorXd update = V.leftCols(k) * y;
        apply_precond(update, z);
        x += z;
        if (res.relative_residual <= opts.rtol) {
            res.converged = true;
            break;
        }
        A(x, Ax);
        r = b - Ax;
        beta = r.norm();
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= opts.rtol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace warpgraph::krylov
