#pragma once

#include <Eigen/Core>

#include <functional>

namespace warpgraph::krylov {

/// y = A x. Implementations must not alias x and y.
using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct GmresOptions {
    double rtol = 1e-8;
    int max_iterations = 2000;
    int restart = 150;
};

struct GmresResult {
    int iterations = 0;
    double relative_residual = 1.0;
    bool converged = false;
};

/// Restarted GMRES with right preconditioning: solves A M^{-1} y = b and returns
/// x = M^{-1} y in `x`. Starts from x = 0. `precond` may be empty (identity).
GmresResult gmres(const LinearMap& A, const LinearMap& precond, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts);

}  // namespace warpgraph::krylov
