#pragma once

#include "warpgraph/warped.hpp"

#include <string>
#include <utility>
#include <vector>

namespace warpgraph {

enum class Gauge { fix_mean, pin_node, none };
enum class Verdict { converged, obstructed, diverged, max_iter };

std::string to_string(Gauge g);
std::string to_string(Verdict v);
Gauge gauge_from_string(const std::string& s);

struct SolveOptions {
    double tol_abs = 1e-10;
    int max_newton = 50;
    int max_linear = 2000;
    double linear_rtol = 1e-8;
    double armijo_c = 1e-4;
    double min_step = 1e-6;
    Gauge gauge = Gauge::fix_mean;
    double flow_dt_safety = 0.2;
    int gmres_restart = 150;
    /// Try the frozen-coefficient (Picard) step before each Newton-Krylov solve;
    /// it is taken only when it cuts 1/2 ||F||^2 by a factor of 100.
    bool picard_predictor = true;
    /// Relative size of the closed-fiber witness below which H is treated as compatible.
    double compat_rtol = 1e-9;

    /// Throws ValidationError on non-positive tolerances or armijo_c outside (0, 0.5).
    void validate() const;
};

struct SolveReport {
    Verdict verdict = Verdict::max_iter;
    std::vector<double> residual_history;  ///< ||F||_inf per accepted iterate (flow: sampled)
    std::vector<double> merit_history;     ///< 1/2 ||F||_2^2 per accepted iterate (Newton)
    double u_oscillation = 0.0;
    double mean_drift_rate = 0.0;  ///< flow only
    double grad_sup = 0.0;
    int iterations = 0;
    long linear_iterations = 0;
    /// Closed-fiber compatibility witness; 0 when not evaluated.
    double obstruction_witness = 0.0;
    bool witness_evaluated = false;
    /// Flow step (or Newton iteration) at which a non-finite or blown-up iterate appeared.
    long diverged_step = -1;
    int stagnant_steps = 0;
};

/// Matrix-free Jacobian action by central differences,
/// (F(u + eps v) - F(u - eps v)) / (2 eps). eps <= 0 selects
/// sqrt(machine eps) (1 + ||u||_inf) / max(||v||_inf, tiny).
ScalarField jacobian_action(const WarpedProduct& wp, const ScalarField& u, const ScalarField& v,
                            double eps = 0.0, Exec exec = Exec::parallel);

/// Closed-fiber obstruction witness for H_target: compatibility_integral when h is
/// constant, weighted_compatibility otherwise. The second element is true when the
/// witness is significantly non-zero.
std::pair<double, bool> obstruction_witness(const WarpedProduct& wp, const ScalarField& u,
                                            const ScalarField& H_target,
                                            const SolveOptions& opts);

/// Damped Newton-Krylov for F(u) = 0. Pinned nodes keep their u0 values.
std::pair<GraphState, SolveReport> newton_solve(const WarpedProduct& wp,
                                                const ScalarField& H_target,
                                                const ScalarField& u0,
                                                const SolveOptions& opts = {});

/// Explicit Euler on du/dt = F(u) up to t_max or until ||F||_inf <= tol_abs.
std::pair<GraphState, SolveReport> flow_solve(const WarpedProduct& wp,
                                              const ScalarField& H_target,
                                              const ScalarField& u0, const SolveOptions& opts,
                                              double t_max);

/// Explicit time step used by flow_solve.
double flow_time_step(const WarpedProduct& wp, const SolveOptions& opts);

/// ||u_a - u_b||_inf for two states of the same problem (same grid, H_target and
/// pinned data). Throws ValidationError otherwise.
double maximum_principle_check(const GraphState& a, const GraphState& b);

/// Volume-weighted mean of f.
double weighted_mean(const ScalarField& f, const MetricField& metric);

}  // namespace warpgraph
