#pragma once

#include "warpgraph/formula.hpp"
#include "warpgraph/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warpgraph {

enum class MetricKind { flat, hyperbolic, conformal };
enum class Check { eq7, conformal13, quasi_isometry, ricci_sign, compatibility, superharmonic };

std::string to_string(Check c);

struct FiberSpec {
    GridKind kind = GridKind::torus2d;
    std::vector<int> dims;
    std::vector<double> extents;  ///< tori and boxes
    std::vector<double> origin;   ///< boxes; defaults to zeros
    double R = 0.0;               ///< disks
};

struct InitialSpec {
    bool random = false;
    std::uint64_t seed = 0;
    double amplitude = 0.0;
    Formula formula;
};

struct SolverSpec {
    std::string method = "newton";  ///< newton | flow
    SolveOptions options;
    double t_max = 20.0;  ///< flow horizon
    /// When Newton reports an obstruction on a closed fiber, run the flow for this
    /// long to measure the mean drift (0 disables).
    double drift_probe_t_max = 0.0;
};

struct Expectation {
    Verdict verdict = Verdict::converged;
    std::optional<double> u_oscillation_max;
    std::optional<double> u_oscillation_min;
};

struct ScenarioConfig {
    std::string name = "custom";
    FiberSpec fiber;
    MetricKind metric = MetricKind::flat;
    std::optional<Formula> metric_formula;  ///< conformal factor when metric == conformal
    Formula warping = Formula::parse("1");
    Formula H_target = Formula::parse("0");
    InitialSpec initial;
    std::optional<Formula> boundary;
    SolverSpec solver;
    std::vector<Check> checks;
    Expectation expect;
    int lift_n_theta = 16;
};

/// Parses and validates a JSON scenario. Unknown keys are rejected; the fiber and
/// warping are built once so a non-positive warping sample is reported with its node.
/// Throws ParseError (JSON syntax or formula) or ValidationError.
ScenarioConfig parse_config(std::string_view text);

/// Full config with defaults filled in; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ScenarioConfig& c);

/// Fiber, warping, target and initial guess at a refinement level (dims scaled by 2^level).
struct Problem {
    WarpedProduct wp;
    ScalarField H_target;
    ScalarField u0;
};

Problem build_problem(const ScenarioConfig& c, int refine_level = 0,
                      std::optional<std::uint64_t> seed_override = {});

/// Portable uniform samples: mt19937_64, U = (x >> 11) 2^-53, value a (2U - 1),
/// drawn in node storage order.
ScalarField random_field(const GridPtr& grid, std::uint64_t seed, double amplitude);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    int refine = 0;
    std::optional<std::filesystem::path> dump_dir;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int other = 1;
inline constexpr int validation = 2;
inline constexpr int divergence = 3;
inline constexpr int check_failure = 4;
}  // namespace exit_code

struct RunReport {
    nlohmann::json json;  ///< deterministic except the "wall_time_s" member
    int exit_code = exit_code::ok;
};

RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opts = {});

/// Bundled scenario texts by name.
std::vector<std::string> bundled_scenario_names();
std::optional<std::string> bundled_scenario(std::string_view name);

/// Identity checks at two resolutions with observed convergence orders.
/// Each entry carries "check", "passed" and the measured values.
std::vector<nlohmann::json> run_verification_suite();

}  // namespace warpgraph
