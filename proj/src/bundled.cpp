#include "warpgraph/scenario.hpp"

#include <array>
#include <utility>

namespace warpgraph {

namespace {

// Torus extents are written as constant expressions; the parser evaluates them.
constexpr std::array<std::pair<std::string_view, std::string_view>, 5> bundled{{
    {"uniqueness_torus", R"json({
  "name": "uniqueness_torus",
  "fiber": {"kind": "torus2d", "dims": [64, 64], "extents": ["2*pi", "2*pi"]},
  "warping": "1 + 0.3*cos(x1)",
  "H_target": "0",
  "initial": "0.3*sin(x1) + 0.1*cos(x2)",
  "checks": ["eq7", "quasi_isometry", "ricci_sign", "compatibility", "superharmonic"],
  "expect": {"verdict": "converged", "u_oscillation_max": 1e-6}
})json"},
    {"obstruction_torus", R"json({
  "name": "obstruction_torus",
  "fiber": {"kind": "torus2d", "dims": [64, 64], "extents": ["2*pi", "2*pi"]},
  "warping": "1",
  "H_target": "0.1",
  "initial": "0",
  "solver": {"drift_probe_t_max": 3},
  "checks": ["compatibility"],
  "expect": {"verdict": "obstructed"}
})json"},
    {"hyperbolic_counterexample", R"json({
  "name": "hyperbolic_counterexample",
  "fiber": {"kind": "disk_polar", "dims": [32, 64], "R": 0.875},
  "metric": "hyperbolic",
  "warping": "1",
  "H_target": "0",
  "initial": "0",
  "boundary": "0.5*sin(3*theta)",
  "checks": ["eq7", "quasi_isometry", "ricci_sign"],
  "expect": {"verdict": "converged", "u_oscillation_min": 0.5}
})json"},
    {"ricci_sign", R"json({
  "name": "ricci_sign",
  "fiber": {"kind": "torus2d", "dims": [64, 64], "extents": ["2*pi", "2*pi"]},
  "warping": "1 + 0.3*cos(x1)",
  "H_target": "0",
  "initial": "0",
  "checks": ["ricci_sign", "quasi_isometry"],
  "expect": {"verdict": "converged"}
})json"},
    {"identities", R"json({
  "name": "identities",
  "fiber": {"kind": "torus2d", "dims": [32, 32], "extents": ["2*pi", "2*pi"]},
  "warping": "1 + 0.3*cos(x1)",
  "H_target": "0.1*(sin(x1) + sin(x2))",
  "initial": "0",
  "checks": ["eq7", "conformal13", "quasi_isometry", "compatibility", "ricci_sign"],
  "expect": {"verdict": "converged"}
})json"},
}};

}  // namespace

std::vector<std::string> bundled_scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : bundled) {
        names.emplace_back(name);
    }
    return names;
}

std::optional<std::string> bundled_scenario(std::string_view name) {
    for (const auto& [n, text] : bundled) {
        if (n == name) {
            return std::string(text);
        }
    }
    return std::nullopt;
}

}  // namespace warpgraph
