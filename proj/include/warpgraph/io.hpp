#pragma once

#include "warpgraph/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace warpgraph::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// Header `i,j[,k],x1,x2[,x3],value`, one row per node in storage order.
/// Coordinates are Cartesian (disks: x1 = rho cos theta, x2 = rho sin theta).
void write_csv(std::ostream& os, const ScalarField& f);
void write_csv(const std::filesystem::path& path, const ScalarField& f);

/// Reads a field written by write_csv onto `grid`; checks indices and header.
ScalarField read_csv(std::istream& is, const GridPtr& grid);

nlohmann::json to_json(const SolveReport& r);

}  // namespace warpgraph::io
