#pragma once

#include <cstddef>

namespace warpgraph {

/// Execution policy for node loops. `serial` is the reference path kept for
/// testing and benchmarking; `parallel` distributes the same loop body over
/// OpenMP threads. Loop bodies write disjoint outputs, so both paths produce
/// bit-identical results.
enum class Exec { serial, parallel };

template <class Body>
void for_each_node(Exec exec, std::size_t count, Body&& body) {
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(static_cast<std::size_t>(i));
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(static_cast<std::size_t>(i));
        }
    }
}

int max_threads();

}  // namespace warpgraph
