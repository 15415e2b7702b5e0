#include "warpgraph/io.hpp"

#include "warpgraph/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace warpgraph::io {

std::string format_double(double x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    (void)ec;
    return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& os, const ScalarField& f) {
    const FiberGrid& grid = *f.grid();
    const bool three = grid.dim() == 3;
    os << (three ? "i,j,k,x1,x2,x3,value\n" : "i,j,x1,x2,value\n");
    std::string line;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto idx = grid.multi_index(p);
        const Point x = grid.cartesian(p);
        line.clear();
        line += std::to_string(idx[0]);
        line += ',';
        line += std::to_string(idx[1]);
        if (three) {
            line += ',';
            line += std::to_string(idx[2]);
        }
        for (int a = 0; a < grid.dim(); ++a) {
            line += ',';
            line += format_double(x[static_cast<std::size_t>(a)]);
        }
        line += ',';
        line += format_double(f[p]);
        line += '\n';
        os << line;
    }
}

void write_csv(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_csv(os, f);
}

ScalarField read_csv(std::istream& is, const GridPtr& grid) {
    const bool three = grid->dim() == 3;
    const std::string expected = three ? "i,j,k,x1,x2,x3,value" : "i,j,x1,x2,value";
    std::string line;
    if (!std::getline(is, line) || line != expected) {
        throw ParseError("CSV header mismatch, expected '" + expected + "'", 1, 1);
    }
    ScalarField f(grid);
    std::vector<char> seen(grid->size(), 0);
    int lineno = 1;
    const std::size_t ncols = three ? 7 : 5;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            cols.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (cols.size() != ncols) {
            throw ParseError("CSV row has wrong column count", lineno, 1);
        }
        std::array<int, 3> idx{};
        for (std::size_t a = 0; a < static_cast<std::size_t>(grid->dim()); ++a) {
            std::from_chars(cols[a].data(), cols[a].data() + cols[a].size(), idx[a]);
        }
        double v = 0.0;
        const auto& vc = cols.back();
        const auto [ptr, ec] = std::from_chars(vc.data(), vc.data() + vc.size(), v);
        if (ec != std::errc() || ptr != vc.data() + vc.size()) {
            throw ParseError("CSV value is not a number", lineno, 1);
        }
        for (int a = 0; a < grid->dim(); ++a) {
            if (idx[static_cast<std::size_t>(a)] < 0 ||
                idx[static_cast<std::size_t>(a)] >= grid->axis(a).n) {
                throw ParseError("CSV node index out of range", lineno, 1);
            }
        }
        const std::size_t p = grid->index(idx[0], idx[1], idx[2]);
        f[p] = v;
        seen[p] = 1;
    }
    for (std::size_t p = 0; p < seen.size(); ++p) {
        if (!seen[p]) {
            throw ParseError("CSV is missing node " + std::to_string(p), lineno, 1);
        }
    }
    return f;
}

nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["iterations"] = r.iterations;
    j["residual_history"] = r.residual_history;
    j["u_oscillation"] = r.u_oscillation;
    j["mean_drift_rate"] = r.mean_drift_rate;
    j["grad_sup"] = r.grad_sup;
    j["linear_iterations"] = r.linear_iterations;
    if (r.witness_evaluated) {
        j["obstruction_witness"] = r.obstruction_witness;
    }
    if (r.diverged_step >= 0) {
        j["diverged_step"] = r.diverged_step;
    }
    return j;
}

}  // namespace warpgraph::io
