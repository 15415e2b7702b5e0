// warpgraph command-line front end: solve a JSON scenario, run a bundled
// scenario, or run the identity verification suite.

#include "warpgraph/error.hpp"
#include "warpgraph/scenario.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace wg = warpgraph;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out);
    if (!os) {
        throw std::runtime_error("cannot open " + out + " for writing");
    }
    os << text;
}

void summarize(const json& r) {
    std::cerr << r["scenario"].get<std::string>() << ": verdict "
              << r["solve"]["verdict"].get<std::string>() << ", exit "
              << r["exit_code"].get<int>() << "\n";
    for (const auto& [name, c] : r["checks"].items()) {
        if (!c["passed"].get<bool>()) {
            std::cerr << "  check " << name << " failed"
                      << (c.contains("error") ? ": " + c["error"].get<std::string>() : "") << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prescribed-mean-curvature graphs in warped products P x_h R"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string out;
    std::string dump;
    int refine = 0;
    std::int64_t seed = -1;
    int jobs = 0;
    app.add_option("--out", out, "Write the JSON report here instead of stdout");
    app.add_option("--dump-fields", dump, "Directory for CSV dumps of the final fields");
    app.add_option("--refine", refine, "Also solve at dims * 2^1 .. 2^k and report orders")
        ->check(CLI::Range(0, 4));
    app.add_option("--seed", seed, "Override the seed of random(seed, amplitude) initial data")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--jobs", jobs, "OpenMP threads for node loops (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);

    std::string config_path;
    auto* solve = app.add_subcommand("solve", "Solve the scenario described by a JSON config");
    solve->add_option("config", config_path, "Scenario JSON file")->required();

    std::vector<std::string> names;
    bool concurrent = false;
    auto* scenario = app.add_subcommand("scenario", "Run bundled scenarios by name");
    scenario->add_option("names", names, "Scenario names (omit to list them)");
    scenario->add_flag("--concurrent", concurrent, "Run several scenarios concurrently");

    auto* verify = app.add_subcommand("verify", "Run identity checks at two resolutions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : wg::exit_code::validation;
    }
    if (jobs > 0) {
        omp_set_num_threads(jobs);
    }

    wg::RunOptions ropts;
    ropts.refine = refine;
    if (seed >= 0) {
        ropts.seed = static_cast<std::uint64_t>(seed);
    }
    if (!dump.empty()) {
        ropts.dump_dir = dump;
    }

    try {
        if (*solve) {
            const auto cfg = wg::parse_config(read_file(config_path));
            const auto rep = wg::run_scenario(cfg, ropts);
            summarize(rep.json);
            emit(rep.json, out);
            return rep.exit_code;
        }
        if (*scenario) {
            if (names.empty()) {
                for (const auto& n : wg::bundled_scenario_names()) {
                    std::cout << n << "\n";
                }
                return 0;
            }
            std::vector<wg::ScenarioConfig> cfgs;
            for (const auto& n : names) {
                const auto text = wg::bundled_scenario(n);
                if (!text) {
                    std::cerr << "unknown scenario '" << n << "'\n";
                    return wg::exit_code::validation;
                }
                cfgs.push_back(wg::parse_config(*text));
            }
            if (ropts.dump_dir && cfgs.size() > 1) {
                std::cerr << "--dump-fields takes a single scenario\n";
                return wg::exit_code::validation;
            }
            std::vector<wg::RunReport> reps(cfgs.size());
            if (concurrent && cfgs.size() > 1) {
                std::vector<std::future<wg::RunReport>> fut;
                for (const auto& c : cfgs) {
                    fut.push_back(std::async(std::launch::async,
                                             [&c, &ropts] { return wg::run_scenario(c, ropts); }));
                }
                for (std::size_t i = 0; i < fut.size(); ++i) {
                    reps[i] = fut[i].get();
                }
            } else {
                for (std::size_t i = 0; i < cfgs.size(); ++i) {
                    reps[i] = wg::run_scenario(cfgs[i], ropts);
                }
            }
            int code = 0;
            json all = json::array();
            for (const auto& r : reps) {
                summarize(r.json);
                code = std::max(code, r.exit_code);
                all.push_back(r.json);
            }
            emit(all.size() == 1 ? all[0] : all, out);
            return code;
        }
        if (*verify) {
            const auto results = wg::run_verification_suite();
            int code = 0;
            for (const auto& r : results) {
                if (!r["passed"].get<bool>()) {
                    std::cerr << "verification check " << r["check"].get<std::string>()
                              << " failed\n";
                    code = wg::exit_code::check_failure;
                }
            }
            emit(json(results), out);
            return code;
        }
    } catch (const wg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return wg::exit_code::validation;
    } catch (const wg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return wg::exit_code::validation;
    } catch (const wg::GridMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return wg::exit_code::validation;
    } catch (const wg::PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return wg::exit_code::check_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return wg::exit_code::other;
    }
    return wg::exit_code::other;
}
