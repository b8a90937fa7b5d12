// qdarwin — scenario runner: executes operator-algebra, measurement,
// information-flow, and game-value scenarios and emits pass/fail reports.
//
// Exit codes: 0 all checks pass, 1 verification failure, 2 input error.

#include "qdarwin/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using qdarwin::cli::RunReport;
using qdarwin::cli::Scenario;
using qdarwin::cli::ScenarioError;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError({"cannot open scenario file: " + path.string()});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heisenberg-picture measurement and quantum-game scenario runner"};
    std::string scenario_path, suite_dir, format = "text", out_path;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    app.add_option("--scenario", scenario_path, "run a single scenario file");
    app.add_option("--suite", suite_dir, "run every *.json scenario in a directory");
    app.add_option("--tolerance", tolerance, "override scenario tolerances");
    auto* seed_opt = app.add_option("--seed", seed, "override scenario seeds");
    app.add_option("--format", format, "report format: text or csv")
        ->check(CLI::IsMember({"text", "csv"}));
    app.add_option("--out", out_path, "write the report to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;

    try {
        std::vector<fs::path> files;
        if (!scenario_path.empty()) files.emplace_back(scenario_path);
        if (!suite_dir.empty()) {
            if (!fs::is_directory(suite_dir))
                throw ScenarioError({"--suite: not a directory: " + suite_dir});
            for (const auto& entry : fs::directory_iterator(suite_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        if (files.empty()) throw ScenarioError({"nothing to run: pass --scenario or --suite"});

        std::vector<std::pair<std::string, Scenario>> scenarios;
        for (const auto& f : files) {
            Scenario s = qdarwin::cli::parse_scenario(slurp(f));
            if (s.name == "unnamed") s.name = f.stem().string();
            if (tolerance > 0.0) s.tolerance = tolerance;
            if (seed_given) s.seed = seed;
            scenarios.emplace_back(s.name, std::move(s));
        }
        std::sort(scenarios.begin(), scenarios.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        auto t0 = std::chrono::steady_clock::now();
        std::vector<RunReport> reports;
        reports.reserve(scenarios.size());
        for (const auto& [name, s] : scenarios) reports.push_back(qdarwin::cli::run_scenario(s));
        auto t1 = std::chrono::steady_clock::now();

        std::string doc = qdarwin::cli::emit_report(reports, format);
        if (out_path.empty()) {
            std::cout << doc;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw ScenarioError({"cannot write report to: " + out_path});
            out << doc;
        }
        // timing goes to stderr so reports stay byte-identical across reruns
        std::cerr << "ran " << reports.size() << " scenario(s) in "
                  << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                  << " ms\n";

        for (const auto& r : reports)
            if (!r.all_pass()) return 1;
        return 0;
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
