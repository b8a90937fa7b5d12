// scenario.hpp — scenario ingestion, suite execution, and report emission.
// Scenarios are JSON documents; complex matrices serialize as nested arrays of
// [re, im] pairs.  Identical scenario + seed always produces a byte-identical
// report.

#pragma once

#include "qdarwin/operator_core.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdarwin::cli {

// Input errors (exit code 2): unknown kind, missing fields, bad weights.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::vector<std::string>& errors);
    std::vector<std::string> errors;
};

struct Scenario {
    std::string kind;  // algebra-check | measure-demo | darwinism-report | game-value | axiom-check
    std::string name;
    std::uint64_t seed = 0;
    double tolerance = 0.0;  // 0 -> per-check defaults

    int dim = 0;
    int trials = 0;
    std::string motion;          // permutation | measure | coarse | sequential
    std::string phases = "zero";  // zero | random
    std::vector<long long> multiplicities;
    std::string stage;  // 1 | 2 | 3 | 4.1 | 4.2 | 4.3 | 4.4 | auto
    std::vector<double> spectrum;
    std::vector<double> weights;
    double bracket_tol = 1e-8;
    int games = 0;
    std::optional<ComplexMatrix> matrix;  // explicit input for algebra-check

    bool operator==(const Scenario& other) const;
};

Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& s);

struct CheckRow {
    std::string check;
    double value = 0.0;
    double oracle = 0.0;
    double deviation = 0.0;
    bool pass = false;
};

struct RunReport {
    std::string scenario;
    std::vector<CheckRow> rows;

    bool all_pass() const;
};

RunReport run_scenario(const Scenario& s);

// text: aligned table; csv: header check,value,oracle,deviation,pass.
// Numbers printed with 12 significant digits.
std::string emit_report(const std::vector<RunReport>& reports, const std::string& format);

}  // namespace qdarwin::cli
