#include "qdarwin/scenario.hpp"

#include "qdarwin/darwinism.hpp"
#include "qdarwin/games.hpp"
#include "qdarwin/measurement.hpp"
#include "qdarwin/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace qdarwin::cli {

using nlohmann::json;

// ---------------------------------- parsing ---------------------------------

ScenarioError::ScenarioError(const std::vector<std::string>& errs)
    : std::runtime_error([&errs] {
          std::string msg = "scenario errors:";
          for (const auto& e : errs) msg += "\n  - " + e;
          return msg;
      }()),
      errors(errs) {}

bool Scenario::operator==(const Scenario& other) const {
    bool matrices_equal =
        matrix.has_value() == other.matrix.has_value() &&
        (!matrix || max_abs(*matrix - *other.matrix) == 0.0);
    return kind == other.kind && name == other.name && seed == other.seed &&
           tolerance == other.tolerance && dim == other.dim && trials == other.trials &&
           motion == other.motion && phases == other.phases &&
           multiplicities == other.multiplicities && stage == other.stage &&
           spectrum == other.spectrum && weights == other.weights &&
           bracket_tol == other.bracket_tol && games == other.games && matrices_equal;
}

namespace {

ComplexMatrix matrix_from_json(const json& j, std::vector<std::string>& errors) {
    if (!j.is_array() || j.empty()) {
        errors.push_back("matrix: expected a nested array of [re, im] pairs");
        return {};
    }
    const auto rows = j.size();
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != rows) {
            errors.push_back("matrix: row " + std::to_string(r) + " is not length " +
                             std::to_string(rows));
            return {};
        }
        for (std::size_t c = 0; c < rows; ++c) {
            const auto& cell = j[r][c];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number()) {
                errors.push_back("matrix: entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is not a [re, im] pair");
                return {};
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    std::vector<std::string> errors;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ScenarioError({std::string("not valid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ScenarioError({"document is not a JSON object"});

    Scenario s;
    if (!j.contains("kind") || !j["kind"].is_string())
        errors.push_back("kind: required string field");
    else
        s.kind = j["kind"].get<std::string>();

    static const std::vector<std::string> kinds = {"algebra-check", "measure-demo",
                                                   "darwinism-report", "game-value",
                                                   "axiom-check"};
    if (!s.kind.empty() && std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end())
        errors.push_back("kind: unknown kind '" + s.kind + "'");

    s.name = j.value("name", std::string("unnamed"));
    s.seed = j.value("seed", std::uint64_t{0});
    s.tolerance = j.value("tolerance", 0.0);
    s.dim = j.value("dim", 0);
    s.trials = j.value("trials", 20);
    s.motion = j.value("motion", std::string());
    s.phases = j.value("phases", std::string("zero"));
    s.stage = j.value("stage", std::string());
    s.bracket_tol = j.value("bracket_tol", 1e-8);
    s.games = j.value("games", 0);
    if (j.contains("multiplicities"))
        s.multiplicities = j["multiplicities"].get<std::vector<long long>>();
    if (j.contains("spectrum")) s.spectrum = j["spectrum"].get<std::vector<double>>();
    if (j.contains("weights")) s.weights = j["weights"].get<std::vector<double>>();
    if (j.contains("matrix")) {
        ComplexMatrix m = matrix_from_json(j["matrix"], errors);
        if (errors.empty()) s.matrix = std::move(m);
    }

    if (s.phases != "zero" && s.phases != "random")
        errors.push_back("phases: must be 'zero' or 'random'");

    auto check_dim = [&](int d, long long total) {
        if (d < 1) errors.push_back("dim: required positive integer");
        if (total > kMaxTotalDim)
            errors.push_back("dim: total dimension " + std::to_string(total) + " exceeds cap " +
                             std::to_string(kMaxTotalDim));
    };

    if (s.kind == "algebra-check") {
        if (s.matrix) {
            if (s.dim == 0) s.dim = static_cast<int>(s.matrix->rows());
            if (s.dim != s.matrix->rows())
                errors.push_back("dim: does not match the explicit matrix");
        }
        check_dim(s.dim, s.dim);
        if (s.trials < 1) errors.push_back("trials: must be >= 1");
    } else if (s.kind == "measure-demo") {
        static const std::vector<std::string> motions = {"permutation", "measure", "coarse",
                                                         "sequential"};
        if (std::find(motions.begin(), motions.end(), s.motion) == motions.end())
            errors.push_back("motion: must be one of permutation|measure|coarse|sequential");
        if (s.motion == "coarse") {
            if (s.multiplicities.empty())
                errors.push_back("multiplicities: required for coarse motions");
            long long total = std::accumulate(s.multiplicities.begin(), s.multiplicities.end(),
                                              0LL);
            for (long long v : s.multiplicities)
                if (v < 1) errors.push_back("multiplicities: every entry must be >= 1");
            if (s.dim < 1) s.dim = static_cast<int>(s.multiplicities.size());
            if (s.dim != static_cast<int>(s.multiplicities.size()))
                errors.push_back("multiplicities: need one block per control outcome");
            check_dim(s.dim, static_cast<long long>(s.dim) * total);
        } else {
            check_dim(s.dim, static_cast<long long>(s.dim) * s.dim);
        }
    } else if (s.kind == "darwinism-report") {
        check_dim(s.dim, static_cast<long long>(s.dim) * s.dim);
    } else if (s.kind == "game-value") {
        static const std::vector<std::string> stages = {"1", "2", "3", "4.1", "4.2", "4.3", "4.4"};
        if (std::find(stages.begin(), stages.end(), s.stage) == stages.end())
            errors.push_back("stage: must be one of 1|2|3|4.1|4.2|4.3|4.4");
        if (s.spectrum.empty()) errors.push_back("spectrum: required non-empty array");
        if (s.stage == "2" || s.stage == "4.3") {
            if (s.multiplicities.empty())
                errors.push_back("multiplicities: required for rational stages");
            else if (s.multiplicities.size() != s.spectrum.size())
                errors.push_back("multiplicities: size must match spectrum");
            if (j.contains("M")) {
                long long stated = j["M"].get<long long>();
                long long actual = std::accumulate(s.multiplicities.begin(),
                                                   s.multiplicities.end(), 0LL);
                if (stated != actual)
                    errors.push_back("multiplicity sum mismatch: M=" + std::to_string(stated) +
                                     " but multiplicities sum to " + std::to_string(actual));
            }
        }
        if (s.stage == "3" || s.stage == "4.1" || s.stage == "4.4") {
            if (s.weights.size() != s.spectrum.size())
                errors.push_back("weights: required, one per spectrum entry");
            else {
                double sum = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
                if (std::abs(sum - 1.0) > 1e-9)
                    errors.push_back("weights: sum " + std::to_string(sum) + " != 1");
            }
        }
    } else if (s.kind == "axiom-check") {
        if (s.games < 1) errors.push_back("games: must be >= 1");
    }

    if (!errors.empty()) throw ScenarioError(errors);
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["kind"] = s.kind;
    j["name"] = s.name;
    j["seed"] = s.seed;
    if (s.tolerance != 0.0) j["tolerance"] = s.tolerance;
    if (s.dim != 0) j["dim"] = s.dim;
    j["trials"] = s.trials;
    if (!s.motion.empty()) j["motion"] = s.motion;
    j["phases"] = s.phases;
    if (!s.multiplicities.empty()) j["multiplicities"] = s.multiplicities;
    if (!s.stage.empty()) j["stage"] = s.stage;
    if (!s.spectrum.empty()) j["spectrum"] = s.spectrum;
    if (!s.weights.empty()) j["weights"] = s.weights;
    j["bracket_tol"] = s.bracket_tol;
    if (s.games != 0) j["games"] = s.games;
    if (s.matrix) j["matrix"] = matrix_to_json(*s.matrix);
    return j.dump(2);
}

// ---------------------------------- running ---------------------------------

bool RunReport::all_pass() const {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

namespace {

void add_row(RunReport& rep, const std::string& check, double value, double oracle, double bound) {
    double dev = std::abs(value - oracle);
    rep.rows.push_back(CheckRow{check, value, oracle, dev, dev <= bound});
}

void add_residual(RunReport& rep, const std::string& check, double residual, double bound) {
    add_row(rep, check, residual, 0.0, bound);
}

void append_value_report(RunReport& rep, const std::string& prefix,
                         const games::ValueReport& vr) {
    for (const auto& e : vr.trail)
        rep.rows.push_back(CheckRow{prefix + "/" + e.name, e.residual, 0.0, e.residual, e.pass});
    rep.rows.push_back(CheckRow{prefix + "/value", vr.value, vr.oracle, vr.deviation,
                                vr.trail.empty() ? true : vr.ok()});
}

double pick_tol(const Scenario& s, double fallback) {
    return s.tolerance > 0.0 ? s.tolerance : fallback;
}

struct MotionFixture {
    CompositeSpace space;
    Observable a1, a2, c1, c2;
    MatrixUnitFamily units1, units2;
    RealMatrix phi;
};

// Random-basis control/target observables plus the non-commuting pair built
// from the shared coefficient tensor.
MotionFixture make_fixture(int n, bool random_phases, Rng& rng) {
    MotionFixture f{CompositeSpace::of({n, n}), {}, {}, {}, {}, {}, {}, {}};
    ComplexMatrix b1 = random_unitary(n, rng);
    ComplexMatrix b2 = random_unitary(n, rng);
    std::vector<double> alpha1 = random_spectrum(n, rng);
    std::vector<double> alpha2 = random_spectrum(n, rng);
    ComplexMatrix m1 = ComplexMatrix::Zero(n, n), m2 = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m1 += alpha1[static_cast<std::size_t>(i)] * (b1.col(i) * b1.col(i).adjoint());
        m2 += alpha2[static_cast<std::size_t>(i)] * (b2.col(i) * b2.col(i).adjoint());
    }
    f.a1 = spectral_decompose(ComplexMatrix(0.5 * (m1 + m1.adjoint())));
    f.a2 = spectral_decompose(ComplexMatrix(0.5 * (m2 + m2.adjoint())));
    f.units1 = make_matrix_units(f.a1.family);
    f.units2 = make_matrix_units(f.a2.family);

    // C1: rotated copy of A1 (same spectrum, non-commuting); C2 carries the
    // same coefficient tensor over the S2 matrix units
    ComplexMatrix rot = random_unitary(n, rng);
    f.c1 = spectral_decompose(ComplexMatrix(rot.adjoint() * f.a1.matrix * rot));
    CoefficientTensor beta = express_in_family(f.c1, f.units1);
    ProjectorFamily c2_family;
    c2_family.dim = n;
    for (Eigen::Index c = 0; c < n; ++c) {
        c2_family.projectors.push_back(reconstruct_projector(beta, f.units2, c));
        c2_family.labels.push_back(static_cast<int>(c));
    }
    f.c2 = observable_from_parts(Spectrum{f.c1.spectrum.values, tol::grouping}, c2_family);

    f.phi = random_phases ? random_phases_matrix(n, rng) : RealMatrix::Zero(n, n);
    return f;
}

void run_algebra_check(const Scenario& s, RunReport& rep) {
    const double bound = pick_tol(s, tol::algebra);
    Rng rng(s.seed);
    const Eigen::Index n = s.dim;
    for (int t = 0; t < s.trials; ++t) {
        ComplexMatrix h = s.matrix ? *s.matrix : random_hermitian(n, rng);
        Observable obs = spectral_decompose(h);
        std::string tag = "trial" + std::to_string(t);
        add_residual(rep, tag + "/projector-algebra", obs.family.algebra_residual(), bound);
        add_residual(rep, tag + "/reconstruction", max_abs(obs.matrix - h), bound);
        if (obs.nondegenerate() && obs.family.size() == static_cast<std::size_t>(n)) {
            MatrixUnitFamily units = make_matrix_units(obs.family);
            add_residual(rep, tag + "/unit-algebra", units.algebra_residual(), bound);
            double diag = 0.0;
            for (std::size_t a = 0; a < units.size(); ++a)
                diag = std::max(diag, max_abs(units.projector(a) - obs.family.projectors[a]));
            add_residual(rep, tag + "/unit-diagonal-match", diag, bound);
        }
        if (s.matrix) break;  // explicit input: a single deterministic trial
    }
}

void run_permutation_demo(const Scenario& s, RunReport& rep) {
    const double bound = pick_tol(s, tol::algebra);
    Rng rng(s.seed);
    const int n = s.dim;
    MotionFixture f = make_fixture(n, s.phases == "random", rng);
    meas::Permutation pi{random_permutation_map(n, rng)};
    RealVector phi = s.phases == "random" ? random_phases_vector(n, rng)
                                          : RealVector::Zero(n);
    Unitary u = meas::permutation_unitary(f.units1, pi, phi);
    add_residual(rep, "unitarity", u.unitarity_error(), bound);

    ComplexMatrix evolved = evolve(f.a1.matrix, u);
    ComplexMatrix relabeled = ComplexMatrix::Zero(n, n);
    for (std::size_t a = 0; a < f.a1.family.size(); ++a)
        relabeled += f.a1.spectrum.values[a] *
                     f.a1.family.projectors[static_cast<std::size_t>(pi(static_cast<int>(a)))];
    add_residual(rep, "eigenvalue-relabeling", max_abs(evolved - relabeled), bound);

    // measured observable ignores phases; a non-commuting one does not
    Unitary u_other = meas::permutation_unitary(f.units1, pi, random_phases_vector(n, rng));
    add_residual(rep, "phase-neutral-measured", max_abs(evolve(f.a1.matrix, u_other) - evolved),
                 bound);
    if (n >= 2) {
        double shift = max_abs(evolve(f.c1.matrix, u_other) - evolve(f.c1.matrix, u));
        add_row(rep, "phase-sensitive-noncommuting", shift > 1e-3 ? 1.0 : 0.0, 1.0, 0.5);
    }

    auto branch = darwin::is_classical_act(u, f.a1);
    add_row(rep, "classical-act-detected", branch ? 1.0 : 0.0, 1.0, 0.5);
    if (branch) {
        double pi_match = 0.0;
        for (int b = 0; b < n; ++b)
            pi_match = std::max(pi_match,
                                static_cast<double>(std::abs(branch->permutation(b) - pi(b))));
        add_residual(rep, "recovered-permutation", pi_match, 0.5);
    }
}

void run_measure_demo(const Scenario& s, RunReport& rep) {
    const double bound = pick_tol(s, tol::algebra);
    Rng rng(s.seed);
    const int n = s.dim;
    MotionFixture f = make_fixture(n, s.phases == "random", rng);
    Unitary u = meas::measurement_unitary(f.a1.family, f.units2, f.phi, f.space);
    add_residual(rep, "unitarity", u.unitarity_error(), bound);

    ComplexMatrix a1_full = tensor_embed(f.a1.matrix, 0, f.space);
    ComplexMatrix a2_full = tensor_embed(f.a2.matrix, 1, f.space);
    ComplexMatrix a1_out = evolve(a1_full, u);
    ComplexMatrix a2_out = evolve(a2_full, u);
    add_residual(rep, "measured-observable-preserved", max_abs(a1_out - a1_full), bound);

    ComplexMatrix expected = ComplexMatrix::Zero(f.space.total, f.space.total);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            expected += f.a2.spectrum.values[static_cast<std::size_t>(b)] *
                        kron(f.a1.family.projectors[static_cast<std::size_t>(a)],
                             f.a2.family.projectors[static_cast<std::size_t>(
                                 meas::mod_add(a, b, n))]);
    add_residual(rep, "pointer-correlation-form", max_abs(a2_out - expected), bound);

    auto corr = darwin::correlation_check(a1_out, a2_out, f.space, &f.a2.family.projectors);
    add_row(rep, "records-correlated", corr.correlated ? 1.0 : 0.0, 1.0, 0.5);

    ComplexMatrix c1_out = evolve(tensor_embed(f.c1.matrix, 0, f.space), u);
    ComplexMatrix c2_out = evolve(tensor_embed(f.c2.matrix, 1, f.space), u);
    auto bad = darwin::correlation_check(c1_out, c2_out, f.space);
    add_row(rep, "noncommuting-pair-uncorrelated", bad.correlated ? 1.0 : 0.0, 0.0, 0.5);
}

void run_coarse_demo(const Scenario& s, RunReport& rep) {
    const double bound = pick_tol(s, tol::algebra);
    const int n = s.dim;
    meas::Multiplicities mult{s.multiplicities};
    const Eigen::Index m_total = mult.total();
    CompositeSpace space = CompositeSpace::of({n, m_total});
    ProjectorFamily fam1 = computational_family(n);
    MatrixUnitFamily units2 = computational_units(m_total);
    Unitary u = meas::coarse_measurement_unitary(fam1, units2, mult, space);
    add_residual(rep, "unitarity", u.unitarity_error(), bound);

    Rng rng(s.seed);
    std::vector<double> alpha = random_spectrum(n, rng);
    ComplexMatrix a1 = ComplexMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a) a1(a, a) = alpha[static_cast<std::size_t>(a)];
    ComplexMatrix a1_full = tensor_embed(a1, 0, space);
    add_residual(rep, "control-observable-invariant", max_abs(evolve(a1_full, u) - a1_full),
                 bound);

    // in branch a, the pointer's ready state lands in block a
    ComplexVector ready = units2.uniform_vector();
    double support = 0.0;
    for (int a = 0; a < n; ++a) {
        for (std::size_t blk = 0; blk < mult.blocks(); ++blk) {
            ComplexMatrix block_proj = ComplexMatrix::Zero(m_total, m_total);
            long long start = mult.block_start(blk);
            for (long long e = start; e < start + mult.m[blk]; ++e)
                block_proj(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) = 1.0;
            ComplexMatrix evolved =
                evolve(tensor_embed(block_proj, 1, space), u);
            ComplexVector probe = kron(ComplexMatrix(ComplexVector::Unit(n, a)),
                                       ComplexMatrix(ready));
            double weight = probe.dot(evolved * probe).real();
            double want = blk == static_cast<std::size_t>(a) ? 1.0 : 0.0;
            support = std::max(support, std::abs(weight - want));
        }
    }
    add_residual(rep, "pointer-block-support", support, 1e-9);
}

void run_sequential_demo(const Scenario& s, RunReport& rep) {
    Rng rng(s.seed);
    const int n = std::max(2, s.dim);
    ProjectorFamily fam = computational_family(n);
    std::vector<double> alpha = random_spectrum(n, rng);
    Spectrum spec{alpha, tol::grouping};
    Observable a1 = observable_from_parts(spec, fam);
    Observable a2 = observable_from_parts(spec, computational_family(n));
    ComplexMatrix rot = random_unitary(n, rng);
    Observable c1 = spectral_decompose(ComplexMatrix(rot.adjoint() * a1.matrix * rot));
    CompositeSpace space = CompositeSpace::of({n, n});
    RealMatrix phi1 = s.phases == "random" ? random_phases_matrix(n, rng)
                                           : RealMatrix::Zero(n, n);
    RealMatrix phi2 = s.phases == "random" ? random_phases_matrix(n, rng)
                                           : RealMatrix::Zero(n, n);

    auto seq = meas::sequential_measurement(a1, c1, a2, phi1, phi2, space);
    int min_count = *std::min_element(seq.branch_counts.begin(), seq.branch_counts.end());
    rep.rows.push_back(CheckRow{"noncommuting-min-branches", static_cast<double>(min_count), 2.0,
                                std::max(0.0, 2.0 - min_count), min_count >= 2});

    auto rep_seq = meas::sequential_measurement(a1, a1, a2, phi1, phi2, space);
    int max_repeat = *std::max_element(rep_seq.branch_counts.begin(),
                                       rep_seq.branch_counts.end());
    add_row(rep, "repeat-measurement-branches", static_cast<double>(max_repeat), 1.0, 0.5);
    add_row(rep, "repeat-flagged-commuting", rep_seq.commuting_controls ? 1.0 : 0.0, 1.0, 0.5);

    Observable out = spectral_decompose(seq.a2_at_3);
    double spectrum_shift = 0.0;
    Observable base = spectral_decompose(tensor_embed(a2.matrix, 1, space));
    for (std::size_t k = 0; k < std::min(out.spectrum.size(), base.spectrum.size()); ++k)
        spectrum_shift = std::max(spectrum_shift, std::abs(out.spectrum.values[k] -
                                                           base.spectrum.values[k]));
    add_residual(rep, "pointer-spectrum-preserved", spectrum_shift, 1e-9);
}

void run_darwinism_report(const Scenario& s, RunReport& rep) {
    Rng rng(s.seed);
    const int n = s.dim;
    MotionFixture f = make_fixture(n, s.phases == "random", rng);
    Unitary u = meas::measurement_unitary(f.a1.family, f.units2, f.phi, f.space);
    ComplexMatrix a1_out = evolve(tensor_embed(f.a1.matrix, 0, f.space), u);
    ComplexMatrix a2_out = evolve(tensor_embed(f.a2.matrix, 1, f.space), u);
    auto corr = darwin::correlation_check(a1_out, a2_out, f.space, &f.a2.family.projectors);
    add_row(rep, "correlated", corr.correlated ? 1.0 : 0.0, 1.0, 0.5);
    add_residual(rep, "correlation-residual", corr.residual, tol::correlation);
    if (corr.correlated) {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                add_row(rep,
                        "bijection[a=" + std::to_string(a) + ",b=" + std::to_string(b) + "]",
                        static_cast<double>(corr.slot_table[static_cast<std::size_t>(a)]
                                                           [static_cast<std::size_t>(b)]),
                        static_cast<double>(meas::mod_add(a, b, n)), 0.25);
    }

    // classical-act round trip on S1, with the recovered structure in the report
    meas::Permutation pi{random_permutation_map(n, rng)};
    RealVector phi = random_phases_vector(n, rng);
    Unitary act = meas::permutation_unitary(f.units1, pi, phi);
    auto branch = darwin::branch_decomposition(act, f.a1);
    add_row(rep, "branch-count", static_cast<double>(branch.branch_count),
            static_cast<double>(n), 0.25);
    double phase_match = 0.0;
    for (int b = 0; b < n; ++b) {
        add_row(rep, "branch-pi[" + std::to_string(b) + "]",
                static_cast<double>(branch.permutation(b)), static_cast<double>(pi(b)), 0.25);
        double diff = std::remainder(branch.phases(b) - phi(b), 2.0 * M_PI);
        phase_match = std::max(phase_match, std::abs(diff));
    }
    add_residual(rep, "branch-phase-roundtrip", phase_match, 1e-8);
}

void run_game_value(const Scenario& s, RunReport& rep) {
    Spectrum spec{s.spectrum, tol::grouping};
    if (s.stage == "1") {
        ProjectorFamily fam = computational_family(static_cast<Eigen::Index>(spec.size()));
        append_value_report(rep, "stage1", games::stage1_value(observable_from_parts(spec, fam)));
    } else if (s.stage == "2") {
        append_value_report(rep, "stage2",
                            games::stage2_value(spec, games::RationalWeights{s.multiplicities}));
    } else if (s.stage == "3") {
        auto res = games::stage3_value(spec, s.weights, s.bracket_tol);
        append_value_report(rep, "stage3", res.report);
        rep.rows.push_back(CheckRow{"stage3/iterations",
                                    static_cast<double>(res.bracket.iterations), 0.0,
                                    0.0, res.bracket.converged});
    } else {
        const Eigen::Index n = static_cast<Eigen::Index>(spec.size());
        Observable obs = observable_from_parts(spec, computational_family(n));
        games::MixedGameSpec mix;
        if (s.stage == "4.1") {
            // mixture over a seeded rotated family
            Rng rng(s.seed);
            ComplexMatrix rot = random_unitary(n, rng);
            ProjectorFamily fam;
            fam.dim = n;
            for (Eigen::Index i = 0; i < n; ++i) {
                fam.projectors.push_back(rot.col(i) * rot.col(i).adjoint());
                fam.labels.push_back(static_cast<int>(i));
            }
            mix.family = std::move(fam);
            mix.weights = s.weights;
        } else {
            mix.family = computational_family(n);
            if (s.stage == "4.2")
                mix.weights.assign(spec.size(), 1.0 / static_cast<double>(spec.size()));
            else if (s.stage == "4.3") {
                long long m_total = std::accumulate(s.multiplicities.begin(),
                                                    s.multiplicities.end(), 0LL);
                for (long long m : s.multiplicities)
                    mix.weights.push_back(static_cast<double>(m) /
                                          static_cast<double>(m_total));
            } else {
                mix.weights = s.weights;
            }
        }
        append_value_report(rep, "stage" + s.stage, games::stage4_value(mix, obs));
    }
}

void run_axiom_check(const Scenario& s, RunReport& rep) {
    const double bound = pick_tol(s, 1e-9);
    auto report = games::verify_rationality_axioms(s.games, s.seed, bound);
    for (const auto& e : report.entries) {
        rep.rows.push_back(CheckRow{e.axiom, e.worst, 0.0, e.worst, e.pass});
    }
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
    RunReport rep;
    rep.scenario = s.name;
    if (s.kind == "algebra-check")
        run_algebra_check(s, rep);
    else if (s.kind == "measure-demo") {
        if (s.motion == "permutation")
            run_permutation_demo(s, rep);
        else if (s.motion == "measure")
            run_measure_demo(s, rep);
        else if (s.motion == "coarse")
            run_coarse_demo(s, rep);
        else
            run_sequential_demo(s, rep);
    } else if (s.kind == "darwinism-report")
        run_darwinism_report(s, rep);
    else if (s.kind == "game-value")
        run_game_value(s, rep);
    else if (s.kind == "axiom-check")
        run_axiom_check(s, rep);
    else
        throw ScenarioError({"kind: unknown kind '" + s.kind + "'"});
    return rep;
}

// ---------------------------------- emission --------------------------------

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

std::string emit_report(const std::vector<RunReport>& reports, const std::string& format) {
    if (format != "text" && format != "csv")
        throw ScenarioError({"format: must be 'text' or 'csv'"});
    std::ostringstream out;
    if (format == "csv") {
        out << "check,value,oracle,deviation,pass\n";
        for (const auto& rep : reports)
            for (const auto& r : rep.rows)
                out << rep.scenario << ":" << r.check << "," << format_number(r.value) << ","
                    << format_number(r.oracle) << "," << format_number(r.deviation) << ","
                    << (r.pass ? "true" : "false") << "\n";
        return out.str();
    }

    for (const auto& rep : reports) {
        out << "== " << rep.scenario << " ==\n";
        std::size_t name_w = 5, num_w = 12;
        for (const auto& r : rep.rows) {
            name_w = std::max(name_w, r.check.size());
            num_w = std::max({num_w, format_number(r.value).size(),
                              format_number(r.oracle).size(),
                              format_number(r.deviation).size()});
        }
        auto pad = [](const std::string& s, std::size_t w) {
            return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
        };
        out << pad("check", name_w) << "  " << pad("value", num_w) << "  "
            << pad("oracle", num_w) << "  " << pad("deviation", num_w) << "  pass\n";
        for (const auto& r : rep.rows)
            out << pad(r.check, name_w) << "  " << pad(format_number(r.value), num_w) << "  "
                << pad(format_number(r.oracle), num_w) << "  "
                << pad(format_number(r.deviation), num_w) << "  "
                << (r.pass ? "yes" : "NO") << "\n";
        out << (rep.all_pass() ? "all checks passed" : "FAILURES PRESENT") << "\n\n";
    }
    return out.str();
}

}  // namespace qdarwin::cli
