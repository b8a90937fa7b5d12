// Acceptance suite: one test case per criterion, each printing a pass/fail
// line with its measured residuals and runtime.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdarwin/darwinism.hpp"
#include "qdarwin/games.hpp"
#include "qdarwin/measurement.hpp"
#include "qdarwin/rng.hpp"
#include "qdarwin/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace qdarwin;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

Observable random_basis_observable(Eigen::Index n, Rng& rng) {
    ComplexMatrix basis = random_unitary(n, rng);
    std::vector<double> alpha = random_spectrum(static_cast<int>(n), rng);
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        m += alpha[static_cast<std::size_t>(i)] * (basis.col(i) * basis.col(i).adjoint());
    return spectral_decompose(ComplexMatrix(0.5 * (m + m.adjoint())));
}

// C1 rotated from A1 plus C2 carrying the same coefficient tensor on S2
std::pair<Observable, Observable> noncommuting_pair(const Observable& a1,
                                                    const MatrixUnitFamily& units1,
                                                    const MatrixUnitFamily& units2, Rng& rng) {
    const Eigen::Index n = a1.dim();
    ComplexMatrix rot = random_unitary(n, rng);
    Observable c1 = spectral_decompose(ComplexMatrix(rot.adjoint() * a1.matrix * rot));
    CoefficientTensor beta = express_in_family(c1, units1);
    ProjectorFamily fam2;
    fam2.dim = n;
    for (Eigen::Index c = 0; c < n; ++c) {
        fam2.projectors.push_back(reconstruct_projector(beta, units2, c));
        fam2.labels.push_back(static_cast<int>(c));
    }
    Observable c2 = observable_from_parts(Spectrum{c1.spectrum.values, tol::grouping}, fam2);
    return {std::move(c1), std::move(c2)};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: algebra suite, N in 1..8, 20 seeded bases each") {
    Timer timer;
    double worst_family = 0.0, worst_units = 0.0;
    for (int n = 1; n <= 8; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            Rng rng(static_cast<std::uint64_t>(n * 1000 + trial));
            Observable obs = random_basis_observable(n, rng);
            worst_family = std::max(worst_family, obs.family.algebra_residual());
            MatrixUnitFamily units = make_matrix_units(obs.family);
            worst_units = std::max(worst_units, units.algebra_residual());
            double diag = 0.0;
            for (std::size_t a = 0; a < units.size(); ++a)
                diag = std::max(diag, max_abs(units.projector(a) - obs.family.projectors[a]));
            worst_units = std::max(worst_units, diag);
        }
    }
    double secs = timer.seconds();
    bool pass = worst_family < 1e-10 && worst_units < 1e-10 && secs < 5.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "algebra suite: projector residual %.2e, unit residual %.2e, %.2fs",
                  worst_family, worst_units, secs);
    report(1, pass, buf);
    CHECK(worst_family < 1e-10);
    CHECK(worst_units < 1e-10);
    CHECK(secs < 5.0);
}

TEST_CASE("criterion 2: perfect measurement, N in 2..6, 10 random phase assignments") {
    Timer timer;
    double worst_preserved = 0.0;
    bool all_correlated = true, all_bijection = true, all_c_uncorrelated = true;
    for (int n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            Rng rng(static_cast<std::uint64_t>(77000 + n * 100 + trial));
            Observable a1 = random_basis_observable(n, rng);
            Observable a2 = random_basis_observable(n, rng);
            MatrixUnitFamily units1 = make_matrix_units(a1.family);
            MatrixUnitFamily units2 = make_matrix_units(a2.family);
            CompositeSpace space = CompositeSpace::of({n, n});
            Unitary u = meas::measurement_unitary(a1.family, units2,
                                                  random_phases_matrix(n, rng), space);
            ComplexMatrix a1_full = tensor_embed(a1.matrix, 0, space);
            ComplexMatrix a2_full = tensor_embed(a2.matrix, 1, space);
            ComplexMatrix a1_out = evolve(a1_full, u);
            ComplexMatrix a2_out = evolve(a2_full, u);
            worst_preserved = std::max(worst_preserved, max_abs(a1_out - a1_full));

            auto rep = darwin::correlation_check(a1_out, a2_out, space, &a2.family.projectors);
            if (!rep.correlated) all_correlated = false;
            if (rep.correlated)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        if (rep.slot_table[static_cast<std::size_t>(a)]
                                          [static_cast<std::size_t>(b)] !=
                            meas::mod_add(a, b, n))
                            all_bijection = false;

            auto [c1, c2] = noncommuting_pair(a1, units1, units2, rng);
            ComplexMatrix c1_out = evolve(tensor_embed(c1.matrix, 0, space), u);
            ComplexMatrix c2_out = evolve(tensor_embed(c2.matrix, 1, space), u);
            if (darwin::correlation_check(c1_out, c2_out, space).correlated)
                all_c_uncorrelated = false;
        }
    }
    double secs = timer.seconds();
    bool pass = worst_preserved < 1e-10 && all_correlated && all_bijection &&
                all_c_uncorrelated && secs < 10.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "perfect measurement: record drift %.2e, bijection %s, "
                  "noncommuting pair uncorrelated %s, %.2fs",
                  worst_preserved, all_bijection ? "a(+)b certified" : "BROKEN",
                  all_c_uncorrelated ? "yes" : "NO", secs);
    report(2, pass, buf);
    CHECK(worst_preserved < 1e-10);
    CHECK(all_correlated);
    CHECK(all_bijection);
    CHECK(all_c_uncorrelated);
    CHECK(secs < 10.0);
}

TEST_CASE("criterion 3: phase dichotomy") {
    double worst_neutral = 0.0;
    double smallest_witness = std::numeric_limits<double>::infinity();
    for (int n = 2; n <= 4; ++n) {
        Rng rng(static_cast<std::uint64_t>(88000 + n));
        Observable a1 = random_basis_observable(n, rng);
        Observable a2 = random_basis_observable(n, rng);
        MatrixUnitFamily units1 = make_matrix_units(a1.family);
        MatrixUnitFamily units2 = make_matrix_units(a2.family);
        meas::Permutation pi{random_permutation_map(n, rng)};
        CompositeSpace space = CompositeSpace::of({n, n});

        Unitary perm0 = meas::permutation_unitary(units1, pi, RealVector::Zero(n));
        Unitary meas0 = meas::measurement_unitary(a1.family, units2, RealMatrix::Zero(n, n),
                                                  space);
        ComplexMatrix a1_ref = evolve(a1.matrix, perm0);
        ComplexMatrix a2_ref = evolve(tensor_embed(a2.matrix, 1, space), meas0);
        auto [c1, c2] = noncommuting_pair(a1, units1, units2, rng);
        ComplexMatrix c1_ref = evolve(c1.matrix, perm0);
        (void)c2;

        double witness = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            Unitary perm = meas::permutation_unitary(units1, pi, random_phases_vector(n, rng));
            Unitary umeas = meas::measurement_unitary(a1.family, units2,
                                                      random_phases_matrix(n, rng), space);
            worst_neutral = std::max(worst_neutral, max_abs(evolve(a1.matrix, perm) - a1_ref));
            worst_neutral = std::max(
                worst_neutral, max_abs(evolve(tensor_embed(a2.matrix, 1, space), umeas) - a2_ref));
            witness = std::max(witness, max_abs(evolve(c1.matrix, perm) - c1_ref));
        }
        smallest_witness = std::min(smallest_witness, witness);
    }
    bool pass = worst_neutral < 1e-10 && smallest_witness > 1e-3;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "phase dichotomy: measured drift %.2e, weakest witness %.2e",
                  worst_neutral, smallest_witness);
    report(3, pass, buf);
    CHECK(worst_neutral < 1e-10);
    CHECK(smallest_witness > 1e-3);
}

TEST_CASE("criterion 4: record loss in sequential measurement") {
    std::vector<double> alpha = {0.0, 1.0};
    Observable a1 = observable_from_parts(Spectrum{alpha, tol::grouping}, computational_family(2));
    Observable a2 = observable_from_parts(Spectrum{alpha, tol::grouping}, computational_family(2));
    ComplexMatrix h(2, 2);
    double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    Observable c1 = spectral_decompose(ComplexMatrix(h * a1.matrix * h.adjoint()));
    CompositeSpace space = CompositeSpace::of({2, 2});

    int min_split = 100, max_repeat = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(static_cast<std::uint64_t>(90000 + trial));
        RealMatrix p1 = trial == 0 ? RealMatrix::Zero(2, 2) : random_phases_matrix(2, rng);
        RealMatrix p2 = trial == 0 ? RealMatrix::Zero(2, 2) : random_phases_matrix(2, rng);
        auto seq = meas::sequential_measurement(a1, c1, a2, p1, p2, space);
        for (int c : seq.branch_counts) min_split = std::min(min_split, c);
        auto rep = meas::sequential_measurement(a1, a1, a2, p1, p2, space);
        for (int c : rep.branch_counts) max_repeat = std::max(max_repeat, c);
    }
    bool pass = min_split >= 2 && max_repeat == 1;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "record loss: >=%d branches per initial branch, same-basis repeat shows %d",
                  min_split, max_repeat);
    report(4, pass, buf);
    CHECK(min_split >= 2);
    CHECK(max_repeat == 1);
}

TEST_CASE("criterion 5: stage 1 equal-probability values") {
    double worst_formula = 0.0, worst_oracle = 0.0;
    bool enumerated = true, all_ok = true;
    for (int n = 1; n <= 6; ++n) {
        Rng rng(static_cast<std::uint64_t>(91000 + n));
        Observable obs = random_basis_observable(n, rng);
        games::ValueReport r = games::stage1_value(obs);
        worst_formula = std::max(worst_formula, std::abs(r.value - obs.spectrum.sum() / n));
        worst_oracle = std::max(worst_oracle, r.deviation);
        bool saw = false;
        for (const auto& e : r.trail)
            if (e.name == "symmetrization-enumerated-N!" && e.pass) saw = true;
        if (!saw) enumerated = false;
        if (!r.ok()) all_ok = false;
    }
    bool pass = worst_formula < 1e-10 && worst_oracle < 1e-10 && enumerated && all_ok;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "stage 1: formula drift %.2e, oracle drift %.2e, N! identity enumerated %s",
                  worst_formula, worst_oracle, enumerated ? "yes" : "NO");
    report(5, pass, buf);
    CHECK(worst_formula < 1e-10);
    CHECK(worst_oracle < 1e-10);
    CHECK(enumerated);
    CHECK(all_ok);
}

TEST_CASE("criterion 6: stage 2 over every multiplicity composition, N<=4, M<=8") {
    Timer timer;
    double worst_identity = 0.0, worst_value = 0.0;
    int runs = 0;
    bool all_ok = true;
    for (int n = 1; n <= 4; ++n) {
        for (int m_total = n; m_total <= 8; ++m_total) {
            std::vector<long long> m(static_cast<std::size_t>(n), 1);
            std::function<void(int, long long)> emit = [&](int slot, long long left) {
                if (slot == n - 1) {
                    m[static_cast<std::size_t>(slot)] = left;
                    Rng rng(static_cast<std::uint64_t>(92000 + runs));
                    Spectrum spec{random_spectrum(n, rng), tol::grouping};
                    games::ValueReport r = games::stage2_value(spec, games::RationalWeights{m});
                    for (const auto& e : r.trail)
                        if (e.name == "measured-product-identity")
                            worst_identity = std::max(worst_identity, e.residual);
                    double direct = 0.0;
                    for (int a = 0; a < n; ++a)
                        direct += static_cast<double>(m[static_cast<std::size_t>(a)]) *
                                  spec.values[static_cast<std::size_t>(a)] /
                                  static_cast<double>(m_total);
                    worst_value = std::max(worst_value, std::abs(r.value - direct));
                    worst_value = std::max(worst_value, r.deviation);
                    if (!r.ok()) all_ok = false;
                    ++runs;
                    return;
                }
                for (long long take = 1; take <= left - (n - 1 - slot); ++take) {
                    m[static_cast<std::size_t>(slot)] = take;
                    emit(slot + 1, left - take);
                }
            };
            emit(0, m_total);
        }
    }
    double secs = timer.seconds();
    bool pass = worst_identity < 1e-9 && worst_value < 1e-9 && all_ok && secs < 30.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "stage 2: %d compositions, operator identity %.2e, value drift %.2e, %.2fs",
                  runs, worst_identity, worst_value, secs);
    report(6, pass, buf);
    CHECK(worst_identity < 1e-9);
    CHECK(worst_value < 1e-9);
    CHECK(all_ok);
    CHECK(secs < 30.0);
}

TEST_CASE("criterion 7: stage 3 bracketing on 20 seeded irrational targets") {
    double worst_width = 0.0, worst_mid = 0.0;
    int worst_iters = 0;
    bool dominance = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(static_cast<std::uint64_t>(93000 + trial));
        int n = 2 + trial % 4;
        Spectrum spec{random_spectrum(n, rng), tol::grouping};
        std::vector<double> w = random_simplex(n, rng);
        auto res = games::stage3_value(spec, w, 1e-6, 40);
        worst_width = std::max(worst_width, res.bracket.width);
        worst_iters = std::max(worst_iters, res.bracket.iterations);
        worst_mid = std::max(worst_mid, std::abs(res.report.value - res.report.oracle));
        if (!res.bracket.dominance_ok) dominance = false;
        for (std::size_t k = 1; k < res.bracket.widths.size(); ++k)
            if (res.bracket.widths[k] > res.bracket.widths[k - 1] + 1e-15) dominance = false;
    }
    bool pass = worst_width < 1e-6 && worst_iters <= 40 && worst_mid < 1e-6 && dominance;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "stage 3: width %.2e within %d iterations, midpoint drift %.2e, dominance %s",
                  worst_width, worst_iters, worst_mid, dominance ? "held" : "VIOLATED");
    report(7, pass, buf);
    CHECK(worst_width < 1e-6);
    CHECK(worst_iters <= 40);
    CHECK(worst_mid < 1e-6);
    CHECK(dominance);
}

TEST_CASE("criterion 8: stage 4 mixed-state cases") {
    double worst_41 = 0.0, worst_42 = 0.0, worst_43 = 0.0, worst_44 = 0.0, worst_eq50 = 0.0;
    bool all_ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        Rng rng(static_cast<std::uint64_t>(94000 + trial));
        int n = 2 + trial % 3;

        {  // 4.1 unsharp: rotated mixture family
            Observable obs = observable_from_parts(
                Spectrum{random_spectrum(n, rng), tol::grouping}, computational_family(n));
            ComplexMatrix rot = random_unitary(n, rng);
            games::MixedGameSpec spec;
            spec.family.dim = n;
            for (Eigen::Index i = 0; i < n; ++i) {
                spec.family.projectors.push_back(rot.col(i) * rot.col(i).adjoint());
                spec.family.labels.push_back(static_cast<int>(i));
            }
            spec.weights = random_simplex(n, rng);
            games::ValueReport r = games::stage4_value(spec, obs);
            if (r.method != "stage4.1" || !r.ok()) all_ok = false;
            worst_41 = std::max(worst_41, r.deviation);
        }
        {  // 4.2 equal sharp
            Observable obs = observable_from_parts(
                Spectrum{random_spectrum(n, rng), tol::grouping}, computational_family(n));
            games::MixedGameSpec spec;
            spec.family = computational_family(n);
            spec.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
            games::ValueReport r = games::stage4_value(spec, obs);
            if (r.method != "stage4.2" || !r.ok()) all_ok = false;
            worst_42 = std::max(worst_42, r.deviation);
        }
        {  // 4.3 rational sharp; unequal blocks so the dispatch stays rational
            std::vector<long long> m(static_cast<std::size_t>(n));
            long long m_total = 0;
            for (std::size_t a = 0; a < m.size(); ++a) m[a] = 1 + rng.index(3);
            if (std::adjacent_find(m.begin(), m.end(), std::not_equal_to<>()) == m.end())
                m[0] += 1;
            for (long long v : m) m_total += v;
            Observable obs = observable_from_parts(
                Spectrum{random_spectrum(n, rng), tol::grouping}, computational_family(n));
            games::MixedGameSpec spec;
            spec.family = computational_family(n);
            for (long long v : m)
                spec.weights.push_back(static_cast<double>(v) / static_cast<double>(m_total));
            games::ValueReport r = games::stage4_value(spec, obs);
            if (r.method != "stage4.3" || !r.ok()) all_ok = false;
            worst_43 = std::max(worst_43, r.deviation);
            for (const auto& e : r.trail)
                if (e.name == "measured-product-identity")
                    worst_eq50 = std::max(worst_eq50, e.residual);
        }
        {  // 4.4 irrational sharp
            Observable obs = observable_from_parts(
                Spectrum{random_spectrum(n, rng), tol::grouping}, computational_family(n));
            games::MixedGameSpec spec;
            spec.family = computational_family(n);
            spec.weights = random_simplex(n, rng);
            games::ValueReport r = games::stage4_value(spec, obs);
            if (r.method != "stage4.4" || !r.ok()) all_ok = false;
            worst_44 = std::max(worst_44, r.deviation);
        }
    }
    bool pass = worst_41 < 1e-9 && worst_42 < 1e-9 && worst_43 < 1e-9 && worst_eq50 < 1e-9 &&
                worst_44 < 1e-6 && all_ok;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "stage 4: drift 4.1 %.2e, 4.2 %.2e, 4.3 %.2e (identity %.2e), 4.4 %.2e",
                  worst_41, worst_42, worst_43, worst_eq50, worst_44);
    report(8, pass, buf);
    CHECK(worst_41 < 1e-9);
    CHECK(worst_42 < 1e-9);
    CHECK(worst_43 < 1e-9);
    CHECK(worst_eq50 < 1e-9);
    CHECK(worst_44 < 1e-6);
    CHECK(all_ok);
}

TEST_CASE("criterion 9: rationality axioms on 100 seeded games") {
    games::AxiomReport rep = games::verify_rationality_axioms(100, 424242, 1e-9);
    double worst = 0.0;
    for (const auto& e : rep.entries) worst = std::max(worst, e.worst);
    bool pass = rep.all_pass();
    char buf[256];
    std::snprintf(buf, sizeof(buf), "axioms: worst residual %.2e over 100 games x 4 axioms",
                  worst);
    report(9, pass, buf);
    for (const auto& e : rep.entries) {
        INFO(e.axiom);
        CHECK(e.pass);
        CHECK(e.worst < 1e-9);
    }
}

TEST_CASE("criterion 10: byte-identical reports for identical suite and seed") {
    const std::string cli = QDARWIN_CLI_PATH;
    const std::string dir = QDARWIN_SCENARIO_DIR;
    auto run = [&](const std::string& fmt, const std::string& out) {
        std::string cmd = "'" + cli + "' --suite '" + dir + "' --format " + fmt +
                          " --seed 7 --out '" + out + "' 2>/dev/null";
        return std::system(cmd.c_str());
    };
    int rc1 = run("csv", "/tmp/qdarwin_rep1.csv");
    int rc2 = run("csv", "/tmp/qdarwin_rep2.csv");
    int rc3 = run("text", "/tmp/qdarwin_rep1.txt");
    int rc4 = run("text", "/tmp/qdarwin_rep2.txt");
    std::string c1 = slurp("/tmp/qdarwin_rep1.csv");
    std::string c2 = slurp("/tmp/qdarwin_rep2.csv");
    std::string t1 = slurp("/tmp/qdarwin_rep1.txt");
    std::string t2 = slurp("/tmp/qdarwin_rep2.txt");
    bool pass = rc1 == 0 && rc2 == 0 && rc3 == 0 && rc4 == 0 && c1 == c2 && t1 == t2 &&
                !c1.empty() && !t1.empty();
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "determinism: %zu-byte csv and %zu-byte text reports identical across reruns",
                  c1.size(), t1.size());
    report(10, pass, buf);
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);
    CHECK(rc3 == 0);
    CHECK(rc4 == 0);
    CHECK(c1 == c2);
    CHECK(t1 == t2);
    CHECK_FALSE(c1.empty());
}
