// games.hpp — decision-theoretic game engine: payoff algebra, the Tr(ρÂ)
// oracle, and the staged value constructions (equal, rational, irrational,
// mixed), each cross-checked against the oracle and the rationality axioms.

#pragma once

#include "qdarwin/measurement.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qdarwin::games {

// Payoff by eigenvalue index; total on the observable's spectrum.
struct PayoffFunction {
    std::vector<double> by_index;

    std::size_t size() const { return by_index.size(); }
    double operator()(std::size_t a) const { return by_index.at(a); }
};

// P0: pays the eigenvalue itself.
PayoffFunction payoff_identity(const Spectrum& s);

// P∘π: index a pays the π(a)-th entry of p.
PayoffFunction payoff_permute(const PayoffFunction& p, const meas::Permutation& pi);

PayoffFunction payoff_sum(const PayoffFunction& p1, const PayoffFunction& p2);

// Σ_a P(a) B_a — the observable whose measurement with P0 pays like (obs, p).
ComplexMatrix payoff_observable(const Observable& obs, const PayoffFunction& p);

struct Game {
    HeisenbergState state;
    Observable observable;
    PayoffFunction payoff;
};

// Tr(ρ · Σ_a P(a) B_a); the independent oracle every staged value is checked against.
double born_oracle(const HeisenbergState& state, const Observable& obs, const PayoffFunction& p);

struct CheckEntry {
    std::string name;
    double residual = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ValueReport {
    double value = 0.0;
    std::string method;
    double oracle = 0.0;
    double deviation = 0.0;
    std::vector<CheckEntry> trail;

    bool ok() const;
};

// Integer weights m_a >= 0 with M = Σ m_a >= 1.
struct RationalWeights {
    std::vector<long long> m;

    long long total() const;
    void validate() const;
};

struct BracketingResult {
    double lower = 0.0;
    double upper = 0.0;
    int iterations = 0;
    double width = 0.0;
    bool dominance_ok = true;
    bool converged = false;
    std::vector<double> widths;  // best width after each iteration
};

// Stage 1: uniform pure state over the observable's branches; verifies the
// ρÂ form, the N!-symmetrization identity (enumerated up to N = 8, counting
// argument beyond), and permutation-act neutrality before returning (1/N)Σα.
ValueReport stage1_value(const Observable& obs);

// Stage 2: rational weights m_a/M realized by a coarse measurement onto an
// M-dimensional pointer; verifies the intermediate operator identity
// ρÂ₂(1) = ρÂ₁(0) and the reduction to the M-outcome equal game.
ValueReport stage2_value(const Spectrum& spectrum, const RationalWeights& weights);

// Stage 3: brackets an arbitrary-weight game between rational games with mass
// shifted to the extreme eigenvalues; denominators 2^k; dominance checked at
// every iteration.
struct Stage3Result {
    BracketingResult bracket;
    ValueReport report;
};
Stage3Result stage3_value(const Spectrum& spectrum, const std::vector<double>& target_weights,
                          double tol_width, int max_iter = 40);

// Mixed-state game: weights μ_b over a projector family.
struct MixedGameSpec {
    std::vector<double> weights;
    ProjectorFamily family;
};

// Dispatches: unsharp (family does not commute with obs's), equal, rational
// (denominator found within the desk cap), else irrational bracketing.
ValueReport stage4_value(const MixedGameSpec& spec, const Observable& obs);

// General evaluator: payoff reduction to P0 on Σ P(a) B_a, then bracketing on
// the extracted weights.  Closed-form endpoints (no operator re-verification).
ValueReport evaluate_game(const Game& game, double tol_width = 1e-11, int max_iter = 48);

struct AxiomReport {
    struct Entry {
        std::string axiom;
        double worst = 0.0;
        double bound = 0.0;
        bool pass = false;
        int checks = 0;
    };
    std::vector<Entry> entries;

    bool all_pass() const;
};

// Physicality, dominance, additivity, classical act neutrality over seeded
// random games; failures are report content, not errors.
AxiomReport verify_rationality_axioms(int num_games, std::uint64_t seed, double bound = 1e-9);

}  // namespace qdarwin::games
