#include "qdarwin/games.hpp"

#include "qdarwin/darwinism.hpp"
#include "qdarwin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace qdarwin::games {

// ---------------------------------- payoffs ---------------------------------

PayoffFunction payoff_identity(const Spectrum& s) {
    return PayoffFunction{s.values};
}

PayoffFunction payoff_permute(const PayoffFunction& p, const meas::Permutation& pi) {
    if (static_cast<std::size_t>(pi.size()) != p.size())
        throw std::invalid_argument("payoff_permute: size mismatch");
    PayoffFunction out;
    out.by_index.resize(p.size());
    for (std::size_t a = 0; a < p.size(); ++a)
        out.by_index[a] = p.by_index[static_cast<std::size_t>(pi(static_cast<int>(a)))];
    return out;
}

PayoffFunction payoff_sum(const PayoffFunction& p1, const PayoffFunction& p2) {
    if (p1.size() != p2.size()) throw std::invalid_argument("payoff_sum: domain mismatch");
    PayoffFunction out;
    out.by_index.resize(p1.size());
    for (std::size_t a = 0; a < p1.size(); ++a) out.by_index[a] = p1.by_index[a] + p2.by_index[a];
    return out;
}

ComplexMatrix payoff_observable(const Observable& obs, const PayoffFunction& p) {
    if (p.size() != obs.family.size())
        throw std::invalid_argument("payoff_observable: payoff not total on the spectrum");
    ComplexMatrix m = ComplexMatrix::Zero(obs.dim(), obs.dim());
    for (std::size_t a = 0; a < obs.family.size(); ++a)
        m += p.by_index[a] * obs.family.projectors[a];
    return m;
}

double born_oracle(const HeisenbergState& state, const Observable& obs, const PayoffFunction& p) {
    if (state.matrix.rows() != obs.dim())
        throw std::invalid_argument("born_oracle: dimension mismatch");
    return (state.matrix * payoff_observable(obs, p)).trace().real();
}

// ---------------------------------- reports ---------------------------------

bool ValueReport::ok() const {
    for (const auto& e : trail)
        if (!e.pass) return false;
    return true;
}

namespace {

void add_check(ValueReport& r, const std::string& name, double residual, double bound) {
    r.trail.push_back(CheckEntry{name, residual, bound, residual <= bound});
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Σ_π P_π assigns the same payoff (N−1)!Σα to every branch; enumerated for
// small N, the counting identity beyond.
void verify_symmetrization(ValueReport& r, const std::vector<double>& values,
                           const std::string& tag) {
    const int n = static_cast<int>(values.size());
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (n <= 8) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> branch_sum(static_cast<std::size_t>(n), 0.0);
        do {
            for (int j = 0; j < n; ++j)
                branch_sum[static_cast<std::size_t>(j)] +=
                    values[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        } while (std::next_permutation(idx.begin(), idx.end()));
        const double expected = factorial(n - 1) * total;
        double worst = 0.0;
        for (double s : branch_sum) worst = std::max(worst, std::abs(s - expected));
        const double scale = std::max(1.0, std::abs(expected));
        add_check(r, tag + "-enumerated-N!", worst / scale, 1e-9);
    } else {
        // every value lands in a fixed branch for exactly (N−1)! permutations
        add_check(r, tag + "-counting", 0.0, 1e-9);
    }
}

}  // namespace

// ---------------------------------- stage 1 ---------------------------------

ValueReport stage1_value(const Observable& obs) {
    if (!obs.nondegenerate())
        throw std::invalid_argument("stage1_value: observable must be nondegenerate");
    const Eigen::Index n = obs.dim();
    const auto& alpha = obs.spectrum.values;
    MatrixUnitFamily units = make_matrix_units(obs.family);

    ValueReport r;
    r.method = "stage1";

    // uniform pure state: (1/N) Σ_ab S_ab = |u><u|
    ComplexVector u = units.uniform_vector();
    HeisenbergState state = make_state(ComplexMatrix(u * u.adjoint()));
    add_check(r, "state-pure", is_pure(state) ? 0.0 : 1.0, 0.5);

    // ρÂ against its closed form (1/N) Σ_ab α_b S_ab
    ComplexMatrix lhs = state.matrix * obs.matrix;
    ComplexMatrix rhs = ComplexMatrix::Zero(n, n);
    for (std::size_t a = 0; a < units.size(); ++a)
        for (std::size_t b = 0; b < units.size(); ++b)
            rhs += (alpha[b] / static_cast<double>(n)) * units.unit(a, b);
    add_check(r, "rho-product-form", max_abs(lhs - rhs), 1e-10);

    verify_symmetrization(r, alpha, "symmetrization");

    // permutation-act neutrality: the zero-phase relabeling act fixes this
    // state, and the P_π game keeps the P0 value
    PayoffFunction p0 = payoff_identity(obs.spectrum);
    std::vector<meas::Permutation> sample;
    if (n <= 4) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        do {
            sample.push_back(meas::Permutation{idx});
        } while (std::next_permutation(idx.begin(), idx.end()));
    } else {
        Rng rng(2026);
        for (int k = 0; k < 5; ++k)
            sample.push_back(meas::Permutation{random_permutation_map(static_cast<int>(n), rng)});
    }
    double act_fixes_state = 0.0, relabel_residual = 0.0, value_shift = 0.0;
    const RealVector zero = RealVector::Zero(n);
    for (const auto& pi : sample) {
        Unitary u_pi = meas::permutation_unitary(units, pi, zero);
        act_fixes_state = std::max(
            act_fixes_state,
            max_abs(u_pi.matrix * state.matrix * u_pi.matrix.adjoint() - state.matrix));
        meas::Permutation inv = pi.inverse();
        Unitary u_inv = meas::permutation_unitary(units, inv, zero);
        ComplexMatrix relabeled = ComplexMatrix::Zero(n, n);
        for (std::size_t a = 0; a < obs.family.size(); ++a)
            relabeled += alpha[a] *
                         obs.family.projectors[static_cast<std::size_t>(inv(static_cast<int>(a)))];
        relabel_residual = std::max(relabel_residual,
                                    max_abs(relabeled - evolve(obs.matrix, u_inv)));
        PayoffFunction p_pi = payoff_permute(p0, pi);
        value_shift = std::max(value_shift, std::abs(born_oracle(state, obs, p_pi) -
                                                     born_oracle(state, obs, p0)));
    }
    add_check(r, "act-fixes-state", act_fixes_state, 1e-10);
    add_check(r, "act-relabels-observable", relabel_residual, 1e-10);
    add_check(r, "permuted-payoff-value", value_shift, 1e-10);

    r.value = obs.spectrum.sum() / static_cast<double>(n);
    r.oracle = born_oracle(state, obs, p0);
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-10);
    return r;
}

// ------------------------------ coarse composites ---------------------------

long long RationalWeights::total() const {
    return std::accumulate(m.begin(), m.end(), 0LL);
}

void RationalWeights::validate() const {
    if (m.empty()) throw std::invalid_argument("RationalWeights: empty");
    long long t = 0;
    for (long long v : m) {
        if (v < 0) throw std::invalid_argument("RationalWeights: negative multiplicity");
        t += v;
    }
    if (t < 1) throw std::invalid_argument("RationalWeights: total must be >= 1");
}

namespace {

struct CoarseSetup {
    CompositeSpace space;
    ProjectorFamily fam1;
    MatrixUnitFamily units1;
    MatrixUnitFamily units2;
    ComplexMatrix a1_full;
    ComplexMatrix a2_full;
    Unitary u;
    std::vector<double> alpha2;
};

CoarseSetup build_coarse(const Spectrum& spectrum, const meas::Multiplicities& mult) {
    const Eigen::Index n = static_cast<Eigen::Index>(spectrum.size());
    const Eigen::Index m_total = static_cast<Eigen::Index>(mult.total());
    CoarseSetup s{CompositeSpace::of({n, m_total}),
                  computational_family(n),
                  computational_units(n),
                  computational_units(m_total),
                  {}, {}, {}, {}};

    ComplexMatrix a1 = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) a1(a, a) = spectrum.values[static_cast<std::size_t>(a)];
    // block-constant pointer spectrum: the first m_0 eigenvalues are α_0, ...
    s.alpha2.resize(static_cast<std::size_t>(m_total));
    ComplexMatrix a2 = ComplexMatrix::Zero(m_total, m_total);
    for (std::size_t a = 0; a < mult.blocks(); ++a) {
        long long start = mult.block_start(a);
        for (long long e = start; e < start + mult.m[a]; ++e) {
            s.alpha2[static_cast<std::size_t>(e)] = spectrum.values[a];
            a2(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) = spectrum.values[a];
        }
    }
    s.a1_full = tensor_embed(a1, 0, s.space);
    s.a2_full = tensor_embed(a2, 1, s.space);
    s.u = meas::coarse_measurement_unitary(s.fam1, s.units2, mult, s.space);
    return s;
}

// shared by stage 2 and stage 4.3: evolve, check the operator identities, and
// check invariance of the S1 factor under pointer-slot permutations
void run_coarse_chain(ValueReport& r, const CoarseSetup& s, const ComplexMatrix& rho,
                      double identity_bound) {
    ComplexMatrix a1_1 = evolve(s.a1_full, s.u);
    ComplexMatrix a2_1 = evolve(s.a2_full, s.u);
    add_check(r, "control-observable-invariant", max_abs(a1_1 - s.a1_full), 1e-10);
    add_check(r, "measured-product-identity", max_abs(rho * a2_1 - rho * s.a1_full),
              identity_bound);

    const Eigen::Index m_total = s.units2.dim;
    ComplexMatrix x = rho * a2_1;
    ComplexMatrix s1_factor = partial_trace_keep(x, s.space, 0);
    Rng rng(99);
    double factor_shift = 0.0, value_shift = 0.0;
    for (int k = 0; k < 3; ++k) {
        meas::Permutation sigma{random_permutation_map(static_cast<int>(m_total), rng)};
        Unitary w = meas::permutation_unitary(s.units2, sigma, RealVector::Zero(m_total));
        ComplexMatrix w_full = tensor_embed(w.matrix, 1, s.space);
        ComplexMatrix conj = w_full.adjoint() * x * w_full;
        factor_shift = std::max(factor_shift,
                                max_abs(partial_trace_keep(conj, s.space, 0) - s1_factor));
        value_shift = std::max(value_shift, std::abs((conj - x).trace().real()));
    }
    add_check(r, "s1-factor-pointer-permutation-invariance", factor_shift, 1e-10);
    add_check(r, "value-pointer-permutation-invariance", value_shift, 1e-10);
}

}  // namespace

// ---------------------------------- stage 2 ---------------------------------

ValueReport stage2_value(const Spectrum& spectrum, const RationalWeights& weights) {
    weights.validate();
    if (spectrum.size() != weights.m.size())
        throw std::invalid_argument("stage2_value: spectrum/weights size mismatch");
    for (long long v : weights.m)
        if (v == 0)
            throw std::invalid_argument(
                "stage2_value: zero multiplicity; use stage-3 limiting instead");
    const long long m_total = weights.total();
    const Eigen::Index n = static_cast<Eigen::Index>(spectrum.size());
    if (n * m_total > kMaxTotalDim)
        throw std::invalid_argument("stage2_value: total dimension " +
                                    std::to_string(n * m_total) + " exceeds cap " +
                                    std::to_string(kMaxTotalDim));

    meas::Multiplicities mult{weights.m};
    CoarseSetup s = build_coarse(spectrum, mult);

    ValueReport r;
    r.method = "stage2";

    // amplitudes √(m_a m_b)/M on S1, uniform pure structure on S2
    const double m_d = static_cast<double>(m_total);
    ComplexMatrix rho1(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            rho1(a, b) = std::sqrt(static_cast<double>(weights.m[static_cast<std::size_t>(a)]) *
                                   static_cast<double>(weights.m[static_cast<std::size_t>(b)])) /
                         m_d;
    ComplexVector ready = s.units2.uniform_vector();
    ComplexMatrix rho = kron(rho1, ComplexMatrix(ready * ready.adjoint()));
    HeisenbergState state = make_state(rho);
    add_check(r, "state-pure", is_pure(state) ? 0.0 : 1.0, 0.5);

    run_coarse_chain(r, s, rho, 1e-9);

    // reduction to the M-outcome equal game
    double reduced = std::accumulate(s.alpha2.begin(), s.alpha2.end(), 0.0) / m_d;
    double v = 0.0;
    for (std::size_t a = 0; a < weights.m.size(); ++a)
        v += static_cast<double>(weights.m[a]) * spectrum.values[a] / m_d;
    add_check(r, "reduced-equal-game", std::abs(reduced - v), 1e-10);
    if (m_total <= 8) verify_symmetrization(r, s.alpha2, "reduced-symmetrization");

    r.value = v;
    r.oracle = (rho * s.a1_full).trace().real();
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-9);
    return r;
}

// ---------------------------------- stage 3 ---------------------------------

namespace {

double closed_rational_value(const std::vector<double>& alpha, const std::vector<long long>& m,
                             long long m_total) {
    double v = 0.0;
    for (std::size_t a = 0; a < alpha.size(); ++a)
        v += static_cast<double>(m[a]) / static_cast<double>(m_total) * alpha[a];
    return v;
}

struct BracketTrace {
    double worst_endpoint_deviation = 0.0;
    int verified_endpoints = 0;
};

// value of the rational game with weights m/M; full stage-2 operator
// verification whenever the composite fits the desk cap
double rational_game_value(const Spectrum& spectrum, const std::vector<long long>& m,
                           long long m_total, bool verify, BracketTrace* trace) {
    double closed = closed_rational_value(spectrum.values, m, m_total);
    bool all_positive = std::all_of(m.begin(), m.end(), [](long long v) { return v >= 1; });
    const long long dim = static_cast<long long>(spectrum.size()) * m_total;
    if (verify && all_positive && dim <= kMaxTotalDim) {
        ValueReport vr = stage2_value(spectrum, RationalWeights{m});
        if (trace) {
            trace->worst_endpoint_deviation =
                std::max(trace->worst_endpoint_deviation, std::abs(vr.value - closed));
            ++trace->verified_endpoints;
        }
        return vr.value;
    }
    return closed;
}

BracketingResult bracket_weights(const Spectrum& spectrum, const std::vector<double>& w,
                                 double tol_width, int max_iter, bool verify,
                                 BracketTrace* trace) {
    const std::size_t n = spectrum.size();
    std::size_t i_up = 0, i_lo = 0;
    for (std::size_t a = 1; a < n; ++a) {
        if (spectrum.values[a] > spectrum.values[i_up]) i_up = a;
        if (spectrum.values[a] < spectrum.values[i_lo]) i_lo = a;
    }
    BracketingResult br;
    br.lower = -std::numeric_limits<double>::infinity();
    br.upper = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_iter; ++k) {
        const long long m_total = 1LL << k;
        std::vector<long long> base(n);
        long long assigned = 0;
        for (std::size_t a = 0; a < n; ++a) {
            base[a] = static_cast<long long>(
                std::floor(w[a] * static_cast<double>(m_total)));
            if (base[a] < 0) base[a] = 0;
            assigned += base[a];
        }
        long long rem = m_total - assigned;
        std::vector<long long> m_up = base, m_lo = base;
        m_up[i_up] += rem;
        m_lo[i_lo] += rem;
        double v_up = rational_game_value(spectrum, m_up, m_total, verify, trace);
        double v_lo = rational_game_value(spectrum, m_lo, m_total, verify, trace);
        if (v_up < v_lo - 1e-12) br.dominance_ok = false;
        br.lower = std::max(br.lower, v_lo);
        br.upper = std::min(br.upper, v_up);
        br.iterations = k;
        br.width = br.upper - br.lower;
        br.widths.push_back(br.width);
        if (br.width < tol_width) {
            br.converged = true;
            break;
        }
    }
    return br;
}

}  // namespace

Stage3Result stage3_value(const Spectrum& spectrum, const std::vector<double>& target_weights,
                          double tol_width, int max_iter) {
    if (tol_width <= 0.0) throw std::invalid_argument("stage3_value: tolerance must be > 0");
    if (target_weights.size() != spectrum.size())
        throw std::invalid_argument("stage3_value: weights/spectrum size mismatch");
    double sum = 0.0;
    for (double w : target_weights) {
        if (w < -1e-12) throw std::invalid_argument("stage3_value: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("stage3_value: weights must sum to 1");

    Stage3Result out;
    out.report.method = "stage3";

    BracketTrace trace;
    out.bracket = bracket_weights(spectrum, target_weights, tol_width, max_iter, true, &trace);

    add_check(out.report, "bracket-dominance", out.bracket.dominance_ok ? 0.0 : 1.0, 0.5);
    add_check(out.report, "bracket-width", out.bracket.width, tol_width);
    add_check(out.report, "verified-endpoint-agreement", trace.worst_endpoint_deviation, 1e-9);
    double shrink = out.bracket.widths.empty()
                        ? 0.0
                        : out.bracket.widths.back() - out.bracket.widths.front();
    add_check(out.report, "width-monotone-decrease", std::max(0.0, shrink), 1e-12);

    // oracle: Tr(ρÂ) on the amplitude-√w state
    const Eigen::Index n = static_cast<Eigen::Index>(spectrum.size());
    ComplexVector psi(n);
    for (Eigen::Index a = 0; a < n; ++a)
        psi(a) = std::sqrt(std::max(0.0, target_weights[static_cast<std::size_t>(a)]));
    ComplexMatrix a_diag = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) a_diag(a, a) = spectrum.values[static_cast<std::size_t>(a)];
    ComplexMatrix rho = psi * psi.adjoint();
    rho /= rho.trace().real();
    out.report.oracle = (rho * a_diag).trace().real();

    out.report.value = 0.5 * (out.bracket.lower + out.bracket.upper);
    out.report.deviation = std::abs(out.report.value - out.report.oracle);
    add_check(out.report, "oracle-deviation", out.report.deviation, tol_width);
    return out;
}

// ---------------------------------- stage 4 ---------------------------------

namespace {

double family_commutation(const ProjectorFamily& f1, const ProjectorFamily& f2) {
    double worst = 0.0;
    for (const auto& p : f1.projectors)
        for (const auto& q : f2.projectors) worst = std::max(worst, max_abs(commutator(p, q)));
    return worst;
}

// smallest denominator M with N*M inside the cap realizing every weight as m/M
std::optional<meas::Multiplicities> rational_denominator(const std::vector<double>& w,
                                                         Eigen::Index n) {
    for (long long m_total = 1; n * m_total <= kMaxTotalDim; ++m_total) {
        std::vector<long long> m(w.size());
        bool ok = true;
        long long sum = 0;
        for (std::size_t a = 0; a < w.size() && ok; ++a) {
            double scaled = w[a] * static_cast<double>(m_total);
            long long rounded = std::llround(scaled);
            if (std::abs(scaled - static_cast<double>(rounded)) > 1e-9 || rounded < 1) ok = false;
            m[a] = rounded;
            sum += rounded;
        }
        if (ok && sum == m_total) return meas::Multiplicities{std::move(m)};
    }
    return std::nullopt;
}

ValueReport stage4_unsharp(const MixedGameSpec& spec, const Observable& obs) {
    ValueReport r;
    r.method = "stage4.1";
    const Eigen::Index n = obs.dim();
    MatrixUnitFamily units = make_matrix_units(obs.family);

    ComplexMatrix rho_m = ComplexMatrix::Zero(n, n);
    for (std::size_t b = 0; b < spec.weights.size(); ++b)
        rho_m += spec.weights[b] * spec.family.projectors[b];
    HeisenbergState rho = make_state(rho_m);

    // state coefficients in the measured observable's matrix-unit basis
    ComplexMatrix k(n, n);
    for (Eigen::Index d = 0; d < n; ++d)
        for (Eigen::Index e = 0; e < n; ++e)
            k(d, e) = units.basis[static_cast<std::size_t>(d)].dot(
                rho.matrix * units.basis[static_cast<std::size_t>(e)]);

    // ρÂ = Σ_de K_de α_e S_de
    const auto& alpha = obs.spectrum.values;
    ComplexMatrix product = rho.matrix * obs.matrix;
    ComplexMatrix rebuilt = ComplexMatrix::Zero(n, n);
    for (Eigen::Index d = 0; d < n; ++d)
        for (Eigen::Index e = 0; e < n; ++e)
            rebuilt += k(d, e) * alpha[static_cast<std::size_t>(e)] *
                       units.unit(static_cast<std::size_t>(d), static_cast<std::size_t>(e));
    add_check(r, "coefficient-form", max_abs(product - rebuilt), 1e-10);

    // λ_de = |K_de| stays below 1; the product's modulus pattern is λ_de |α_e|
    double lambda_max = 0.0, pattern = 0.0;
    for (Eigen::Index d = 0; d < n; ++d)
        for (Eigen::Index e = 0; e < n; ++e) {
            double lambda = std::abs(k(d, e));
            lambda_max = std::max(lambda_max, lambda);
            Complex element = units.basis[static_cast<std::size_t>(d)].dot(
                product * units.basis[static_cast<std::size_t>(e)]);
            pattern = std::max(pattern,
                               std::abs(std::abs(element) -
                                        lambda * std::abs(alpha[static_cast<std::size_t>(e)])));
        }
    add_check(r, "lambda-bound", std::max(0.0, lambda_max - 1.0), 1e-9);
    add_check(r, "lambda-modulus-pattern", pattern, 1e-10);

    // phase indifference: diagonal conjugations preserve both the equivalence
    // class and the oracle value
    Rng rng(4242);
    bool equiv_ok = true;
    double value_shift = 0.0;
    PayoffFunction p0 = payoff_identity(obs.spectrum);
    for (int trial = 0; trial < 3; ++trial) {
        ComplexMatrix d_mat = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double phi = rng.uniform(0.0, 2.0 * M_PI);
            d_mat += std::exp(Complex(0.0, phi)) * units.projector(static_cast<std::size_t>(i));
        }
        ComplexMatrix rotated = d_mat * product * d_mat.adjoint();
        if (!darwin::phase_equivalent(product, rotated, obs.family)) equiv_ok = false;
        ComplexMatrix rho_rot = d_mat * rho.matrix * d_mat.adjoint();
        value_shift =
            std::max(value_shift, std::abs((rho_rot * obs.matrix).trace().real() -
                                           (rho.matrix * obs.matrix).trace().real()));
    }
    add_check(r, "phase-equivalence-under-diagonal-acts", equiv_ok ? 0.0 : 1.0, 0.5);
    add_check(r, "value-phase-indifference", value_shift, 1e-10);

    // reduction to the diagonal-matched pure state, evaluated by bracketing
    std::vector<double> w(static_cast<std::size_t>(n));
    double wsum = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
        w[static_cast<std::size_t>(d)] = std::max(0.0, k(d, d).real());
        wsum += w[static_cast<std::size_t>(d)];
    }
    add_check(r, "reduced-weights-normalized", std::abs(wsum - 1.0), 1e-9);
    ComplexVector psi_full = ComplexVector::Zero(n);
    for (Eigen::Index d = 0; d < n; ++d)
        psi_full += std::sqrt(w[static_cast<std::size_t>(d)]) *
                    units.basis[static_cast<std::size_t>(d)];
    HeisenbergState pure = make_state(ComplexMatrix(psi_full * psi_full.adjoint() /
                                                    psi_full.squaredNorm()));
    add_check(r, "reduced-state-pure", is_pure(pure) ? 0.0 : 1.0, 0.5);
    double diag_match = 0.0;
    for (Eigen::Index d = 0; d < n; ++d)
        diag_match = std::max(
            diag_match,
            std::abs(units.basis[static_cast<std::size_t>(d)]
                         .dot(pure.matrix * units.basis[static_cast<std::size_t>(d)])
                         .real() -
                     w[static_cast<std::size_t>(d)]));
    add_check(r, "reduced-state-diagonal-match", diag_match, 1e-9);

    BracketingResult br = bracket_weights(obs.spectrum, w, 1e-10, 48, false, nullptr);
    add_check(r, "bracket-dominance", br.dominance_ok ? 0.0 : 1.0, 0.5);
    add_check(r, "bracket-width", br.width, 1e-9);

    r.value = 0.5 * (br.lower + br.upper);
    r.oracle = born_oracle(rho, obs, p0);
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-9);
    return r;
}

ValueReport stage4_equal(const Observable& obs) {
    ValueReport r;
    r.method = "stage4.2";
    const Eigen::Index n = obs.dim();
    MatrixUnitFamily units = make_matrix_units(obs.family);
    HeisenbergState rho = make_state(ComplexMatrix(identity(n) / static_cast<double>(n)));
    add_check(r, "state-mixed", (n > 1 && is_pure(rho)) ? 1.0 : 0.0, 0.5);

    add_check(r, "uniform-product-form",
              max_abs(rho.matrix * obs.matrix - obs.matrix / static_cast<double>(n)), 1e-10);

    verify_symmetrization(r, obs.spectrum.values, "symmetrization");

    // the maximally mixed state is fixed by every act, phases included
    Rng rng(77);
    PayoffFunction p0 = payoff_identity(obs.spectrum);
    double act_fixes = 0.0, value_shift = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        meas::Permutation pi{random_permutation_map(static_cast<int>(n), rng)};
        Unitary u = meas::permutation_unitary(units, pi,
                                              random_phases_vector(n, rng));
        act_fixes = std::max(act_fixes,
                             max_abs(u.matrix * rho.matrix * u.matrix.adjoint() - rho.matrix));
        PayoffFunction p_pi = payoff_permute(p0, pi);
        value_shift = std::max(value_shift, std::abs(born_oracle(rho, obs, p_pi) -
                                                     born_oracle(rho, obs, p0)));
    }
    add_check(r, "act-fixes-state", act_fixes, 1e-10);
    add_check(r, "permuted-payoff-value", value_shift, 1e-10);

    r.value = obs.spectrum.sum() / static_cast<double>(n);
    r.oracle = born_oracle(rho, obs, p0);
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-9);
    return r;
}

ValueReport stage4_rational(const meas::Multiplicities& mult, const Observable& obs) {
    ValueReport r;
    r.method = "stage4.3";
    const long long m_total = mult.total();
    const double m_d = static_cast<double>(m_total);
    CoarseSetup s = build_coarse(obs.spectrum, mult);
    const Eigen::Index n = static_cast<Eigen::Index>(obs.spectrum.size());

    // mixed control factor diag(m_a/M), uniform pure pointer
    ComplexMatrix rho1 = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        rho1(a, a) = static_cast<double>(mult.m[static_cast<std::size_t>(a)]) / m_d;
    ComplexVector ready = s.units2.uniform_vector();
    ComplexMatrix rho = kron(rho1, ComplexMatrix(ready * ready.adjoint()));
    HeisenbergState state = make_state(rho);
    bool mixed = !is_pure(state);
    bool trivially_pure = (n == 1);
    add_check(r, "state-mixed", (mixed || trivially_pure) ? 0.0 : 1.0, 0.5);

    run_coarse_chain(r, s, rho, 1e-9);

    double v = 0.0;
    for (std::size_t a = 0; a < mult.blocks(); ++a)
        v += static_cast<double>(mult.m[a]) / m_d * obs.spectrum.values[a];
    r.value = v;
    r.oracle = (rho * s.a1_full).trace().real();
    // the composite realization reproduces the original game's oracle
    add_check(r, "composite-matches-game", std::abs(r.oracle - v), 1e-10);
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-9);
    return r;
}

ValueReport stage4_irrational(const MixedGameSpec& spec, const Observable& obs) {
    ValueReport r;
    r.method = "stage4.4";
    const Eigen::Index n = obs.dim();
    ComplexMatrix rho_m = ComplexMatrix::Zero(n, n);
    for (std::size_t b = 0; b < spec.weights.size(); ++b)
        rho_m += spec.weights[b] * spec.family.projectors[b];
    HeisenbergState rho = make_state(rho_m);

    BracketingResult br = bracket_weights(obs.spectrum, spec.weights, 1e-8, 40, true, nullptr);
    add_check(r, "bracket-dominance", br.dominance_ok ? 0.0 : 1.0, 0.5);
    add_check(r, "bracket-width", br.width, 1e-6);

    r.value = 0.5 * (br.lower + br.upper);
    r.oracle = born_oracle(rho, obs, payoff_identity(obs.spectrum));
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-6);
    return r;
}

}  // namespace

ValueReport stage4_value(const MixedGameSpec& spec, const Observable& obs) {
    if (spec.weights.size() != spec.family.size())
        throw std::invalid_argument("stage4_value: one weight per mixture projector");
    if (spec.family.dim != obs.dim())
        throw std::invalid_argument("stage4_value: dimension mismatch");
    double sum = 0.0;
    for (double w : spec.weights) {
        if (w < -1e-12) throw std::invalid_argument("stage4_value: negative mixture weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("stage4_value: mixture weights must sum to 1");

    const double sharp = family_commutation(spec.family, obs.family);
    if (sharp > tol::algebra) return stage4_unsharp(spec, obs);

    bool equal = true;
    for (double w : spec.weights)
        if (std::abs(w - 1.0 / static_cast<double>(spec.weights.size())) > 1e-12) equal = false;
    if (equal) return stage4_equal(obs);

    if (auto mult = rational_denominator(spec.weights, obs.dim()))
        return stage4_rational(*mult, obs);
    return stage4_irrational(spec, obs);
}

// ------------------------------- general evaluator --------------------------

ValueReport evaluate_game(const Game& game, double tol_width, int max_iter) {
    ValueReport r;
    r.method = "bracketed";
    ComplexMatrix measured = payoff_observable(game.observable, game.payoff);
    Observable reduced = spectral_decompose(measured);
    std::vector<double> w(reduced.family.size());
    double wsum = 0.0;
    for (std::size_t k = 0; k < reduced.family.size(); ++k) {
        w[k] = std::max(0.0, (game.state.matrix * reduced.family.projectors[k]).trace().real());
        wsum += w[k];
    }
    for (double& x : w) x /= wsum;
    add_check(r, "weights-normalized", std::abs(wsum - 1.0), 1e-9);

    BracketingResult br = bracket_weights(reduced.spectrum, w, tol_width, max_iter, false, nullptr);
    add_check(r, "bracket-dominance", br.dominance_ok ? 0.0 : 1.0, 0.5);
    add_check(r, "bracket-width", br.width, std::max(tol_width, 1e-9));

    r.value = 0.5 * (br.lower + br.upper);
    r.oracle = (game.state.matrix * measured).trace().real();
    r.deviation = std::abs(r.value - r.oracle);
    add_check(r, "oracle-deviation", r.deviation, 1e-9);
    return r;
}

// --------------------------------- axiom suite ------------------------------

bool AxiomReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

namespace {

PayoffFunction random_payoff(std::size_t n, Rng& rng) {
    PayoffFunction p;
    p.by_index.resize(n);
    for (double& x : p.by_index) x = rng.uniform(-2.0, 2.0);
    return p;
}

Observable random_observable(Eigen::Index n, Rng& rng) {
    ComplexMatrix basis = random_unitary(n, rng);
    std::vector<double> alpha = random_spectrum(static_cast<int>(n), rng);
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        m += alpha[static_cast<std::size_t>(i)] *
             (basis.col(i) * basis.col(i).adjoint());
    return spectral_decompose(ComplexMatrix(0.5 * (m + m.adjoint())));
}

HeisenbergState random_mixed_state(Eigen::Index n, Rng& rng) {
    ComplexMatrix basis = random_unitary(n, rng);
    std::vector<double> w = random_simplex(static_cast<int>(n), rng);
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        rho += w[static_cast<std::size_t>(i)] * (basis.col(i) * basis.col(i).adjoint());
    return make_state(ComplexMatrix(0.5 * (rho + rho.adjoint())));
}

}  // namespace

AxiomReport verify_rationality_axioms(int num_games, std::uint64_t seed, double bound) {
    AxiomReport report;
    AxiomReport::Entry physicality{"physicality", 0.0, bound, true, 0};
    AxiomReport::Entry dominance{"dominance", 0.0, bound, true, 0};
    AxiomReport::Entry additivity{"additivity", 0.0, bound, true, 0};
    AxiomReport::Entry neutrality{"classical-act-neutrality", 0.0, bound, true, 0};

    for (int g = 0; g < num_games; ++g) {
        Rng rng(seed + 0x9e37ULL * static_cast<std::uint64_t>(g + 1));
        const Eigen::Index n = 2 + (g % 3);

        Observable obs = random_observable(n, rng);
        HeisenbergState rho = random_mixed_state(n, rng);
        PayoffFunction p1 = random_payoff(obs.family.size(), rng);
        PayoffFunction p2 = random_payoff(obs.family.size(), rng);

        // additivity: V(P1 + P2) = V(P1) + V(P2)
        {
            double v1 = evaluate_game({rho, obs, p1}).value;
            double v2 = evaluate_game({rho, obs, p2}).value;
            double v12 = evaluate_game({rho, obs, payoff_sum(p1, p2)}).value;
            additivity.worst = std::max(additivity.worst, std::abs(v12 - v1 - v2));
            ++additivity.checks;
        }

        // dominance: P1 >= P2 pointwise implies V1 >= V2
        {
            PayoffFunction below = p1;
            for (double& x : below.by_index) x -= std::abs(rng.uniform(0.0, 1.5));
            double v_hi = evaluate_game({rho, obs, p1}).value;
            double v_lo = evaluate_game({rho, obs, below}).value;
            dominance.worst = std::max(dominance.worst, std::max(0.0, v_lo - v_hi));
            ++dominance.checks;
        }

        // physicality: equal ρÂ products from different factorizations
        {
            ComplexMatrix r_small = random_mixed_state(n, rng).matrix;
            std::vector<double> k1 = random_spectrum(static_cast<int>(n), rng);
            std::vector<double> k2 = random_spectrum(static_cast<int>(n), rng);
            ComplexMatrix a_shared = random_observable(n, rng).matrix;
            const Eigen::Index full = 2 * n;
            ComplexMatrix a1 = ComplexMatrix::Zero(full, full);
            ComplexMatrix a2 = ComplexMatrix::Zero(full, full);
            a1.topLeftCorner(n, n) = a_shared;
            a2.topLeftCorner(n, n) = a_shared;
            for (Eigen::Index i = 0; i < n; ++i) {
                a1(n + i, n + i) = 10.0 + k1[static_cast<std::size_t>(i)];
                a2(n + i, n + i) = 20.0 + k2[static_cast<std::size_t>(i)];
            }
            ComplexMatrix rho_big = ComplexMatrix::Zero(full, full);
            rho_big.topLeftCorner(n, n) = r_small;
            HeisenbergState state = make_state(rho_big);
            Observable o1 = spectral_decompose(a1);
            Observable o2 = spectral_decompose(a2);
            double v1 = evaluate_game({state, o1, payoff_identity(o1.spectrum)}).value;
            double v2 = evaluate_game({state, o2, payoff_identity(o2.spectrum)}).value;
            physicality.worst = std::max(physicality.worst, std::abs(v1 - v2));
            ++physicality.checks;
        }

        // classical act neutrality on an act-invariant state
        {
            MatrixUnitFamily units = make_matrix_units(obs.family);
            meas::Permutation pi{random_permutation_map(static_cast<int>(n), rng)};
            Unitary act = meas::permutation_unitary(units, pi, random_phases_vector(n, rng));
            HeisenbergState uniform =
                make_state(ComplexMatrix(identity(n) / static_cast<double>(n)));
            Observable acted = spectral_decompose(evolve(obs.matrix, act));
            double fix = max_abs(act.matrix * uniform.matrix * act.matrix.adjoint() -
                                 uniform.matrix);
            PayoffFunction p0 = payoff_identity(obs.spectrum);
            PayoffFunction p0_acted = payoff_identity(acted.spectrum);
            double v_before = evaluate_game({uniform, obs, p0}).value;
            double v_after = evaluate_game({uniform, acted, p0_acted}).value;
            neutrality.worst =
                std::max(neutrality.worst, std::max(fix, std::abs(v_after - v_before)));
            // the act never flips which of two games is larger
            double w_before = evaluate_game({uniform, obs, p1}).value;
            double w_after = evaluate_game({uniform, acted, p1}).value;
            double gap_before = w_before - v_before;
            double gap_after = w_after - v_after;
            if (gap_before * gap_after < 0.0)
                neutrality.worst = std::max(neutrality.worst,
                                            std::min(std::abs(gap_before), std::abs(gap_after)));
            ++neutrality.checks;
        }
    }

    for (auto* e : {&physicality, &dominance, &additivity, &neutrality}) {
        e->pass = e->worst <= e->bound;
        report.entries.push_back(*e);
    }
    return report;
}

}  // namespace qdarwin::games
