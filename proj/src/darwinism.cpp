#include "qdarwin/darwinism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdarwin::darwin {

// -------------------------------- classical acts ----------------------------

std::optional<BranchStructure> is_classical_act(const Unitary& u, const Observable& obs,
                                                double t) {
    if (u.matrix.rows() != obs.dim())
        throw std::invalid_argument("is_classical_act: dimension mismatch");
    if (!obs.nondegenerate())
        throw std::invalid_argument(
            "is_classical_act: degenerate observable, permutation ill-defined");
    MatrixUnitFamily units = make_matrix_units(obs.family);
    const int n = static_cast<int>(units.size());

    // in the family basis, a classical act has one unit-modulus entry per row:
    // C[b][c] = <v_b| U |v_c> = exp(iφ_b) δ_{c,π(b)}
    meas::Permutation pi;
    pi.map.assign(static_cast<std::size_t>(n), -1);
    RealVector phases(n);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int b = 0; b < n; ++b) {
        int best = -1;
        double best_mod = 0.0;
        Complex best_val(0.0);
        for (int c = 0; c < n; ++c) {
            Complex val = units.basis[static_cast<std::size_t>(b)].dot(
                u.matrix * units.basis[static_cast<std::size_t>(c)]);
            double mod = std::abs(val);
            if (mod > best_mod) {
                best_mod = mod;
                best = c;
                best_val = val;
            }
        }
        if (best < 0 || std::abs(best_mod - 1.0) > 0.5 || used[static_cast<std::size_t>(best)])
            return std::nullopt;
        used[static_cast<std::size_t>(best)] = 1;
        pi.map[static_cast<std::size_t>(b)] = best;
        double phi = std::arg(best_val);
        if (phi < 0.0) phi += 2.0 * M_PI;
        phases(b) = phi;
    }

    // reconstruct and compare
    ComplexMatrix rebuilt = ComplexMatrix::Zero(obs.dim(), obs.dim());
    for (int b = 0; b < n; ++b)
        rebuilt += std::exp(Complex(0.0, phases(b))) *
                   units.unit(static_cast<std::size_t>(b),
                              static_cast<std::size_t>(pi.map[static_cast<std::size_t>(b)]));
    if (max_abs(rebuilt - u.matrix) > t) return std::nullopt;

    BranchStructure bs;
    bs.permutation = std::move(pi);
    bs.phases = std::move(phases);
    bs.branch_count = n;
    return bs;
}

BranchStructure branch_decomposition(const Unitary& u, const Observable& obs, double t) {
    auto bs = is_classical_act(u, obs, t);
    if (!bs)
        throw std::runtime_error(
            "branch_decomposition: motion is not a classical act for this observable "
            "(no permutation form in its matrix units within tolerance)");
    return *bs;
}

// ------------------------------ correlation check ---------------------------

namespace {

struct Orientation {
    bool ok = false;
    CorrelationReport report;
};

// X confined to a single slot: X = 1 ⊗ ... ⊗ x ⊗ ... ⊗ 1.
std::optional<std::pair<std::size_t, ComplexMatrix>> single_slot_factor(
    const ComplexMatrix& x, const CompositeSpace& space, double t) {
    for (std::size_t s = 0; s < space.slots(); ++s) {
        double scale = static_cast<double>(space.total / space.dims[s]);
        ComplexMatrix reduced = partial_trace_keep(x, space, s) / scale;
        if (max_abs(x - tensor_embed(reduced, s, space)) <= t)
            return std::make_pair(s, std::move(reduced));
    }
    return std::nullopt;
}

Orientation try_orientation(const ComplexMatrix& record_obs, const ComplexMatrix& pointer_obs,
                            const CompositeSpace& space,
                            const std::vector<ComplexMatrix>* reference_slots, bool swapped,
                            double t) {
    Orientation out;
    out.report.swapped = swapped;

    auto confined = single_slot_factor(record_obs, space, t);
    if (!confined) {
        out.report.note = "record observable not confined to one subsystem";
        return out;
    }
    const std::size_t slot = confined->first;
    out.report.record_slot = static_cast<int>(slot);

    Observable record = spectral_decompose(confined->second);
    if (!record.nondegenerate() ||
        record.family.size() != static_cast<std::size_t>(record.family.dim)) {
        out.report.note = "record observable degenerate on its subsystem";
        return out;
    }
    const std::size_t branches = record.family.size();
    double residual = 0.0;

    // branch-by-branch compression of the pointer observable
    std::vector<Observable> conditional;
    conditional.reserve(branches);
    for (std::size_t a = 0; a < branches; ++a) {
        ComplexMatrix p_full = tensor_embed(record.family.projectors[a], slot, space);
        ComplexMatrix compressed = p_full * pointer_obs * p_full;
        // rank-1 record projector: compressed = F_a ⊗ G_a with G_a = Tr_slot(compressed)
        ComplexMatrix g_rest = partial_trace_drop(compressed, space, slot);
        residual = std::max(residual,
                            max_abs(compressed - product_with_slot(record.family.projectors[a],
                                                                   slot, g_rest, space)));
        if (residual > t) {
            out.report.note = "pointer observable not of product form within record branch " +
                              std::to_string(a);
            out.report.residual = residual;
            return out;
        }
        conditional.push_back(spectral_decompose(g_rest));
    }

    // all conditional pointers must share one value multiset
    const std::size_t levels = conditional.front().spectrum.size();
    for (const auto& c : conditional)
        if (c.spectrum.size() != levels) {
            out.report.note = "conditional pointer spectra differ across branches";
            return out;
        }
    for (std::size_t b = 0; b < levels; ++b)
        for (std::size_t a = 1; a < branches; ++a)
            if (std::abs(conditional[a].spectrum.values[b] -
                         conditional[0].spectrum.values[b]) > t) {
                out.report.note = "conditional pointer spectra differ across branches";
                return out;
            }

    // common slot family: the reference if given, else branch 0's projectors
    std::vector<ComplexMatrix> slots;
    if (reference_slots) {
        slots = *reference_slots;
    } else {
        slots = conditional.front().family.projectors;
    }
    if (slots.size() != levels) {
        out.report.note = "slot family size does not match pointer level count";
        return out;
    }

    // match each branch's projectors onto the slot family
    std::vector<std::vector<int>> table(branches, std::vector<int>(levels, -1));
    for (std::size_t a = 0; a < branches; ++a) {
        std::vector<char> used(levels, 0);
        for (std::size_t b = 0; b < levels; ++b) {
            const ComplexMatrix& q = conditional[a].family.projectors[b];
            int match = -1;
            double best = t;
            for (std::size_t c = 0; c < levels; ++c) {
                if (used[c]) continue;
                double dev = max_abs(q - slots[c]);
                if (dev < best) {
                    best = dev;
                    match = static_cast<int>(c);
                }
            }
            if (match < 0) {
                out.report.note = "conditional pointer projectors do not share one family";
                return out;
            }
            residual = std::max(residual, best);
            used[static_cast<std::size_t>(match)] = 1;
            table[a][b] = match;
        }
    }

    // discrimination: each slot's value must identify the record branch
    for (std::size_t c = 0; c < levels; ++c) {
        std::vector<double> values(branches);
        for (std::size_t a = 0; a < branches; ++a) {
            int b = -1;
            for (std::size_t k = 0; k < levels; ++k)
                if (table[a][k] == static_cast<int>(c)) b = static_cast<int>(k);
            values[a] = conditional[a].spectrum.values[static_cast<std::size_t>(b)];
        }
        for (std::size_t a = 0; a < branches; ++a)
            for (std::size_t a2 = a + 1; a2 < branches; ++a2)
                if (std::abs(values[a] - values[a2]) <= t) {
                    out.report.note = "pointer slot " + std::to_string(c) +
                                      " does not discriminate record branches";
                    return out;
                }
    }

    out.ok = true;
    out.report.correlated = true;
    out.report.residual = residual;
    out.report.slot_table = std::move(table);
    out.report.levels = conditional.front().spectrum.values;
    out.report.indicator.resize(branches);
    for (std::size_t a = 0; a < branches; ++a)
        out.report.indicator[a] = out.report.slot_table[a][0];
    return out;
}

}  // namespace

CorrelationReport correlation_check(const ComplexMatrix& obs_a, const ComplexMatrix& obs_b,
                                    const CompositeSpace& space,
                                    const std::vector<ComplexMatrix>* reference_slots, double t) {
    require_dim(obs_a, space.total, "correlation_check");
    require_dim(obs_b, space.total, "correlation_check");
    if (!is_hermitian_matrix(obs_a, t) || !is_hermitian_matrix(obs_b, t))
        throw std::invalid_argument("correlation_check: observables must be Hermitian");

    CorrelationReport best;
    double comm = max_abs(commutator(obs_a, obs_b));
    if (comm > t) {
        best.note = "observables do not commute";
        best.residual = comm;
        return best;
    }

    Orientation first = try_orientation(obs_a, obs_b, space, reference_slots, false, t);
    if (first.ok) return first.report;
    Orientation second = try_orientation(obs_b, obs_a, space, reference_slots, true, t);
    if (second.ok) return second.report;
    return first.report.note.empty() ? second.report : first.report;
}

// ------------------------------ phase indifference ---------------------------

bool phase_equivalent(const ComplexMatrix& x, const ComplexMatrix& y, const ProjectorFamily& basis,
                      double t) {
    if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != basis.dim)
        throw std::invalid_argument("phase_equivalent: dimension mismatch");
    MatrixUnitFamily units = make_matrix_units(basis);
    const Eigen::Index n = basis.dim;

    ComplexMatrix xb(n, n), yb(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            xb(a, b) = units.basis[static_cast<std::size_t>(a)].dot(
                x * units.basis[static_cast<std::size_t>(b)]);
            yb(a, b) = units.basis[static_cast<std::size_t>(a)].dot(
                y * units.basis[static_cast<std::size_t>(b)]);
        }

    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            if (std::abs(std::abs(xb(a, b)) - std::abs(yb(a, b))) > t) return false;

    // assign node phases by propagation over the nonzero-entry graph, then
    // verify every edge; entries below tolerance carry no phase information
    std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
    std::vector<char> assigned(static_cast<std::size_t>(n), 0);
    for (Eigen::Index root = 0; root < n; ++root) {
        if (assigned[static_cast<std::size_t>(root)]) continue;
        assigned[static_cast<std::size_t>(root)] = 1;
        theta[static_cast<std::size_t>(root)] = 0.0;
        std::vector<Eigen::Index> queue{root};
        while (!queue.empty()) {
            Eigen::Index a = queue.back();
            queue.pop_back();
            for (Eigen::Index b = 0; b < n; ++b) {
                if (assigned[static_cast<std::size_t>(b)]) continue;
                Complex xe = xb(a, b), ye = yb(a, b);
                if (std::abs(xe) <= t) {
                    xe = xb(b, a);
                    ye = yb(b, a);
                    if (std::abs(xe) <= t) continue;
                    // edge (b,a): arg(y) - arg(x) = θ_b - θ_a
                    theta[static_cast<std::size_t>(b)] =
                        theta[static_cast<std::size_t>(a)] + std::arg(ye) - std::arg(xe);
                } else {
                    // edge (a,b): arg(y) - arg(x) = θ_a - θ_b
                    theta[static_cast<std::size_t>(b)] =
                        theta[static_cast<std::size_t>(a)] - (std::arg(ye) - std::arg(xe));
                }
                assigned[static_cast<std::size_t>(b)] = 1;
                queue.push_back(b);
            }
        }
    }

    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            if (std::abs(xb(a, b)) <= t) continue;
            Complex rotated = std::exp(Complex(0.0, theta[static_cast<std::size_t>(a)] -
                                                        theta[static_cast<std::size_t>(b)])) *
                              xb(a, b);
            if (std::abs(rotated - yb(a, b)) > 10.0 * t) return false;
        }
    return true;
}

}  // namespace qdarwin::darwin
