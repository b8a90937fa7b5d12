// darwinism.hpp — information-flow analysis: classify motions as classical
// acts, certify perfect correlation between a record observable and a pointer
// observable, and decide phase-indifference equivalence of accessible
// information.

#pragma once

#include "qdarwin/measurement.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qdarwin::darwin {

// A classical act relabels an observable's projectors: U = Σ exp(iφ_b) S_{b π(b)}.
struct BranchStructure {
    meas::Permutation permutation;
    RealVector phases;  // radians, in [0, 2π)
    int branch_count = 0;
};

// Empty unless U has the permutation form in obs's matrix units.
std::optional<BranchStructure> is_classical_act(const Unitary& u, const Observable& obs,
                                                double t = tol::algebra);

// As is_classical_act but throws (referencing the failed test) for non-classical acts.
BranchStructure branch_decomposition(const Unitary& u, const Observable& obs,
                                     double t = tol::algebra);

struct CorrelationReport {
    bool correlated = false;
    double residual = 0.0;
    // slot_table[a][b]: the pointer-family slot holding the pointer's b-th
    // value level inside record branch a.  Perfect measurements of the ⊕ form
    // produce slot_table[a][b] = a ⊕ b.
    std::vector<std::vector<int>> slot_table;
    // the slot indicating record branch a for pointer value-index 0 (the
    // optional map a -> c; present exactly when correlated)
    std::vector<int> indicator;
    std::vector<double> levels;  // ascending distinct pointer values
    int record_slot = -1;        // subsystem carrying the record observable
    bool swapped = false;        // true when obs_b played the record role
    std::string note;
};

// correlated = true iff the two observables commute, one of them is confined
// to a single subsystem (the record), the other decomposes branch-by-branch
// into pointer observables sharing one projector family, and every pointer
// slot discriminates the record branches.  Symmetric in its two arguments.
// reference_slots, when given, fixes the slot labeling of the pointer family.
CorrelationReport correlation_check(const ComplexMatrix& obs_a, const ComplexMatrix& obs_b,
                                    const CompositeSpace& space,
                                    const std::vector<ComplexMatrix>* reference_slots = nullptr,
                                    double t = tol::correlation);

// True iff a diagonal-in-basis unitary D exists with D x D† = y within
// tolerance: element moduli match and the off-diagonal phase pattern is
// consistent.  This is exactly the information a same-basis measurement chain
// can never extract.
bool phase_equivalent(const ComplexMatrix& x, const ComplexMatrix& y, const ProjectorFamily& basis,
                      double t = 1e-8);

}  // namespace qdarwin::darwin
