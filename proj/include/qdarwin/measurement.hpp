// measurement.hpp — unitary motions: permutation (classical) acts, two-system
// perfect measurements, coarse measurements onto larger spaces, and the
// sequential non-commuting measurement pipeline.

#pragma once

#include "qdarwin/operator_core.hpp"

#include <vector>

namespace qdarwin::meas {

int mod_add(int a, int b, int n);

// Bijection on {0..N-1}.
struct Permutation {
    std::vector<int> map;

    static Permutation identity(int n);
    int size() const { return static_cast<int>(map.size()); }
    int operator()(int i) const { return map.at(static_cast<std::size_t>(i)); }
    Permutation inverse() const;
    // (*this) ∘ inner: apply inner first
    Permutation compose(const Permutation& inner) const;
    bool is_identity() const;
    void validate() const;
};

// Block sizes m_a >= 1 with prefix sums; block a covers [block_start(a), block_start(a)+m_a).
struct Multiplicities {
    std::vector<long long> m;

    long long total() const;
    std::size_t blocks() const { return m.size(); }
    long long block_start(std::size_t a) const;
    void validate() const;
};

// U = Σ_b exp(iφ_b) S_{b,π(b)}; evolving the family's observable relabels its
// projectors by π independently of the phases.
Unitary permutation_unitary(const MatrixUnitFamily& units, const Permutation& pi,
                            const RealVector& phases);

// U = Σ_{a,b} exp(iφ_ab) B_a ⊗ S_{b,a⊕b} on a two-slot space with equal factor
// dimensions: a perfect measurement of the control observable by the target.
Unitary measurement_unitary(const ProjectorFamily& control, const MatrixUnitFamily& target_units,
                            const RealMatrix& phases, const CompositeSpace& space);

// U = Σ_a B_a ⊗ T_a where T_a reflects the target family's uniform vector into
// the uniform vector of block a; realizes the coarse measurement onto an
// M-dimensional pointer divided into blocks of sizes m_a.
Unitary coarse_measurement_unitary(const ProjectorFamily& control,
                                   const MatrixUnitFamily& target_units,
                                   const Multiplicities& mult, const CompositeSpace& space);

struct SequentialResult {
    ComplexMatrix a1_at_2;    // the rotated record observable (equals C1 at time 1)
    ComplexMatrix a2_at_3;    // pointer observable after the second measurement
    ComplexMatrix cumulative;  // G with O(3) = G† O(0) G
    ComplexMatrix first_step;  // the first measurement unitary
    std::vector<int> branch_counts;  // one per t=0 product branch (N*N entries)
    bool commuting_controls = false;  // repeat-measurement case, flagged not an error
};

// Measure a1 onto a2, rotate S1 so the next measured observable is c1's time-1
// operator, measure again; a2_at_3 computed by direct conjugation.
SequentialResult sequential_measurement(const Observable& a1, const Observable& c1,
                                        const Observable& a2, const RealMatrix& phases1,
                                        const RealMatrix& phases2, const CompositeSpace& space);

// For each product-basis branch |v1_a ⊗ v2_b>, the number of distinct
// eigenvalue levels of `evolved` whose eigenprojectors overlap that branch.
std::vector<int> branch_counts(const ComplexMatrix& evolved, const CompositeSpace& space,
                               const MatrixUnitFamily& s1_units, const MatrixUnitFamily& s2_units,
                               double weight_floor = 1e-6);

}  // namespace qdarwin::meas
