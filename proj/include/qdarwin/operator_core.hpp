// operator_core.hpp — dense operator algebra for small Hilbert spaces:
// spectral decomposition into projector families, matrix-unit families,
// Heisenberg evolution, tensor composition, and accessible-information
// products.  Observables evolve; states are static.

#pragma once

#include "qdarwin/linalg.hpp"

#include <string>
#include <vector>

namespace qdarwin {

// Eigenvalues, ordered; entries may repeat for block-valued observables built
// directly from a family.  grouping_tol controls degeneracy detection.
struct Spectrum {
    std::vector<double> values;
    double grouping_tol = tol::grouping;

    std::size_t size() const { return values.size(); }
    double sum() const;
    // true when all values are pairwise separated by more than grouping_tol
    bool nondegenerate() const;
};

// Orthogonal idempotents summing to the identity.
struct ProjectorFamily {
    Eigen::Index dim = 0;
    std::vector<ComplexMatrix> projectors;
    std::vector<int> labels;

    std::size_t size() const { return projectors.size(); }
    // max over the defining identities: B_a B_b = δ_ab B_a, ΣB_a = 1, B_a = B_a†
    double algebra_residual() const;
    void validate(double t = tol::algebra) const;
};

// Operator basis S_ab = |a><b| built on gauge-fixed unit vectors, obeying
// S_ab S_cd = δ_bc S_ad with S_aa the projectors of the generating family.
struct MatrixUnitFamily {
    Eigen::Index dim = 0;
    std::vector<ComplexVector> basis;
    std::string gauge = "largest-component-real-positive";

    std::size_t size() const { return basis.size(); }
    ComplexMatrix unit(std::size_t a, std::size_t b) const;
    ComplexMatrix projector(std::size_t a) const { return unit(a, a); }
    // max over all index tuples of |S_ab S_cd − δ_bc S_ad|; exact via the Gram
    // matrix because every unit is an outer product of the same vector set
    double algebra_residual() const;
    // uniform superposition of all basis vectors, normalized
    ComplexVector uniform_vector() const;
};

struct Observable {
    Spectrum spectrum;
    ProjectorFamily family;
    ComplexMatrix matrix;  // cached Σ α_k B_k

    Eigen::Index dim() const { return matrix.rows(); }
    double reconstruction_residual() const;
    bool nondegenerate() const { return spectrum.nondegenerate(); }
};

struct Unitary {
    ComplexMatrix matrix;
    double unitarity_error() const;
};

Unitary make_unitary(ComplexMatrix m, double t = tol::algebra);

// Static positive trace-1 operator; purity derived at construction.
struct HeisenbergState {
    ComplexMatrix matrix;
    bool pure = false;
};

HeisenbergState make_state(ComplexMatrix rho, double t = tol::algebra);

// Ordered subsystem dimensions with left-to-right tensor order and row-major
// index fusion, fixed globally.
struct CompositeSpace {
    std::vector<Eigen::Index> dims;
    Eigen::Index total = 0;

    static CompositeSpace of(std::vector<Eigen::Index> dims);
    std::size_t slots() const { return dims.size(); }
};

// β_{cde} with B_c = Σ_{d,e} β_{cde} S_de; flat index (c*N + d)*N + e.
struct CoefficientTensor {
    Eigen::Index size = 0;
    std::vector<Complex> beta;

    Complex& at(Eigen::Index c, Eigen::Index d, Eigen::Index e);
    const Complex& at(Eigen::Index c, Eigen::Index d, Eigen::Index e) const;
};

// ---------------------------------- operations ------------------------------

// Eigenvalues grouped when closer than grouping_tol; projectors built from the
// grouped eigenspaces.  Throws naming the max asymmetry for non-Hermitian input.
Observable spectral_decompose(const ComplexMatrix& matrix, double grouping_tol = tol::grouping);

// Direct construction (values may repeat); validates reconstruction only.
Observable observable_from_parts(Spectrum spectrum, ProjectorFamily family,
                                 double t = tol::algebra);

// Requires every projector rank 1; the gauge makes each eigenvector's first
// largest-magnitude component real-positive so families reproduce across runs.
MatrixUnitFamily make_matrix_units(const ProjectorFamily& family, double t = tol::algebra);

// β_{cde} = Tr(S_ed B_c) for each projector B_c of obs.
CoefficientTensor express_in_family(const Observable& obs, const MatrixUnitFamily& units);

// Σ_{d,e} β_{cde} S_de for one c.
ComplexMatrix reconstruct_projector(const CoefficientTensor& beta, const MatrixUnitFamily& units,
                                    Eigen::Index c);

// Heisenberg step: U† op U.
ComplexMatrix evolve(const ComplexMatrix& op, const Unitary& u);

// op at slot, identities elsewhere, under the fixed ordering convention.
ComplexMatrix tensor_embed(const ComplexMatrix& op, std::size_t slot, const CompositeSpace& space);

// ρ·Â — not Hermitian in general; the sole input to game-equivalence tests.
ComplexMatrix accessible_info(const HeisenbergState& state, const Observable& obs);

bool is_pure(const HeisenbergState& state, double t = tol::algebra);

// Standard-basis rank-1 projector family / matrix units on C^n.
ProjectorFamily computational_family(Eigen::Index n);
MatrixUnitFamily computational_units(Eigen::Index n);

// Trace out every slot except `keep`.
ComplexMatrix partial_trace_keep(const ComplexMatrix& m, const CompositeSpace& space,
                                 std::size_t keep);

// Trace out exactly slot `drop`; result lives on the remaining slots in order.
ComplexMatrix partial_trace_drop(const ComplexMatrix& m, const CompositeSpace& space,
                                 std::size_t drop);

// F at `slot` tensored with G on the remaining slots (G given in their fused order).
ComplexMatrix product_with_slot(const ComplexMatrix& f, std::size_t slot, const ComplexMatrix& g,
                                const CompositeSpace& space);

}  // namespace qdarwin
