#include "qdarwin/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qdarwin::meas {

int mod_add(int a, int b, int n) {
    if (n <= 0) throw std::invalid_argument("mod_add: modulus must be positive");
    if (a < 0 || a >= n || b < 0 || b >= n)
        throw std::invalid_argument("mod_add: index out of range");
    return (a + b) % n;
}

// ---------------------------------- Permutation -----------------------------

Permutation Permutation::identity(int n) {
    Permutation p;
    p.map.resize(static_cast<std::size_t>(n));
    std::iota(p.map.begin(), p.map.end(), 0);
    return p;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    inv.map.assign(map.size(), 0);
    for (std::size_t i = 0; i < map.size(); ++i)
        inv.map[static_cast<std::size_t>(map[i])] = static_cast<int>(i);
    return inv;
}

Permutation Permutation::compose(const Permutation& inner) const {
    if (inner.map.size() != map.size())
        throw std::invalid_argument("Permutation::compose: size mismatch");
    Permutation out;
    out.map.resize(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        out.map[i] = map[static_cast<std::size_t>(inner.map[i])];
    return out;
}

bool Permutation::is_identity() const {
    for (std::size_t i = 0; i < map.size(); ++i)
        if (map[i] != static_cast<int>(i)) return false;
    return true;
}

void Permutation::validate() const {
    std::vector<char> seen(map.size(), 0);
    for (int v : map) {
        if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("Permutation: mapping is not a bijection");
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

// --------------------------------- Multiplicities ---------------------------

long long Multiplicities::total() const {
    return std::accumulate(m.begin(), m.end(), 0LL);
}

long long Multiplicities::block_start(std::size_t a) const {
    long long s = 0;
    for (std::size_t k = 0; k < a; ++k) s += m.at(k);
    return s;
}

void Multiplicities::validate() const {
    if (m.empty()) throw std::invalid_argument("Multiplicities: empty");
    for (long long v : m)
        if (v < 1) throw std::invalid_argument("Multiplicities: every block must have m_a >= 1");
}

// ----------------------------------- motions --------------------------------

Unitary permutation_unitary(const MatrixUnitFamily& units, const Permutation& pi,
                            const RealVector& phases) {
    pi.validate();
    const Eigen::Index n = units.dim;
    if (pi.size() != static_cast<int>(units.size()) || phases.size() != static_cast<Eigen::Index>(units.size()))
        throw std::invalid_argument("permutation_unitary: size mismatch");
    ComplexMatrix u = ComplexMatrix::Zero(n, n);
    for (std::size_t b = 0; b < units.size(); ++b)
        u += std::exp(Complex(0.0, phases(static_cast<Eigen::Index>(b)))) *
             units.unit(b, static_cast<std::size_t>(pi(static_cast<int>(b))));
    return make_unitary(std::move(u));
}

Unitary measurement_unitary(const ProjectorFamily& control, const MatrixUnitFamily& target_units,
                            const RealMatrix& phases, const CompositeSpace& space) {
    if (space.slots() != 2)
        throw std::invalid_argument("measurement_unitary: expected a two-slot space");
    const Eigen::Index n = control.dim;
    if (target_units.dim != n || space.dims[0] != n || space.dims[1] != n)
        throw std::invalid_argument("measurement_unitary: both subsystems must have equal dimension");
    if (control.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("measurement_unitary: control family must be complete rank-1");
    if (phases.rows() != n || phases.cols() != n)
        throw std::invalid_argument("measurement_unitary: phases must be NxN");
    ComplexMatrix u = ComplexMatrix::Zero(space.total, space.total);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            int shifted = mod_add(static_cast<int>(a), static_cast<int>(b), static_cast<int>(n));
            u += std::exp(Complex(0.0, phases(a, b))) *
                 kron(control.projectors[static_cast<std::size_t>(a)],
                      target_units.unit(static_cast<std::size_t>(b),
                                        static_cast<std::size_t>(shifted)));
        }
    return make_unitary(std::move(u));
}

Unitary coarse_measurement_unitary(const ProjectorFamily& control,
                                   const MatrixUnitFamily& target_units,
                                   const Multiplicities& mult, const CompositeSpace& space) {
    mult.validate();
    if (space.slots() != 2)
        throw std::invalid_argument("coarse_measurement_unitary: expected a two-slot space");
    const Eigen::Index n = control.dim;
    const Eigen::Index m_total = target_units.dim;
    if (control.size() != static_cast<std::size_t>(n) || mult.blocks() != control.size())
        throw std::invalid_argument("coarse_measurement_unitary: one block per control outcome");
    if (mult.total() != static_cast<long long>(m_total))
        throw std::invalid_argument("coarse_measurement_unitary: multiplicity sum " +
                                    std::to_string(mult.total()) + " != target dimension " +
                                    std::to_string(m_total));
    if (space.dims[0] != n || space.dims[1] != m_total)
        throw std::invalid_argument("coarse_measurement_unitary: space dims mismatch");

    const ComplexVector ready = target_units.uniform_vector();
    ComplexMatrix u = ComplexMatrix::Zero(space.total, space.total);
    for (std::size_t a = 0; a < control.size(); ++a) {
        // block-uniform vector: the pointer reading that indicates outcome a
        ComplexVector w = ComplexVector::Zero(m_total);
        long long start = mult.block_start(a);
        for (long long e = start; e < start + mult.m[a]; ++e)
            w += target_units.basis[static_cast<std::size_t>(e)];
        w /= std::sqrt(static_cast<double>(mult.m[a]));

        ComplexMatrix t_a;
        if ((ready - w).norm() < 1e-14) {
            t_a = identity(m_total);
        } else {
            ComplexVector q = ready - w;
            q.normalize();
            t_a = identity(m_total) - 2.0 * (q * q.adjoint());  // reflection: ready <-> w
        }
        u += kron(control.projectors[a], t_a);
    }
    return make_unitary(std::move(u));
}

// ------------------------------ sequential pipeline --------------------------

SequentialResult sequential_measurement(const Observable& a1, const Observable& c1,
                                        const Observable& a2, const RealMatrix& phases1,
                                        const RealMatrix& phases2, const CompositeSpace& space) {
    const Eigen::Index n = a1.dim();
    if (c1.dim() != n || a2.dim() != n)
        throw std::invalid_argument("sequential_measurement: all observables must share dimension");
    if (space.slots() != 2 || space.dims[0] != n || space.dims[1] != n)
        throw std::invalid_argument("sequential_measurement: space must be N x N");
    if (!a1.nondegenerate() || !c1.nondegenerate() || !a2.nondegenerate())
        throw std::invalid_argument("sequential_measurement: observables must be nondegenerate");
    for (std::size_t k = 0; k < a1.spectrum.size(); ++k)
        if (std::abs(a1.spectrum.values[k] - c1.spectrum.values[k]) > 1e-8)
            throw std::invalid_argument("sequential_measurement: a1 and c1 must share a spectrum");

    SequentialResult out;
    out.commuting_controls = max_abs(commutator(a1.matrix, c1.matrix)) < tol::algebra;

    MatrixUnitFamily units_a = make_matrix_units(a1.family);
    MatrixUnitFamily units_c = make_matrix_units(c1.family);
    MatrixUnitFamily units_2 = make_matrix_units(a2.family);

    Unitary u1 = measurement_unitary(a1.family, units_2, phases1, space);

    // W pairs eigenvectors by sorted eigenvalue so W† A1 W = C1.
    ComplexMatrix w = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < units_a.size(); ++k)
        w += units_a.basis[k] * units_c.basis[k].adjoint();

    // motion 1->2 realizing A1(2) = C1(1): V = U1† (W ⊗ 1) U1
    ComplexMatrix w_full = kron(w, identity(n));
    ComplexMatrix g = w_full * u1.matrix;  // cumulative to t=2: O(2) = G† O(0) G

    out.a1_at_2 = g.adjoint() * kron(a1.matrix, identity(n)) * g;

    // second measurement, Eq-12 form in the frame carried along the motion
    Unitary um_frame = measurement_unitary(a1.family, units_2, phases2, space);
    ComplexMatrix total = um_frame.matrix * g;  // O(3) = total† O(0) total
    out.cumulative = total;
    out.first_step = u1.matrix;

    ComplexMatrix a2_full = kron(identity(n), a2.matrix);
    out.a2_at_3 = total.adjoint() * a2_full * total;
    out.branch_counts = branch_counts(out.a2_at_3, space, units_a, units_2);
    return out;
}

std::vector<int> branch_counts(const ComplexMatrix& evolved, const CompositeSpace& space,
                               const MatrixUnitFamily& s1_units, const MatrixUnitFamily& s2_units,
                               double weight_floor) {
    require_dim(evolved, space.total, "branch_counts");
    if (s1_units.dim * s2_units.dim != space.total)
        throw std::invalid_argument("branch_counts: unit families do not span the space");
    Observable spec = spectral_decompose(evolved);
    std::vector<int> counts;
    counts.reserve(s1_units.size() * s2_units.size());
    for (std::size_t a = 0; a < s1_units.size(); ++a)
        for (std::size_t b = 0; b < s2_units.size(); ++b) {
            ComplexVector branch = kron(ComplexMatrix(s1_units.basis[a]),
                                        ComplexMatrix(s2_units.basis[b]));
            int hits = 0;
            for (const auto& q : spec.family.projectors) {
                double weight = branch.dot(q * branch).real();
                if (weight > weight_floor) ++hits;
            }
            counts.push_back(hits);
        }
    return counts;
}

}  // namespace qdarwin::meas
