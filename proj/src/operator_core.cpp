#include "qdarwin/operator_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qdarwin {

// ----------------------------------- Spectrum -------------------------------

double Spectrum::sum() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

bool Spectrum::nondegenerate() const {
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (std::abs(values[i] - values[j]) <= grouping_tol) return false;
    return true;
}

// ------------------------------- ProjectorFamily ----------------------------

double ProjectorFamily::algebra_residual() const {
    double worst = 0.0;
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    for (std::size_t a = 0; a < projectors.size(); ++a) {
        worst = std::max(worst, hermiticity_error(projectors[a]));
        total += projectors[a];
        for (std::size_t b = 0; b < projectors.size(); ++b) {
            ComplexMatrix prod = projectors[a] * projectors[b];
            if (a == b) prod -= projectors[a];
            worst = std::max(worst, max_abs(prod));
        }
    }
    worst = std::max(worst, max_abs(total - identity(dim)));
    return worst;
}

void ProjectorFamily::validate(double t) const {
    if (dim <= 0) throw std::invalid_argument("ProjectorFamily: empty family");
    if (projectors.empty() || projectors.size() > static_cast<std::size_t>(dim))
        throw std::invalid_argument("ProjectorFamily: need 1..dim projectors");
    for (const auto& p : projectors) require_dim(p, dim, "ProjectorFamily");
    double r = algebra_residual();
    if (r > t)
        throw std::invalid_argument("ProjectorFamily: algebra residual " + std::to_string(r) +
                                    " exceeds tolerance");
}

// ------------------------------- MatrixUnitFamily ---------------------------

ComplexMatrix MatrixUnitFamily::unit(std::size_t a, std::size_t b) const {
    return basis.at(a) * basis.at(b).adjoint();
}

double MatrixUnitFamily::algebra_residual() const {
    // S_ab S_cd − δ_bc S_ad = (<b|c> − δ_bc)|a><d|, so the max over all tuples
    // factors into the worst Gram deviation times the largest outer-product entry.
    const std::size_t n = basis.size();
    double gram = 0.0;
    double peak = 0.0;
    std::vector<double> maxentry(n);
    for (std::size_t a = 0; a < n; ++a) maxentry[a] = basis[a].cwiseAbs().maxCoeff();
    for (std::size_t a = 0; a < n; ++a) {
        peak = std::max(peak, maxentry[a] * maxentry[a]);
        for (std::size_t b = 0; b < n; ++b) {
            Complex g = basis[a].dot(basis[b]);  // <a|b>
            double dev = std::abs(g - (a == b ? Complex(1.0) : Complex(0.0)));
            gram = std::max(gram, dev);
            peak = std::max(peak, maxentry[a] * maxentry[b]);
        }
    }
    return gram * peak;
}

ComplexVector MatrixUnitFamily::uniform_vector() const {
    ComplexVector u = ComplexVector::Zero(dim);
    for (const auto& v : basis) u += v;
    u /= std::sqrt(static_cast<double>(basis.size()));
    return u;
}

// ---------------------------------- Observable ------------------------------

double Observable::reconstruction_residual() const {
    ComplexMatrix rebuilt = ComplexMatrix::Zero(matrix.rows(), matrix.cols());
    for (std::size_t k = 0; k < family.projectors.size(); ++k)
        rebuilt += spectrum.values[k] * family.projectors[k];
    return max_abs(matrix - rebuilt);
}

// ----------------------------------- Unitary --------------------------------

double Unitary::unitarity_error() const {
    Eigen::Index n = matrix.rows();
    return std::max(max_abs(matrix.adjoint() * matrix - identity(n)),
                    max_abs(matrix * matrix.adjoint() - identity(n)));
}

Unitary make_unitary(ComplexMatrix m, double t) {
    require_square(m, "make_unitary");
    require_finite(m, "make_unitary");
    Unitary u{std::move(m)};
    double e = u.unitarity_error();
    if (e > t)
        throw std::invalid_argument("make_unitary: U†U deviates from identity by " +
                                    std::to_string(e));
    return u;
}

// ------------------------------- HeisenbergState ----------------------------

HeisenbergState make_state(ComplexMatrix rho, double t) {
    require_square(rho, "make_state");
    require_finite(rho, "make_state");
    double herm = hermiticity_error(rho);
    if (herm > t)
        throw std::invalid_argument("make_state: not Hermitian (asymmetry " +
                                    std::to_string(herm) + ")");
    double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > t * 100)
        throw std::invalid_argument("make_state: trace " + std::to_string(tr) + " != 1");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    if (es.info() != Eigen::Success) throw std::runtime_error("make_state: eigensolve failed");
    if (es.eigenvalues().minCoeff() < -t * 100)
        throw std::invalid_argument("make_state: not positive semidefinite (min eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()) + ")");
    HeisenbergState s{std::move(rho), false};
    s.pure = max_abs(s.matrix * s.matrix - s.matrix) < t * 100;
    return s;
}

bool is_pure(const HeisenbergState& state, double t) {
    return max_abs(state.matrix * state.matrix - state.matrix) < t;
}

// -------------------------------- CompositeSpace ----------------------------

CompositeSpace CompositeSpace::of(std::vector<Eigen::Index> dims) {
    if (dims.empty()) throw std::invalid_argument("CompositeSpace: no subsystems");
    Eigen::Index total = 1;
    for (Eigen::Index d : dims) {
        if (d <= 0) throw std::invalid_argument("CompositeSpace: nonpositive dimension");
        total *= d;
    }
    if (total > kMaxTotalDim)
        throw std::invalid_argument("CompositeSpace: total dimension " + std::to_string(total) +
                                    " exceeds cap " + std::to_string(kMaxTotalDim));
    return CompositeSpace{std::move(dims), total};
}

// ------------------------------- CoefficientTensor --------------------------

Complex& CoefficientTensor::at(Eigen::Index c, Eigen::Index d, Eigen::Index e) {
    return beta.at(static_cast<std::size_t>((c * size + d) * size + e));
}

const Complex& CoefficientTensor::at(Eigen::Index c, Eigen::Index d, Eigen::Index e) const {
    return beta.at(static_cast<std::size_t>((c * size + d) * size + e));
}

// ---------------------------------- operations ------------------------------

Observable spectral_decompose(const ComplexMatrix& matrix, double grouping_tol) {
    require_square(matrix, "spectral_decompose");
    require_finite(matrix, "spectral_decompose");
    if (grouping_tol <= 0.0) throw std::invalid_argument("spectral_decompose: grouping_tol must be > 0");
    double asym = hermiticity_error(matrix);
    if (asym > tol::algebra)
        throw std::invalid_argument("spectral_decompose: input not Hermitian, max asymmetry " +
                                    std::to_string(asym));

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(matrix);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_decompose: eigensolve failed");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    const Eigen::Index n = matrix.rows();

    Observable obs;
    obs.spectrum.grouping_tol = grouping_tol;
    obs.family.dim = n;

    Eigen::Index start = 0;
    int label = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && vals(stop) - vals(stop - 1) <= grouping_tol) ++stop;
        double mean = 0.0;
        ComplexMatrix proj = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = start; i < stop; ++i) {
            mean += vals(i);
            proj += vecs.col(i) * vecs.col(i).adjoint();
        }
        mean /= static_cast<double>(stop - start);
        obs.spectrum.values.push_back(mean);
        obs.family.projectors.push_back(std::move(proj));
        obs.family.labels.push_back(label++);
        start = stop;
    }

    ComplexMatrix rebuilt = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < obs.family.projectors.size(); ++k)
        rebuilt += obs.spectrum.values[k] * obs.family.projectors[k];
    obs.matrix = std::move(rebuilt);
    return obs;
}

Observable observable_from_parts(Spectrum spectrum, ProjectorFamily family, double t) {
    if (spectrum.size() != family.size())
        throw std::invalid_argument("observable_from_parts: spectrum/family size mismatch");
    family.validate(t);
    ComplexMatrix m = ComplexMatrix::Zero(family.dim, family.dim);
    for (std::size_t k = 0; k < family.projectors.size(); ++k)
        m += spectrum.values[k] * family.projectors[k];
    return Observable{std::move(spectrum), std::move(family), std::move(m)};
}

MatrixUnitFamily make_matrix_units(const ProjectorFamily& family, double t) {
    if (family.size() != static_cast<std::size_t>(family.dim))
        throw std::invalid_argument(
            "make_matrix_units: family must have one rank-1 projector per dimension");
    MatrixUnitFamily units;
    units.dim = family.dim;
    units.basis.reserve(family.size());
    for (std::size_t a = 0; a < family.size(); ++a) {
        const ComplexMatrix& p = family.projectors[a];
        double trace = p.trace().real();
        if (std::abs(trace - 1.0) > t * 100)
            throw std::invalid_argument("make_matrix_units: projector " + std::to_string(a) +
                                        " has rank != 1 (trace " + std::to_string(trace) +
                                        "); matrix units need a basis-vector choice");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("make_matrix_units: eigensolve failed");
        ComplexVector v = es.eigenvectors().col(family.dim - 1);  // eigenvalue ~1
        v.normalize();
        // gauge: first component of largest magnitude made real-positive
        Eigen::Index arg = 0;
        double best = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double m = std::abs(v(i));
            if (m > best + 1e-14) {
                best = m;
                arg = i;
            }
        }
        Complex phase = v(arg) / std::abs(v(arg));
        v *= std::conj(phase);
        units.basis.push_back(std::move(v));
    }
    return units;
}

CoefficientTensor express_in_family(const Observable& obs, const MatrixUnitFamily& units) {
    if (obs.dim() != units.dim)
        throw std::invalid_argument("express_in_family: dimension mismatch");
    const Eigen::Index n = units.dim;
    CoefficientTensor beta;
    beta.size = n;
    beta.beta.assign(static_cast<std::size_t>(n) * n * n, Complex(0.0));
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(obs.family.size()); ++c) {
        const ComplexMatrix& b = obs.family.projectors[static_cast<std::size_t>(c)];
        for (Eigen::Index d = 0; d < n; ++d)
            for (Eigen::Index e = 0; e < n; ++e)
                // β_cde = Tr(S_ed B_c) = <d| B_c |e>
                beta.at(c, d, e) = units.basis[static_cast<std::size_t>(d)].dot(
                    b * units.basis[static_cast<std::size_t>(e)]);
    }
    return beta;
}

ComplexMatrix reconstruct_projector(const CoefficientTensor& beta, const MatrixUnitFamily& units,
                                    Eigen::Index c) {
    const Eigen::Index n = units.dim;
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (Eigen::Index d = 0; d < n; ++d)
        for (Eigen::Index e = 0; e < n; ++e)
            out += beta.at(c, d, e) * units.unit(static_cast<std::size_t>(d),
                                                 static_cast<std::size_t>(e));
    return out;
}

ComplexMatrix evolve(const ComplexMatrix& op, const Unitary& u) {
    if (op.rows() != u.matrix.rows() || op.cols() != u.matrix.cols())
        throw std::invalid_argument("evolve: dimension mismatch");
    return u.matrix.adjoint() * op * u.matrix;
}

ComplexMatrix tensor_embed(const ComplexMatrix& op, std::size_t slot, const CompositeSpace& space) {
    if (slot >= space.slots()) throw std::invalid_argument("tensor_embed: slot out of range");
    require_dim(op, space.dims[slot], "tensor_embed");
    ComplexMatrix acc = ComplexMatrix::Identity(1, 1);
    for (std::size_t j = 0; j < space.slots(); ++j)
        acc = kron(acc, j == slot ? op : identity(space.dims[j]));
    return acc;
}

ComplexMatrix accessible_info(const HeisenbergState& state, const Observable& obs) {
    if (state.matrix.rows() != obs.dim())
        throw std::invalid_argument("accessible_info: dimension mismatch");
    return state.matrix * obs.matrix;
}

ProjectorFamily computational_family(Eigen::Index n) {
    ProjectorFamily f;
    f.dim = n;
    for (Eigen::Index i = 0; i < n; ++i) {
        ComplexMatrix p = ComplexMatrix::Zero(n, n);
        p(i, i) = 1.0;
        f.projectors.push_back(std::move(p));
        f.labels.push_back(static_cast<int>(i));
    }
    return f;
}

MatrixUnitFamily computational_units(Eigen::Index n) {
    MatrixUnitFamily u;
    u.dim = n;
    for (Eigen::Index i = 0; i < n; ++i) {
        ComplexVector v = ComplexVector::Zero(n);
        v(i) = 1.0;
        u.basis.push_back(std::move(v));
    }
    return u;
}

// ------------------------------- partial traces -----------------------------

namespace {

std::vector<Eigen::Index> strides_of(const std::vector<Eigen::Index>& dims) {
    std::vector<Eigen::Index> s(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
    return s;
}

}  // namespace

ComplexMatrix partial_trace_keep(const ComplexMatrix& m, const CompositeSpace& space,
                                 std::size_t keep) {
    if (keep >= space.slots()) throw std::invalid_argument("partial_trace_keep: slot out of range");
    require_dim(m, space.total, "partial_trace_keep");
    const auto strides = strides_of(space.dims);
    const Eigen::Index dk = space.dims[keep];
    const Eigen::Index rest = space.total / dk;
    ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
    // enumerate the rest-space by walking all flat indices with slot `keep` = 0
    for (Eigen::Index r = 0; r < rest; ++r) {
        // expand r over the non-keep slots
        Eigen::Index base = 0;
        Eigen::Index rr = r;
        for (std::size_t s = space.slots(); s-- > 0;) {
            if (s == keep) continue;
            Eigen::Index d = space.dims[s];
            base += (rr % d) * strides[s];
            rr /= d;
        }
        for (Eigen::Index i = 0; i < dk; ++i)
            for (Eigen::Index j = 0; j < dk; ++j)
                out(i, j) += m(base + i * strides[keep], base + j * strides[keep]);
    }
    return out;
}

ComplexMatrix partial_trace_drop(const ComplexMatrix& m, const CompositeSpace& space,
                                 std::size_t drop) {
    if (drop >= space.slots()) throw std::invalid_argument("partial_trace_drop: slot out of range");
    require_dim(m, space.total, "partial_trace_drop");
    const auto strides = strides_of(space.dims);
    const Eigen::Index dd = space.dims[drop];
    const Eigen::Index rest = space.total / dd;
    // rest-space index: fused over the remaining slots in their original order
    std::vector<Eigen::Index> rest_dims;
    for (std::size_t s = 0; s < space.slots(); ++s)
        if (s != drop) rest_dims.push_back(space.dims[s]);
    const auto rest_strides = strides_of(rest_dims);
    ComplexMatrix out = ComplexMatrix::Zero(rest, rest);
    for (Eigen::Index r = 0; r < rest; ++r) {
        Eigen::Index base_r = 0;
        {
            Eigen::Index rr = r;
            std::size_t pos = rest_dims.size();
            for (std::size_t s = space.slots(); s-- > 0;) {
                if (s == drop) continue;
                --pos;
                Eigen::Index d = rest_dims[pos];
                base_r += (rr % d) * strides[s];
                rr /= d;
            }
        }
        for (Eigen::Index c = 0; c < rest; ++c) {
            Eigen::Index base_c = 0;
            Eigen::Index cc = c;
            std::size_t pos = rest_dims.size();
            for (std::size_t s = space.slots(); s-- > 0;) {
                if (s == drop) continue;
                --pos;
                Eigen::Index d = rest_dims[pos];
                base_c += (cc % d) * strides[s];
                cc /= d;
            }
            Complex sum(0.0);
            for (Eigen::Index t = 0; t < dd; ++t)
                sum += m(base_r + t * strides[drop], base_c + t * strides[drop]);
            out(r, c) = sum;
        }
    }
    return out;
}

ComplexMatrix product_with_slot(const ComplexMatrix& f, std::size_t slot, const ComplexMatrix& g,
                                const CompositeSpace& space) {
    if (slot >= space.slots()) throw std::invalid_argument("product_with_slot: slot out of range");
    require_dim(f, space.dims[slot], "product_with_slot");
    const Eigen::Index rest = space.total / space.dims[slot];
    require_dim(g, rest, "product_with_slot");
    const auto strides = strides_of(space.dims);
    std::vector<Eigen::Index> rest_dims;
    for (std::size_t s = 0; s < space.slots(); ++s)
        if (s != slot) rest_dims.push_back(space.dims[s]);
    ComplexMatrix out = ComplexMatrix::Zero(space.total, space.total);
    auto base_of = [&](Eigen::Index fused) {
        Eigen::Index base = 0;
        std::size_t pos = rest_dims.size();
        for (std::size_t s = space.slots(); s-- > 0;) {
            if (s == slot) continue;
            --pos;
            Eigen::Index d = rest_dims[pos];
            base += (fused % d) * strides[s];
            fused /= d;
        }
        return base;
    };
    for (Eigen::Index r = 0; r < rest; ++r) {
        Eigen::Index br = base_of(r);
        for (Eigen::Index c = 0; c < rest; ++c) {
            Eigen::Index bc = base_of(c);
            for (Eigen::Index i = 0; i < f.rows(); ++i)
                for (Eigen::Index j = 0; j < f.cols(); ++j)
                    out(br + i * strides[slot], bc + j * strides[slot]) = f(i, j) * g(r, c);
        }
    }
    return out;
}

}  // namespace qdarwin
