#include "qdarwin/measurement.hpp"
#include "qdarwin/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace qdarwin;
using namespace qdarwin::meas;

namespace {

Observable diag_observable(const std::vector<double>& values) {
    const Eigen::Index n = static_cast<Eigen::Index>(values.size());
    return observable_from_parts(Spectrum{values, tol::grouping}, computational_family(n));
}

ComplexMatrix hadamard() {
    ComplexMatrix h(2, 2);
    double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    return h;
}

}  // namespace

TEST_CASE("mod_add matches the cyclic sum") {
    CHECK(mod_add(2, 3, 4) == 1);
    for (int n = 1; n <= 5; ++n)
        for (int a = 0; a < n; ++a) {
            CHECK(mod_add(a, 0, n) == a);
            CHECK(mod_add(a, (n - a) % n, n) == 0);
        }
    CHECK_THROWS_AS(mod_add(4, 0, 4), std::invalid_argument);
}

TEST_CASE("permutation compose/inverse round trips") {
    Rng rng(2);
    Permutation p{random_permutation_map(5, rng)};
    Permutation q{random_permutation_map(5, rng)};
    CHECK(p.compose(p.inverse()).is_identity());
    Permutation pq = p.compose(q);
    for (int i = 0; i < 5; ++i) CHECK(pq(i) == p(q(i)));
    CHECK_THROWS_AS((Permutation{{0, 0, 1}}.validate()), std::invalid_argument);
}

TEST_CASE("permutation_unitary: qubit swap with zero phases is Pauli-X") {
    MatrixUnitFamily units = computational_units(2);
    Unitary u = permutation_unitary(units, Permutation{{1, 0}}, RealVector::Zero(2));
    ComplexMatrix x(2, 2);
    x << 0, 1, 1, 0;
    CHECK(max_abs(u.matrix - x) < 1e-14);
}

TEST_CASE("permutation_unitary: identity permutation, zero phases") {
    MatrixUnitFamily units = computational_units(3);
    Unitary u = permutation_unitary(units, Permutation::identity(3), RealVector::Zero(3));
    CHECK(max_abs(u.matrix - identity(3)) < 1e-14);
}

TEST_CASE("permutation motion: measured observable ignores phases, others do not") {
    Rng rng(5);
    for (int n = 2; n <= 4; ++n) {
        Observable obs = spectral_decompose(random_hermitian(n, rng));
        REQUIRE(obs.nondegenerate());
        MatrixUnitFamily units = make_matrix_units(obs.family);
        Permutation pi{random_permutation_map(n, rng)};

        Unitary plain = permutation_unitary(units, pi, RealVector::Zero(n));
        ComplexMatrix reference = evolve(obs.matrix, plain);
        double measured_shift = 0.0;
        double witness = 0.0;
        Observable other = spectral_decompose(random_hermitian(n, rng));
        ComplexMatrix other_plain = evolve(other.matrix, plain);
        for (int trial = 0; trial < 5; ++trial) {
            Unitary u = permutation_unitary(units, pi, random_phases_vector(n, rng));
            measured_shift = std::max(measured_shift, max_abs(evolve(obs.matrix, u) - reference));
            witness = std::max(witness, max_abs(evolve(other.matrix, u) - other_plain));
        }
        CHECK(measured_shift < 1e-10);
        CHECK(witness > 1e-3);
    }
}

TEST_CASE("measurement_unitary: qubit zero-phase computational case is CNOT") {
    CompositeSpace space = CompositeSpace::of({2, 2});
    Unitary u = measurement_unitary(computational_family(2), computational_units(2),
                                    RealMatrix::Zero(2, 2), space);
    ComplexMatrix cnot = ComplexMatrix::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    CHECK(max_abs(u.matrix - cnot) < 1e-14);
}

TEST_CASE("measurement_unitary: unitary for random dimensions and phases") {
    Rng rng(7);
    for (int n = 2; n <= 6; ++n) {
        Observable c = spectral_decompose(random_hermitian(n, rng));
        Observable t = spectral_decompose(random_hermitian(n, rng));
        REQUIRE(c.nondegenerate());
        REQUIRE(t.nondegenerate());
        CompositeSpace space = CompositeSpace::of({n, n});
        Unitary u = measurement_unitary(c.family, make_matrix_units(t.family),
                                        random_phases_matrix(n, rng), space);
        CHECK(u.unitarity_error() < 1e-10);
    }
}

TEST_CASE("measurement motion: record preserved, pointer correlated, phases neutral") {
    Rng rng(9);
    for (int n = 2; n <= 4; ++n) {
        Observable a1 = diag_observable(random_spectrum(n, rng));
        Observable a2 = diag_observable(random_spectrum(n, rng));
        CompositeSpace space = CompositeSpace::of({n, n});
        MatrixUnitFamily units2 = computational_units(n);

        ComplexMatrix a1_full = tensor_embed(a1.matrix, 0, space);
        ComplexMatrix a2_full = tensor_embed(a2.matrix, 1, space);
        ComplexMatrix reference;
        for (int trial = 0; trial < 4; ++trial) {
            RealMatrix phi = trial == 0 ? RealMatrix::Zero(n, n) : random_phases_matrix(n, rng);
            Unitary u = measurement_unitary(a1.family, units2, phi, space);
            CHECK(max_abs(evolve(a1_full, u) - a1_full) < 1e-10);
            ComplexMatrix a2_out = evolve(a2_full, u);
            if (trial == 0)
                reference = a2_out;
            else
                CHECK(max_abs(a2_out - reference) < 1e-10);
        }

        // the evolved pointer takes the branch-correlated sum-over-shifts form
        Unitary u = measurement_unitary(a1.family, units2, random_phases_matrix(n, rng), space);
        ComplexMatrix expected = ComplexMatrix::Zero(space.total, space.total);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                expected += a2.spectrum.values[static_cast<std::size_t>(b)] *
                            kron(a1.family.projectors[static_cast<std::size_t>(a)],
                                 a2.family.projectors[static_cast<std::size_t>(mod_add(a, b, n))]);
        CHECK(max_abs(evolve(a2_full, u) - expected) < 1e-10);
    }
}

TEST_CASE("coarse_measurement_unitary: single block acts trivially on the control") {
    Multiplicities mult{{3}};
    CompositeSpace space = CompositeSpace::of({1, 3});
    Unitary u = coarse_measurement_unitary(computational_family(1), computational_units(3), mult,
                                           space);
    Observable a1 = diag_observable({2.0});
    ComplexMatrix a1_full = tensor_embed(a1.matrix, 0, space);
    CHECK(max_abs(evolve(a1_full, u) - a1_full) < 1e-12);
    CHECK(u.unitarity_error() < 1e-12);
}

TEST_CASE("coarse_measurement_unitary: N=2, M=3 moves the ready state into blocks") {
    Multiplicities mult{{1, 2}};
    CompositeSpace space = CompositeSpace::of({2, 3});
    MatrixUnitFamily units2 = computational_units(3);
    Unitary u = coarse_measurement_unitary(computational_family(2), units2, mult, space);
    CHECK(u.unitarity_error() < 1e-12);

    Observable a1 = diag_observable({0.0, 1.0});
    ComplexMatrix a1_full = tensor_embed(a1.matrix, 0, space);
    CHECK(max_abs(evolve(a1_full, u) - a1_full) < 1e-10);

    // branch 0 supports the first block, branch 1 the remaining two slots
    ComplexVector ready = units2.uniform_vector();
    for (int a = 0; a < 2; ++a) {
        ComplexVector probe = kron(ComplexMatrix(ComplexVector::Unit(2, a)),
                                   ComplexMatrix(ready));
        for (std::size_t blk = 0; blk < 2; ++blk) {
            ComplexMatrix proj = ComplexMatrix::Zero(3, 3);
            long long start = mult.block_start(blk);
            for (long long e = start; e < start + mult.m[blk]; ++e)
                proj(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) = 1.0;
            double weight = probe.dot(evolve(tensor_embed(proj, 1, space), u) * probe).real();
            CHECK(weight == doctest::Approx(blk == static_cast<std::size_t>(a) ? 1.0 : 0.0)
                                .epsilon(1e-9));
        }
    }
}

TEST_CASE("coarse_measurement_unitary: multiplicity sum must match the target dimension") {
    Multiplicities mult{{1, 2}};
    CompositeSpace space = CompositeSpace::of({2, 4});
    CHECK_THROWS_AS(coarse_measurement_unitary(computational_family(2), computational_units(4),
                                               mult, space),
                    std::invalid_argument);
}

TEST_CASE("sequential_measurement: qubit non-commuting control splits every branch in two") {
    std::vector<double> alpha = {0.0, 1.0};
    Observable a1 = diag_observable(alpha);
    Observable a2 = diag_observable(alpha);
    ComplexMatrix h = hadamard();
    Observable c1 = spectral_decompose(ComplexMatrix(h * a1.matrix * h.adjoint()));
    CompositeSpace space = CompositeSpace::of({2, 2});

    for (int trial = 0; trial < 3; ++trial) {
        Rng rng(100 + static_cast<std::uint64_t>(trial));
        RealMatrix phi1 = trial == 0 ? RealMatrix::Zero(2, 2) : random_phases_matrix(2, rng);
        RealMatrix phi2 = trial == 0 ? RealMatrix::Zero(2, 2) : random_phases_matrix(2, rng);
        auto seq = sequential_measurement(a1, c1, a2, phi1, phi2, space);
        CHECK_FALSE(seq.commuting_controls);
        REQUIRE(seq.branch_counts.size() == 4);
        for (int count : seq.branch_counts) CHECK(count == 2);

        // the rotated record equals C1's time-1 Heisenberg operator
        Unitary u1 = make_unitary(seq.first_step);
        ComplexMatrix c1_at_1 = evolve(tensor_embed(c1.matrix, 0, space), u1);
        CHECK(max_abs(seq.a1_at_2 - c1_at_1) < 1e-10);
    }
}

TEST_CASE("sequential_measurement: commuting repeat keeps one branch per branch") {
    std::vector<double> alpha = {0.0, 1.0};
    Observable a1 = diag_observable(alpha);
    Observable a2 = diag_observable(alpha);
    CompositeSpace space = CompositeSpace::of({2, 2});
    auto seq = sequential_measurement(a1, a1, a2, RealMatrix::Zero(2, 2), RealMatrix::Zero(2, 2),
                                      space);
    CHECK(seq.commuting_controls);
    for (int count : seq.branch_counts) CHECK(count == 1);
}

TEST_CASE("sequential_measurement: pointer spectrum preserved at t=3") {
    Rng rng(55);
    std::vector<double> alpha = random_spectrum(3, rng);
    Observable a1 = diag_observable(alpha);
    Observable a2 = diag_observable(alpha);
    ComplexMatrix rot = random_unitary(3, rng);
    Observable c1 = spectral_decompose(ComplexMatrix(rot.adjoint() * a1.matrix * rot));
    CompositeSpace space = CompositeSpace::of({3, 3});
    auto seq = sequential_measurement(a1, c1, a2, random_phases_matrix(3, rng),
                                      random_phases_matrix(3, rng), space);
    CHECK(hermiticity_error(seq.a2_at_3) < 1e-10);
    Observable evolved = spectral_decompose(seq.a2_at_3);
    Observable base = spectral_decompose(tensor_embed(a2.matrix, 1, space));
    REQUIRE(evolved.spectrum.size() == base.spectrum.size());
    for (std::size_t k = 0; k < base.spectrum.size(); ++k)
        CHECK(std::abs(evolved.spectrum.values[k] - base.spectrum.values[k]) < 1e-9);
}

TEST_CASE("every constructed motion is unitary to 1e-10") {
    Rng rng(77);
    for (int n = 2; n <= 5; ++n) {
        Observable obs = spectral_decompose(random_hermitian(n, rng));
        MatrixUnitFamily units = make_matrix_units(obs.family);
        Permutation pi{random_permutation_map(n, rng)};
        CHECK(permutation_unitary(units, pi, random_phases_vector(n, rng)).unitarity_error()
              < 1e-10);
        CompositeSpace space = CompositeSpace::of({n, n});
        CHECK(measurement_unitary(obs.family, computational_units(n),
                                  random_phases_matrix(n, rng), space)
                  .unitarity_error() < 1e-10);
        Multiplicities mult{std::vector<long long>(static_cast<std::size_t>(n), 2)};
        CompositeSpace wide = CompositeSpace::of({n, 2 * n});
        CHECK(coarse_measurement_unitary(obs.family, computational_units(2 * n), mult, wide)
                  .unitarity_error() < 1e-10);
    }
}
