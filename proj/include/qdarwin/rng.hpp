// rng.hpp — seeded, platform-independent random sources for tests and demos.
// Every random object in the artifact flows through here so that a seed pins
// the whole run byte-for-byte.

#pragma once

#include "qdarwin/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace qdarwin {

// splitmix64; enough state for desk-scale sampling and fully deterministic.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; draws a fresh pair per call to keep the stream stateless.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Complex normal_complex() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

    int index(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  private:
    std::uint64_t state_;
};

inline ComplexMatrix random_hermitian(Eigen::Index n, Rng& rng) {
    ComplexMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal_complex();
    return ComplexMatrix(0.5 * (g + g.adjoint()));
}

// Haar-ish unitary via QR of a Gaussian matrix; R's diagonal phases are fixed
// so the same seed always yields the same matrix.
inline ComplexMatrix random_unitary(Eigen::Index n, Rng& rng) {
    ComplexMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal_complex();
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex d = r(i, i);
        double m = std::abs(d);
        q.col(i) *= (m > 0.0) ? d / m : Complex(1.0, 0.0);
    }
    return q;
}

inline RealVector random_phases_vector(Eigen::Index n, Rng& rng) {
    RealVector p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = rng.uniform(0.0, 2.0 * M_PI);
    return p;
}

inline RealMatrix random_phases_matrix(Eigen::Index n, Rng& rng) {
    RealMatrix p(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) p(i, j) = rng.uniform(0.0, 2.0 * M_PI);
    return p;
}

// Strictly positive weights summing to 1 (generic, irrational).
inline std::vector<double> random_simplex(int n, Rng& rng) {
    std::vector<double> w(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        w[i] = x * x + 1e-3;
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

// Well-separated ascending spectrum: gaps of at least 1/2.
inline std::vector<double> random_spectrum(int n, Rng& rng) {
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = static_cast<double>(i) + rng.uniform(0.0, 0.5);
    return a;
}

inline std::vector<int> random_permutation_map(int n, Rng& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        int j = rng.index(i + 1);
        std::swap(p[i], p[j]);
    }
    return p;
}

}  // namespace qdarwin
