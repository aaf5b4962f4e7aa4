#pragma once

#include <vector>

#include "nujd/core.hpp"
#include "support/oracles.hpp"

namespace gen {

using namespace nujd;

struct StackPair {
    DiagonalStack sym;
    DiagonalStack herm;
};

/// Random spectra with positions k and l violating identifiability: z_l = r·e^{iφ}·z_k
/// in the transpose stack and z'_l = r·z'_k in the Hermitian stack. Either stack may
/// be empty (not both), and for m > 2 position k may be zero in one of them.
inline StackPair non_identifiable(oracle::Rng& rng, Eigen::Index m, Eigen::Index k, Eigen::Index l) {
    const int ns = rng.integer(0, 5);
    const int nh = ns == 0 ? rng.integer(1, 5) : rng.integer(0, 5);
    const double r = rng.uniform(0.2, 3.0);
    const Complex phase = rng.phase();
    const int zero = m > 2 ? rng.integer(0, 9) : 9; // 0: zero z_k in sym, 1: zero z'_k in herm

    ComplexMatrix s = rng.cmatrix(ns, m);
    if (ns > 0) {
        if (zero == 0) s.col(k).setZero();
        s.col(l) = r * phase * s.col(k);
    }
    ComplexMatrix h = rng.cmatrix(nh, m).real().cast<Complex>();
    if (nh > 0) {
        if (zero == 1) h.col(k).setZero();
        h.col(l) = r * h.col(k);
    }
    return {DiagonalStack(s, CongruenceKind::Transpose), DiagonalStack(h, CongruenceKind::Hermitian)};
}

/// C₁ = A·Ω₁·A^H (Hermitian, real Ω₁) and C₂ = A·Ω₂·Aᵀ (complex invertible Ω₂) with
/// pairwise relative gaps of |Ω₁ₖ|/|Ω₂ₖ| of at least `margin`.
struct PutInstance {
    ComplexMatrix A;
    RealVector omega1;
    ComplexVector omega2;
    TaggedMatrix c1;
    TaggedMatrix c2;
};

inline PutInstance put_instance(oracle::Rng& rng, Eigen::Index m, double cond_cap = 100.0, double margin = 0.05,
                                bool positive_definite = false) {
    const ComplexMatrix a = rng.well_conditioned(m, cond_cap);
    RealVector w1(m);
    ComplexVector w2(m);
    for (;;) {
        for (Eigen::Index k = 0; k < m; ++k) {
            const double mag = rng.uniform(0.2, 2.0);
            w1(k) = positive_definite || rng.uniform() < 0.5 ? mag : -mag;
            w2(k) = rng.uniform(0.2, 2.0) * rng.phase();
        }
        bool ok = true;
        for (Eigen::Index k = 0; k < m && ok; ++k)
            for (Eigen::Index l = k + 1; l < m && ok; ++l) {
                const double p = std::abs(w1(k)) * std::abs(w2(l)), q = std::abs(w1(l)) * std::abs(w2(k));
                ok = std::abs(p - q) >= margin * std::max(p, q);
            }
        if (ok) break;
    }
    ComplexMatrix c1 = a * w1.cast<Complex>().asDiagonal() * a.adjoint();
    ComplexMatrix c2 = a * w2.asDiagonal() * a.transpose();
    return {a, w1, w2, TaggedMatrix::symmetrized(c1, CongruenceKind::Hermitian),
            TaggedMatrix::symmetrized(c2, CongruenceKind::Transpose)};
}

/// Diagonal matrices of both stacks, i.e. the matrix set with mixing A = I.
inline std::vector<TaggedMatrix> reconstructed(const DiagonalStack& sym, const DiagonalStack& herm) {
    std::vector<TaggedMatrix> out = sym.matrices();
    for (auto& t : herm.matrices()) out.push_back(t);
    return out;
}

} // namespace gen
