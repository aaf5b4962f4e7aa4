#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nujd/core.hpp"
#include "nujd/linalg.hpp"
#include "nujd/uniqueness.hpp"

namespace nujd {

inline constexpr double degenerate_gap = 1e-6;

struct PutResult {
    GLElement X;
    ComplexVector lambda;       ///< diag(X^H C₁ X)
    TakagiFactorization takagi; ///< PUT: of C₂; SUT: of the whitened symmetric matrix
    ComplexVector evd_lambda;   ///< eigenvalues of C̃₁C̃₁ᵀ, general_evd order
    double eig_gap = 1.0;
    std::vector<std::string> warnings;

    bool degenerate() const noexcept { return eig_gap < degenerate_gap; }
};

/// Smallest pairwise gap between eigenvalue magnitudes, relative to the largest.
inline double relative_magnitude_gap(const ComplexVector& mu) {
    const Eigen::Index m = mu.size();
    if (m < 2) return 1.0;
    const double mx = mu.cwiseAbs().maxCoeff();
    if (mx == 0.0) return 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index l = k + 1; l < m; ++l) gap = std::min(gap, std::abs(std::abs(mu(k)) - std::abs(mu(l))));
    return gap / mx;
}

namespace detail {

inline void require_pair(const TaggedMatrix& herm, const TaggedMatrix& sym) {
    require(herm.kind() == CongruenceKind::Hermitian, ErrorKind::InvalidArgument,
            "first matrix must be of Hermitian kind");
    require(sym.kind() == CongruenceKind::Transpose, ErrorKind::InvalidArgument,
            "second matrix must be of transpose kind");
    require(herm.dim() == sym.dim(), ErrorKind::DimensionMismatch, "matrices have different sizes");
}

inline void attach_gap_warning(PutResult& r) {
    if (r.degenerate())
        r.warnings.push_back("DegenerateSpectrum: eigenvalue gap " + std::to_string(r.eig_gap) +
                             " is below " + std::to_string(degenerate_gap) + "; the diagonalizer may not be unique");
}

} // namespace detail

/// Pseudo-uncorrelating transform. Returns X with X^H C₂ conj(X) = I and X^H C₁ X diagonal.
inline PutResult put(const TaggedMatrix& c1, const TaggedMatrix& c2) {
    detail::require_pair(c1, c2);
    TakagiFactorization tk = takagi(c2.matrix());
    const ComplexMatrix s_inv = principal_inv_sqrt_diag(tk.sigma);
    const ComplexMatrix b = s_inv * tk.U.adjoint();
    const ComplexMatrix ct1 = b * c1.matrix() * b.adjoint();
    const GeneralEVD evd = general_evd(ct1 * ct1.transpose());
    const ComplexMatrix v = symmetric_orthogonalize(evd.W);
    ComplexMatrix x = tk.U * s_inv * v.conjugate();
    ComplexVector lambda = (x.adjoint() * c1.matrix() * x).diagonal();
    PutResult r{GLElement(std::move(x)), std::move(lambda), std::move(tk), evd.lambda,
                relative_magnitude_gap(evd.lambda), {}};
    detail::attach_gap_warning(r);
    return r;
}

/// Strong uncorrelating transform: whitens the positive-definite Hermitian
/// matrix, then Takagi-factorizes the whitened symmetric one. Normalized like
/// put, so lambda holds the reciprocal circularity coefficients in descending order.
inline PutResult sut(const TaggedMatrix& c_herm, const TaggedMatrix& c_sym) {
    detail::require_pair(c_herm, c_sym);
    const Eigen::Index m = c_herm.dim();
    const HermitianEVD he = hermitian_evd(c_herm.matrix());
    const double top = he.lambda(0);
    require(top > 0.0 && he.lambda(m - 1) > tol::sigma_min * top, ErrorKind::NotPositiveDefinite,
            "Hermitian matrix is not positive definite (smallest eigenvalue " + std::to_string(he.lambda(m - 1)) +
                ")");
    const ComplexMatrix f = he.V * he.lambda.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal();
    const ComplexMatrix whitened = symmetrize(f.adjoint() * c_sym.matrix() * f.conjugate(), CongruenceKind::Transpose);
    TakagiFactorization tk = takagi(whitened);
    const ComplexMatrix s_inv = principal_inv_sqrt_diag(tk.sigma);
    ComplexMatrix x = (f * tk.U * s_inv).rowwise().reverse();
    ComplexVector lambda = (x.adjoint() * c_herm.matrix() * x).diagonal();
    ComplexVector mu(m);
    for (Eigen::Index k = 0; k < m; ++k) mu(k) = lambda(k) * lambda(k);
    const double gap = relative_magnitude_gap(mu);
    PutResult r{GLElement(std::move(x)), std::move(lambda), std::move(tk), std::move(mu), gap, {}};
    detail::attach_gap_warning(r);
    return r;
}

/// Joint diagonalizer of two matrices of the same congruence kind from the
/// eigenvectors of C₂⁻¹C₁. Columns have unit norm and a real positive largest entry.
inline GLElement two_matrix_same_kind(const TaggedMatrix& c1, const TaggedMatrix& c2) {
    require(c1.kind() == c2.kind(), ErrorKind::InvalidArgument, "matrices must share one congruence kind");
    require(c1.dim() == c2.dim(), ErrorKind::DimensionMismatch, "matrices have different sizes");
    const Eigen::Index m = c1.dim();
    const RealVector s = singular_values(c2.matrix());
    require(s(0) > 0.0 && s(m - 1) > tol::sigma_min * s(0), ErrorKind::SingularSecondMatrix,
            "second matrix is singular");
    const ComplexMatrix prod = c2.matrix().partialPivLu().solve(c1.matrix());
    GeneralEVD evd;
    try {
        evd = general_evd(prod);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Defective) throw;
        fail(ErrorKind::DegenerateSpectrum, "C₂⁻¹C₁ has repeated eigenvalues");
    }
    const double mx = evd.lambda.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index l = k + 1; l < m; ++l)
            require(std::abs(evd.lambda(k) - evd.lambda(l)) > 1e-8 * mx, ErrorKind::DegenerateSpectrum,
                    "C₂⁻¹C₁ has repeated eigenvalues; the diagonalizer is not essentially unique");
    ComplexMatrix x = c1.kind() == CongruenceKind::Hermitian ? evd.W : ComplexMatrix(evd.W.conjugate());
    for (Eigen::Index j = 0; j < m; ++j) {
        x.col(j).normalize();
        Eigen::Index imax = 0;
        x.col(j).cwiseAbs().maxCoeff(&imax);
        const Complex c = x(imax, j);
        x.col(j) *= std::conj(c) / std::abs(c);
        x(imax, j) = std::abs(x(imax, j));
    }
    return GLElement(std::move(x));
}

/// Identifiability of a (Hermitian-kind, transpose-kind) pair from their
/// diagonal source statistics: unique iff the real parts or the imaginary parts
/// of the first diagonal separate every pair against the second.
inline UniquenessReport put_identifiability_check(const ComplexVector& auto_diag, const ComplexVector& pseudo_diag,
                                                  double tolerance = tol::rho) {
    require(auto_diag.size() == pseudo_diag.size(), ErrorKind::DimensionMismatch, "diagonals differ in length");
    UniquenessReport re = unique_thm2(pseudo_diag, auto_diag.real(), tolerance);
    if (re.unique()) return re;
    UniquenessReport im = unique_thm2(pseudo_diag, auto_diag.imag(), tolerance);
    if (im.unique()) return im;
    return re;
}

inline UniquenessReport put_identifiability_check(const ComplexMatrix& c_auto, const ComplexMatrix& c_pseudo,
                                                  double tolerance = tol::rho) {
    require_square(c_auto, "auto statistic");
    require_square(c_pseudo, "pseudo statistic");
    for (const ComplexMatrix* c : {&c_auto, &c_pseudo})
        require(std::sqrt(offdiag_norm2(*c)) <= tol::sym * c->norm(), ErrorKind::InvalidArgument,
                "identifiability check expects diagonal source statistics");
    return put_identifiability_check(ComplexVector(c_auto.diagonal()), ComplexVector(c_pseudo.diagonal()),
                                     tolerance);
}

} // namespace nujd
