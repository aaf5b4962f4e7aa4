#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "nujd/core.hpp"

namespace nujd {

/// C = U·diag(sigma)·Uᵀ with U unitary and sigma nonincreasing.
struct TakagiFactorization {
    ComplexMatrix U;
    RealVector sigma;

    ComplexMatrix reconstruct() const { return U * sigma.cast<Complex>().asDiagonal() * U.transpose(); }
};

/// C = V·diag(lambda)·V^H with V unitary and lambda descending.
struct HermitianEVD {
    ComplexMatrix V;
    RealVector lambda;

    ComplexMatrix reconstruct() const { return V * lambda.cast<Complex>().asDiagonal() * V.adjoint(); }
};

/// C·W = W·diag(lambda), W with unit-norm columns.
struct GeneralEVD {
    ComplexMatrix W;
    ComplexVector lambda;
    double condition = 1.0; ///< condition number of W
};

namespace detail {

/// Square root of a unitary matrix that is a primary matrix function of Z. The
/// branch cut is placed in the widest gap of the eigenphases, so clustered
/// eigenvalues always share a branch; a single eigenvalue gets the principal root.
inline ComplexMatrix sqrt_unitary(const ComplexMatrix& z) {
    const Eigen::Index m = z.rows();
    Eigen::ComplexSchur<ComplexMatrix> schur(z);
    const ComplexMatrix& t = schur.matrixT();
    const ComplexMatrix& s = schur.matrixU();

    std::vector<double> phase(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) phase[static_cast<std::size_t>(i)] = std::arg(t(i, i));
    std::vector<double> sorted = phase;
    std::sort(sorted.begin(), sorted.end());
    const double two_pi = 2.0 * std::numbers::pi;
    double best_gap = -1.0, cut = std::numbers::pi;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double lo = sorted[i];
        const double hi = (i + 1 < sorted.size()) ? sorted[i + 1] : sorted.front() + two_pi;
        if (hi - lo > best_gap) {
            best_gap = hi - lo;
            cut = lo + (hi - lo) / 2.0;
        }
    }
    ComplexVector root(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double a = phase[static_cast<std::size_t>(i)];
        while (a >= cut) a -= two_pi;
        while (a < cut - two_pi) a += two_pi;
        root(i) = std::sqrt(std::abs(t(i, i))) * std::polar(1.0, a / 2.0);
    }
    return s * root.asDiagonal() * s.adjoint();
}

inline bool sign_needs_flip(Complex c) { return c.real() < 0.0 || (c.real() == 0.0 && c.imag() < 0.0); }

} // namespace detail

inline TakagiFactorization takagi(const ComplexMatrix& c, double tolerance = tol::sym) {
    require_square(c, "Takagi input");
    require_finite(c, "Takagi input");
    require(c.rows() >= 1, ErrorKind::InvalidArgument, "Takagi input must be non-empty");
    const double defect = symmetry_defect(c, CongruenceKind::Transpose);
    require(defect <= tolerance, ErrorKind::NotSymmetric,
            "Takagi input is not complex symmetric (relative defect " + std::to_string(defect) + ")");
    const ComplexMatrix cs = symmetrize(c, CongruenceKind::Transpose);

    Eigen::JacobiSVD<ComplexMatrix> svd(cs, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexMatrix& p = svd.matrixU();
    const ComplexMatrix& q = svd.matrixV();
    const ComplexMatrix z = p.adjoint() * q.conjugate();

    TakagiFactorization out;
    out.U = p * detail::sqrt_unitary(z);
    out.sigma = svd.singularValues();
    for (Eigen::Index j = 0; j < out.U.cols(); ++j) {
        Eigen::Index imax = 0;
        out.U.col(j).cwiseAbs().maxCoeff(&imax);
        if (detail::sign_needs_flip(out.U(imax, j))) out.U.col(j) *= -1.0;
    }
    return out;
}

inline HermitianEVD hermitian_evd(const ComplexMatrix& c, double tolerance = tol::sym) {
    require_square(c, "Hermitian EVD input");
    require_finite(c, "Hermitian EVD input");
    const double defect = symmetry_defect(c, CongruenceKind::Hermitian);
    require(defect <= tolerance, ErrorKind::NotSymmetric,
            "matrix is not Hermitian (relative defect " + std::to_string(defect) + ")");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(symmetrize(c, CongruenceKind::Hermitian));
    require(es.info() == Eigen::Success, ErrorKind::InternalConsistency, "Hermitian eigensolver did not converge");
    HermitianEVD out;
    out.lambda = es.eigenvalues().reverse();
    out.V = es.eigenvectors().rowwise().reverse();
    return out;
}

/// Eigenvalues ordered by descending magnitude, then real part, then imaginary part.
inline GeneralEVD general_evd(const ComplexMatrix& c) {
    require_square(c, "EVD input");
    require_finite(c, "EVD input");
    const Eigen::Index m = c.rows();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(c, true);
    require(es.info() == Eigen::Success, ErrorKind::InternalConsistency, "eigensolver did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const ComplexVector& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
        if (ma != mb) return ma > mb;
        if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
        return ev(a).imag() > ev(b).imag();
    });

    GeneralEVD out;
    out.W.resize(m, m);
    out.lambda.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto src = order[static_cast<std::size_t>(j)];
        out.lambda(j) = ev(src);
        const ComplexVector v = es.eigenvectors().col(src);
        const double n = v.norm();
        out.W.col(j) = n > 0.0 ? ComplexVector(v / n) : v;
    }
    out.condition = all_finite(out.W) ? condition_number(out.W) : std::numeric_limits<double>::infinity();
    require(out.condition <= tol::kappa_max, ErrorKind::Defective,
            "matrix is numerically defective (eigenvector condition " + std::to_string(out.condition) + ")");
    return out;
}

inline ComplexMatrix principal_inv_sqrt_diag(const RealVector& sigma) {
    require(sigma.size() >= 1, ErrorKind::InvalidArgument, "empty singular value list");
    const double mx = sigma.maxCoeff();
    ComplexMatrix d = ComplexMatrix::Zero(sigma.size(), sigma.size());
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        require(std::isfinite(sigma(k)) && sigma(k) > tol::sigma_min * mx && mx > 0.0,
                ErrorKind::SingularPseudoCovariance,
                "singular value " + std::to_string(k + 1) + " (" + std::to_string(sigma(k)) +
                    ") is below the invertibility floor");
        d(k, k) = 1.0 / std::sqrt(sigma(k));
    }
    return d;
}

/// V = W (WᵀW)^(−1/2) with the principal root, so VᵀV = I.
inline ComplexMatrix symmetric_orthogonalize(const ComplexMatrix& w) {
    require_square(w, "W");
    require_finite(w, "W");
    const Eigen::Index m = w.rows();
    const ComplexMatrix g = w.transpose() * w;
    const RealVector s = singular_values(g);
    require(s(0) > 0.0 && s(m - 1) > tol::sigma_min * s(0), ErrorKind::OrthogonalizationFailure,
            "WᵀW is numerically singular (isotropic columns)");
    GeneralEVD evd;
    try {
        evd = general_evd(g);
    } catch (const Error& e) {
        fail(ErrorKind::OrthogonalizationFailure, std::string("WᵀW is not diagonalizable: ") + e.what());
    }
    ComplexVector inv_root(m);
    for (Eigen::Index k = 0; k < m; ++k) inv_root(k) = 1.0 / std::sqrt(evd.lambda(k));
    const ComplexMatrix g_inv_sqrt = evd.W * inv_root.asDiagonal() * evd.W.partialPivLu().inverse();
    ComplexMatrix v = w * g_inv_sqrt;
    const double defect = (v.transpose() * v - ComplexMatrix::Identity(m, m)).norm();
    require(defect <= 1e-8 * static_cast<double>(m), ErrorKind::OrthogonalizationFailure,
            "orthogonalization lost accuracy (‖VᵀV − I‖ = " + std::to_string(defect) + ")");
    return v;
}

} // namespace nujd
