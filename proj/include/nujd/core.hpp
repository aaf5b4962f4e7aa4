#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nujd/errors.hpp"

namespace nujd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Library-wide default tolerances.
namespace tol {
inline constexpr double sym = 1e-8;        ///< relative symmetry / Hermitian-ness
inline constexpr double real = 1e-8;       ///< relative imaginary part allowed in Hermitian spectra
inline constexpr double pattern = 1e-6;    ///< GmElement off-pattern entries, relative to row max
inline constexpr double kappa_max = 1e8;   ///< condition number ceiling
inline constexpr double sigma_min = 1e-12; ///< relative singular value floor
inline constexpr double rho = 1e-10;       ///< exact-arithmetic equality in the predicates
inline constexpr double margin = 1e-3;     ///< default margin for estimated spectra
} // namespace tol

inline constexpr double eps = std::numeric_limits<double>::epsilon();

enum class CongruenceKind { Hermitian, Transpose };

constexpr std::string_view to_string(CongruenceKind k) noexcept {
    return k == CongruenceKind::Hermitian ? "hermitian" : "transpose";
}

inline CongruenceKind parse_kind(std::string_view s) {
    if (s == "hermitian") return CongruenceKind::Hermitian;
    if (s == "transpose") return CongruenceKind::Transpose;
    fail(ErrorKind::Parse, "unknown congruence kind '" + std::string(s) + "'");
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(std::real(m(i, j))) || !std::isfinite(std::imag(m(i, j)))) return false;
    return true;
}

inline void require_finite(const ComplexMatrix& m, const std::string& what) {
    require(all_finite(m), ErrorKind::NonFinite, what + " contains NaN or Inf");
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
    require(m.rows() == m.cols(), ErrorKind::DimensionMismatch,
            what + " must be square, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

/// The (·)^† partner of a congruence: X^H for Hermitian kind, Xᵀ for transpose kind.
inline ComplexMatrix dagger(const ComplexMatrix& x, CongruenceKind kind) {
    return kind == CongruenceKind::Hermitian ? ComplexMatrix(x.adjoint()) : ComplexMatrix(x.transpose());
}

/// Relative distance of C from its symmetry class.
inline double symmetry_defect(const ComplexMatrix& c, CongruenceKind kind) {
    const double n = c.norm();
    if (n == 0.0) return 0.0;
    return (c - dagger(c, kind)).norm() / n;
}

inline ComplexMatrix symmetrize(const ComplexMatrix& c, CongruenceKind kind) {
    return (c + dagger(c, kind)) / 2.0;
}

/// Square matrix tagged with the congruence it transforms under.
class TaggedMatrix {
public:
    TaggedMatrix(ComplexMatrix matrix, CongruenceKind kind, double tolerance = tol::sym)
        : matrix_(std::move(matrix)), kind_(kind) {
        require_square(matrix_, "tagged matrix");
        require_finite(matrix_, "tagged matrix");
        const double d = symmetry_defect(matrix_, kind_);
        require(d <= tolerance, ErrorKind::NotSymmetric,
                std::string(to_string(kind_)) + " matrix violates its symmetry class (relative defect " +
                    std::to_string(d) + ")");
    }

    /// Projects onto the symmetry class first, so any finite square input is accepted.
    static TaggedMatrix symmetrized(const ComplexMatrix& matrix, CongruenceKind kind) {
        require_square(matrix, "tagged matrix");
        return TaggedMatrix(symmetrize(matrix, kind), kind);
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    CongruenceKind kind() const noexcept { return kind_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
    CongruenceKind kind_;
};

class TaggedMatrixSet {
public:
    explicit TaggedMatrixSet(std::vector<TaggedMatrix> items) : items_(std::move(items)) {
        require(!items_.empty(), ErrorKind::InvalidArgument, "matrix set must not be empty");
        dim_ = items_.front().dim();
        for (const auto& t : items_)
            require(t.dim() == dim_, ErrorKind::DimensionMismatch, "all matrices in a set must share one size");
    }

    const std::vector<TaggedMatrix>& items() const noexcept { return items_; }
    Eigen::Index dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return items_.size(); }
    const TaggedMatrix& operator[](std::size_t i) const { return items_.at(i); }

    std::size_t count(CongruenceKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(items_.begin(), items_.end(), [&](const TaggedMatrix& t) { return t.kind() == kind; }));
    }

    std::vector<TaggedMatrix> of_kind(CongruenceKind kind) const {
        std::vector<TaggedMatrix> out;
        for (const auto& t : items_)
            if (t.kind() == kind) out.push_back(t);
        return out;
    }

private:
    std::vector<TaggedMatrix> items_;
    Eigen::Index dim_ = 0;
};

/// n diagonal spectra of one congruence kind. Stored n×m: row i is diag(Ω_i),
/// column k is the position vector z_k.
class DiagonalStack {
public:
    DiagonalStack(Eigen::Index m, CongruenceKind kind) : data_(0, m), kind_(kind) {
        require(m >= 1, ErrorKind::InvalidArgument, "stack dimension must be positive");
    }

    DiagonalStack(Eigen::Index m, CongruenceKind kind, const std::vector<ComplexVector>& spectra)
        : DiagonalStack(m, kind) {
        data_.resize(static_cast<Eigen::Index>(spectra.size()), m);
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            require(spectra[i].size() == m, ErrorKind::DimensionMismatch,
                    "spectrum " + std::to_string(i) + " has length " + std::to_string(spectra[i].size()) +
                        ", expected " + std::to_string(m));
            data_.row(static_cast<Eigen::Index>(i)) = spectra[i].transpose();
        }
        validate();
    }

    /// From an n×m matrix whose rows are the spectra.
    DiagonalStack(const ComplexMatrix& rows, CongruenceKind kind) : data_(rows), kind_(kind) {
        require(rows.cols() >= 1, ErrorKind::InvalidArgument, "stack dimension must be positive");
        validate();
    }

    Eigen::Index dim() const noexcept { return data_.cols(); }
    Eigen::Index size() const noexcept { return data_.rows(); }
    bool empty() const noexcept { return data_.rows() == 0; }
    CongruenceKind kind() const noexcept { return kind_; }
    const ComplexMatrix& data() const noexcept { return data_; }
    ComplexVector position(Eigen::Index k) const { return data_.col(k); }
    ComplexVector spectrum(Eigen::Index i) const { return data_.row(i).transpose(); }

    /// Diagonal matrices Ω_i, tagged, i.e. the set reconstructed with A = I.
    std::vector<TaggedMatrix> matrices() const {
        std::vector<TaggedMatrix> out;
        for (Eigen::Index i = 0; i < size(); ++i)
            out.emplace_back(ComplexMatrix(spectrum(i).asDiagonal()), kind_);
        return out;
    }

private:
    void validate() {
        require_finite(data_, "spectra");
        if (data_.rows() == 0) return;
        const double mx = data_.cwiseAbs().maxCoeff();
        require(mx > 0.0, ErrorKind::InvalidArgument, "a non-empty stack needs at least one nonzero entry");
        if (kind_ == CongruenceKind::Hermitian) {
            const double im = data_.imag().cwiseAbs().maxCoeff();
            require(im <= tol::real * mx, ErrorKind::InvalidArgument,
                    "Hermitian-kind spectra must be real; split complex spectra into Hermitian and skew parts first");
            data_ = data_.real().cast<Complex>();
        }
    }

    ComplexMatrix data_;
    CongruenceKind kind_;
};

inline RealVector singular_values(const ComplexMatrix& x) {
    return Eigen::JacobiSVD<ComplexMatrix>(x).singularValues();
}

inline double condition_number(const ComplexMatrix& x) {
    const RealVector s = singular_values(x);
    if (s.size() == 0) return 1.0;
    const double lo = s(s.size() - 1);
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / lo;
}

/// Invertible matrix; construction certifies σ_min > m·ε·σ_max.
class GLElement {
public:
    explicit GLElement(ComplexMatrix x) : x_(std::move(x)) {
        require_square(x_, "GL element");
        require_finite(x_, "GL element");
        const RealVector s = singular_values(x_);
        const double m = static_cast<double>(x_.rows());
        require(s.size() > 0 && s(s.size() - 1) > m * eps * s(0), ErrorKind::SingularMatrix,
                "matrix is not numerically invertible");
        cond_ = s(0) / s(s.size() - 1);
    }

    const ComplexMatrix& matrix() const noexcept { return x_; }
    operator const ComplexMatrix&() const noexcept { return x_; }
    Eigen::Index dim() const noexcept { return x_.rows(); }
    double condition() const noexcept { return cond_; }

private:
    ComplexMatrix x_;
    double cond_ = 1.0;
};

/// Diagonal times permutation. `permutation()[i]` is the column holding row i's entry.
class GmElement {
public:
    explicit GmElement(ComplexMatrix e, double tolerance = tol::pattern) : e_(std::move(e)) {
        require_square(e_, "G(m) element");
        const Eigen::Index m = e_.rows();
        perm_.assign(static_cast<std::size_t>(m), -1);
        std::vector<bool> used(static_cast<std::size_t>(m), false);
        for (Eigen::Index i = 0; i < m; ++i) {
            Eigen::Index jmax = 0;
            const double rmax = e_.row(i).cwiseAbs().maxCoeff(&jmax);
            require(rmax > 0.0, ErrorKind::InvalidArgument, "G(m) element has a zero row");
            for (Eigen::Index j = 0; j < m; ++j)
                require(j == jmax || std::abs(e_(i, j)) <= tolerance * rmax, ErrorKind::InvalidArgument,
                        "matrix is not diagonal times permutation");
            require(!used[static_cast<std::size_t>(jmax)], ErrorKind::InvalidArgument,
                    "matrix is not diagonal times permutation");
            used[static_cast<std::size_t>(jmax)] = true;
            perm_[static_cast<std::size_t>(i)] = static_cast<int>(jmax);
        }
    }

    const ComplexMatrix& matrix() const noexcept { return e_; }
    const std::vector<int>& permutation() const noexcept { return perm_; }

private:
    ComplexMatrix e_;
    std::vector<int> perm_;
};

/// Minimum-cost assignment on a square cost matrix (Hungarian method, O(m³)).
/// Returns assignment[i] = column of row i.
inline std::vector<int> solve_assignment(const RealMatrix& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) assignment[p[j] - 1] = j - 1;
    return assignment;
}

struct PatternFit {
    double distance = 0.0;        ///< RMS over rows of the relative off-pattern row mass
    std::vector<int> permutation; ///< best pattern, row i -> column
};

/// Distance of E from G(m): rows are normalized, the best permutation pattern is
/// found by assignment, and the off-pattern energy is averaged over rows.
/// Scale invariant per row; 0 exactly on G(m), at most 1.
inline PatternFit pattern_distance(const ComplexMatrix& e) {
    require_square(e, "pattern matrix");
    const Eigen::Index m = e.rows();
    RealMatrix share(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double n2 = e.row(i).squaredNorm();
        require(n2 > 0.0, ErrorKind::InvalidArgument, "matrix has a zero row");
        share.row(i) = e.row(i).cwiseAbs2() / n2;
    }
    PatternFit fit;
    fit.permutation = solve_assignment(RealMatrix::Ones(m, m) - share);
    double off = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != fit.permutation[static_cast<std::size_t>(i)]) off += share(i, j);
    fit.distance = std::sqrt(std::max(off, 0.0) / static_cast<double>(m));
    return fit;
}

struct Equivalence {
    bool equivalent = false;
    double distance = 0.0;
    std::optional<GmElement> factor; ///< E ∈ G(m) with X ≈ Y·E, when equivalent
};

/// Tests X = Y·E for some E ∈ G(m), with E = Y⁻¹X from a pivoted LU solve.
inline Equivalence is_essentially_equivalent(const ComplexMatrix& x, const ComplexMatrix& y,
                                             double tolerance = tol::pattern) {
    require_square(x, "X");
    require_square(y, "Y");
    require(x.rows() == y.rows(), ErrorKind::DimensionMismatch, "X and Y must have the same size");
    require(tolerance > 0.0 && tolerance < 1.0, ErrorKind::InvalidArgument, "tolerance must lie in (0, 1)");
    const RealVector s = singular_values(y);
    require(s(s.size() - 1) > tol::sigma_min * s(0), ErrorKind::SingularMatrix, "Y is singular");
    const ComplexMatrix e = y.partialPivLu().solve(x);
    Equivalence out;
    if (!all_finite(e) || e.rowwise().squaredNorm().minCoeff() == 0.0) {
        out.distance = 1.0;
        return out;
    }
    const PatternFit fit = pattern_distance(e);
    out.distance = fit.distance;
    out.equivalent = fit.distance <= tolerance;
    if (out.equivalent) {
        ComplexMatrix g = ComplexMatrix::Zero(e.rows(), e.cols());
        for (Eigen::Index i = 0; i < e.rows(); ++i) {
            const auto j = fit.permutation[static_cast<std::size_t>(i)];
            g(i, j) = e(i, j);
        }
        out.factor.emplace(std::move(g));
    }
    return out;
}

/// (C + C^H)/2 and (C − C^H)/(2i); both Hermitian, C = first + i·second.
inline std::pair<ComplexMatrix, ComplexMatrix> hermitian_skew_split(const ComplexMatrix& c) {
    require_square(c, "split input");
    const ComplexMatrix ch = c.adjoint();
    ComplexMatrix h = (c + ch) / 2.0;
    ComplexMatrix s = (c - ch) / Complex(0.0, 2.0);
    // Force exact Hermitian symmetry of the rounded results.
    h = (h + ComplexMatrix(h.adjoint())) / 2.0;
    s = (s + ComplexMatrix(s.adjoint())) / 2.0;
    return {h, s};
}

/// X^H C X (Hermitian kind) or X^H C conj(X) (transpose kind), without symmetrization.
inline ComplexMatrix congruence(const ComplexMatrix& x, const ComplexMatrix& c, CongruenceKind kind) {
    return kind == CongruenceKind::Hermitian ? ComplexMatrix(x.adjoint() * c * x)
                                             : ComplexMatrix(x.adjoint() * c * x.conjugate());
}

inline TaggedMatrix apply_congruence(const ComplexMatrix& x, const TaggedMatrix& c) {
    require_square(x, "X");
    require(x.rows() == c.dim(), ErrorKind::DimensionMismatch,
            "X is " + std::to_string(x.rows()) + "x" + std::to_string(x.rows()) + " but C is " +
                std::to_string(c.dim()) + "x" + std::to_string(c.dim()));
    return TaggedMatrix::symmetrized(congruence(x, c.matrix(), c.kind()), c.kind());
}

inline double offdiag_norm2(const ComplexMatrix& c) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (i != j) s += std::norm(c(i, j));
    return s;
}

inline double offdiag_residual(const std::vector<TaggedMatrix>& set, const ComplexMatrix& x) {
    require(!set.empty(), ErrorKind::InvalidArgument, "residual of an empty set");
    double num = 0.0, den = 0.0;
    for (const auto& c : set) {
        require(x.rows() == c.dim() && x.cols() == c.dim(), ErrorKind::DimensionMismatch,
                "X does not match the matrix size");
        num += offdiag_norm2(congruence(x, c.matrix(), c.kind()));
        den += c.matrix().squaredNorm();
    }
    if (den == 0.0) return 0.0;
    return std::sqrt(num / den);
}

inline double offdiag_residual(const TaggedMatrixSet& set, const ComplexMatrix& x) {
    return offdiag_residual(set.items(), x);
}

} // namespace nujd
