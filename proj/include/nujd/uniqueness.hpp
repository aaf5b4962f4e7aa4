#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "nujd/core.hpp"

namespace nujd {

enum class Verdict { Unique, NotUnique };

enum class Rule { Thm1a, Thm1b, Thm2, Thm3, IdentifiabilityI, IdentifiabilityII, IdentifiabilityIII };

constexpr std::string_view to_string(Verdict v) noexcept { return v == Verdict::Unique ? "Unique" : "NotUnique"; }

constexpr std::string_view to_string(Rule r) noexcept {
    switch (r) {
    case Rule::Thm1a: return "Thm1a";
    case Rule::Thm1b: return "Thm1b";
    case Rule::Thm2: return "Thm2";
    case Rule::Thm3: return "Thm3";
    case Rule::IdentifiabilityI: return "Identifiability-i";
    case Rule::IdentifiabilityII: return "Identifiability-ii";
    case Rule::IdentifiabilityIII: return "Identifiability-iii";
    }
    return "?";
}

inline Rule parse_rule(std::string_view s) {
    for (Rule r : {Rule::Thm1a, Rule::Thm1b, Rule::Thm2, Rule::Thm3, Rule::IdentifiabilityI, Rule::IdentifiabilityII,
                   Rule::IdentifiabilityIII})
        if (to_string(r) == s) return r;
    fail(ErrorKind::Parse, "unknown rule '" + std::string(s) + "'");
}

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;

struct UniquenessReport {
    Verdict verdict = Verdict::Unique;
    Rule rule = Rule::Thm1a;
    Eigen::Index m = 0;
    std::optional<double> rho_transpose;
    std::optional<double> rho_hermitian;
    std::optional<IndexPair> violating_pair; ///< 0-based (k, l), k < l
    std::optional<GLElement> witness;

    bool unique() const noexcept { return verdict == Verdict::Unique; }
};

/// c(v, w) = v^H w / (‖v‖‖w‖), and 1 when either vector is zero.
inline Complex complex_cosine(const ComplexVector& v, const ComplexVector& w) {
    require(v.size() == w.size(), ErrorKind::DimensionMismatch, "cosine of vectors with different lengths");
    const double nv = v.norm(), nw = w.norm();
    if (nv == 0.0 || nw == 0.0) return {1.0, 0.0};
    return v.dot(w) / (nv * nw); // Eigen's dot conjugates the left operand
}

/// Relative distance of w from span{v}, computed by projection so that it stays
/// accurate when the vectors are almost parallel. 0 when either vector is zero.
inline double collinearity_defect(const ComplexVector& v, const ComplexVector& w) {
    const double nv = v.norm(), nw = w.norm();
    if (nv == 0.0 || nw == 0.0) return 0.0;
    const ComplexVector r = w - (v.dot(w) / (nv * nv)) * v;
    return r.norm() / nw;
}

/// ρ = max_{k<l} |c(z_k, z_l)| over the position vectors of the stack.
inline double collinearity(const DiagonalStack& z) {
    require(z.dim() >= 2, ErrorKind::InvalidArgument, "collinearity needs at least two positions");
    require(!z.empty(), ErrorKind::InvalidArgument, "collinearity of an empty stack");
    double rho = 0.0;
    for (Eigen::Index k = 0; k < z.dim(); ++k)
        for (Eigen::Index l = k + 1; l < z.dim(); ++l)
            rho = std::max(rho, std::abs(complex_cosine(z.position(k), z.position(l))));
    return std::min(rho, 1.0);
}

namespace detail {

inline bool pair_collinear(const DiagonalStack& z, Eigen::Index k, Eigen::Index l, double tolerance) {
    if (z.empty()) return true;
    return 1.0 - std::abs(complex_cosine(z.position(k), z.position(l))) <= tolerance;
}

inline double pair_defect(const DiagonalStack& z, Eigen::Index k, Eigen::Index l) {
    if (z.empty()) return 0.0;
    return collinearity_defect(z.position(k), z.position(l));
}

inline bool nearly_equal(double x, double y, double tolerance) {
    return std::abs(x - y) <= tolerance * std::max(x, y);
}

/// ‖ω_k‖‖ω′_l‖ against ‖ω_l‖‖ω′_k‖: the norm-ratio condition shared by the
/// mixed-kind theorems. Vacuous when a stack is empty.
inline bool ratio_condition(const DiagonalStack& sym, const DiagonalStack& herm, Eigen::Index k, Eigen::Index l,
                            double tolerance) {
    if (sym.empty() || herm.empty()) return true;
    const double a = sym.position(k).norm() * herm.position(l).norm();
    const double b = sym.position(l).norm() * herm.position(k).norm();
    return nearly_equal(a, b, tolerance);
}

inline double ratio_defect(const DiagonalStack& sym, const DiagonalStack& herm, Eigen::Index k, Eigen::Index l) {
    if (sym.empty() || herm.empty()) return 0.0;
    const double a = sym.position(k).norm() * herm.position(l).norm();
    const double b = sym.position(l).norm() * herm.position(k).norm();
    const double mx = std::max(a, b);
    return mx == 0.0 ? 0.0 : std::abs(a - b) / mx;
}

/// Null vector of the n×2 constraint matrix at positions (k, l), or nothing when
/// the stack is empty or vanishes there (no constraint).
inline std::optional<Eigen::Vector2cd> pair_kernel(const DiagonalStack& z, Eigen::Index k, Eigen::Index l) {
    if (z.empty()) return std::nullopt;
    ComplexMatrix n(z.size(), 2);
    n.col(0) = z.position(k);
    n.col(1) = z.position(l);
    if (z.kind() == CongruenceKind::Transpose) n = n.conjugate().eval();
    if (n.norm() == 0.0) return std::nullopt;
    Eigen::JacobiSVD<ComplexMatrix> svd(n, Eigen::ComputeFullV);
    return Eigen::Vector2cd(svd.matrixV().col(1));
}

/// Builds the 2×2 block of a non-monomial common diagonalizer from the row
/// products p_j = X_jk·X_jl (transpose congruence) and q_j = conj(X_jk)·X_jl
/// (Hermitian congruence); a row realizes both iff |p_j| = |q_j|.
inline ComplexMatrix witness_block(const Eigen::Vector2cd& p, const Eigen::Vector2cd& q, double spread) {
    ComplexMatrix b(2, 2);
    const double scale = std::max(p.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff());
    for (int j = 0; j < 2; ++j) {
        const double r = (std::abs(p(j)) + std::abs(q(j))) / 2.0;
        if (r <= 1e-13 * scale) {
            b(j, 0) = 1.0;
            b(j, 1) = 0.0;
            continue;
        }
        const double ap = std::arg(p(j)), aq = std::arg(q(j));
        const double u = j == 1 ? spread : 1.0;
        b(j, 0) = std::sqrt(r) * u * std::polar(1.0, (ap - aq) / 2.0);
        b(j, 1) = std::sqrt(r) / u * std::polar(1.0, (ap + aq) / 2.0);
    }
    return b;
}

inline ComplexMatrix build_witness(const DiagonalStack& sym, const DiagonalStack& herm, Eigen::Index k,
                                   Eigen::Index l) {
    const Eigen::Index m = sym.dim();
    auto p = pair_kernel(sym, k, l);
    auto q = pair_kernel(herm, k, l);
    // An unconstrained side copies the magnitudes of the other one with a sign
    // flip on the second row, which keeps the two rows independent.
    if (!p && !q) {
        p = Eigen::Vector2cd(1.0, -1.0);
        q = p;
    } else if (!p) {
        p = Eigen::Vector2cd(std::abs((*q)(0)), -std::abs((*q)(1)));
    } else if (!q) {
        q = Eigen::Vector2cd(std::abs((*p)(0)), -std::abs((*p)(1)));
    }
    ComplexMatrix b = witness_block(*p, *q, 1.0);
    if (std::abs(b.determinant()) <= 1e-8 * b.squaredNorm()) b = witness_block(*p, *q, 2.0);

    ComplexMatrix x = ComplexMatrix::Identity(m, m);
    x(k, k) = b(0, 0);
    x(k, l) = b(0, 1);
    x(l, k) = b(1, 0);
    x(l, l) = b(1, 1);
    return x;
}

/// Verifies a freshly built witness; a failing certificate is an internal error.
inline GLElement checked_witness(ComplexMatrix x, const DiagonalStack& sym, const DiagonalStack& herm,
                                 double defect) {
    std::vector<TaggedMatrix> set = sym.matrices();
    for (auto& t : herm.matrices()) set.push_back(t);
    const double residual = offdiag_residual(set, x);
    const double bound = 1e-10 + 10.0 * defect;
    require(residual <= bound, ErrorKind::InternalConsistency,
            "witness residual " + std::to_string(residual) + " exceeds " + std::to_string(bound));
    const double dist = pattern_distance(x).distance;
    require(dist > tol::pattern, ErrorKind::InternalConsistency, "witness lies in G(m)");
    return GLElement(std::move(x));
}

inline DiagonalStack single_stack(const ComplexVector& omega, CongruenceKind kind) {
    if (omega.size() > 0 && omega.cwiseAbs().maxCoeff() == 0.0) return DiagonalStack(omega.size(), kind);
    return DiagonalStack(omega.size(), kind, {omega});
}

inline void check_pair(Eigen::Index m, Eigen::Index k, Eigen::Index l) {
    require(k >= 0 && l >= 0 && k < m && l < m && k != l, ErrorKind::InvalidArgument,
            "pair (" + std::to_string(k) + ", " + std::to_string(l) + ") is not a valid pair of distinct positions");
}

/// Finds the pair violating identifiability with the smallest numerical defect.
inline std::optional<IndexPair> find_violation(const DiagonalStack& sym, const DiagonalStack& herm,
                                               double tolerance, double* defect_out) {
    std::optional<IndexPair> best;
    double best_defect = 0.0;
    const Eigen::Index m = sym.dim();
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = k + 1; l < m; ++l) {
            if (!pair_collinear(sym, k, l, tolerance) || !pair_collinear(herm, k, l, tolerance) ||
                !ratio_condition(sym, herm, k, l, tolerance))
                continue;
            const double d = pair_defect(sym, k, l) + pair_defect(herm, k, l) + ratio_defect(sym, herm, k, l);
            if (!best || d < best_defect) {
                best = IndexPair{k, l};
                best_defect = d;
            }
        }
    }
    if (defect_out) *defect_out = best_defect;
    return best;
}

inline std::optional<double> rho_or_empty(const DiagonalStack& z) {
    if (z.empty()) return std::nullopt;
    return collinearity(z);
}

inline UniquenessReport mixed_report(const DiagonalStack& sym, const DiagonalStack& herm, double tolerance,
                                     Rule rule) {
    UniquenessReport rep;
    rep.m = sym.dim();
    rep.rule = rule;
    rep.rho_transpose = rho_or_empty(sym);
    rep.rho_hermitian = rho_or_empty(herm);
    double defect = 0.0;
    if (auto pair = find_violation(sym, herm, tolerance, &defect)) {
        rep.verdict = Verdict::NotUnique;
        rep.violating_pair = pair;
        rep.witness = checked_witness(build_witness(sym, herm, pair->first, pair->second), sym, herm, defect);
    }
    return rep;
}

} // namespace detail

/// Pure-kind criterion: unique iff ρ < 1 (transpose kind: Thm1a, Hermitian kind: Thm1b).
inline UniquenessReport unique_thm1(const DiagonalStack& stack, double tolerance = tol::rho) {
    require(!stack.empty(), ErrorKind::InvalidArgument, "stack must not be empty");
    const bool herm = stack.kind() == CongruenceKind::Hermitian;
    const DiagonalStack none(stack.dim(), herm ? CongruenceKind::Transpose : CongruenceKind::Hermitian);
    const DiagonalStack& sym = herm ? none : stack;
    const DiagonalStack& her = herm ? stack : none;
    collinearity(stack); // dimension checks
    return detail::mixed_report(sym, her, tolerance, herm ? Rule::Thm1b : Rule::Thm1a);
}

/// One transpose-kind spectrum ω₁ and one Hermitian-kind real spectrum ω₂:
/// unique iff |ω₁ₖ||ω₂ₗ| ≠ |ω₁ₗ||ω₂ₖ| for every pair.
inline UniquenessReport unique_thm2(const ComplexVector& omega1, const RealVector& omega2,
                                    double tolerance = tol::rho) {
    require(omega1.size() == omega2.size(), ErrorKind::DimensionMismatch, "spectra lengths differ");
    require(omega1.size() >= 2, ErrorKind::InvalidArgument, "need at least two positions");
    const auto sym = detail::single_stack(omega1, CongruenceKind::Transpose);
    const auto herm = detail::single_stack(omega2.cast<Complex>(), CongruenceKind::Hermitian);
    return detail::mixed_report(sym, herm, tolerance, Rule::Thm2);
}

/// Both stacks fully collinear; unique iff no pair is collinear in both with
/// matching norm ratios.
inline UniquenessReport unique_thm3(const DiagonalStack& sym, const DiagonalStack& herm,
                                    double tolerance = tol::rho) {
    require(sym.kind() == CongruenceKind::Transpose && herm.kind() == CongruenceKind::Hermitian,
            ErrorKind::InvalidArgument, "expected a transpose-kind and a Hermitian-kind stack");
    require(sym.dim() == herm.dim(), ErrorKind::DimensionMismatch, "stacks have different dimensions");
    require(sym.dim() >= 2, ErrorKind::InvalidArgument, "need at least two positions");
    const auto rs = detail::rho_or_empty(sym), rh = detail::rho_or_empty(herm);
    require(rs.value_or(1.0) >= 1.0 - tolerance && rh.value_or(1.0) >= 1.0 - tolerance,
            ErrorKind::InvalidPrecondition,
            "both collinearity measures must equal 1; use identifiability_master for the general case");
    return detail::mixed_report(sym, herm, tolerance, Rule::Thm3);
}

/// The unified criterion: unique iff ρ(sym) < 1, or ρ(herm) < 1, or no pair is
/// collinear in both stacks with matching norm ratios. Empty stacks count as ρ = 1.
inline UniquenessReport identifiability_master(const DiagonalStack& sym, const DiagonalStack& herm,
                                               double tolerance = tol::rho) {
    require(sym.kind() == CongruenceKind::Transpose && herm.kind() == CongruenceKind::Hermitian,
            ErrorKind::InvalidArgument, "expected a transpose-kind and a Hermitian-kind stack");
    require(sym.dim() == herm.dim(), ErrorKind::DimensionMismatch, "stacks have different dimensions");
    require(!(sym.empty() && herm.empty()), ErrorKind::InvalidArgument, "both stacks are empty");
    require(sym.dim() >= 2, ErrorKind::InvalidArgument, "need at least two positions");
    UniquenessReport rep;
    rep.m = sym.dim();
    rep.rho_transpose = detail::rho_or_empty(sym);
    rep.rho_hermitian = detail::rho_or_empty(herm);
    if (rep.rho_transpose.value_or(1.0) < 1.0 - tolerance) {
        rep.rule = Rule::IdentifiabilityI;
        return rep;
    }
    if (rep.rho_hermitian.value_or(1.0) < 1.0 - tolerance) {
        rep.rule = Rule::IdentifiabilityII;
        return rep;
    }
    return detail::mixed_report(sym, herm, tolerance, Rule::IdentifiabilityIII);
}

inline GLElement witness_thm1(const DiagonalStack& stack, Eigen::Index k, Eigen::Index l,
                              double tolerance = tol::rho) {
    require(!stack.empty(), ErrorKind::InvalidArgument, "stack must not be empty");
    detail::check_pair(stack.dim(), k, l);
    require(detail::pair_collinear(stack, k, l, tolerance), ErrorKind::NotCollinear,
            "positions are not collinear; no witness exists");
    const bool herm = stack.kind() == CongruenceKind::Hermitian;
    const DiagonalStack none(stack.dim(), herm ? CongruenceKind::Transpose : CongruenceKind::Hermitian);
    const DiagonalStack& sym = herm ? none : stack;
    const DiagonalStack& her = herm ? stack : none;
    if (k > l) std::swap(k, l);
    return detail::checked_witness(detail::build_witness(sym, her, k, l), sym, her, detail::pair_defect(stack, k, l));
}

inline GLElement witness_thm3(const DiagonalStack& sym, const DiagonalStack& herm, Eigen::Index k, Eigen::Index l,
                              double tolerance = tol::rho) {
    require(sym.kind() == CongruenceKind::Transpose && herm.kind() == CongruenceKind::Hermitian,
            ErrorKind::InvalidArgument, "expected a transpose-kind and a Hermitian-kind stack");
    require(sym.dim() == herm.dim(), ErrorKind::DimensionMismatch, "stacks have different dimensions");
    detail::check_pair(sym.dim(), k, l);
    if (k > l) std::swap(k, l);
    require(detail::pair_collinear(sym, k, l, tolerance) && detail::pair_collinear(herm, k, l, tolerance) &&
                detail::ratio_condition(sym, herm, k, l, tolerance),
            ErrorKind::NotCollinear, "pair does not violate identifiability; no witness exists");
    const double defect =
        detail::pair_defect(sym, k, l) + detail::pair_defect(herm, k, l) + detail::ratio_defect(sym, herm, k, l);
    return detail::checked_witness(detail::build_witness(sym, herm, k, l), sym, herm, defect);
}

inline GLElement witness_thm2(const ComplexVector& omega1, const RealVector& omega2, Eigen::Index k, Eigen::Index l,
                              double tolerance = tol::rho) {
    require(omega1.size() == omega2.size(), ErrorKind::DimensionMismatch, "spectra lengths differ");
    const auto sym = detail::single_stack(omega1, CongruenceKind::Transpose);
    const auto herm = detail::single_stack(omega2.cast<Complex>(), CongruenceKind::Hermitian);
    return witness_thm3(sym, herm, k, l, tolerance);
}

} // namespace nujd
