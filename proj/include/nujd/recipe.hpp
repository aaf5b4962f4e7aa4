#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nujd/statistics.hpp"

namespace nujd {

enum class StatisticKind { Covariance, PseudoCovariance, Autocorrelation, PseudoAutocorrelation, WindowCovariance, Cumulant };

/// Which part of a statistic that is not Hermitian by itself enters the matrix set.
enum class Part { Both, Hermitian, Skew };

constexpr std::string_view to_string(StatisticKind k) noexcept {
    switch (k) {
    case StatisticKind::Covariance: return "covariance";
    case StatisticKind::PseudoCovariance: return "pseudo_covariance";
    case StatisticKind::Autocorrelation: return "autocorrelation";
    case StatisticKind::PseudoAutocorrelation: return "pseudo_autocorrelation";
    case StatisticKind::WindowCovariance: return "window_covariance";
    case StatisticKind::Cumulant: return "cumulant";
    }
    return "?";
}

constexpr std::string_view to_string(Part p) noexcept {
    switch (p) {
    case Part::Both: return "both";
    case Part::Hermitian: return "hermitian";
    case Part::Skew: return "skew";
    }
    return "?";
}

inline StatisticKind parse_statistic(std::string_view s) {
    for (auto k : {StatisticKind::Covariance, StatisticKind::PseudoCovariance, StatisticKind::Autocorrelation,
                   StatisticKind::PseudoAutocorrelation, StatisticKind::WindowCovariance, StatisticKind::Cumulant})
        if (to_string(k) == s) return k;
    fail(ErrorKind::Parse, "unknown statistic '" + std::string(s) + "'");
}

inline Part parse_part(std::string_view s) {
    for (auto p : {Part::Both, Part::Hermitian, Part::Skew})
        if (to_string(p) == s) return p;
    fail(ErrorKind::Parse, "unknown part '" + std::string(s) + "'");
}

/// One entry of an estimation recipe. Indices are 0-based.
struct StatisticRecipe {
    StatisticKind kind = StatisticKind::Covariance;
    Eigen::Index lag = 0;
    Window window;
    std::string pattern = "0000";
    std::pair<int, int> axes{0, 1};
    std::vector<Eigen::Index> fixed;
    Part part = Part::Both;

    static StatisticRecipe covariance() { return {}; }
    static StatisticRecipe pseudo_covariance() {
        StatisticRecipe r;
        r.kind = StatisticKind::PseudoCovariance;
        return r;
    }
    static StatisticRecipe autocorrelation(Eigen::Index lag, Part part = Part::Both) {
        StatisticRecipe r;
        r.kind = StatisticKind::Autocorrelation;
        r.lag = lag;
        r.part = part;
        return r;
    }
    static StatisticRecipe pseudo_autocorrelation(Eigen::Index lag) {
        StatisticRecipe r;
        r.kind = StatisticKind::PseudoAutocorrelation;
        r.lag = lag;
        return r;
    }
    static StatisticRecipe window_covariance(Eigen::Index start, Eigen::Index length) {
        StatisticRecipe r;
        r.kind = StatisticKind::WindowCovariance;
        r.window = {start, length};
        return r;
    }
    static StatisticRecipe cumulant(std::string pattern, std::pair<int, int> axes, std::vector<Eigen::Index> fixed,
                                    Part part = Part::Both) {
        StatisticRecipe r;
        r.kind = StatisticKind::Cumulant;
        r.pattern = std::move(pattern);
        r.axes = axes;
        r.fixed = std::move(fixed);
        r.part = part;
        return r;
    }

    /// Congruence kind of the estimated statistic.
    CongruenceKind congruence() const {
        switch (kind) {
        case StatisticKind::PseudoCovariance:
        case StatisticKind::PseudoAutocorrelation: return CongruenceKind::Transpose;
        case StatisticKind::Cumulant: return slice_kind(ConjugationPattern::parse(pattern), axes.first, axes.second);
        default: return CongruenceKind::Hermitian;
        }
    }

    /// Whether the raw statistic may be non-Hermitian and is split into parts.
    bool splits() const {
        return (kind == StatisticKind::Autocorrelation && lag > 0) ||
               (kind == StatisticKind::Cumulant && congruence() == CongruenceKind::Hermitian);
    }

    /// Kinds of the matrices this recipe contributes, in output order.
    std::vector<CongruenceKind> output_kinds() const {
        if (!splits()) return {congruence()};
        if (part == Part::Both) return {CongruenceKind::Hermitian, CongruenceKind::Hermitian};
        return {CongruenceKind::Hermitian};
    }
};

namespace detail {

inline std::vector<TaggedMatrix> select_parts(const ComplexMatrix& h, const ComplexMatrix& s, Part part) {
    std::vector<TaggedMatrix> out;
    if (part != Part::Skew) out.emplace_back(h, CongruenceKind::Hermitian);
    if (part != Part::Hermitian) out.emplace_back(s, CongruenceKind::Hermitian);
    return out;
}

} // namespace detail

/// Raw (unsplit, canonically arranged) estimate of a recipe entry.
inline ComplexMatrix estimate_raw(const SignalBlock& w, const StatisticRecipe& r) {
    switch (r.kind) {
    case StatisticKind::Covariance: return covariance(w).matrix();
    case StatisticKind::PseudoCovariance: return pseudo_covariance(w).matrix();
    case StatisticKind::Autocorrelation: return autocorrelation(w, r.lag).raw;
    case StatisticKind::PseudoAutocorrelation: return pseudo_autocorrelation(w, r.lag).matrix();
    case StatisticKind::WindowCovariance: return windowed_covariances(w, {r.window}).front().matrix();
    case StatisticKind::Cumulant:
        return cumulant_slice(w, ConjugationPattern::parse(r.pattern), r.fixed, r.axes).matrix;
    }
    fail(ErrorKind::InvalidArgument, "unknown statistic");
}

/// Tagged matrices a recipe entry contributes to a matrix set.
inline std::vector<TaggedMatrix> estimate(const SignalBlock& w, const StatisticRecipe& r) {
    const ComplexMatrix raw = estimate_raw(w, r);
    if (!r.splits()) {
        if (r.kind == StatisticKind::Autocorrelation) return {TaggedMatrix::symmetrized(raw, CongruenceKind::Hermitian)};
        return {TaggedMatrix::symmetrized(raw, r.congruence())};
    }
    auto [h, s] = hermitian_skew_split(raw);
    return detail::select_parts(h, s, r.part);
}

inline std::vector<TaggedMatrix> estimate(const SignalBlock& w, const std::vector<StatisticRecipe>& recipe) {
    std::vector<TaggedMatrix> out;
    for (const auto& r : recipe)
        for (auto& t : estimate(w, r)) out.push_back(std::move(t));
    return out;
}

} // namespace nujd
