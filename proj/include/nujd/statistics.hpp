#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nujd/core.hpp"

namespace nujd {

/// m channels of T complex samples, stored row-major so each channel is contiguous.
class SignalBlock {
public:
    using Data = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    explicit SignalBlock(Data data) : data_(std::move(data)) {
        require(data_.rows() >= 1 && data_.cols() >= 1, ErrorKind::InvalidArgument,
                "signal needs at least one channel and one sample");
        require(all_finite(data_), ErrorKind::NonFinite, "signal contains NaN or Inf");
    }

    Eigen::Index channels() const noexcept { return data_.rows(); }
    Eigen::Index samples() const noexcept { return data_.cols(); }
    const Data& data() const noexcept { return data_; }

    std::span<const Complex> channel(Eigen::Index i) const {
        require(i >= 0 && i < channels(), ErrorKind::InvalidArgument, "channel index out of range");
        return {data_.data() + i * data_.cols(), static_cast<std::size_t>(data_.cols())};
    }

    SignalBlock segment(Eigen::Index start, Eigen::Index length) const {
        require(start >= 0 && length >= 1 && start + length <= samples(), ErrorKind::InvalidArgument,
                "segment [" + std::to_string(start) + ", " + std::to_string(start + length) +
                    ") is outside the signal");
        return SignalBlock(data_.middleCols(start, length));
    }

private:
    Data data_;
};

using Warnings = std::vector<std::string>;

namespace detail {

inline SignalBlock::Data centered(const SignalBlock& w) {
    SignalBlock::Data x = w.data();
    const ComplexVector mean = x.rowwise().mean();
    x.colwise() -= mean;
    return x;
}

inline void warn(Warnings* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

} // namespace detail

/// (1/T) Σ_t w(t) w(t)^H after mean removal.
inline TaggedMatrix covariance(const SignalBlock& w, Warnings* warnings = nullptr) {
    if (w.samples() < w.channels())
        detail::warn(warnings, "covariance: T < m, the estimate is rank deficient");
    const auto x = detail::centered(w);
    const ComplexMatrix c = x * x.adjoint() / static_cast<double>(w.samples());
    return TaggedMatrix::symmetrized(c, CongruenceKind::Hermitian);
}

/// (1/T) Σ_t w(t) w(t)ᵀ after mean removal.
inline TaggedMatrix pseudo_covariance(const SignalBlock& w, Warnings* warnings = nullptr) {
    if (w.samples() < w.channels())
        detail::warn(warnings, "pseudo_covariance: T < m, the estimate is rank deficient");
    const auto x = detail::centered(w);
    const ComplexMatrix r = x * x.transpose() / static_cast<double>(w.samples());
    return TaggedMatrix::symmetrized(r, CongruenceKind::Transpose);
}

/// A lagged second-order statistic that is not Hermitian in general, with its
/// Hermitian and skew-Hermitian parts (raw = hermitian_part + i·skew_part).
struct LaggedStatistic {
    ComplexMatrix raw;
    ComplexMatrix hermitian_part;
    ComplexMatrix skew_part;

    std::vector<TaggedMatrix> tagged() const {
        return {TaggedMatrix(hermitian_part, CongruenceKind::Hermitian),
                TaggedMatrix(skew_part, CongruenceKind::Hermitian)};
    }
};

inline void check_lag(const SignalBlock& w, Eigen::Index lag) {
    require(lag >= 0 && lag < w.samples(), ErrorKind::InvalidArgument,
            "lag " + std::to_string(lag) + " outside [0, " + std::to_string(w.samples()) + ")");
}

/// (1/(T−τ)) Σ_t w(t) w(t+τ)^H after mean removal.
inline LaggedStatistic autocorrelation(const SignalBlock& w, Eigen::Index lag) {
    check_lag(w, lag);
    const auto x = detail::centered(w);
    const Eigen::Index n = w.samples() - lag;
    LaggedStatistic out;
    out.raw = x.leftCols(n) * x.middleCols(lag, n).adjoint() / static_cast<double>(n);
    std::tie(out.hermitian_part, out.skew_part) = hermitian_skew_split(out.raw);
    return out;
}

/// (1/(T−τ)) Σ_t w(t) w(t+τ)ᵀ after mean removal, symmetrized.
inline TaggedMatrix pseudo_autocorrelation(const SignalBlock& w, Eigen::Index lag) {
    check_lag(w, lag);
    const auto x = detail::centered(w);
    const Eigen::Index n = w.samples() - lag;
    const ComplexMatrix r = x.leftCols(n) * x.middleCols(lag, n).transpose() / static_cast<double>(n);
    return TaggedMatrix::symmetrized(r, CongruenceKind::Transpose);
}

struct Window {
    Eigen::Index start = 0;
    Eigen::Index length = 0;
};

inline std::vector<TaggedMatrix> windowed_covariances(const SignalBlock& w, const std::vector<Window>& windows) {
    std::vector<TaggedMatrix> out;
    out.reserve(windows.size());
    for (const auto& win : windows) {
        require(win.length >= w.channels(), ErrorKind::InvalidArgument,
                "window length " + std::to_string(win.length) + " is shorter than the channel count");
        out.push_back(covariance(w.segment(win.start, win.length)));
    }
    return out;
}

/// |Ê[s²]| / Ê[|s|²] of a centered channel.
inline double circularity_coefficient(std::span<const Complex> s) {
    require(!s.empty(), ErrorKind::InvalidArgument, "empty channel");
    Complex mean{};
    for (auto v : s) mean += v;
    mean /= static_cast<double>(s.size());
    Complex pseudo{};
    double power = 0.0;
    for (auto v : s) {
        const Complex c = v - mean;
        pseudo += c * c;
        power += std::norm(c);
    }
    require(power > 0.0, ErrorKind::InvalidArgument, "channel has zero power");
    return std::abs(pseudo) / power;
}

/// Conjugation bits ι of a cumulant; bit 1 conjugates that argument.
class ConjugationPattern {
public:
    explicit ConjugationPattern(std::vector<int> bits) : bits_(std::move(bits)) {
        require(bits_.size() >= 2 && bits_.size() <= 6, ErrorKind::InvalidArgument,
                "conjugation pattern length must be between 2 and 6");
        for (int b : bits_) require(b == 0 || b == 1, ErrorKind::InvalidArgument, "pattern bits must be 0 or 1");
    }

    static ConjugationPattern parse(std::string_view s) {
        std::vector<int> bits;
        for (char c : s) {
            require(c == '0' || c == '1', ErrorKind::InvalidArgument,
                    "pattern '" + std::string(s) + "' must consist of 0 and 1");
            bits.push_back(c - '0');
        }
        return ConjugationPattern(std::move(bits));
    }

    int order() const noexcept { return static_cast<int>(bits_.size()); }
    int operator[](std::size_t i) const { return bits_.at(i); }
    const std::vector<int>& bits() const noexcept { return bits_; }

    std::string str() const {
        std::string s;
        for (int b : bits_) s.push_back(static_cast<char>('0' + b));
        return s;
    }

private:
    std::vector<int> bits_;
};

inline constexpr int max_cumulant_order = 6;

/// One set partition of {0..k−1}, as block bitmasks, with its coefficient (−1)^{p−1}(p−1)!.
struct SetPartition {
    std::vector<unsigned> blocks;
    double coefficient = 1.0;
};

/// Set partitions of {0..k−1} with no singleton block. Singleton blocks are
/// first moments, which vanish after centering, so they are dropped.
inline const std::vector<SetPartition>& cumulant_partitions(int k) {
    static const std::array<std::vector<SetPartition>, max_cumulant_order + 1> table = [] {
        std::array<std::vector<SetPartition>, max_cumulant_order + 1> t;
        for (int n = 1; n <= max_cumulant_order; ++n) {
            // Restricted growth strings enumerate each set partition once.
            std::vector<int> label(static_cast<std::size_t>(n), 0);
            while (true) {
                const int blocks = *std::max_element(label.begin(), label.end()) + 1;
                std::vector<unsigned> masks(static_cast<std::size_t>(blocks), 0u);
                for (int i = 0; i < n; ++i) masks[static_cast<std::size_t>(label[i])] |= 1u << i;
                bool singleton = false;
                for (unsigned mk : masks) singleton = singleton || (mk & (mk - 1)) == 0;
                if (!singleton) {
                    double fact = 1.0;
                    for (int j = 2; j < blocks; ++j) fact *= j;
                    t[static_cast<std::size_t>(n)].push_back({masks, (blocks % 2 == 1 ? 1.0 : -1.0) * fact});
                }
                int i = n - 1;
                while (i > 0) {
                    const int prefix_max = *std::max_element(label.begin(), label.begin() + i);
                    if (label[static_cast<std::size_t>(i)] <= prefix_max) break;
                    label[static_cast<std::size_t>(i)] = 0;
                    --i;
                }
                if (i == 0) break;
                ++label[static_cast<std::size_t>(i)];
            }
        }
        return t;
    }();
    require(k >= 1 && k <= max_cumulant_order, ErrorKind::InvalidArgument,
            "cumulant order " + std::to_string(k) + " exceeds the supported maximum of 6");
    return table[static_cast<std::size_t>(k)];
}

namespace detail {

/// Cumulant of k already centered and conjugated sequences of length n.
inline Complex cumulant_of(const std::array<const Complex*, max_cumulant_order>& x, int k, Eigen::Index n) {
    const unsigned full = 1u << k;
    std::array<Complex, 1u << max_cumulant_order> sum{};
    std::array<Complex, 1u << max_cumulant_order> prod{};
    prod[0] = 1.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        for (unsigned mask = 1; mask < full; ++mask) {
            const int low = std::countr_zero(mask);
            prod[mask] = prod[mask & (mask - 1)] * x[static_cast<std::size_t>(low)][t];
            sum[mask] += prod[mask];
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    Complex kappa{};
    for (const auto& part : cumulant_partitions(k)) {
        Complex term = part.coefficient;
        for (unsigned b : part.blocks) term *= sum[b] * inv;
        kappa += term;
    }
    return kappa;
}

/// Centered channels and their conjugates, shared by all slice entries.
struct CenteredChannels {
    SignalBlock::Data plain;
    SignalBlock::Data conj;

    explicit CenteredChannels(const SignalBlock& w) : plain(centered(w)), conj(plain.conjugate()) {}

    const Complex* row(Eigen::Index channel, int conjugate, Eigen::Index offset) const {
        return (conjugate ? conj : plain).data() + channel * plain.cols() + offset;
    }
};

} // namespace detail

/// Sample cumulant cum(x₁^(ι₁), …, x_k^(ι_k)) of equal-length channels, centered first.
inline Complex cumulant(const std::vector<std::span<const Complex>>& channels, const ConjugationPattern& pattern) {
    const int k = pattern.order();
    require(static_cast<int>(channels.size()) == k, ErrorKind::DimensionMismatch,
            "pattern order does not match the number of channels");
    const std::size_t n = channels.front().size();
    require(n >= 1, ErrorKind::InvalidArgument, "empty channel");
    std::vector<std::vector<Complex>> data(static_cast<std::size_t>(k));
    std::array<const Complex*, max_cumulant_order> ptr{};
    for (int i = 0; i < k; ++i) {
        const auto& ch = channels[static_cast<std::size_t>(i)];
        require(ch.size() == n, ErrorKind::DimensionMismatch, "channels differ in length");
        Complex mean{};
        for (auto v : ch) mean += v;
        mean /= static_cast<double>(n);
        auto& d = data[static_cast<std::size_t>(i)];
        d.reserve(n);
        for (auto v : ch) d.push_back(pattern[static_cast<std::size_t>(i)] ? std::conj(v - mean) : v - mean);
        ptr[static_cast<std::size_t>(i)] = d.data();
    }
    return detail::cumulant_of(ptr, k, static_cast<Eigen::Index>(n));
}

/// An m×m slice of a cumulant tensor, rearranged into the form A·Ω·A^† of its
/// congruence kind: transposed when only ι_p is set, conjugated when both are.
struct CumulantSlice {
    ComplexMatrix raw;    ///< entries cum(…, w_i at axis p, …, w_j at axis q, …) as estimated
    ComplexMatrix matrix; ///< canonical arrangement of raw
    CongruenceKind kind = CongruenceKind::Transpose;
    int order = 0;
    std::vector<int> pattern;
    std::vector<Eigen::Index> fixed_indices; ///< channels on the non-sliced axes, in axis order
    std::pair<int, int> axes{0, 1};          ///< 0-based sliced axes
    std::vector<Eigen::Index> offsets;       ///< per-channel time offsets (lagged slices)

    /// Transpose kind: the symmetrized slice. Hermitian kind: its Hermitian and skew parts.
    std::vector<TaggedMatrix> tagged() const {
        if (kind == CongruenceKind::Transpose) return {TaggedMatrix::symmetrized(matrix, kind)};
        auto [h, s] = hermitian_skew_split(matrix);
        return {TaggedMatrix(h, CongruenceKind::Hermitian), TaggedMatrix(s, CongruenceKind::Hermitian)};
    }
};

inline CongruenceKind slice_kind(const ConjugationPattern& pattern, int p, int q) {
    return (pattern[static_cast<std::size_t>(p)] ^ pattern[static_cast<std::size_t>(q)]) ? CongruenceKind::Hermitian
                                                                                          : CongruenceKind::Transpose;
}

/// Slice with channel c read at time t + offsets[c].
inline CumulantSlice lagged_cumulant_slice(const SignalBlock& w, const ConjugationPattern& pattern,
                                           const std::vector<Eigen::Index>& fixed, std::pair<int, int> axes,
                                           const std::vector<Eigen::Index>& offsets) {
    const int k = pattern.order();
    const Eigen::Index m = w.channels();
    const auto [p, q] = axes;
    require(p >= 0 && q >= 0 && p < k && q < k, ErrorKind::InvalidArgument, "slice axis out of range");
    require(p != q, ErrorKind::InvalidArgument, "slice axes must differ");
    require(static_cast<int>(fixed.size()) == k - 2, ErrorKind::InvalidArgument,
            "expected " + std::to_string(k - 2) + " fixed indices");
    for (auto f : fixed) require(f >= 0 && f < m, ErrorKind::InvalidArgument, "fixed index out of range");
    require(static_cast<Eigen::Index>(offsets.size()) == m, ErrorKind::InvalidArgument,
            "expected one time offset per channel");
    Eigen::Index max_off = 0;
    for (auto o : offsets) {
        require(o >= 0, ErrorKind::InvalidArgument, "time offsets must be nonnegative");
        max_off = std::max(max_off, o);
    }
    require(max_off < w.samples(), ErrorKind::InvalidArgument, "time offsets exceed the signal length");
    const Eigen::Index n = w.samples() - max_off;

    const detail::CenteredChannels cc(w);
    CumulantSlice out;
    out.order = k;
    out.pattern = pattern.bits();
    out.fixed_indices = fixed;
    out.axes = axes;
    out.offsets = offsets;
    out.kind = slice_kind(pattern, p, q);
    out.raw.resize(m, m);

    std::vector<Eigen::Index> channel_of(static_cast<std::size_t>(k), 0);
    for (int a = 0, f = 0; a < k; ++a)
        if (a != p && a != q) channel_of[static_cast<std::size_t>(a)] = fixed[static_cast<std::size_t>(f++)];
    std::array<const Complex*, max_cumulant_order> ptr{};
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            channel_of[static_cast<std::size_t>(p)] = i;
            channel_of[static_cast<std::size_t>(q)] = j;
            for (int a = 0; a < k; ++a) {
                const auto c = channel_of[static_cast<std::size_t>(a)];
                ptr[static_cast<std::size_t>(a)] =
                    cc.row(c, pattern[static_cast<std::size_t>(a)], offsets[static_cast<std::size_t>(c)]);
            }
            out.raw(i, j) = detail::cumulant_of(ptr, k, n);
        }
    }
    const int bp = pattern[static_cast<std::size_t>(p)], bq = pattern[static_cast<std::size_t>(q)];
    if (bp == 1 && bq == 0)
        out.matrix = out.raw.transpose();
    else if (bp == 1 && bq == 1)
        out.matrix = out.raw.conjugate();
    else
        out.matrix = out.raw;
    return out;
}

inline CumulantSlice cumulant_slice(const SignalBlock& w, const ConjugationPattern& pattern,
                                    const std::vector<Eigen::Index>& fixed, std::pair<int, int> axes) {
    return lagged_cumulant_slice(w, pattern, fixed, axes,
                                 std::vector<Eigen::Index>(static_cast<std::size_t>(w.channels()), 0));
}

/// Moving-block bootstrap spread of a matrix statistic: the RMS Frobenius
/// deviation of resampled estimates from their mean.
inline double bootstrap_sigma(const SignalBlock& w, const std::function<ComplexMatrix(const SignalBlock&)>& statistic,
                              int resamples, Eigen::Index block_length, std::uint64_t seed) {
    require(resamples >= 2, ErrorKind::InvalidArgument, "need at least two bootstrap resamples");
    const Eigen::Index t = w.samples();
    require(block_length >= 1 && block_length <= t, ErrorKind::InvalidArgument, "bad bootstrap block length");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> start(0, t - block_length);
    std::vector<ComplexMatrix> est;
    est.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        SignalBlock::Data d(w.channels(), t);
        for (Eigen::Index pos = 0; pos < t; pos += block_length) {
            const Eigen::Index len = std::min(block_length, t - pos);
            d.middleCols(pos, len) = w.data().middleCols(start(rng), len);
        }
        est.push_back(statistic(SignalBlock(std::move(d))));
    }
    ComplexMatrix mean = ComplexMatrix::Zero(est.front().rows(), est.front().cols());
    for (const auto& e : est) mean += e;
    mean /= static_cast<double>(resamples);
    double acc = 0.0;
    for (const auto& e : est) acc += (e - mean).squaredNorm();
    return std::sqrt(acc / static_cast<double>(resamples - 1));
}

} // namespace nujd
