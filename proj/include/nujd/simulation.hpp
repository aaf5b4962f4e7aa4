#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "nujd/recipe.hpp"
#include "nujd/solvers.hpp"
#include "nujd/statistics.hpp"
#include "nujd/uniqueness.hpp"

namespace nujd {

enum class SourceKind { BPSK, QPSK, CircularGaussian, NoncircularGaussian, AR1Noncircular, BlockNonstationary };

constexpr std::string_view to_string(SourceKind k) noexcept {
    switch (k) {
    case SourceKind::BPSK: return "bpsk";
    case SourceKind::QPSK: return "qpsk";
    case SourceKind::CircularGaussian: return "circular_gaussian";
    case SourceKind::NoncircularGaussian: return "noncircular_gaussian";
    case SourceKind::AR1Noncircular: return "ar1_noncircular";
    case SourceKind::BlockNonstationary: return "block_nonstationary";
    }
    return "?";
}

inline SourceKind parse_source_kind(std::string_view s) {
    for (auto k : {SourceKind::BPSK, SourceKind::QPSK, SourceKind::CircularGaussian, SourceKind::NoncircularGaussian,
                   SourceKind::AR1Noncircular, SourceKind::BlockNonstationary})
        if (to_string(k) == s) return k;
    fail(ErrorKind::Parse, "unknown source kind '" + std::string(s) + "'");
}

struct SourceSpec {
    SourceKind kind = SourceKind::CircularGaussian;
    double power = 1.0;
    double lambda = 0.0;             ///< circularity target (noncircular Gaussian, AR(1) innovation)
    Complex coefficient{0.0, 0.0};   ///< AR(1) coefficient, |c| < 1
    std::vector<double> variances;   ///< block variance profile

    static SourceSpec of(SourceKind kind) {
        SourceSpec s;
        s.kind = kind;
        return s;
    }
    static SourceSpec bpsk() { return of(SourceKind::BPSK); }
    static SourceSpec qpsk() { return of(SourceKind::QPSK); }
    static SourceSpec circular_gaussian() { return of(SourceKind::CircularGaussian); }
    static SourceSpec noncircular_gaussian(double lambda) {
        SourceSpec s = of(SourceKind::NoncircularGaussian);
        s.lambda = lambda;
        return s;
    }
    static SourceSpec ar1(Complex coefficient, double lambda) {
        SourceSpec s = of(SourceKind::AR1Noncircular);
        s.coefficient = coefficient;
        s.lambda = lambda;
        return s;
    }
    static SourceSpec block(std::vector<double> variances) {
        SourceSpec s = of(SourceKind::BlockNonstationary);
        s.variances = std::move(variances);
        return s;
    }

    void validate() const {
        require(std::isfinite(power) && power > 0.0, ErrorKind::InvalidArgument, "source power must be positive");
        require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::InvalidArgument, "circularity target must lie in [0, 1]");
        if (kind == SourceKind::AR1Noncircular)
            require(std::abs(coefficient) < 1.0, ErrorKind::InvalidArgument, "AR coefficient must have modulus < 1");
        if (kind == SourceKind::BlockNonstationary) {
            require(!variances.empty(), ErrorKind::InvalidArgument, "variance profile must not be empty");
            for (double v : variances)
                require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidArgument, "variances must be positive");
        }
    }

    /// Stationary pseudo-variance E[s²]/power (AR(1): of the process, not the innovation).
    Complex pseudo_variance() const {
        switch (kind) {
        case SourceKind::BPSK: return 1.0;
        case SourceKind::NoncircularGaussian: return lambda;
        case SourceKind::AR1Noncircular: {
            const Complex c = coefficient;
            return (1.0 - std::norm(c)) * lambda / (1.0 - c * c);
        }
        default: return 0.0;
        }
    }
};

/// Seed of the independent stream number `index` derived from `seed` (splitmix64).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct ExperimentTruth {
    ComplexMatrix A = ComplexMatrix::Identity(1, 1);
    std::vector<SourceSpec> sources;
    std::uint64_t seed = 0;
    Eigen::Index samples = 0;
};

struct Generated {
    SignalBlock sources;
    ExperimentTruth truth;
};

namespace detail {

/// a·x + i·b·y with a² + b² = 1 and a² − b² = |ψ|, rotated so E[s²] = ψ.
inline Complex improper_gaussian(Complex psi, std::mt19937_64& rng, std::normal_distribution<double>& n) {
    const double l = std::min(1.0, std::abs(psi));
    const double a = std::sqrt((1.0 + l) / 2.0), b = std::sqrt((1.0 - l) / 2.0);
    const double x = n(rng), y = n(rng);
    return std::polar(1.0, std::arg(psi) / 2.0) * Complex(a * x, b * y);
}

inline std::vector<Eigen::Index> block_bounds(Eigen::Index t, std::size_t blocks) {
    std::vector<Eigen::Index> b(blocks + 1);
    for (std::size_t i = 0; i <= blocks; ++i)
        b[i] = static_cast<Eigen::Index>((static_cast<long double>(t) * i) / blocks);
    return b;
}

inline void fill_source(const SourceSpec& s, Eigen::Ref<SignalBlock::Data> row, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const Eigen::Index t = row.cols();
    const double amp = std::sqrt(s.power);
    switch (s.kind) {
    case SourceKind::BPSK:
        for (Eigen::Index i = 0; i < t; ++i) row(0, i) = coin(rng) ? amp : -amp;
        break;
    case SourceKind::QPSK:
        for (Eigen::Index i = 0; i < t; ++i) {
            const double re = coin(rng) ? 1.0 : -1.0, im = coin(rng) ? 1.0 : -1.0;
            row(0, i) = amp * Complex(re, im) / std::numbers::sqrt2;
        }
        break;
    case SourceKind::CircularGaussian:
        for (Eigen::Index i = 0; i < t; ++i) row(0, i) = amp * Complex(n(rng), n(rng)) / std::numbers::sqrt2;
        break;
    case SourceKind::NoncircularGaussian:
        for (Eigen::Index i = 0; i < t; ++i) row(0, i) = amp * improper_gaussian(s.lambda, rng, n);
        break;
    case SourceKind::AR1Noncircular: {
        const Complex c = s.coefficient;
        const double gain = std::sqrt(1.0 - std::norm(c));
        Complex prev = improper_gaussian(s.pseudo_variance(), rng, n); // stationary start
        row(0, 0) = amp * prev;
        for (Eigen::Index i = 1; i < t; ++i) {
            prev = c * prev + gain * improper_gaussian(s.lambda, rng, n);
            row(0, i) = amp * prev;
        }
        break;
    }
    case SourceKind::BlockNonstationary: {
        const auto b = block_bounds(t, s.variances.size());
        for (std::size_t k = 0; k < s.variances.size(); ++k) {
            const double sd = amp * std::sqrt(s.variances[k]);
            for (Eigen::Index i = b[k]; i < b[k + 1]; ++i)
                row(0, i) = sd * Complex(n(rng), n(rng)) / std::numbers::sqrt2;
        }
        break;
    }
    }
}

} // namespace detail

/// Independent sources, one generator stream per channel.
inline Generated generate(const std::vector<SourceSpec>& specs, Eigen::Index samples, std::uint64_t seed) {
    require(!specs.empty(), ErrorKind::InvalidArgument, "need at least one source");
    require(samples >= 100, ErrorKind::InvalidArgument, "need at least 100 samples");
    for (const auto& s : specs) s.validate();
    SignalBlock::Data d(static_cast<Eigen::Index>(specs.size()), samples);
    for (std::size_t j = 0; j < specs.size(); ++j) {
        std::mt19937_64 rng(stream_seed(seed, j));
        detail::fill_source(specs[j], d.row(static_cast<Eigen::Index>(j)), rng);
    }
    ExperimentTruth truth;
    truth.A = ComplexMatrix::Identity(d.rows(), d.rows());
    truth.sources = specs;
    truth.seed = seed;
    truth.samples = samples;
    return {SignalBlock(std::move(d)), std::move(truth)};
}

/// Standard complex Gaussian matrix with condition number at most `cap` (rejection sampling).
inline ComplexMatrix random_mixing(Eigen::Index m, std::uint64_t seed, double cap = 100.0) {
    require(m >= 1 && cap > 1.0, ErrorKind::InvalidArgument, "bad mixing request");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        ComplexMatrix a(m, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < m; ++i) a(i, j) = Complex(n(rng), n(rng)) / std::numbers::sqrt2;
        if (condition_number(a) <= cap) return a;
    }
    fail(ErrorKind::InvalidArgument, "could not draw a mixing matrix within the condition cap");
}

/// w(t) = A s(t).
inline SignalBlock mix(const SignalBlock& s, const ComplexMatrix& a) {
    require(a.cols() == s.channels(), ErrorKind::DimensionMismatch, "mixing matrix does not match the sources");
    return SignalBlock(SignalBlock::Data(a * s.data()));
}

/// y(t) = X^H w(t).
inline SignalBlock demix(const SignalBlock& w, const ComplexMatrix& x) {
    require(x.rows() == w.channels(), ErrorKind::DimensionMismatch, "demixing matrix does not match the signal");
    return SignalBlock(SignalBlock::Data(x.adjoint() * w.data()));
}

/// Amari performance index of G = X^H A, normalized to [0, 1].
inline double amari_index(const ComplexMatrix& g) {
    require_square(g, "global matrix");
    const Eigen::Index m = g.rows();
    if (m < 2) return 0.0;
    const RealMatrix p = g.cwiseAbs();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double mx = p.row(i).maxCoeff();
        require(mx > 0.0, ErrorKind::InvalidArgument, "global matrix has a zero row");
        sum += p.row(i).sum() / mx - 1.0;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const double mx = p.col(j).maxCoeff();
        require(mx > 0.0, ErrorKind::InvalidArgument, "global matrix has a zero column");
        sum += p.col(j).sum() / mx - 1.0;
    }
    return sum / (2.0 * static_cast<double>(m) * static_cast<double>(m - 1));
}

// ---------------------------------------------------------------------------
// Population statistics

/// E[s^a conj(s)^b] of a source at a single time instant (time-averaged for
/// block-nonstationary sources over `samples`).
inline Complex population_moment(const SourceSpec& s, int a, int b, Eigen::Index samples) {
    const int n = a + b;
    if (n == 0) return 1.0;
    const double scale = std::pow(s.power, n / 2.0);
    switch (s.kind) {
    case SourceKind::BPSK: return n % 2 == 0 ? scale : 0.0;
    case SourceKind::QPSK: {
        const int d = a - b;
        if (((d % 4) + 4) % 4 != 0) return 0.0;
        return scale * std::polar(1.0, d * std::numbers::pi / 4.0);
    }
    case SourceKind::BlockNonstationary: {
        if (a != b) return 0.0;
        double fact = 1.0;
        for (int i = 2; i <= a; ++i) fact *= i;
        const auto bounds = detail::block_bounds(samples, s.variances.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < s.variances.size(); ++k)
            acc += static_cast<double>(bounds[k + 1] - bounds[k]) * std::pow(s.variances[k], a);
        return scale * fact * acc / static_cast<double>(samples);
    }
    default: {
        // Gaussian: Isserlis sum over pairings with E|s|² = 1 and E[s²] = ψ.
        if (n % 2 != 0) return 0.0;
        const Complex psi = s.pseudo_variance();
        auto dfact = [](int k) {
            double r = 1.0;
            for (int i = k; i > 1; i -= 2) r *= i;
            return r;
        };
        auto choose = [](int nn, int k) {
            double r = 1.0;
            for (int i = 1; i <= k; ++i) r = r * (nn - k + i) / i;
            return r;
        };
        Complex acc{};
        for (int j = 0; j <= std::min(a, b); ++j) {
            if ((a - j) % 2 != 0 || (b - j) % 2 != 0) continue;
            double jf = 1.0;
            for (int i = 2; i <= j; ++i) jf *= i;
            const double pairings = choose(a, j) * choose(b, j) * jf * dfact(a - j - 1) * dfact(b - j - 1);
            acc += pairings * std::pow(psi, (a - j) / 2) * std::pow(std::conj(psi), (b - j) / 2);
        }
        return scale * acc;
    }
    }
}

/// Population cumulant of one source repeated with the given conjugation pattern.
inline Complex population_cumulant(const SourceSpec& s, const ConjugationPattern& pattern, Eigen::Index samples) {
    const int k = pattern.order();
    Complex kappa{};
    for (const auto& part : cumulant_partitions(k)) {
        Complex term = part.coefficient;
        for (unsigned blk : part.blocks) {
            int a = 0, b = 0;
            for (int i = 0; i < k; ++i)
                if (blk & (1u << i)) (pattern[static_cast<std::size_t>(i)] ? b : a)++;
            term *= population_moment(s, a, b, samples);
        }
        kappa += term;
    }
    return kappa;
}

/// Population diagonal Ω of a recipe entry (raw, canonically arranged), so that
/// the population statistic is A·Ω·A^†.
inline ComplexVector population_diagonal(const ExperimentTruth& truth, const StatisticRecipe& r) {
    const auto m = static_cast<Eigen::Index>(truth.sources.size());
    ComplexVector d(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const SourceSpec& s = truth.sources[static_cast<std::size_t>(j)];
        const bool ar = s.kind == SourceKind::AR1Noncircular;
        switch (r.kind) {
        case StatisticKind::Covariance: d(j) = population_moment(s, 1, 1, truth.samples); break;
        case StatisticKind::PseudoCovariance: d(j) = population_moment(s, 2, 0, truth.samples); break;
        case StatisticKind::Autocorrelation:
            if (r.lag == 0)
                d(j) = population_moment(s, 1, 1, truth.samples);
            else
                d(j) = ar ? s.power * std::pow(std::conj(s.coefficient), static_cast<double>(r.lag)) : Complex{};
            break;
        case StatisticKind::PseudoAutocorrelation:
            if (r.lag == 0)
                d(j) = population_moment(s, 2, 0, truth.samples);
            else
                d(j) = ar ? s.power * std::pow(s.coefficient, static_cast<double>(r.lag)) * s.pseudo_variance()
                          : Complex{};
            break;
        case StatisticKind::WindowCovariance:
            if (s.kind == SourceKind::BlockNonstationary) {
                const auto b = detail::block_bounds(truth.samples, s.variances.size());
                double acc = 0.0;
                for (std::size_t k = 0; k < s.variances.size(); ++k) {
                    const Eigen::Index lo = std::max(b[k], r.window.start);
                    const Eigen::Index hi = std::min(b[k + 1], r.window.start + r.window.length);
                    if (hi > lo) acc += static_cast<double>(hi - lo) * s.variances[k];
                }
                d(j) = s.power * acc / static_cast<double>(r.window.length);
            } else {
                d(j) = s.power;
            }
            break;
        case StatisticKind::Cumulant: {
            const auto pattern = ConjugationPattern::parse(r.pattern);
            Complex v = population_cumulant(s, pattern, truth.samples);
            for (int a = 0, f = 0; a < pattern.order(); ++a) {
                if (a == r.axes.first || a == r.axes.second) continue;
                const Complex e = truth.A(r.fixed[static_cast<std::size_t>(f++)], j);
                v *= pattern[static_cast<std::size_t>(a)] ? std::conj(e) : e;
            }
            if (pattern[static_cast<std::size_t>(r.axes.first)] && pattern[static_cast<std::size_t>(r.axes.second)])
                v = std::conj(v);
            d(j) = v;
            break;
        }
        }
    }
    return d;
}

/// Population matrices A·Ω·A^† of a recipe entry, split like `estimate`.
inline std::vector<TaggedMatrix> population_matrices(const ExperimentTruth& truth, const StatisticRecipe& r) {
    const ComplexVector d = population_diagonal(truth, r);
    const CongruenceKind kind = r.congruence();
    const ComplexMatrix raw = truth.A * d.asDiagonal() * dagger(truth.A, kind);
    if (!r.splits()) return {TaggedMatrix::symmetrized(raw, kind)};
    auto [h, s] = hermitian_skew_split(raw);
    return detail::select_parts(h, s, r.part);
}

/// Diagonal spectra matching `population_matrices`, as (sym, herm) stacks.
inline std::pair<DiagonalStack, DiagonalStack> population_stacks(const ExperimentTruth& truth,
                                                                 const std::vector<StatisticRecipe>& recipe) {
    const auto m = static_cast<Eigen::Index>(truth.sources.size());
    std::vector<ComplexVector> sym, herm;
    auto push = [](std::vector<ComplexVector>& v, const ComplexVector& d) {
        if (d.size() > 0 && d.cwiseAbs().maxCoeff() > 0.0) v.push_back(d);
    };
    for (const auto& r : recipe) {
        const ComplexVector d = population_diagonal(truth, r);
        if (r.congruence() == CongruenceKind::Transpose) {
            push(sym, d);
        } else if (!r.splits()) {
            push(herm, d.real().cast<Complex>());
        } else {
            if (r.part != Part::Skew) push(herm, d.real().cast<Complex>());
            if (r.part != Part::Hermitian) push(herm, d.imag().cast<Complex>());
        }
    }
    return {DiagonalStack(m, CongruenceKind::Transpose, sym), DiagonalStack(m, CongruenceKind::Hermitian, herm)};
}

// ---------------------------------------------------------------------------
// Experiments

enum class SolverKind { Put, Sut, Gevd };

constexpr std::string_view to_string(SolverKind s) noexcept {
    switch (s) {
    case SolverKind::Put: return "put";
    case SolverKind::Sut: return "sut";
    case SolverKind::Gevd: return "gevd";
    }
    return "?";
}

inline SolverKind parse_solver(std::string_view s) {
    for (auto k : {SolverKind::Put, SolverKind::Sut, SolverKind::Gevd})
        if (to_string(k) == s) return k;
    fail(ErrorKind::InvalidArgument, "unknown solver '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::vector<SourceSpec> sources;
    Eigen::Index samples = 10000;
    std::uint64_t seed = 0;
    std::vector<StatisticRecipe> statistics;
    SolverKind solver = SolverKind::Put;
    int trials = 1;
    double mixing_cap = 100.0;
    double noise_sigma = 0.0;
    double margin = tol::margin;         ///< for the population identifiability verdicts
    double equivalence_tol = 0.05;       ///< for essential equivalence of estimated demixers

    void validate() const {
        require(!sources.empty(), ErrorKind::InvalidArgument, "config needs sources");
        require(sources.size() >= 2, ErrorKind::InvalidArgument, "need at least two sources");
        require(trials >= 1, ErrorKind::InvalidArgument, "trials must be positive");
        require(!statistics.empty(), ErrorKind::InvalidArgument, "statistics recipe must not be empty");
        require(noise_sigma >= 0.0 && margin > 0.0 && equivalence_tol > 0.0 && equivalence_tol < 1.0,
                ErrorKind::InvalidArgument, "bad tolerance or noise setting");
        for (const auto& s : sources) s.validate();
        std::size_t h = 0, t = 0;
        for (const auto& r : statistics)
            for (auto k : r.output_kinds()) (k == CongruenceKind::Hermitian ? h : t)++;
        if (solver == SolverKind::Gevd)
            require((h == 2 && t == 0) || (h == 0 && t == 2), ErrorKind::InvalidArgument,
                    "gevd needs exactly two matrices of one kind");
        else
            require(h == 1 && t == 1, ErrorKind::InvalidArgument,
                    std::string(to_string(solver)) + " needs exactly one Hermitian and one transpose matrix");
    }
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::Unique; ///< identifiability_master on population diagonals
    Rule rule = Rule::IdentifiabilityI;
    std::optional<Verdict> pair_verdict; ///< Hermitian/transpose pair check (put, sut)
    std::optional<double> amari;
    std::optional<double> residual;
    std::optional<double> eig_gap;
    std::optional<bool> essentially_equivalent;
    std::vector<std::string> warnings;
    std::string error;
};

struct Summary {
    double median = 0.0, q1 = 0.0, q3 = 0.0, iqr = 0.0;
    std::size_t count = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialResult> trials;
    std::optional<Summary> amari;

    bool all_completed() const {
        return std::all_of(trials.begin(), trials.end(), [](const TrialResult& t) { return t.error.empty(); });
    }
};

/// Linear-interpolation quantiles.
inline Summary summarize(std::vector<double> v) {
    require(!v.empty(), ErrorKind::InvalidArgument, "no values to summarize");
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    Summary s;
    s.median = q(0.5);
    s.q1 = q(0.25);
    s.q3 = q(0.75);
    s.iqr = s.q3 - s.q1;
    s.count = v.size();
    return s;
}

inline unsigned experiment_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NUJD_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

inline TrialResult run_trial(const ExperimentConfig& cfg, int index) {
    TrialResult res;
    res.trial = index;
    res.seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(index));
    try {
        Generated g = generate(cfg.sources, cfg.samples, stream_seed(res.seed, 0));
        const auto m = static_cast<Eigen::Index>(cfg.sources.size());
        g.truth.A = random_mixing(m, stream_seed(res.seed, 1), cfg.mixing_cap);
        g.truth.seed = res.seed;
        SignalBlock w = mix(g.sources, g.truth.A);
        if (cfg.noise_sigma > 0.0) {
            std::mt19937_64 rng(stream_seed(res.seed, 2));
            std::normal_distribution<double> n(0.0, cfg.noise_sigma / std::numbers::sqrt2);
            SignalBlock::Data d = w.data();
            for (Eigen::Index i = 0; i < d.rows(); ++i)
                for (Eigen::Index t = 0; t < d.cols(); ++t) d(i, t) += Complex(n(rng), n(rng));
            w = SignalBlock(std::move(d));
        }

        const auto [sym, herm] = population_stacks(g.truth, cfg.statistics);
        if (sym.empty() && herm.empty()) {
            res.verdict = Verdict::NotUnique;
            res.rule = Rule::IdentifiabilityIII;
            res.warnings.push_back("all population statistics vanish");
        } else {
            const UniquenessReport rep = identifiability_master(sym, herm, cfg.margin);
            res.verdict = rep.verdict;
            res.rule = rep.rule;
        }

        std::vector<TaggedMatrix> mats = estimate(w, cfg.statistics);
        std::optional<ComplexMatrix> x;
        if (cfg.solver == SolverKind::Gevd) {
            x = two_matrix_same_kind(mats[0], mats[1]).matrix();
        } else {
            const auto is_h = [](const TaggedMatrix& t) { return t.kind() == CongruenceKind::Hermitian; };
            const TaggedMatrix& h = is_h(mats[0]) ? mats[0] : mats[1];
            const TaggedMatrix& t = is_h(mats[0]) ? mats[1] : mats[0];
            ComplexVector auto_diag, pseudo_diag;
            for (const auto& r : cfg.statistics) {
                if (r.congruence() == CongruenceKind::Transpose)
                    pseudo_diag = population_diagonal(g.truth, r);
                else if (r.part == Part::Skew && r.splits())
                    auto_diag = population_diagonal(g.truth, r).imag().cast<Complex>();
                else
                    auto_diag = population_diagonal(g.truth, r);
            }
            const UniquenessReport pair = put_identifiability_check(auto_diag, pseudo_diag, cfg.margin);
            res.pair_verdict = pair.verdict;
            if (!pair.unique())
                res.warnings.push_back("solver pair is not identifiable; the separation is unreliable");
            PutResult pr = cfg.solver == SolverKind::Put ? put(h, t) : sut(h, t);
            res.eig_gap = pr.eig_gap;
            for (auto& wmsg : pr.warnings) res.warnings.push_back(std::move(wmsg));
            x = pr.X.matrix();
        }
        res.amari = amari_index(x->adjoint() * g.truth.A);
        res.residual = offdiag_residual(mats, *x);
        const ComplexMatrix target = g.truth.A.adjoint().partialPivLu().inverse();
        res.essentially_equivalent = is_essentially_equivalent(*x, target, cfg.equivalence_tol).equivalent;
    } catch (const Error& e) {
        res.error = e.what();
    }
    return res;
}

/// Runs all trials; each trial owns its seed stream, so the report does not
/// depend on the number of threads.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport rep;
    rep.config = cfg;
    rep.trials.resize(static_cast<std::size_t>(cfg.trials));
    const unsigned nthreads = std::min<unsigned>(experiment_threads(), static_cast<unsigned>(cfg.trials));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < cfg.trials; i = next++) rep.trials[static_cast<std::size_t>(i)] = run_trial(cfg, i);
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<double> am;
    for (const auto& t : rep.trials)
        if (t.amari) am.push_back(*t.amari);
    if (!am.empty()) rep.amari = summarize(std::move(am));
    return rep;
}

} // namespace nujd
