// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "nujd/nujd.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace nujd;
using oracle::Rng;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void put_correctness() {
    const auto t0 = Clock::now();
    Rng rng(1001);
    int bad = 0;
    double worst_whiten = 0.0, worst_offdiag = 0.0, worst_dist = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index m = rng.integer(2, 8);
        const auto inst = gen::put_instance(rng, m, 100.0, 0.05);
        try {
            const PutResult r = put(inst.c1, inst.c2);
            const ComplexMatrix& x = r.X.matrix();
            const double whiten =
                (oracle::transpose_congruence(x, inst.c2.matrix()) - ComplexMatrix::Identity(m, m)).norm() /
                static_cast<double>(m);
            const double off = oracle::offdiag(oracle::hermitian_congruence(x, inst.c1.matrix())) / inst.c1.matrix().norm();
            const auto eq = is_essentially_equivalent(x, inst.A.adjoint().inverse(), 1e-6);
            worst_whiten = std::max(worst_whiten, whiten);
            worst_offdiag = std::max(worst_offdiag, off);
            worst_dist = std::max(worst_dist, eq.distance);
            if (whiten > 1e-8 || off > 1e-8 || !eq.equivalent) ++bad;
        } catch (const Error&) {
            ++bad;
        }
    }
    const double secs = seconds_since(t0);
    report("1 PUT correctness", bad == 0 && secs < 30.0,
           fmt("%d/1000 failures, max whitening error/m %.2e, max offdiag/|C1| %.2e, max pattern distance %.2e, %.1f s",
               bad, worst_whiten, worst_offdiag, worst_dist, secs));
}

void witness_soundness() {
    Rng rng(1002);
    int bad = 0, not_unique = 0;
    double worst_res = 0.0, min_dist = 1.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index m = rng.integer(2, 6);
        const Eigen::Index k = rng.integer(0, static_cast<int>(m) - 2);
        const Eigen::Index l = rng.integer(static_cast<int>(k) + 1, static_cast<int>(m) - 1);
        const auto st = gen::non_identifiable(rng, m, k, l);
        try {
            const auto rep = identifiability_master(st.sym, st.herm);
            if (rep.unique() || !rep.witness) {
                ++bad;
                continue;
            }
            ++not_unique;
            const ComplexMatrix& w = rep.witness->matrix();
            const double res = offdiag_residual(gen::reconstructed(st.sym, st.herm), w);
            const double dist = oracle::brute_pattern_distance(w);
            worst_res = std::max(worst_res, res);
            min_dist = std::min(min_dist, dist);
            if (res > 1e-10 || dist <= 0.1) ++bad;
        } catch (const Error&) {
            ++bad;
        }
    }
    report("2 witness soundness", bad == 0,
           fmt("%d/10000 failures (%d NotUnique with witness), max residual %.2e, min distance from G(m) %.3f", bad,
               not_unique, worst_res, min_dist));
}

/// Joint off-diagonal residual of X = [[1, b], [a, 1]] (columns normalized) over a 2×2 set.
struct PairResidual {
    std::vector<std::pair<Eigen::Matrix2cd, CongruenceKind>> set;
    double denom = 0.0;

    explicit PairResidual(const std::vector<TaggedMatrix>& items) {
        for (const auto& t : items) {
            set.emplace_back(Eigen::Matrix2cd(t.matrix()), t.kind());
            denom += t.matrix().squaredNorm();
        }
    }

    static Eigen::Matrix2cd matrix(const std::vector<double>& p) {
        Eigen::Matrix2cd x;
        x << 1.0, Complex(p[2], p[3]), Complex(p[0], p[1]), 1.0;
        x.col(0).normalize();
        x.col(1).normalize();
        return x;
    }

    double operator()(const std::vector<double>& p) const {
        const Eigen::Matrix2cd x = matrix(p);
        double off = 0.0;
        for (const auto& [c, kind] : set) {
            const Eigen::Matrix2cd y =
                kind == CongruenceKind::Hermitian ? Eigen::Matrix2cd(x.adjoint() * c * x)
                                                  : Eigen::Matrix2cd(x.adjoint() * c * x.conjugate());
            off += std::norm(y(0, 1)) + std::norm(y(1, 0));
        }
        return off / denom;
    }
};

/// Random spectra at m = 2: a complex transpose stack and a real Hermitian stack, not both empty.
gen::StackPair random_pair_spectra(Rng& rng) {
    const int ns = rng.integer(0, 3);
    const int nh = ns == 0 ? rng.integer(1, 3) : rng.integer(0, 3);
    return {DiagonalStack(rng.cmatrix(ns, 2), CongruenceKind::Transpose),
            DiagonalStack(ComplexMatrix(rng.cmatrix(nh, 2).real().cast<Complex>()), CongruenceKind::Hermitian)};
}

std::vector<TaggedMatrix> mixed_set(const gen::StackPair& st, const ComplexMatrix& a) {
    std::vector<TaggedMatrix> out;
    for (const auto& d : gen::reconstructed(st.sym, st.herm)) {
        const ComplexMatrix at = d.kind() == CongruenceKind::Hermitian ? ComplexMatrix(a.adjoint()) : ComplexMatrix(a.transpose());
        out.push_back(TaggedMatrix::symmetrized(a * d.matrix() * at, d.kind()));
    }
    return out;
}

void local_search_agreement() {
    const auto t0 = Clock::now();
    Rng rng(1003);
    int unique_done = 0, alternatives = 0, converged = 0;
    double min_alt_dist = 1.0;
    while (unique_done < 500) {
        const auto st = random_pair_spectra(rng);
        if (!identifiability_master(st.sym, st.herm, 0.05).unique()) continue;
        ++unique_done;
        const ComplexMatrix a = rng.well_conditioned(2, 100.0);
        const ComplexMatrix truth = a.adjoint().inverse();
        const PairResidual f(mixed_set(st, a));
        for (int restart = 0; restart < 500; ++restart) {
            const double scale = std::pow(10.0, rng.uniform(-1.0, 1.0));
            std::vector<double> x0(4);
            for (auto& v : x0) v = scale * rng.normal();
            const auto p = oracle::nelder_mead(std::cref(f), x0, 0.5 * scale, 1500, 1e-26);
            if (f(p) >= 1e-12) continue;
            const Eigen::Matrix2cd x = PairResidual::matrix(p);
            if (condition_number(x) > 1e8) continue;
            ++converged;
            const double dist = is_essentially_equivalent(x, truth).distance;
            if (dist > 0.1) {
                ++alternatives;
                min_alt_dist = std::min(min_alt_dist, dist);
            }
        }
    }
    int notunique_done = 0, bad_witness = 0;
    while (notunique_done < 500) {
        const auto st = gen::non_identifiable(rng, 2, 0, 1);
        const auto rep = identifiability_master(st.sym, st.herm, 0.05);
        ++notunique_done;
        if (rep.unique() || !rep.witness) {
            ++bad_witness;
            continue;
        }
        const ComplexMatrix& w = rep.witness->matrix();
        if (offdiag_residual(gen::reconstructed(st.sym, st.herm), w) > 1e-10 || oracle::brute_pattern_distance(w) <= 0.1)
            ++bad_witness;
    }
    const double secs = seconds_since(t0);
    report("3 predicate/local-search agreement (m = 2)", alternatives == 0 && bad_witness == 0 && secs < 600.0,
           fmt("%d alternative diagonalizers outside G(2) in 250000 restarts (%d converged below 1e-6%s), "
               "%d/500 NotUnique witnesses failing, %.1f s",
               alternatives, converged,
               alternatives ? fmt(", nearest alternative at distance %.3f", min_alt_dist).c_str() : "", bad_witness,
               secs));
}

void sut_put_coincidence() {
    Rng rng(1004);
    int compared = 0, bad = 0;
    double worst = 0.0;
    while (compared < 200) {
        const auto inst = gen::put_instance(rng, rng.integer(2, 8), 100.0, 0.05, true);
        const PutResult p = put(inst.c1, inst.c2);
        if (p.eig_gap <= 1e-4) continue;
        ++compared;
        try {
            const PutResult s = sut(inst.c1, inst.c2);
            const auto eq = is_essentially_equivalent(s.X, p.X, 1e-6);
            worst = std::max(worst, eq.distance);
            if (!eq.equivalent) ++bad;
        } catch (const Error&) {
            ++bad;
        }
    }
    report("4 SUT/PUT coincidence", bad == 0,
           fmt("%d/200 not essentially equivalent, max pattern distance %.2e", bad, worst));
}

void cumulant_estimator() {
    const auto pattern = ConjugationPattern::parse("0011");
    int inside = 0;
    double worst_gauss = 0.0, lo = 0.0, hi = -4.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = generate({SourceSpec::bpsk(), SourceSpec::circular_gaussian()}, 100000, 5000 + seed);
        const auto b = g.sources.channel(0), c = g.sources.channel(1);
        const double kb = cumulant({b, b, b, b}, pattern).real();
        const double kc = std::abs(cumulant({c, c, c, c}, pattern));
        if (std::abs(kb + 2.0) <= 0.1) ++inside;
        lo = std::min(lo, kb);
        hi = std::max(hi, kb);
        worst_gauss = std::max(worst_gauss, kc);
    }
    report("5 fourth-order cumulant estimator", inside >= 19 && worst_gauss <= 0.1,
           fmt("BPSK inside -2 +/- 0.1 for %d/20 seeds (range [%.4f, %.4f]), max |circular Gaussian| %.4f", inside,
               lo, hi, worst_gauss));
}

void circularity() {
    double worst = 0.0;
    for (double lambda : {0.0, 0.3, 0.5, 0.9, 1.0})
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto g = generate({SourceSpec::noncircular_gaussian(lambda)}, 100000, 6000 + seed);
            worst = std::max(worst, std::abs(circularity_coefficient(g.sources.channel(0)) - lambda));
        }
    report("6 circularity coefficient", worst <= 0.02, fmt("max |lambda_hat - lambda| %.4f over 100 runs", worst));
}

ExperimentConfig bss_config(std::vector<SourceSpec> sources, std::vector<StatisticRecipe> stats, SolverKind solver,
                            std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.sources = std::move(sources);
    cfg.samples = 100000;
    cfg.seed = seed;
    cfg.statistics = std::move(stats);
    cfg.solver = solver;
    cfg.trials = 50;
    return cfg;
}

void end_to_end() {
    const auto a = run_experiment(bss_config({SourceSpec::noncircular_gaussian(0.9), SourceSpec::noncircular_gaussian(0.3)},
                                             {StatisticRecipe::covariance(), StatisticRecipe::pseudo_covariance()},
                                             SolverKind::Sut, 7001));
    const bool a_ok = a.all_completed() && a.amari && a.amari->median < 0.1;
    report("7a SUT end-to-end", a_ok,
           a.amari ? fmt("median Amari %.4f (IQR %.4f) over %zu seeds", a.amari->median, a.amari->iqr, a.amari->count)
                   : std::string("no completed trials"));

    const std::vector<SourceSpec> sources{SourceSpec::ar1(0.9, 0.5), SourceSpec::ar1(0.2, 0.5)};
    const auto b = run_experiment(bss_config(
        sources, {StatisticRecipe::autocorrelation(1, Part::Hermitian), StatisticRecipe::pseudo_autocorrelation(1)},
        SolverKind::Put, 7002));
    ExperimentTruth truth;
    truth.sources = sources;
    truth.A = ComplexMatrix::Identity(2, 2);
    truth.samples = 100000;
    const auto sut_pair = put_identifiability_check(population_diagonal(truth, StatisticRecipe::covariance()),
                                                    population_diagonal(truth, StatisticRecipe::pseudo_covariance()));
    const auto put_pair =
        put_identifiability_check(population_diagonal(truth, StatisticRecipe::autocorrelation(1, Part::Hermitian)),
                                  population_diagonal(truth, StatisticRecipe::pseudo_autocorrelation(1)));
    const bool b_ok = b.amari && b.amari->median < 0.1 && !sut_pair.unique();
    report("7b PUT end-to-end on equal circularity, AR coefficients (0.9, 0.2)", b_ok,
           fmt("median Amari %.4f over %zu completed seeds; covariance/pseudo-covariance pair check %s; "
               "lag-1 pair check on population statistics %s",
               b.amari ? b.amari->median : 1.0, b.amari ? b.amari->count : std::size_t{0},
               std::string(to_string(sut_pair.verdict)).c_str(), std::string(to_string(put_pair.verdict)).c_str()));
}

/// Slice with the varying axes on source channels and the fixed axes on observation channels.
ComplexMatrix hybrid_slice(const SignalBlock& s, const SignalBlock& w, const ConjugationPattern& p,
                           const std::vector<Eigen::Index>& fixed, std::pair<int, int> axes) {
    const Eigen::Index m = s.channels();
    ComplexMatrix full(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            std::vector<std::span<const Complex>> args(static_cast<std::size_t>(p.order()));
            std::size_t f = 0;
            for (int ax = 0; ax < p.order(); ++ax) {
                auto& slot = args[static_cast<std::size_t>(ax)];
                if (ax == axes.first) slot = s.channel(i);
                else if (ax == axes.second) slot = s.channel(j);
                else slot = w.channel(fixed[f++]);
            }
            full(i, j) = cumulant(args, p);
        }
    const bool bp = p[static_cast<std::size_t>(axes.first)], bq = p[static_cast<std::size_t>(axes.second)];
    if (bp && !bq) return full.transpose();
    if (bp && bq) return full.conjugate();
    return full;
}

void multilinearity() {
    struct Statistic {
        std::string name;
        CongruenceKind kind;
        std::function<ComplexMatrix(const SignalBlock&)> on_mixture;
        std::function<ComplexMatrix(const SignalBlock&, const SignalBlock&)> on_sources;
    };
    auto slice = [](const char* pat, std::vector<Eigen::Index> fixed, std::pair<int, int> axes) {
        const auto p = ConjugationPattern::parse(pat);
        return Statistic{std::string("cumulant slice ") + pat, slice_kind(p, axes.first, axes.second),
                         [=](const SignalBlock& w) { return cumulant_slice(w, p, fixed, axes).matrix; },
                         [=](const SignalBlock& s, const SignalBlock& w) { return hybrid_slice(s, w, p, fixed, axes); }};
    };
    const std::vector<Statistic> stats{
        {"covariance", CongruenceKind::Hermitian, [](const SignalBlock& w) { return covariance(w).matrix(); },
         [](const SignalBlock& s, const SignalBlock&) { return covariance(s).matrix(); }},
        {"pseudo-covariance", CongruenceKind::Transpose, [](const SignalBlock& w) { return pseudo_covariance(w).matrix(); },
         [](const SignalBlock& s, const SignalBlock&) { return pseudo_covariance(s).matrix(); }},
        {"autocorrelation lag 2", CongruenceKind::Hermitian, [](const SignalBlock& w) { return autocorrelation(w, 2).raw; },
         [](const SignalBlock& s, const SignalBlock&) { return autocorrelation(s, 2).raw; }},
        {"pseudo-autocorrelation lag 2", CongruenceKind::Transpose,
         [](const SignalBlock& w) { return pseudo_autocorrelation(w, 2).matrix(); },
         [](const SignalBlock& s, const SignalBlock&) { return pseudo_autocorrelation(s, 2).matrix(); }},
        {"window covariance", CongruenceKind::Hermitian,
         [](const SignalBlock& w) { return windowed_covariances(w, {Window{0, w.samples() / 2}}).front().matrix(); },
         [](const SignalBlock& s, const SignalBlock&) {
             return windowed_covariances(s, {Window{0, s.samples() / 2}}).front().matrix();
         }},
        slice("0000", {0, 1}, {2, 3}),
        slice("0011", {1, 2}, {0, 3}),
        slice("1100", {0, 0}, {1, 2}),
        slice("1111", {2, 0}, {0, 1}),
    };
    std::string detail;
    bool all_ok = true;
    for (const auto& st : stats) {
        int bad = 0;
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const std::uint64_t seed = 8000 + static_cast<std::uint64_t>(trial);
            const auto g = generate({SourceSpec::bpsk(), SourceSpec::ar1(Complex(0.6, 0.3), 0.4),
                                     SourceSpec::noncircular_gaussian(0.7)},
                                    2000, seed);
            const ComplexMatrix a = random_mixing(3, seed, 100.0);
            const SignalBlock w = mix(g.sources, a);
            const ComplexMatrix cw = st.on_mixture(w);
            const ComplexMatrix cs = st.on_sources(g.sources, w);
            const ComplexMatrix at = st.kind == CongruenceKind::Hermitian ? ComplexMatrix(a.adjoint())
                                                                            : ComplexMatrix(a.transpose());
            const double diff = (cw - a * cs * at).norm();
            const double sigma = bootstrap_sigma(
                w, [&](const SignalBlock& b) { return st.on_mixture(b); }, 20, 50, seed);
            const double bound = 5.0 * sigma * std::pow(singular_values(a)(0), 2);
            worst = std::max(worst, diff / bound);
            if (!(diff <= bound)) ++bad;
        }
        all_ok = all_ok && bad == 0;
        detail += fmt("%s%s %d/50 (max ratio %.1e)", detail.empty() ? "" : "; ", st.name.c_str(), bad, worst);
    }
    report("8 multilinearity", all_ok, detail);
}

} // namespace

int main() {
    std::printf("acceptance run\n");
    put_correctness();
    witness_soundness();
    local_search_agreement();
    sut_put_coincidence();
    cumulant_estimator();
    circularity();
    end_to_end();
    multilinearity();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
