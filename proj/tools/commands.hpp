#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nujd/nujd.hpp"

namespace nujd::cli {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_usage = 2, exit_not_unique = 3, exit_numeric = 4 };

/// Input that is well-formed but unsuitable for the requested command.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckOptions {
    std::string input;
    std::optional<double> margin;   ///< predicate tolerance; default τ_rho for spectra, 1e−3 for matrix sets
    double diagonal_tol = 1e-12;    ///< a matrix set counts as diagonal below this relative off-diagonal mass
    double residual_tol = 1e-6;     ///< joint diagonalization acceptance for non-diagonal sets
    std::string out;
};

struct SolveOptions {
    std::string input;
    std::string method = "put";
    double tol = 1e-8;
    std::string out;
};

struct EstimateOptions {
    std::string input;
    bool cov = false;
    bool pseudocov = false;
    std::vector<long long> lags;
    std::vector<long long> plags;
    std::vector<std::string> windows;           ///< "S:L", S a 0-based sample index
    std::vector<std::vector<std::string>> cum4; ///< PATTERN P Q F1 F2, 1-based
    std::string out;
};

struct SimulateOptions {
    std::string input;
    std::optional<std::uint64_t> seed;
    std::string out;
};

namespace detail {

inline void emit(const io::json& j, const std::string& path, std::ostream& out) {
    const std::string text = io::dump(j);
    if (path.empty())
        out << text;
    else
        io::write_file(path, text);
}

inline DiagonalStack stack_of(Eigen::Index m, CongruenceKind kind, const std::vector<ComplexVector>& rows) {
    std::vector<ComplexVector> kept;
    for (const auto& r : rows)
        if (r.cwiseAbs().maxCoeff() > 0.0) kept.push_back(kind == CongruenceKind::Hermitian ? r.real().cast<Complex>() : r);
    return DiagonalStack(m, kind, kept);
}

/// Algebraic joint diagonalizer of a matrix set from its first usable pair.
inline ComplexMatrix algebraic_diagonalizer(const TaggedMatrixSet& set) {
    const auto herm = set.of_kind(CongruenceKind::Hermitian);
    const auto sym = set.of_kind(CongruenceKind::Transpose);
    if (!herm.empty() && !sym.empty()) return put(herm.front(), sym.front()).X.matrix();
    if (herm.size() >= 2) return two_matrix_same_kind(herm[0], herm[1]).matrix();
    if (sym.size() >= 2) return two_matrix_same_kind(sym[0], sym[1]).matrix();
    if (!herm.empty()) return hermitian_evd(herm.front().matrix()).V;
    return takagi(sym.front().matrix()).U;
}

inline int report_exit(const UniquenessReport& r) { return r.unique() ? exit_ok : exit_not_unique; }

} // namespace detail

inline int cmd_check(const CheckOptions& opt, std::ostream& out) {
    const std::string text = io::read_file(opt.input);
    const io::json j = io::parse(text, opt.input);
    if (j.is_object() && j.contains("spectra")) {
        const io::SpectraFile sp = io::spectra_from_json(j);
        const UniquenessReport r = identifiability_master(sp.sym, sp.herm, opt.margin.value_or(tol::rho));
        detail::emit(io::report_to_json(r), opt.out, out);
        return detail::report_exit(r);
    }
    if (!(j.is_object() && j.contains("matrices")))
        fail(ErrorKind::Parse, opt.input + ": expected a matrix set ('matrices') or spectra ('spectra') file");

    const io::MatrixSetFile file = io::matrix_set_from_json(j);
    const TaggedMatrixSet& set = file.set;
    const Eigen::Index m = set.dim();
    double off = 0.0, total = 0.0;
    for (const auto& t : set.items()) {
        off += offdiag_norm2(t.matrix());
        total += t.matrix().squaredNorm();
    }
    ComplexMatrix x = ComplexMatrix::Identity(m, m);
    if (total > 0.0 && std::sqrt(off / total) > opt.diagonal_tol) {
        x = detail::algebraic_diagonalizer(set);
        const double res = offdiag_residual(set, x);
        require(res <= opt.residual_tol, ErrorKind::NotJointlyDiagonalizable,
                "the algebraic diagonalizer leaves residual " + std::to_string(res));
    }
    std::vector<ComplexVector> sym, herm;
    for (const auto& t : set.items()) {
        const ComplexVector d = congruence(x, t.matrix(), t.kind()).diagonal();
        (t.kind() == CongruenceKind::Transpose ? sym : herm).push_back(d);
    }
    const DiagonalStack s = detail::stack_of(m, CongruenceKind::Transpose, sym);
    const DiagonalStack h = detail::stack_of(m, CongruenceKind::Hermitian, herm);
    require(!(s.empty() && h.empty()), ErrorKind::InvalidArgument, "all matrices are zero");
    UniquenessReport r = identifiability_master(s, h, opt.margin.value_or(tol::margin));
    if (r.witness) r.witness.emplace(ComplexMatrix(x * r.witness->matrix()));
    detail::emit(io::report_to_json(r), opt.out, out);
    return detail::report_exit(r);
}

inline int cmd_solve(const SolveOptions& opt, std::ostream& out) {
    const std::string text = io::read_file(opt.input);
    const io::MatrixSetFile file = io::matrix_set_from_json(io::parse(text, opt.input));
    const TaggedMatrixSet& set = file.set;
    const auto herm = set.of_kind(CongruenceKind::Hermitian);
    const auto sym = set.of_kind(CongruenceKind::Transpose);

    io::json sol;
    sol["method"] = opt.method;
    sol["m"] = set.dim();
    sol["input_digest"] = "fnv1a64:" + io::hex64(io::fnv1a64(text));
    ComplexMatrix x;
    if (opt.method == "put" || opt.method == "sut") {
        if (herm.size() != 1 || sym.size() != 1)
            throw UsageError(opt.method + " needs exactly one Hermitian and one transpose matrix, got " +
                             std::to_string(herm.size()) + " and " + std::to_string(sym.size()));
        const PutResult r = opt.method == "put" ? put(herm[0], sym[0]) : sut(herm[0], sym[0]);
        x = r.X.matrix();
        sol["lambda"] = io::vector_to_json(r.lambda);
        sol["eig_gap"] = r.eig_gap;
        sol["warnings"] = r.warnings;
    } else if (opt.method == "gevd") {
        if (set.size() != 2 || set[0].kind() != set[1].kind())
            throw UsageError("gevd needs exactly two matrices of the same kind");
        x = two_matrix_same_kind(set[0], set[1]).matrix();
        sol["lambda"] = nullptr;
        sol["eig_gap"] = nullptr;
        sol["warnings"] = io::json::array();
    } else {
        throw UsageError("unknown method '" + opt.method + "' (expected put, sut or gevd)");
    }
    const double res = offdiag_residual(set, x);
    sol["X"] = io::entries_to_json(x);
    sol["residual"] = res;
    sol["tolerance"] = opt.tol;
    detail::emit(sol, opt.out, out);
    require(res <= opt.tol, ErrorKind::NotJointlyDiagonalizable,
            "residual " + std::to_string(res) + " exceeds the tolerance " + std::to_string(opt.tol));
    return exit_ok;
}

inline std::vector<StatisticRecipe> recipe_from_options(const EstimateOptions& opt) {
    std::vector<StatisticRecipe> recipe;
    if (opt.cov) recipe.push_back(StatisticRecipe::covariance());
    if (opt.pseudocov) recipe.push_back(StatisticRecipe::pseudo_covariance());
    for (auto lag : opt.lags) recipe.push_back(StatisticRecipe::autocorrelation(lag));
    for (auto lag : opt.plags) recipe.push_back(StatisticRecipe::pseudo_autocorrelation(lag));
    for (const auto& w : opt.windows) {
        const auto colon = w.find(':');
        if (colon == std::string::npos) throw UsageError("window '" + w + "' must be START:LENGTH");
        try {
            recipe.push_back(StatisticRecipe::window_covariance(std::stoll(w.substr(0, colon)),
                                                                std::stoll(w.substr(colon + 1))));
        } catch (const std::logic_error&) {
            throw UsageError("window '" + w + "' must be START:LENGTH");
        }
    }
    for (const auto& c : opt.cum4) {
        if (c.size() != 5) throw UsageError("--cum4 takes PATTERN P Q F1 F2");
        std::vector<long long> v;
        try {
            for (std::size_t i = 1; i < 5; ++i) v.push_back(std::stoll(c[i]));
        } catch (const std::logic_error&) {
            throw UsageError("--cum4 axes and fixed indices must be integers");
        }
        const auto pattern = ConjugationPattern::parse(c[0]);
        if (pattern.order() != 4) throw UsageError("--cum4 needs a pattern of four bits");
        recipe.push_back(StatisticRecipe::cumulant(c[0], {static_cast<int>(v[0] - 1), static_cast<int>(v[1] - 1)},
                                                   {v[2] - 1, v[3] - 1}));
    }
    if (recipe.empty()) throw UsageError("empty recipe: give at least one of --cov, --pseudocov, --lag, --plag, "
                                         "--window, --cum4");
    return recipe;
}

inline int cmd_estimate(const EstimateOptions& opt, std::ostream& out) {
    const auto recipe = recipe_from_options(opt);
    const std::string text = io::read_file(opt.input);
    const SignalBlock w = io::signal_from_json(io::parse(text, opt.input));
    const auto mats = estimate(w, recipe);
    io::json prov;
    prov["signal_digest"] = "fnv1a64:" + io::hex64(io::fnv1a64(text));
    io::json r = io::json::array();
    for (const auto& e : recipe) r.push_back(io::recipe_to_json(e));
    prov["recipe"] = std::move(r);
    detail::emit(io::matrix_set_to_json(mats, prov), opt.out, out);
    return exit_ok;
}

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
    ExperimentConfig cfg = io::config_from_json(io::parse(io::read_file(opt.input), opt.input));
    if (opt.seed) cfg.seed = *opt.seed;
    const ExperimentReport rep = run_experiment(cfg);
    detail::emit(io::experiment_report_to_json(rep), opt.out, out);
    return rep.all_completed() ? exit_ok : exit_error;
}

/// Runs a command and maps failures to exit codes, with a one-line message on `err`.
inline int guarded(const std::function<int()>& command, std::ostream& err) {
    try {
        return command();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_numeric() ? exit_numeric : exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

} // namespace nujd::cli
