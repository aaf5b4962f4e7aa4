#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "nujd/recipe.hpp"
#include "nujd/simulation.hpp"
#include "nujd/uniqueness.hpp"

namespace nujd::io {

using json = nlohmann::json;

/// 64-bit FNV-1a, used as an input digest in solution files.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    out << text;
}

/// Canonical text form of every file this library writes.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Parses JSON text; syntax errors report line and column.
inline json parse(const std::string& text, const std::string& what = "input") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        fail(ErrorKind::Parse, what + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                   e.what());
    }
}

/// Runs a schema accessor, mapping JSON type errors to parse errors.
template <class F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, what + ": " + e.what());
    }
}

inline json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const json& j) {
    require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), ErrorKind::Parse,
            "complex numbers are written as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json entries_to_json(const ComplexMatrix& a) {
    json e = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) e.push_back(to_json(a(i, j)));
    return e;
}

inline ComplexMatrix entries_from_json(const json& e, Eigen::Index rows, Eigen::Index cols) {
    require(e.is_array() && static_cast<Eigen::Index>(e.size()) == rows * cols, ErrorKind::Parse,
            "expected " + std::to_string(rows * cols) + " entries");
    ComplexMatrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = complex_from_json(e[static_cast<std::size_t>(i * cols + j)]);
    return a;
}

inline json vector_to_json(const ComplexVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

inline ComplexVector vector_from_json(const json& a) {
    require(a.is_array(), ErrorKind::Parse, "expected an array of [re, im] pairs");
    ComplexVector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(a[i]);
    return v;
}

inline Eigen::Index dimension_from_json(const json& j) {
    require(j.contains("m") && j["m"].is_number_integer() && j["m"].get<long long>() >= 1, ErrorKind::Parse,
            "field 'm' must be a positive integer");
    return static_cast<Eigen::Index>(j["m"].get<long long>());
}

// ---------------------------------------------------------------------------
// Matrix sets

struct MatrixSetFile {
    TaggedMatrixSet set;
    json provenance; ///< null when absent
};

inline json matrix_set_to_json(const std::vector<TaggedMatrix>& items, const json& provenance = nullptr) {
    require(!items.empty(), ErrorKind::InvalidArgument, "matrix set must not be empty");
    json j;
    j["m"] = items.front().dim();
    json mats = json::array();
    for (const auto& t : items)
        mats.push_back({{"kind", std::string(to_string(t.kind()))}, {"entries", entries_to_json(t.matrix())}});
    j["matrices"] = std::move(mats);
    if (!provenance.is_null()) j["provenance"] = provenance;
    return j;
}

inline MatrixSetFile matrix_set_from_json(const json& j) {
    return guarded("matrix set", [&] {
        require(j.is_object() && j.contains("matrices") && j["matrices"].is_array(), ErrorKind::Parse,
                "matrix set needs a 'matrices' array");
        const Eigen::Index m = dimension_from_json(j);
        std::vector<TaggedMatrix> items;
        for (const auto& e : j["matrices"]) {
            const CongruenceKind kind = parse_kind(e.at("kind").get<std::string>());
            items.emplace_back(entries_from_json(e.at("entries"), m, m), kind);
        }
        return MatrixSetFile{TaggedMatrixSet(std::move(items)), j.value("provenance", json())};
    });
}

// ---------------------------------------------------------------------------
// Spectra

struct SpectraFile {
    DiagonalStack sym;
    DiagonalStack herm;
};

inline json spectra_to_json(const DiagonalStack& sym, const DiagonalStack& herm) {
    json j;
    j["m"] = sym.dim();
    json s = json::array();
    for (const DiagonalStack* st : {&sym, &herm})
        for (Eigen::Index i = 0; i < st->size(); ++i)
            s.push_back({{"kind", std::string(to_string(st->kind()))}, {"diagonal", vector_to_json(st->spectrum(i))}});
    j["spectra"] = std::move(s);
    return j;
}

/// Hermitian-kind spectra with imaginary parts are split into real and
/// imaginary spectra, mirroring the Hermitian/skew-Hermitian split of matrices.
inline SpectraFile spectra_from_json(const json& j) {
    return guarded("spectra", [&] {
        require(j.is_object() && j.contains("spectra") && j["spectra"].is_array(), ErrorKind::Parse,
                "spectra file needs a 'spectra' array");
        const Eigen::Index m = dimension_from_json(j);
        std::vector<ComplexVector> sym, herm;
        for (const auto& e : j["spectra"]) {
            const CongruenceKind kind = parse_kind(e.at("kind").get<std::string>());
            const ComplexVector d = vector_from_json(e.at("diagonal"));
            require(d.size() == m, ErrorKind::Parse, "spectrum length differs from m");
            if (d.cwiseAbs().maxCoeff() == 0.0) continue;
            if (kind == CongruenceKind::Transpose) {
                sym.push_back(d);
                continue;
            }
            const double mx = d.cwiseAbs().maxCoeff();
            herm.push_back(d.real().cast<Complex>());
            if (d.imag().cwiseAbs().maxCoeff() > tol::real * mx) herm.push_back(d.imag().cast<Complex>());
        }
        return SpectraFile{DiagonalStack(m, CongruenceKind::Transpose, sym),
                           DiagonalStack(m, CongruenceKind::Hermitian, herm)};
    });
}

// ---------------------------------------------------------------------------
// Uniqueness reports

inline json report_to_json(const UniquenessReport& r) {
    json j;
    j["verdict"] = std::string(to_string(r.verdict));
    j["rule"] = std::string(to_string(r.rule));
    j["m"] = r.m;
    j["rho_transpose"] = r.rho_transpose ? json(*r.rho_transpose) : json();
    j["rho_hermitian"] = r.rho_hermitian ? json(*r.rho_hermitian) : json();
    j["pair"] = r.violating_pair ? json::array({r.violating_pair->first + 1, r.violating_pair->second + 1}) : json();
    if (r.witness) j["witness"] = entries_to_json(r.witness->matrix());
    return j;
}

inline UniquenessReport report_from_json(const json& j) {
    return guarded("report", [&] {
        UniquenessReport r;
        const std::string v = j.at("verdict").get<std::string>();
        require(v == "Unique" || v == "NotUnique", ErrorKind::Parse, "unknown verdict '" + v + "'");
        r.verdict = v == "Unique" ? Verdict::Unique : Verdict::NotUnique;
        r.rule = parse_rule(j.at("rule").get<std::string>());
        r.m = dimension_from_json(j);
        if (!j.at("rho_transpose").is_null()) r.rho_transpose = j["rho_transpose"].get<double>();
        if (!j.at("rho_hermitian").is_null()) r.rho_hermitian = j["rho_hermitian"].get<double>();
        if (!j.at("pair").is_null())
            r.violating_pair = IndexPair{j["pair"].at(0).get<Eigen::Index>() - 1, j["pair"].at(1).get<Eigen::Index>() - 1};
        if (j.contains("witness")) r.witness.emplace(entries_from_json(j["witness"], r.m, r.m));
        return r;
    });
}

// ---------------------------------------------------------------------------
// Signals

inline json signal_to_json(const SignalBlock& w, const json& truth = nullptr) {
    json j;
    j["m"] = w.channels();
    j["T"] = w.samples();
    json ch = json::array();
    for (Eigen::Index i = 0; i < w.channels(); ++i) {
        json c = json::array();
        for (Complex v : w.channel(i)) c.push_back(to_json(v));
        ch.push_back(std::move(c));
    }
    j["channels"] = std::move(ch);
    if (!truth.is_null()) j["truth"] = truth;
    return j;
}

inline SignalBlock signal_from_json(const json& j) {
    return guarded("signal", [&] {
        const Eigen::Index m = dimension_from_json(j);
        const auto t = j.at("T").get<Eigen::Index>();
        const json& ch = j.at("channels");
        require(ch.is_array() && static_cast<Eigen::Index>(ch.size()) == m, ErrorKind::Parse,
                "expected " + std::to_string(m) + " channels");
        SignalBlock::Data d(m, t);
        for (Eigen::Index i = 0; i < m; ++i) {
            const json& c = ch[static_cast<std::size_t>(i)];
            require(c.is_array() && static_cast<Eigen::Index>(c.size()) == t, ErrorKind::Parse,
                    "channel " + std::to_string(i + 1) + " does not have T samples");
            for (Eigen::Index k = 0; k < t; ++k) d(i, k) = complex_from_json(c[static_cast<std::size_t>(k)]);
        }
        return SignalBlock(std::move(d));
    });
}

// ---------------------------------------------------------------------------
// Recipes, sources, experiments. Channel indices and axes are 1-based in files.

inline json recipe_to_json(const StatisticRecipe& r) {
    json j;
    j["statistic"] = std::string(to_string(r.kind));
    switch (r.kind) {
    case StatisticKind::Autocorrelation:
        j["lag"] = r.lag;
        j["part"] = std::string(to_string(r.part));
        break;
    case StatisticKind::PseudoAutocorrelation: j["lag"] = r.lag; break;
    case StatisticKind::WindowCovariance:
        j["start"] = r.window.start;
        j["length"] = r.window.length;
        break;
    case StatisticKind::Cumulant: {
        j["pattern"] = r.pattern;
        j["axes"] = json::array({r.axes.first + 1, r.axes.second + 1});
        json f = json::array();
        for (auto v : r.fixed) f.push_back(v + 1);
        j["fixed"] = std::move(f);
        j["part"] = std::string(to_string(r.part));
        break;
    }
    default: break;
    }
    return j;
}

inline StatisticRecipe recipe_from_json(const json& j) {
    return guarded("statistic", [&] {
        StatisticRecipe r;
        r.kind = parse_statistic(j.at("statistic").get<std::string>());
        r.lag = j.value("lag", Eigen::Index{0});
        if (j.contains("part")) r.part = parse_part(j["part"].get<std::string>());
        if (r.kind == StatisticKind::WindowCovariance)
            r.window = {j.at("start").get<Eigen::Index>(), j.at("length").get<Eigen::Index>()};
        if (r.kind == StatisticKind::Cumulant) {
            r.pattern = j.at("pattern").get<std::string>();
            const auto pattern = ConjugationPattern::parse(r.pattern);
            r.axes = {j.at("axes").at(0).get<int>() - 1, j.at("axes").at(1).get<int>() - 1};
            for (const auto& f : j.at("fixed")) r.fixed.push_back(f.get<Eigen::Index>() - 1);
            require(static_cast<int>(r.fixed.size()) == pattern.order() - 2, ErrorKind::Parse,
                    "cumulant needs order - 2 fixed indices");
        }
        return r;
    });
}

inline json source_to_json(const SourceSpec& s) {
    json j;
    j["kind"] = std::string(to_string(s.kind));
    j["power"] = s.power;
    if (s.kind == SourceKind::NoncircularGaussian || s.kind == SourceKind::AR1Noncircular) j["lambda"] = s.lambda;
    if (s.kind == SourceKind::AR1Noncircular) j["coefficient"] = to_json(s.coefficient);
    if (s.kind == SourceKind::BlockNonstationary) j["variances"] = s.variances;
    return j;
}

inline SourceSpec source_from_json(const json& j) {
    return guarded("source", [&] {
        SourceSpec s;
        s.kind = parse_source_kind(j.at("kind").get<std::string>());
        s.power = j.value("power", 1.0);
        s.lambda = j.value("lambda", 0.0);
        if (j.contains("coefficient")) {
            const json& c = j["coefficient"];
            s.coefficient = c.is_number() ? Complex(c.get<double>(), 0.0) : complex_from_json(c);
        }
        if (j.contains("variances")) s.variances = j["variances"].get<std::vector<double>>();
        s.validate();
        return s;
    });
}

inline json truth_to_json(const ExperimentTruth& t) {
    json j;
    j["A"] = entries_to_json(t.A);
    json src = json::array();
    for (const auto& s : t.sources) src.push_back(source_to_json(s));
    j["sources"] = std::move(src);
    j["seed"] = t.seed;
    return j;
}

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    json src = json::array();
    for (const auto& s : c.sources) src.push_back(source_to_json(s));
    j["sources"] = std::move(src);
    j["m"] = c.sources.size();
    j["T"] = c.samples;
    j["seed"] = c.seed;
    json st = json::array();
    for (const auto& r : c.statistics) st.push_back(recipe_to_json(r));
    j["statistics"] = std::move(st);
    j["solver"] = std::string(to_string(c.solver));
    j["trials"] = c.trials;
    j["mixing_cap"] = c.mixing_cap;
    j["noise_sigma"] = c.noise_sigma;
    j["margin"] = c.margin;
    j["equivalence_tol"] = c.equivalence_tol;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    return guarded("experiment config", [&] {
        ExperimentConfig c;
        require(j.is_object(), ErrorKind::Parse, "config must be an object");
        for (const auto& s : j.at("sources")) c.sources.push_back(source_from_json(s));
        if (j.contains("m"))
            require(j["m"].get<std::size_t>() == c.sources.size(), ErrorKind::Parse,
                    "'m' does not match the number of sources");
        c.samples = j.at("T").get<Eigen::Index>();
        c.seed = j.value("seed", std::uint64_t{0});
        for (const auto& r : j.at("statistics")) c.statistics.push_back(recipe_from_json(r));
        c.solver = parse_solver(j.at("solver").get<std::string>());
        c.trials = j.value("trials", 1);
        c.mixing_cap = j.value("mixing_cap", 100.0);
        c.noise_sigma = j.value("noise_sigma", 0.0);
        c.margin = j.value("margin", tol::margin);
        c.equivalence_tol = j.value("equivalence_tol", 0.05);
        c.validate();
        return c;
    });
}

inline json experiment_report_to_json(const ExperimentReport& r) {
    json j;
    j["config"] = config_to_json(r.config);
    json trials = json::array();
    for (const auto& t : r.trials) {
        json e;
        e["trial"] = t.trial;
        e["seed"] = t.seed;
        e["verdict"] = std::string(to_string(t.verdict));
        e["rule"] = std::string(to_string(t.rule));
        e["pair_verdict"] = t.pair_verdict ? json(std::string(to_string(*t.pair_verdict))) : json();
        e["amari"] = t.amari ? json(*t.amari) : json();
        e["residual"] = t.residual ? json(*t.residual) : json();
        e["eig_gap"] = t.eig_gap ? json(*t.eig_gap) : json();
        e["essentially_equivalent"] = t.essentially_equivalent ? json(*t.essentially_equivalent) : json();
        e["warnings"] = t.warnings;
        e["error"] = t.error.empty() ? json() : json(t.error);
        trials.push_back(std::move(e));
    }
    j["trials"] = std::move(trials);
    if (r.amari) {
        j["amari"] = {{"median", r.amari->median}, {"q1", r.amari->q1}, {"q3", r.amari->q3},
                      {"iqr", r.amari->iqr},       {"count", r.amari->count}};
    } else {
        j["amari"] = nullptr;
    }
    return j;
}

} // namespace nujd::io
