#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace nujd;
namespace fs = std::filesystem;

namespace {

std::string sample(const std::string& name) { return std::string(NUJD_SAMPLES_DIR) + "/" + name; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("nujd_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

int run(const std::function<int()>& f, std::string* err_text = nullptr) {
    std::ostringstream err;
    const int code = cli::guarded(f, err);
    if (err_text) *err_text = err.str();
    return code;
}

io::json read_json(const std::string& path) { return io::parse(io::read_file(path)); }

} // namespace

TEST_F(Cli, CheckSpectraFiles) {
    std::ostringstream out;
    cli::CheckOptions opt;
    opt.input = sample("spectra_unique.json");
    EXPECT_EQ(run([&] { return cli::cmd_check(opt, out); }), cli::exit_ok);
    EXPECT_NE(out.str().find("\"Unique\""), std::string::npos);

    opt.input = sample("spectra_not_unique.json");
    opt.out = path("report.json");
    EXPECT_EQ(run([&] { return cli::cmd_check(opt, out); }), cli::exit_not_unique);
    const io::json rep = read_json(opt.out);
    EXPECT_EQ(rep["verdict"], "NotUnique");
    EXPECT_EQ(rep["pair"], io::json::array({2, 3}));
    ASSERT_TRUE(rep.contains("witness"));
    const auto report = io::report_from_json(rep);
    const auto spectra = io::spectra_from_json(read_json(opt.input));
    const GLElement& w = *report.witness;
    EXPECT_LE(offdiag_residual(spectra.sym.matrices(), w), 1e-10);
    EXPECT_LE(offdiag_residual(spectra.herm.matrices(), w), 1e-10);
    EXPECT_FALSE(is_essentially_equivalent(w, ComplexMatrix::Identity(3, 3)).equivalent);
}

TEST_F(Cli, CheckMatrixSetDiagonalizesFirst) {
    std::ostringstream out;
    cli::CheckOptions opt;
    opt.input = sample("put_pair.json");
    EXPECT_EQ(run([&] { return cli::cmd_check(opt, out); }), cli::exit_ok);
}

TEST_F(Cli, SolveMethods) {
    for (const std::string method : {"put", "sut"}) {
        cli::SolveOptions opt;
        opt.input = sample("put_pair.json");
        opt.method = method;
        opt.out = path("x_" + method + ".json");
        std::ostringstream out;
        ASSERT_EQ(run([&] { return cli::cmd_solve(opt, out); }), cli::exit_ok) << method;
        const io::json sol = read_json(opt.out);
        EXPECT_EQ(sol["method"], method);
        EXPECT_LE(sol["residual"].get<double>(), 1e-8);
        EXPECT_EQ(sol["input_digest"].get<std::string>().rfind("fnv1a64:", 0), 0u);
    }
    cli::SolveOptions opt;
    opt.input = sample("hermitian_pair.json");
    opt.method = "gevd";
    std::ostringstream out;
    EXPECT_EQ(run([&] { return cli::cmd_solve(opt, out); }), cli::exit_ok);
    opt.method = "put";
    EXPECT_EQ(run([&] { return cli::cmd_solve(opt, out); }), cli::exit_usage);
    opt.input = sample("singular_pair.json");
    std::string err;
    EXPECT_EQ(run([&] { return cli::cmd_solve(opt, out); }, &err), cli::exit_numeric);
    EXPECT_NE(err.find("error:"), std::string::npos);
}

TEST_F(Cli, SolutionsAreDeterministic) {
    cli::SolveOptions opt;
    opt.input = sample("put_pair.json");
    std::ostringstream a, b;
    ASSERT_EQ(run([&] { return cli::cmd_solve(opt, a); }), cli::exit_ok);
    ASSERT_EQ(run([&] { return cli::cmd_solve(opt, b); }), cli::exit_ok);
    EXPECT_EQ(a.str(), b.str());
}

TEST_F(Cli, EstimateFeedsCheckAndSolve) {
    cli::EstimateOptions est;
    est.input = sample("signal.json");
    est.cov = true;
    est.pseudocov = true;
    est.out = path("stats.json");
    std::ostringstream out;
    ASSERT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_ok);
    const auto set = io::matrix_set_from_json(read_json(est.out));
    EXPECT_EQ(set.set.size(), 2u);
    EXPECT_TRUE(set.provenance.contains("signal_digest"));
    EXPECT_EQ(set.provenance["recipe"].size(), 2u);

    cli::SolveOptions solve;
    solve.input = est.out;
    solve.tol = 1e-6;
    EXPECT_EQ(run([&] { return cli::cmd_solve(solve, out); }), cli::exit_ok);

    cli::CheckOptions check;
    check.input = est.out;
    const int code = run([&] { return cli::cmd_check(check, out); });
    EXPECT_TRUE(code == cli::exit_ok || code == cli::exit_not_unique) << code;
}

TEST_F(Cli, EstimateFourthOrderSlice) {
    cli::EstimateOptions est;
    est.input = sample("signal.json");
    est.cum4 = {{"0000", "3", "4", "1", "1"}};
    std::ostringstream out;
    ASSERT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_ok);
    const auto set = io::matrix_set_from_json(io::parse(out.str()));
    ASSERT_EQ(set.set.size(), 1u);
    EXPECT_EQ(set.set[0].kind(), CongruenceKind::Transpose);
    EXPECT_EQ(set.provenance["recipe"][0]["axes"], io::json::array({3, 4}));
    EXPECT_EQ(set.provenance["recipe"][0]["fixed"], io::json::array({1, 1}));
}

TEST_F(Cli, EstimateUsageErrors) {
    cli::EstimateOptions est;
    est.input = sample("signal.json");
    std::ostringstream out;
    EXPECT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_usage);
    est.windows = {"12"};
    EXPECT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_usage);
    est.windows = {};
    est.cum4 = {{"010", "1", "2", "1", "1"}};
    EXPECT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_usage);
    est.cum4 = {{"0101", "1", "x", "1", "1"}};
    EXPECT_EQ(run([&] { return cli::cmd_estimate(est, out); }), cli::exit_usage);
}

TEST_F(Cli, InputErrors) {
    std::ostringstream out;
    cli::CheckOptions opt;
    opt.input = sample("malformed.json");
    std::string err;
    EXPECT_EQ(run([&] { return cli::cmd_check(opt, out); }, &err), cli::exit_error);
    EXPECT_NE(err.find("line"), std::string::npos) << err;
    opt.input = path("missing.json");
    EXPECT_EQ(run([&] { return cli::cmd_check(opt, out); }), cli::exit_error);
}

TEST_F(Cli, SimulateIsSeeded) {
    io::json cfg = read_json(sample("experiment.json"));
    cfg["T"] = 1000;
    cfg["trials"] = 2;
    io::write_file(path("cfg.json"), io::dump(cfg));
    cli::SimulateOptions opt;
    opt.input = path("cfg.json");
    std::ostringstream a, b, c;
    ASSERT_EQ(run([&] { return cli::cmd_simulate(opt, a); }), cli::exit_ok);
    ASSERT_EQ(run([&] { return cli::cmd_simulate(opt, b); }), cli::exit_ok);
    EXPECT_EQ(a.str(), b.str());
    opt.seed = 12345;
    ASSERT_EQ(run([&] { return cli::cmd_simulate(opt, c); }), cli::exit_ok);
    EXPECT_NE(a.str(), c.str());
    const io::json rep = io::parse(c.str());
    EXPECT_EQ(rep["config"]["seed"], 12345);
    EXPECT_EQ(rep["trials"].size(), 2u);
}
