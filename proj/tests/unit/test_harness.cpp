#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oldroyd/errors.hpp"
#include "oldroyd/harness.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"
#include "oldroyd/presets.hpp"
#include "support.hpp"

using namespace oldroyd;
using namespace testing_support;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path source(const std::string& rel) { return fs::path(OLDROYD_SOURCE_DIR) / rel; }

// Fresh scratch directory per test.
fs::path scratch() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    const fs::path p = fs::temp_directory_path() / "oldroyd_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CommandOptions quiet(const fs::path& dir) {
    CommandOptions o;
    o.out_dir = dir;
    return o;
}

json summary(const fs::path& dir) {
    std::ifstream in(dir / "summary.json");
    return json::parse(in);
}

std::vector<std::vector<double>> read_csv(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "test.cfg");
}

}  // namespace

TEST(Config, DefaultRoundTrip) {
    const RunConfig c;
    EXPECT_EQ(parse(serialize_config(c)), c);
}

TEST(Config, ModifiedRoundTrip) {
    RunConfig c;
    c.dim = 3;
    c.n = 12;
    c.eps = 0.0371;
    c.pressure_kind = "table";
    c.table_rho = {0.2, 0.9, 1.7};
    c.table_dp_drho = {1.0, 1.25, 3.0};
    c.uniqueness_resolutions = {16, 48};
    c.probe_component = "psi";
    c.snapshots = false;
    c.T = 0.01;
    c.dt = 1.0 / 3000.0;
    const RunConfig back = parse(serialize_config(c));
    EXPECT_EQ(back, c);
}

TEST(Config, ShippedConfigsLoad) {
    for (const char* f : {"zero", "smalldata2d", "band_violation", "uniqueness", "mms", "probe"})
        EXPECT_NO_THROW(load_config(source("configs/" + std::string(f) + ".cfg"))) << f;
}

TEST(Config, UnknownKeyNamesLine) {
    try {
        parse("grid.n = 16\n# comment\n\nfluid.viscosity = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        EXPECT_NE(m.find("test.cfg:4"), std::string::npos) << m;
        EXPECT_NE(m.find("fluid.viscosity"), std::string::npos) << m;
    }
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse("fluid.eps = 0.1x\n"), ConfigError);
    EXPECT_THROW(parse("grid.n = 3.5\n"), ConfigError);
    EXPECT_THROW(parse("fluid.eps = nan\n"), ConfigError);
    EXPECT_THROW(parse("just some words\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/oldroyd.cfg"), ConfigError);
}

TEST(Config, TimeStepMustDivideHorizon) {
    RunConfig c;
    c.T = 0.01;
    c.dt = 3e-3;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("multiple"), std::string::npos);
    }
    c.dt = 2.5e-3;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.steps(), 4u);
}

TEST(Presets, VortexIsDirichletAndNearlySolenoidal) {
    const auto g = unit(2, 64);
    const VectorField v = velocity_preset("vortex", g, 1.0);
    EXPECT_TRUE(v.satisfies_dirichlet());
    EXPECT_LT(norm(divergence(v)), 0.01 * norm(gradient(v)));
}

TEST(Presets, CosineDensityHasZeroMean) {
    for (int dim : {2, 3}) {
        const auto g = unit(dim, dim == 2 ? 20 : 8);
        EXPECT_LT(std::abs(mean(density_preset("cosine-density", g, 3.0))), 1e-14);
    }
}

TEST(Presets, UnknownNameIsConfigError) {
    const auto g = unit(2, 8);
    EXPECT_THROW(velocity_preset("tornado", g, 1.0), ConfigError);
    EXPECT_THROW(density_preset("lumpy", g, 1.0), ConfigError);
    RunConfig c;
    c.ic_stress = "twisted";
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Ledger, ColumnOrderIsFixed) {
    const fs::path dir = scratch();
    ASSERT_EQ(run_command("run", source("configs/zero.cfg"), quiet(dir)), kExitOk);
    std::ifstream e(dir / "energy_ledger.csv"), c(dir / "convergence.csv");
    std::string he, hc;
    std::getline(e, he);
    std::getline(c, hc);
    EXPECT_EQ(he,
              "t,lhs_4_6,rhs_4_6,slack_4_6,c1_emp,lin_iters,lin_residual,mean_sigma_preproject,"
              "density_band_min,density_band_max,sup_tau_h2,fitted_C_omega");
    EXPECT_EQ(hc, "iteration,distance,contraction_ratio,membership_slack_min,distance_w,distance_pi,distance_psi");
}

TEST(RunCommand, ZeroDataLedgersStayZero) {
    const fs::path dir = scratch();
    ASSERT_EQ(run_command("run", source("configs/zero.cfg"), quiet(dir)), kExitOk);
    const auto rows = read_csv(dir / "energy_ledger.csv");
    ASSERT_EQ(rows.size(), 11u);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        const auto& r = rows[n];
        if (n > 0) {
            EXPECT_GT(r[0], rows[n - 1][0]);
        }
        for (int k : {1, 2, 3, 4, 7, 10}) EXPECT_EQ(r[k], 0.0);
    }
    EXPECT_EQ(summary(dir)["status"], "ok");
}

TEST(RunCommand, BandViolationIsConfigError) {
    const fs::path dir = scratch();
    EXPECT_EQ(run_command("run", source("configs/band_violation.cfg"), quiet(dir)), kExitConfig);
    const json s = summary(dir);
    EXPECT_EQ(s["exit_code"], kExitConfig);
    EXPECT_NE(s["message"].get<std::string>().find("m1 <= alpha + eps^2 sigma0 <= M1"), std::string::npos);
}

TEST(RunCommand, MissingConfigIsConfigError) {
    const fs::path dir = scratch();
    EXPECT_EQ(run_command("run", dir / "missing.cfg", quiet(dir)), kExitConfig);
    EXPECT_EQ(summary(dir)["status"], "config_error");
}

TEST(RunCommand, SmallDataSummary) {
    const fs::path dir = scratch();
    ASSERT_EQ(run_command("run", source("configs/smalldata2d.cfg"), quiet(dir)), kExitOk);
    const json s = summary(dir);
    for (const char* k : {"B1", "B2", "T_star", "energy_estimate", "regularity_estimate", "density_bounds",
                          "stress_bounds", "membership", "coupled_residual", "invariants"})
        EXPECT_TRUE(s.contains(k)) << k;
    EXPECT_TRUE(s["violated"].empty());
    for (const auto& inv : s["invariants"]) EXPECT_TRUE(inv["pass"].get<bool>()) << inv["name"];
    EXPECT_TRUE(fs::exists(dir / "convergence.csv"));
    EXPECT_TRUE(fs::exists(dir / "snapshots" / "sigma_final.txt"));
}

TEST(RunCommand, IterationCapIsNonConvergence) {
    const fs::path dir = scratch();
    RunConfig c = load_config(source("configs/smalldata2d.cfg"));
    c.max_iter = 1;
    EXPECT_EQ(cli_run(c, quiet(dir)), kExitNonConvergence);
    const json s = summary(dir);
    EXPECT_EQ(s["status"], "non_convergence");
    EXPECT_EQ(s["violated"][0], "fixed_point_convergence");
}

TEST(RunCommand, Deterministic) {
    const fs::path base = scratch(), a = base / "a", b = base / "b";
    RunConfig c = load_config(source("configs/smalldata2d.cfg"));
    c.n = 16;
    ASSERT_EQ(cli_run(c, quiet(a)), kExitOk);
    ASSERT_EQ(cli_run(c, quiet(b)), kExitOk);
    for (const char* f : {"energy_ledger.csv", "convergence.csv", "summary.json", "snapshots/tau_final.txt"})
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
}

TEST(UniquenessCommand, DeltaAboveThresholdIsConfigError) {
    const fs::path dir = scratch();
    RunConfig c = load_config(source("configs/uniqueness.cfg"));
    c.uniqueness_delta = 10.0;
    EXPECT_EQ(cli_uniqueness(c, quiet(dir)), kExitConfig);
    const std::string m = summary(dir)["message"];
    EXPECT_NE(m.find("positivity threshold 6.66666"), std::string::npos) << m;
}

TEST(UniquenessCommand, ZeroPerturbationGivesZeroDistance) {
    const fs::path dir = scratch();
    RunConfig c = load_config(source("configs/uniqueness.cfg"));
    c.uniqueness_amplitude = 0.0;
    c.uniqueness_resolutions = {16};
    ASSERT_EQ(cli_uniqueness(c, quiet(dir)), kExitOk);
    for (const auto& r : read_csv(dir / "uniqueness_16.csv")) EXPECT_EQ(r[1], 0.0);
}

TEST(ProbeCommand, RatiosNearTwo) {
    const fs::path dir = scratch();
    RunConfig c = load_config(source("configs/probe.cfg"));
    c.n = 16;
    ASSERT_EQ(cli_probe(c, quiet(dir)), kExitOk);
    const json s = summary(dir);
    for (double r : s["ratios"]) EXPECT_NEAR(r, 2.0, 0.01);
    EXPECT_EQ(s["psi_only_density_change"], 0.0);
}

TEST(MmsCommand, AllStudiesPass) {
    const fs::path dir = scratch();
    EXPECT_EQ(run_command("mms", source("configs/mms.cfg"), quiet(dir)), kExitOk);
    EXPECT_TRUE(summary(dir)["violated"].empty());
    EXPECT_NE(read_file(dir / "mms.csv").find("exact"), std::string::npos);
}

TEST(MmsCommand, TooFewResolutionsIsConfigError) {
    const fs::path dir = scratch();
    RunConfig c = load_config(source("configs/mms.cfg"));
    c.mms_resolutions = {16, 32};
    EXPECT_EQ(cli_mms(c, quiet(dir)), kExitConfig);
}

TEST(Commands, UnknownCommandIsConfigError) {
    const fs::path dir = scratch();
    EXPECT_EQ(run_command("simulate", source("configs/zero.cfg"), quiet(dir)), kExitConfig);
}
