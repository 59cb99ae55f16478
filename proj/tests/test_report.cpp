#include "adeqsim/report.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adeqsim;
namespace fs = std::filesystem;

namespace
{

std::string
fixture(const std::string& name)
{
    return std::string(ADEQSIM_FIXTURES) + "/" + name;
}

std::string
slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>>
read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
        {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',')
        {
            cells.emplace_back();
        }
        rows.push_back(cells);
    }
    return rows;
}

class Cli : public ::testing::Test
{
  protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("adeqsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args)
    {
        const std::string cmd = std::string(ADEQSIM_CLI) + " " + args + " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string stderr_text() { return slurp(dir_ / "stderr.txt"); }

    fs::path dir_;
};

} // namespace

TEST(Format, TenSignificantDigits)
{
    EXPECT_EQ(format_float(0.1), "0.1");
    EXPECT_EQ(format_float(1.0 / 3.0), "0.3333333333");
    EXPECT_EQ(format_float(123456789012.0), "1.23456789e+11");
    EXPECT_EQ(format_float(0.0), "0");
}

TEST(Reports, JsonCarriesUnitsAndContext)
{
    ReliabilityReport r;
    r.eens_theoretical = 10.0;
    r.eens_practical = 12.5;
    r.samples = 2;
    r.sample_eens_practical = {10.0, 15.0};
    r.running_cov = {0.0, 0.2};
    const nlohmann::json j = nlohmann::json::parse(reliability_json(r, RunContext{}));
    EXPECT_EQ(j["eens_practical_mwh_per_yr"], 12.5);
    EXPECT_EQ(j["final_cov"], 0.2);
    EXPECT_EQ(j["run"]["strategy"], "coordinated");
    EXPECT_EQ(j["run"]["mode"], "U2");

    CcResult c;
    c.capacity = 5.0;
    c.trace = {{0.0, 100.0}, {5.0, 80.0}};
    const nlohmann::json k = nlohmann::json::parse(cc_json(c, RunContext{}));
    EXPECT_EQ(k["index"], "EGCS");
    EXPECT_EQ(k["trace"].size(), 2u);
    EXPECT_EQ(k["trace"][1]["eens_mwh_per_yr"], 80.0);
}

TEST(Reports, CsvHeaders)
{
    ReliabilityReport r;
    r.sample_eens_practical = {10.0, 20.0};
    r.running_cov = {0.0, 0.5};
    const std::string conv = convergence_csv(r);
    EXPECT_EQ(conv, "year,eens_mwh_per_yr,running_eens_mwh_per_yr,cov\n1,10,10,0\n2,20,15,0.5\n");
    CurtailmentRecord c;
    c.hour = 3;
    c.bus = 1;
    c.mw = 2.5;
    c.cause = CurtailmentRecord::Cause::kCongestion;
    EXPECT_EQ(curtailment_csv({c}), "scenario,hour,bus,mw,cause\n0,3,1,2.5,congestion\n");
    SweepRow bad;
    bad.value = 2.0;
    bad.error = "x, y";
    EXPECT_EQ(sweep_csv({bad}), "value,eens_t_mwh_per_yr,eens_p_mwh_per_yr,lolp,cc_mw,cc_normalized,error\n"
                                "2,,,,,,x  y\n");
}

TEST(Sweep, ParseSpec)
{
    const SweepSpec s = parse_sweep_spec(R"({"parameter": "duration_hours", "values": [2, 4, 6], "index": "EGCS"})");
    EXPECT_EQ(s.parameter, SweepParameter::kDurationHours);
    EXPECT_EQ(s.values, (std::vector<double>{2, 4, 6}));
    ASSERT_TRUE(s.index);
    EXPECT_EQ(*s.index, CcIndex::kEGCS);
    EXPECT_THROW(parse_sweep_spec(R"({"parameter": "colour", "values": [1]})"), ValidationError);
    EXPECT_THROW(parse_sweep_spec(R"({"parameter": "gamma", "values": []})"), ValidationError);
    EXPECT_THROW(parse_sweep_spec("{"), ValidationError);
}

TEST(Sweep, ApplyValue)
{
    const SystemModel m = load_system_file(fixture("rts24.json"));
    const SystemModel a = apply_sweep_value(m, SweepParameter::kDurationHours, 6.0);
    EXPECT_EQ(a.study.ges_fleet->duration_hours, 6.0);
    const SystemModel b = apply_sweep_value(m, SweepParameter::kEfficiency, 0.8);
    EXPECT_EQ(b.study.ges_fleet->unit.eta_c, 0.8);
    EXPECT_EQ(b.study.ges_fleet->unit.eta_d, 0.8);
    EXPECT_THROW(apply_sweep_value(m, SweepParameter::kEfficiency, 1.5), ValidationError);
    const SystemModel smoke = load_system_file(fixture("smoke_1bus.json"));
    EXPECT_THROW(apply_sweep_value(smoke, SweepParameter::kDurationHours, 2.0), ValidationError);
    EXPECT_EQ(apply_sweep_value(smoke, SweepParameter::kSelfDischarge, 0.01).ges_units[0].self_discharge, 0.01);
}

TEST(Sweep, BadRowDoesNotStopOthers)
{
    const SystemModel m = load_system_file(fixture("smoke_1bus.json"));
    SweepSpec s;
    s.parameter = SweepParameter::kEfficiency;
    s.values = {0.9, 1.5, 0.8};
    CcQuery q;
    q.reliability.scenarios = 3;
    const auto rows = run_sweep(m, s, q, std::nullopt);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_TRUE(rows[2].error.empty());
    EXPECT_GE(rows[2].eens_practical, rows[0].eens_practical - 1e-9);
}

TEST_F(Cli, EvaluateWritesBothReports)
{
    ASSERT_EQ(run("evaluate --config " + fixture("smoke_1bus.json") +
                  " --strategy coordinated --mode U3 --index EGCS --scenarios 5 --out " + dir_.string()),
              0)
        << stderr_text();
    const auto rel = nlohmann::json::parse(slurp(dir_ / "reliability.json"));
    const auto cc = nlohmann::json::parse(slurp(dir_ / "cc.json"));
    EXPECT_EQ(rel["run"]["mode"], "U3");
    EXPECT_EQ(rel["samples"], 5);
    EXPECT_EQ(cc["index"], "EGCS");
    EXPECT_GE(cc["normalized"].get<double>(), 0.0);
}

TEST_F(Cli, MissingConfigIsValidationError)
{
    EXPECT_EQ(run("--config " + (dir_ / "nope.json").string() + " --out " + dir_.string()), 2);
    EXPECT_NE(stderr_text().find("nope.json"), std::string::npos);
}

TEST_F(Cli, BadFlagsAreValidationErrors)
{
    EXPECT_EQ(run("--config " + fixture("smoke_1bus.json") + " --strategy clever"), 2);
    EXPECT_EQ(run("--config " + fixture("smoke_1bus.json") + " --years 0 --out " + dir_.string()), 2);
    EXPECT_EQ(run("sweep --config " + fixture("smoke_1bus.json")), 2);
}

TEST_F(Cli, BracketFailureIsNumerical)
{
    SystemModel m = load_system_file(fixture("smoke_1bus.json"));
    GesUnit tmpl = m.ges_units[0];
    tmpl.p_charge_max = tmpl.p_discharge_max = 1.0;
    tmpl.energy_rated = 0.01;
    m.study.epsc_template = tmpl;
    std::ofstream(dir_ / "sys.json") << serialize_system(m);
    EXPECT_EQ(run("--config " + (dir_ / "sys.json").string() + " --index EPSC --scenarios 3 --out " +
                  dir_.string()),
              3);
    EXPECT_NE(stderr_text().find("capacity"), std::string::npos);
}

TEST_F(Cli, DeterministicBytes)
{
    const std::string args = "--config " + fixture("fault_3bus.json") + " --years 2 --seed 7 --scenarios 2";
    ASSERT_EQ(run(args + " --out " + (dir_ / "a").string()), 0);
    ASSERT_EQ(run(args + " --out " + (dir_ / "b").string()), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "reliability.json"), slurp(dir_ / "b" / "reliability.json"));
}

TEST_F(Cli, PlotSeries)
{
    ASSERT_EQ(run("--config " + fixture("fault_3bus.json") + " --years 5 --scenarios 1 --emit-plots --out " +
                  dir_.string()),
              0);
    const auto conv = read_csv(dir_ / "convergence.csv");
    EXPECT_EQ(conv.size(), 1u + 5u);
    const auto ops = read_csv(dir_ / "operations.csv");
    ASSERT_EQ(ops.size(), 1u + 8760u);
    for (size_t h = 1; h < ops.size(); ++h)
    {
        EXPECT_EQ(ops[h][0], std::to_string(h - 1));
        EXPECT_EQ(ops[h].size(), ops[0].size());
    }
}

TEST_F(Cli, OnePointSweepMatchesEvaluate)
{
    std::ofstream(dir_ / "sweep.json") << R"({"parameter": "gamma", "values": [0.05], "strategy": "greedy"})";
    const std::string base = "--config " + fixture("smoke_1bus.json") + " --scenarios 5 --seed 3";
    ASSERT_EQ(run("sweep " + base + " --sweep " + (dir_ / "sweep.json").string() + " --out " + dir_.string()), 0)
        << stderr_text();
    ASSERT_EQ(run(base + " --strategy greedy --gamma 0.05 --out " + dir_.string()), 0);
    const auto rows = read_csv(dir_ / "sweep.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].size(), rows[0].size());
    const auto rel = nlohmann::json::parse(slurp(dir_ / "reliability.json"));
    EXPECT_EQ(rows[1][1], format_float(rel["eens_theoretical_mwh_per_yr"].get<double>()));
    EXPECT_EQ(rows[1][2], format_float(rel["eens_practical_mwh_per_yr"].get<double>()));
    EXPECT_EQ(rows[1][3], format_float(rel["lolp"].get<double>()));
}
