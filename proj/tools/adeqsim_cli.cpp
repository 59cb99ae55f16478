// adeqsim: adequacy and capacity-credit evaluation of storage fleets.
#include "adeqsim/capacity_credit.hpp"
#include "adeqsim/report.hpp"
#include "adeqsim/stochastic.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace adeqsim;

namespace
{

void
write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string
read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ValidationError("cannot open sweep file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Flags
{
    std::string command = "evaluate";
    std::string config;
    std::string strategy = "coordinated";
    std::string mode = "U2";
    std::string index;
    std::optional<int> years;
    std::optional<int> scenarios;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    std::string out = ".";
    std::string sweep;
    bool emit_plots = false;
    bool curtailment = false;
    double rel_tol = 0.02;
};

int
run(const Flags& f)
{
    const SystemModel config = load_system_file(f.config);
    const StudyConfig& st = config.study;

    CcQuery q;
    ReliabilityOptions& ro = q.reliability;
    ro.strategy = parse_strategy(f.strategy);
    ro.mode = parse_mode(f.mode);
    ro.years = f.years.value_or(st.years);
    ro.scenarios = f.scenarios.value_or(st.scenarios);
    ro.seed = f.seed.value_or(st.seed);
    ro.gamma = f.gamma.value_or(st.chance_level);
    ro.record_curtailment = f.curtailment;
    q.rel_tol = f.rel_tol;
    if (ro.years < 1 || ro.scenarios < 1)
    {
        throw ValidationError("--years and --scenarios must be >= 1");
    }
    if (ro.gamma <= 0.0 || ro.gamma >= 1.0)
    {
        throw ValidationError("--gamma must lie in (0, 1)");
    }
    std::optional<CcIndex> index;
    if (!f.index.empty())
    {
        index = parse_cc_index(f.index);
    }

    const std::filesystem::path out(f.out);
    std::filesystem::create_directories(out);

    if (!f.sweep.empty())
    {
        const SweepSpec spec = parse_sweep_spec(read_file(f.sweep));
        if (spec.strategy) ro.strategy = *spec.strategy;
        if (spec.mode) ro.mode = *spec.mode;
        if (spec.index) index = spec.index;
        const std::vector<SweepRow> rows = run_sweep(config, spec, q, index);
        write_file(out / "sweep.csv", sweep_csv(rows));
        return 0;
    }

    RunContext ctx{ro.strategy, ro.mode, ro.years, ro.scenarios, ro.seed, ro.gamma};
    const SystemModel model = apply_study(config);
    ro.record_operations = f.emit_plots;
    const ReliabilityReport rep = run_smcs(model, ro);
    write_file(out / "reliability.json", reliability_json(rep, ctx));
    if (f.emit_plots)
    {
        write_file(out / "convergence.csv", convergence_csv(rep));
        write_file(out / "operations.csv", operations_csv(rep));
    }
    if (f.curtailment)
    {
        write_file(out / "curtailment.csv", curtailment_csv(rep.records));
    }
    if (index)
    {
        ro.record_operations = false;
        ro.record_curtailment = false;
        q.index = *index;
        const CcResult cc = evaluate_cc(model, q);
        write_file(out / "cc.json", cc_json(cc, ctx));
    }
    return 0;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Adequacy and capacity-credit evaluation of generalized energy storage"};
    Flags f;
    app.add_option("command", f.command, "evaluate (default) or sweep")->check(CLI::IsMember({"evaluate", "sweep"}));
    app.add_option("--config", f.config, "system JSON")->required();
    app.add_option("--strategy", f.strategy)->check(CLI::IsMember({"fixed", "greedy", "coordinated"}));
    app.add_option("--mode", f.mode)->check(CLI::IsMember({"U1", "U2", "U3"}));
    app.add_option("--index", f.index)->check(CLI::IsMember({"EFC", "ECC", "ELCC", "EGCS", "EPSC"}));
    app.add_option("--years", f.years);
    app.add_option("--scenarios", f.scenarios);
    app.add_option("--seed", f.seed);
    app.add_option("--gamma", f.gamma);
    app.add_option("--out", f.out, "output directory");
    app.add_option("--sweep", f.sweep, "sweep spec JSON");
    app.add_option("--rel-tol", f.rel_tol, "bisection tolerance relative to the target EENS");
    app.add_flag("--emit-plots", f.emit_plots, "write convergence.csv and operations.csv");
    app.add_flag("--curtailment-csv", f.curtailment, "write per-hour curtailment records");
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (f.command == "sweep" && f.sweep.empty())
    {
        std::cerr << "error: sweep requires --sweep FILE\n";
        return 2;
    }

    try
    {
        return run(f);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const ValidationError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const BracketError& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        for (const TracePoint& p : e.trace)
        {
            std::cerr << "  capacity " << format_float(p.capacity) << " MW -> " << format_float(p.eens)
                      << " MWh/yr\n";
        }
        return 3;
    }
    catch (const std::exception& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
