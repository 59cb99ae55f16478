// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// when any criterion fails.

#include "adeqsim/capacity_credit.hpp"
#include "adeqsim/report.hpp"
#include "lp_oracle.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace adeqsim;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string
fixture(const std::string& name)
{
    return std::string(ADEQSIM_FIXTURES) + "/" + name;
}

double
seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string
fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Two-state path with MTTF 1960 h and MTTR 40 h: long-run availability 0.98.
Outcome
c1_two_state_availability()
{
    const auto t0 = std::chrono::steady_clock::now();
    const int horizon = 1000000;
    RandomStream stream(42, {"acceptance", "two-state"});
    const auto path = sample_two_state_path(1960.0, 40.0, horizon, stream);
    double up = 0.0;
    for (std::uint8_t s : path)
    {
        up += s;
    }
    const double a = up / horizon;
    const double dt = seconds_since(t0);
    return {std::abs(a - 0.98) <= 0.005 && dt < 5.0, fmt("availability %.5f (tol 0.005), %.2f s (limit 5)", a, dt)};
}

// Random bounded LPs against vertex enumeration, then the congested two-bus
// case with and without a 20 MW storage offer.
Outcome
c2_lp_and_congestion()
{
    std::mt19937_64 rng(2718);
    int compared = 0;
    int infeasible = 0;
    double worst = 0.0;
    int status_mismatch = 0;
    double solver_s = 0.0;
    double oracle_s = 0.0;
    while (compared < 200)
    {
        lp_oracle::RandomLp r = lp_oracle::random_lp(rng);
        double oracle = 0.0;
        auto t = std::chrono::steady_clock::now();
        const bool has = lp_oracle::vertex_optimum(r.hs, r.c, oracle);
        oracle_s += seconds_since(t);
        t = std::chrono::steady_clock::now();
        const lp::LpSolution s = lp::solve_lp(r.lp);
        solver_s += seconds_since(t);
        if (!has)
        {
            ++infeasible;
            status_mismatch += s.status != lp::LpStatus::kInfeasible;
            continue;
        }
        if (!s.optimal())
        {
            ++status_mismatch;
            continue;
        }
        ++compared;
        worst = std::max(worst, std::abs(s.objective - oracle) / (1.0 + std::abs(oracle)));
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SystemModel m = load_system_file(fixture("congestion_2bus.json"));
    DcOpf opf(m);
    HourInputs in(2, 1);
    in.load = {0.0, 80.0};
    in.gen_max = {100.0, 0.0};
    const double shed = opf.solve(in).curtailment;
    in.offers.push_back({1, 20.0});
    const double shed_with = opf.solve(in).curtailment;
    const double dt = solver_s + seconds_since(t0);
    const bool ok = status_mismatch == 0 && worst <= 1e-7 && std::abs(shed - 20.0) <= 1e-6 &&
                    std::abs(shed_with) <= 1e-6 && dt < 10.0;
    return {ok, fmt("%d optimal LPs, worst rel gap %.2e (tol 1e-7); %d infeasible, %d status mismatches; "
                    "congestion %.6f -> %.6f MW; solver %.2f s (limit 10), oracle %.1f s",
                    compared, worst, infeasible, status_mismatch, shed, shed_with, dt, oracle_s)};
}

// Random feasible action sequences. Ideal units (even sequences): charged -
// discharged = dSoC * S. Lossy units: the efficiency/self-discharge balance.
Outcome
c3_energy_conservation()
{
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int seq = 0; seq < 10000; ++seq)
    {
        GesUnit g;
        g.name = "g";
        g.energy_rated = 10.0 + 490.0 * u(rng);
        g.p_charge_max = g.p_discharge_max = g.energy_rated * (0.1 + 0.9 * u(rng));
        const bool ideal = seq % 2 == 0;
        g.eta_c = ideal ? 1.0 : 0.7 + 0.3 * u(rng);
        g.eta_d = ideal ? 1.0 : 0.7 + 0.3 * u(rng);
        g.self_discharge = ideal ? 0.0 : 0.01 * u(rng);
        g.soc_init = u(rng);
        GesState s = initial_state(g);
        const double e = s.energy_available;
        double stored = s.soc * e;
        double in_e = 0.0;
        double out_e = 0.0;
        double lost = 0.0;
        for (int h = 0; h < 24; ++h)
        {
            const double kept = (1.0 - g.self_discharge) * stored;
            double c = 0.0;
            double d = 0.0;
            if (u(rng) < 0.5)
            {
                c = std::min(g.p_charge_max * u(rng), (e - kept) / g.eta_c);
            }
            else
            {
                d = std::min(g.p_discharge_max * u(rng), kept * g.eta_d);
            }
            lost += g.self_discharge * stored;
            in_e += c;
            out_e += d;
            step_soc(s, c, d, g, e);
            stored = kept + g.eta_c * c - d / g.eta_d;
        }
        if (ideal)
        {
            const double moved = in_e - out_e;
            worst = std::max(worst, std::abs(moved - (s.soc - g.soc_init) * e) / std::max(e, std::abs(moved)));
        }
        // balance: E_T = E_0 + eta_c * in - out / eta_d - losses
        const double balance = g.soc_init * e + g.eta_c * in_e - out_e / g.eta_d - lost;
        worst = std::max(worst, std::abs(s.soc * e - balance) / e);
        worst = std::max(worst, std::abs(s.soc * e - stored) / e);
    }
    return {worst <= 1e-9, fmt("10000 sequences (5000 ideal), worst relative residual %.2e (tol 1e-9)", worst)};
}

// One full equivalent cycle moves E_c + E_d = S_rated; at kappa 0.5 and
// L 4000 each cycle adds 1/8000 to alpha.
Outcome
c4_degradation_endpoint()
{
    GesUnit g;
    g.name = "g";
    g.energy_rated = 400.0;
    g.degradation.enabled = true;
    g.degradation.life_cycles = 4000.0;
    g.degradation.soh_end = 0.8;
    GesState s = initial_state(g);
    double worst = 0.0;
    bool early = false;
    for (int k = 1; k <= 8000; ++k)
    {
        update_degradation(s, 200.0, 200.0, 0.5, g);
        const double oracle = k / 8000.0;
        worst = std::max(worst, std::abs(s.alpha - oracle));
        if (k < 8000 && s.alpha >= 1.0)
        {
            early = true;
        }
    }
    const double end_energy = s.energy_available;
    const bool ok = !early && worst <= 1e-12 && s.alpha == 1.0 && std::abs(end_energy - 0.8 * 400.0) <= 1e-12 * 400.0;
    return {ok, fmt("alpha %.15g after 8000 cycles, max drift %.1e, S_av %.12g MWh (expect 320)%s", s.alpha, worst,
                    end_energy, early ? ", end of life reached early" : "")};
}

// Practical EENS ordering greedy <= coordinated <= fixed across seeds.
Outcome
c5_strategy_ordering()
{
    const auto t0 = std::chrono::steady_clock::now();
    const SystemModel m = apply_study(load_system_file(fixture("fault_3bus.json")));
    int ok = 0;
    const int seeds = 30;
    for (int seed = 1; seed <= seeds; ++seed)
    {
        ReliabilityOptions o;
        o.scenarios = m.study.scenarios;
        o.seed = static_cast<std::uint64_t>(seed);
        o.threads = 1;
        double e[3];
        int k = 0;
        for (Strategy s : {Strategy::kGreedy, Strategy::kCoordinated, Strategy::kFixed})
        {
            o.strategy = s;
            e[k++] = run_smcs(m, o).eens_practical;
        }
        ok += e[0] <= e[1] && e[1] <= e[2];
    }
    const double dt = seconds_since(t0);
    return {ok >= 27 && dt < 120.0, fmt("ordering held in %d/%d seeds (need 27), %.1f s (limit 120)", ok, seeds, dt)};
}

// Gap between practical and theoretical EENS on the 24-bus system.
Outcome
c6_practical_gap()
{
    SystemModel cfg = load_system_file(fixture("rts24.json"));
    std::string detail;
    bool ok = true;
    for (Strategy st : {Strategy::kFixed, Strategy::kGreedy, Strategy::kCoordinated})
    {
        double prev = -1.0;
        detail += std::string(to_string(st)) + ":";
        for (double pf : {0.1, 0.3, 0.5})
        {
            cfg.study.ges_fleet->power_fraction = pf;
            const SystemModel m = apply_study(cfg);
            ReliabilityOptions o;
            o.scenarios = 50;
            o.seed = 2024;
            o.strategy = st;
            o.threads = 1;
            if (st == Strategy::kCoordinated)
            {
                o.mode = UncertaintyMode::kU3;
            }
            const ReliabilityReport r = run_smcs(m, o);
            const double diff = r.eens_practical - r.eens_theoretical;
            ok = ok && diff >= -1e-9;
            if (st == Strategy::kCoordinated)
            {
                const double bound = (o.gamma + 0.02) * r.scheduled_discharge;
                ok = ok && diff <= bound;
                detail += fmt(" %.1f<=%.1f", diff, bound);
            }
            else
            {
                const double gap = diff / r.eens_practical;
                ok = ok && gap > prev;
                prev = gap;
                detail += fmt(" %.4f", gap);
            }
        }
        detail += "; ";
    }
    return {ok, "P>=T everywhere, relative gaps rising with power fraction, coordinated gap within "
                "(gamma+0.02)*scheduled: " +
                    detail};
}

// Chance-constrained floor replayed against fresh draws of the distorted
// lower bound.
Outcome
c7_chance_floor()
{
    GesUnit g;
    g.name = "v";
    g.kind = GesKind::kVesE;
    g.energy_rated = 40.0;
    g.p_charge_max = g.p_discharge_max = 40.0;
    g.eta_d = 0.9;
    g.ddu.enabled = true;
    g.ddu.charge_price = 60.0;
    const double gamma = 0.05;
    UnitView view;
    view.energy = g.energy_rated;
    view.eps = 0.002;
    const DduSampler sampler(g.ddu, 99);

    const double s2 = std::log1p(g.ddu.cov * g.ddu.cov);
    std::lognormal_distribution<double> z(-0.5 * s2, std::sqrt(s2));
    std::mt19937_64 rng(4242);
    const double rho = g.ddu.discomfort_weight;
    const double mu_g = g.ddu.incentive_level * g.ddu.a_g_lower * g.ddu.charge_price / g.ddu.price_cap;

    double worst = 0.0;
    int states = 0;
    for (double diu_min : {0.1, 0.2, 0.3})
    {
        for (double soc : {0.4, 0.6, 0.8, 1.0})
        {
            for (double resp : {0.0, 2.0, 6.0})
            {
                DiscomfortInputs in;
                in.response_sum = resp;
                in.soc = soc;
                in.baseline_soc_next = soc;
                const ChanceFloor f = chance_floor(g, sampler, diu_min, view, in, gamma);
                const double kept = (1.0 - view.eps) * soc;
                if (f.floor >= kept)
                {
                    continue;
                }
                const double d = std::min(g.p_discharge_max, (kept - f.floor) * view.energy * g.eta_d);
                const double after = kept - d / g.eta_d / view.energy;
                const double rd = rho * (resp + std::min(1.0, d / g.p_discharge_max)) / 24.0 +
                                  (1.0 - rho) * std::abs(after - in.baseline_soc_next);
                const double mu_h = g.ddu.discomfort_level * g.ddu.b_h_lower * rd;
                int bad = 0;
                const int draws = 10000;
                for (int k = 0; k < draws; ++k)
                {
                    const double lower = std::clamp(diu_min * (1.0 - mu_g * z(rng)) * (1.0 + mu_h * z(rng)), 0.0, 1.0);
                    bad += lower > after + 1e-12;
                }
                worst = std::max(worst, static_cast<double>(bad) / draws);
                ++states;
            }
        }
    }
    return {states >= 20 && worst <= 0.07,
            fmt("%d states x 10000 draws at gamma 0.05, worst violation rate %.4f (limit 0.07)", states, worst)};
}

CcResult
cc_at(const SystemModel& cfg, CcIndex index, Strategy st)
{
    CcQuery q;
    q.index = index;
    q.reliability.strategy = st;
    q.reliability.scenarios = 50;
    q.reliability.seed = 2024;
    q.reliability.threads = 1;
    return evaluate_cc(apply_study(cfg), q);
}

// Capacity credit trends on the 24-bus system.
Outcome
c8_capacity_credit()
{
    const auto t0 = std::chrono::steady_clock::now();
    const SystemModel base = load_system_file(fixture("rts24.json"));
    bool ok = true;
    std::string detail;

    // EPSC of a fleet that is the template itself
    {
        SystemModel m = apply_study(base);
        GesUnit tmpl = *base.study.epsc_template;
        tmpl.for_rate = 0.0;
        tmpl.outage_mttr = 0.0;
        tmpl.degradation.enabled = false;
        const double dur = tmpl.energy_rated / tmpl.p_discharge_max;
        for (GesUnit& u : m.ges_units)
        {
            const std::string name = u.name;
            const int bus = u.bus;
            const double p = u.p_discharge_max;
            u = tmpl;
            u.name = name;
            u.bus = bus;
            u.kind = GesKind::kVesE;
            u.on_prob = 1.0;
            u.p_charge_max = u.p_discharge_max = p;
            u.energy_rated = p * dur;
        }
        m.resolve();
        CcQuery q;
        q.index = CcIndex::kEPSC;
        q.reliability.strategy = Strategy::kGreedy;
        q.reliability.scenarios = 50;
        q.reliability.seed = 2024;
        q.reliability.threads = 1;
        q.rel_tol = 1e-3;
        q.epsc_template = tmpl;
        const double epsc = evaluate_cc(m, q).normalized;
        ok = ok && std::abs(epsc - 1.0) <= 0.05;
        detail += fmt("EPSC identity %.3f; ", epsc);
    }

    SystemModel cfg = base;
    double prev = INFINITY;
    detail += "EGCS by power fraction";
    for (double pf : {0.1, 0.3, 0.5})
    {
        cfg.study.ges_fleet->power_fraction = pf;
        const double v = cc_at(cfg, CcIndex::kEGCS, Strategy::kCoordinated).normalized;
        ok = ok && v >= 0.20 && v <= 0.45 && v <= prev + 1e-9;
        prev = v;
        detail += fmt(" %.3f", v);
    }
    cfg = base;
    prev = -INFINITY;
    detail += "; by duration";
    for (double h : {2.0, 4.0, 6.0})
    {
        cfg.study.ges_fleet->duration_hours = h;
        const double v = cc_at(cfg, CcIndex::kEGCS, Strategy::kCoordinated).normalized;
        ok = ok && v >= prev - 1e-9;
        prev = v;
        detail += fmt(" %.3f", v);
    }
    prev = INFINITY;
    detail += "; EGCS/ECC/EFC/ELCC MW";
    for (CcIndex i : {CcIndex::kEGCS, CcIndex::kECC, CcIndex::kEFC, CcIndex::kELCC})
    {
        const double v = cc_at(base, i, Strategy::kCoordinated).capacity;
        ok = ok && v <= prev + 1e-9;
        prev = v;
        detail += fmt(" %.1f", v);
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 1800.0;
    return {ok, detail + fmt("; %.0f s (limit 1800)", dt)};
}

// Absolute EENS reduction from a fixed storage fleet as RES penetration grows.
Outcome
c9_res_sweep()
{
    SystemModel cfg = load_system_file(fixture("rts24.json"));
    cfg.ges_units = apply_study(cfg).ges_units;
    cfg.study.ges_fleet.reset();
    double best = -INFINITY;
    double best_pen = 0.0;
    std::string curve;
    for (int k = 0; k <= 10; ++k)
    {
        cfg.study.res_penetration = k / 10.0;
        const SystemModel m = apply_study(cfg);
        ReliabilityOptions o;
        o.scenarios = 20;
        o.seed = 2024;
        o.threads = 1;
        const double gain = run_smcs(without_ges(m), o).eens_practical - run_smcs(m, o).eens_practical;
        curve += fmt(" %.0f", gain);
        if (gain > best)
        {
            best = gain;
            best_pen = k / 10.0;
        }
    }
    return {best_pen <= 0.6 + 1e-12, fmt("peak reduction at penetration %.1f (limit 0.6); MWh/yr:", best_pen) + curve};
}

std::string
slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int
run_cli(const std::string& args)
{
    const std::string cmd = std::string(ADEQSIM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Two CLI runs with the same inputs write identical bytes.
Outcome
c10_determinism()
{
    const fs::path dir = fs::temp_directory_path() / "adeqsim_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "sweep.json") << R"({"parameter": "rated_power_fraction", "values": [0.1, 0.3], "index": "EGCS"})";
    const std::string eval = "--config " + fixture("fault_3bus.json") +
                             " --index EGCS --scenarios 4 --seed 9 --emit-plots --curtailment-csv --out ";
    const std::string sweep =
        "sweep --config " + fixture("rts24.json") + " --scenarios 2 --sweep " + (dir / "sweep.json").string() + " --out ";
    int status = 0;
    for (const char* run : {"a", "b"})
    {
        status |= run_cli(eval + (dir / run).string());
        status |= run_cli(sweep + (dir / run).string());
    }
    int same = 0;
    int total = 0;
    std::string diff;
    for (const char* f : {"reliability.json", "cc.json", "convergence.csv", "operations.csv", "curtailment.csv",
                          "sweep.csv"})
    {
        ++total;
        const std::string a = slurp(dir / "a" / f);
        if (!a.empty() && a == slurp(dir / "b" / f))
        {
            ++same;
        }
        else
        {
            diff += std::string(" ") + f;
        }
    }
    fs::remove_all(dir);
    return {status == 0 && same == total,
            fmt("%d/%d outputs byte-identical, exit status %d", same, total, status) + (diff.empty() ? "" : ";" + diff)};
}

} // namespace

int
main(int argc, char** argv)
{
    // optional argument: run only the criterion with this id, e.g. C7
    const std::string only = argc > 1 ? std::string(argv[1]) + " " : "";
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"C1 two-state availability", c1_two_state_availability},
        {"C2 LP optimality and congestion", c2_lp_and_congestion},
        {"C3 storage energy conservation", c3_energy_conservation},
        {"C4 degradation end of life", c4_degradation_endpoint},
        {"C5 strategy ordering", c5_strategy_ordering},
        {"C6 practical vs theoretical gap", c6_practical_gap},
        {"C7 chance-constrained floor", c7_chance_floor},
        {"C8 capacity credit trends", c8_capacity_credit},
        {"C9 RES penetration sweep", c9_res_sweep},
        {"C10 output determinism", c10_determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria)
    {
        if (!only.empty() && std::string(name).rfind(only, 0) != 0)
        {
            continue;
        }
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
