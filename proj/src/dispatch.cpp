#include "adeqsim/dispatch.hpp"

#include "adeqsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adeqsim
{

const char*
to_string(Strategy s)
{
    switch (s)
    {
        case Strategy::kFixed: return "fixed";
        case Strategy::kGreedy: return "greedy";
        case Strategy::kCoordinated: return "coordinated";
    }
    return "?";
}

const char*
to_string(UncertaintyMode m)
{
    switch (m)
    {
        case UncertaintyMode::kU1: return "U1";
        case UncertaintyMode::kU2: return "U2";
        case UncertaintyMode::kU3: return "U3";
    }
    return "?";
}

const char*
to_string(OpState s)
{
    switch (s)
    {
        case OpState::kNormal: return "normal";
        case OpState::kEmergency: return "emergency";
        case OpState::kRecovery: return "recovery";
    }
    return "?";
}

const char*
to_string(CurtailmentRecord::Cause c)
{
    switch (c)
    {
        case CurtailmentRecord::Cause::kGenerationDeficit: return "generation-deficit";
        case CurtailmentRecord::Cause::kCongestion: return "congestion";
        case CurtailmentRecord::Cause::kStorageUnavailable: return "storage-unavailable";
    }
    return "?";
}

Strategy
parse_strategy(const std::string& text)
{
    if (text == "fixed") return Strategy::kFixed;
    if (text == "greedy") return Strategy::kGreedy;
    if (text == "coordinated") return Strategy::kCoordinated;
    throw ValidationError("unknown strategy '" + text + "' (fixed, greedy, coordinated)");
}

UncertaintyMode
parse_mode(const std::string& text)
{
    if (text == "U1") return UncertaintyMode::kU1;
    if (text == "U2") return UncertaintyMode::kU2;
    if (text == "U3") return UncertaintyMode::kU3;
    throw ValidationError("unknown uncertainty mode '" + text + "' (U1, U2, U3)");
}

namespace
{

// SoC-chained day LP for one unit: appends c, d and s(1..T) variables and
// the dynamics rows. s(T) is pinned to soc0.
struct DayVars
{
    std::vector<int> c;
    std::vector<int> d;
    std::vector<int> s;
};

DayVars
add_day_storage(lp::LpProblem& prob, const GesUnit& u, const UnitView& v, double soc0, int hours,
                const std::vector<double>& charge_cost, const std::vector<double>& discharge_cost)
{
    DayVars dv;
    const bool live = v.energy > 0.0;
    const double pc = live ? v.on * u.p_charge_max : 0.0;
    const double pd = live ? v.on * u.p_discharge_max : 0.0;
    for (int t = 0; t < hours; ++t)
    {
        dv.c.push_back(prob.add_variable(0.0, pc, charge_cost[t]));
        dv.d.push_back(prob.add_variable(0.0, pd, discharge_cost[t]));
        const bool last = t == hours - 1;
        dv.s.push_back(prob.add_variable(last ? soc0 : v.soc_min, last ? soc0 : v.soc_max, 0.0));
    }
    if (!live)
    {
        return dv;
    }
    for (int t = 0; t < hours; ++t)
    {
        // s(t+1) - (1-eps) s(t) - (eta_c c - d / eta_d) / E = 0
        std::vector<lp::Term> row{{dv.s[t], 1.0},
                                  {dv.c[t], -u.eta_c / v.energy},
                                  {dv.d[t], 1.0 / (u.eta_d * v.energy)}};
        double rhs = 0.0;
        if (t == 0)
        {
            rhs = (1.0 - v.eps) * soc0;
        }
        else
        {
            row.push_back({dv.s[t - 1], -(1.0 - v.eps)});
        }
        prob.add_eq(row, rhs);
    }
    return dv;
}

DispatchPlan
extract_plan(const lp::LpSolution& sol, const DayVars& dv, const GesUnit& u, double soc0)
{
    DispatchPlan p;
    const int hours = static_cast<int>(dv.c.size());
    p.soc.push_back(soc0);
    for (int t = 0; t < hours; ++t)
    {
        double c = std::max(0.0, sol.x[dv.c[t]]);
        double d = std::max(0.0, sol.x[dv.d[t]]);
        if (c > 0.0 && d > 0.0)
        {
            // Keep the SoC effect, drop the simultaneous part.
            const double net = u.eta_c * c - d / u.eta_d;
            if (net >= 0.0)
            {
                c = net / u.eta_c;
                d = 0.0;
            }
            else
            {
                d = -net * u.eta_d;
                c = 0.0;
            }
        }
        p.charge.push_back(c);
        p.discharge.push_back(d);
        p.soc.push_back(sol.x[dv.s[t]]);
    }
    return p;
}

} // namespace

std::vector<DispatchPlan>
fixed_dispatch_schedule(const std::vector<const GesUnit*>& units, const std::vector<double>& net_load,
                        const std::vector<UnitView>& views, double* peak)
{
    const int hours = static_cast<int>(net_load.size());
    lp::LpProblem prob;
    const int pk = prob.add_variable(-lp::kInf, lp::kInf, 1.0, "peak");
    const std::vector<double> penalty(hours, 1e-6);
    std::vector<DayVars> vars;
    for (size_t k = 0; k < units.size(); ++k)
    {
        vars.push_back(add_day_storage(prob, *units[k], views[k], units[k]->soc_init, hours, penalty, penalty));
    }
    for (int t = 0; t < hours; ++t)
    {
        std::vector<lp::Term> row{{pk, 1.0}};
        for (const DayVars& dv : vars)
        {
            row.push_back({dv.c[t], -1.0});
            row.push_back({dv.d[t], 1.0});
        }
        prob.add_ge(row, net_load[t]);
    }
    const lp::LpSolution sol = lp::solve_lp(prob);
    if (!sol.optimal())
    {
        throw std::runtime_error(std::string("peak-shaving LP ") + lp::to_string(sol.status) +
                                 ": GES parameters cannot return to the initial SoC");
    }
    if (peak)
    {
        *peak = sol.x[pk];
    }
    std::vector<DispatchPlan> plans;
    for (size_t k = 0; k < units.size(); ++k)
    {
        plans.push_back(extract_plan(sol, vars[k], *units[k], units[k]->soc_init));
        plans.back().objective = sol.x[pk];
    }
    return plans;
}

DispatchPlan
arbitrage_schedule(const GesUnit& unit, const std::vector<double>& price, double soc0, const UnitView& view)
{
    const int hours = static_cast<int>(price.size());
    std::vector<double> cc(hours);
    std::vector<double> dc(hours);
    for (int t = 0; t < hours; ++t)
    {
        cc[t] = price[t] + 1e-6;
        dc[t] = -price[t] + 1e-6;
    }
    lp::LpProblem prob;
    const DayVars dv = add_day_storage(prob, unit, view, soc0, hours, cc, dc);
    const lp::LpSolution sol = lp::solve_lp(prob);
    if (!sol.optimal())
    {
        throw std::runtime_error(std::string("arbitrage LP ") + lp::to_string(sol.status));
    }
    DispatchPlan p = extract_plan(sol, dv, unit, soc0);
    p.objective = 0.0;
    for (int t = 0; t < hours; ++t)
    {
        p.objective += price[t] * (p.discharge[t] - p.charge[t]);
    }
    return p;
}

double
charge_room(const GesUnit& unit, double soc, const UnitView& view, double dt)
{
    if (view.energy <= 0.0)
    {
        return 0.0;
    }
    const double room = (view.soc_max - (1.0 - view.eps) * soc) * view.energy / (unit.eta_c * dt);
    return std::clamp(room, 0.0, view.on * unit.p_charge_max);
}

double
discharge_room(const GesUnit& unit, double soc, double floor, const UnitView& view, double dt)
{
    if (view.energy <= 0.0)
    {
        return 0.0;
    }
    const double room = ((1.0 - view.eps) * soc - floor) * unit.eta_d * view.energy / dt;
    return std::clamp(room, 0.0, view.on * unit.p_discharge_max);
}

std::vector<double>
greedy_normal_charge(double rc, const std::vector<GesUnit>& units, const std::vector<double>& soc,
                     const std::vector<UnitView>& views)
{
    std::vector<double> out(units.size(), 0.0);
    if (rc <= 0.0)
    {
        return out;
    }
    for (size_t i = 0; i < units.size(); ++i)
    {
        out[i] = std::min(units[i].capacity_share * rc, charge_room(units[i], soc[i], views[i]));
    }
    return out;
}

Action
recovery_action(const GesUnit& unit, double soc, double target, const UnitView& view, double rc, double share,
                double dt)
{
    Action a;
    if (view.energy <= 0.0)
    {
        return a;
    }
    const double drift = (1.0 - view.eps) * soc;
    if (target > drift + 1e-12)
    {
        const double need = (target - drift) * view.energy / (unit.eta_c * dt);
        a.charge = std::max(0.0, std::min({view.on * unit.p_charge_max, need, share * std::max(rc, 0.0)}));
    }
    else if (target < drift - 1e-12)
    {
        const double need = (drift - target) * view.energy * unit.eta_d / dt;
        a.discharge = std::max(0.0, std::min(view.on * unit.p_discharge_max, need));
    }
    return a;
}

namespace
{

double
normalized_response(const GesUnit& u, double rt_net, double baseline_net)
{
    const double dev = rt_net - baseline_net;
    if (dev > 0.0)
    {
        return u.p_charge_max > 0.0 ? std::min(1.0, dev / u.p_charge_max) : 0.0;
    }
    return u.p_discharge_max > 0.0 ? std::min(1.0, -dev / u.p_discharge_max) : 0.0;
}

} // namespace

ChanceFloor
chance_floor(const GesUnit& unit, const DduSampler& sampler, double diu_min, const UnitView& view,
             const DiscomfortInputs& d, double gamma, double dt)
{
    const double rho = unit.ddu.discomfort_weight;
    auto rd_after = [&](double discharge) {
        const double resp = d.response_sum + normalized_response(unit, -discharge, d.baseline_net);
        double soc_next = (1.0 - view.eps) * d.soc;
        if (view.energy > 0.0)
        {
            soc_next -= discharge / unit.eta_d * dt / view.energy;
        }
        return response_discomfort(resp, soc_next, d.baseline_soc_next, rho);
    };
    const double q = 1.0 - gamma;
    ChanceFloor out;
    double floor = sampler.lower_quantile(unit.ddu, diu_min, rd_after(0.0), q);
    double worst = floor;
    out.converged = false;
    for (int k = 0; k < 10; ++k)
    {
        out.iterations = k + 1;
        const double rd = rd_after(discharge_room(unit, d.soc, floor, view, dt));
        const double next = 0.5 * floor + 0.5 * sampler.lower_quantile(unit.ddu, diu_min, rd, q);
        worst = std::max(worst, next);
        const bool done = std::abs(next - floor) < 1e-4;
        floor = next;
        out.rd = rd;
        if (done)
        {
            out.converged = true;
            break;
        }
    }
    out.floor = out.converged ? floor : worst;
    return out;
}

} // namespace adeqsim

namespace adeqsim
{

namespace
{

std::mutex g_plan_mutex;
std::map<std::vector<double>, DispatchPlan> g_arbitrage_cache;
std::map<std::vector<double>, std::vector<DispatchPlan>> g_fixed_cache;

void
push_unit_key(std::vector<double>& key, const GesUnit& u, const UnitView& v, double soc0)
{
    key.insert(key.end(), {u.p_charge_max, u.p_discharge_max, u.eta_c, u.eta_d, v.on, v.eps, v.energy, v.soc_min,
                           v.soc_max, soc0});
}

DispatchPlan
cached_arbitrage(const GesUnit& u, const std::vector<double>& price, double soc0, const UnitView& v)
{
    std::vector<double> key;
    push_unit_key(key, u, v, soc0);
    key.insert(key.end(), price.begin(), price.end());
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto it = g_arbitrage_cache.find(key);
        if (it != g_arbitrage_cache.end())
        {
            return it->second;
        }
    }
    DispatchPlan p = arbitrage_schedule(u, price, soc0, v);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    g_arbitrage_cache.emplace(std::move(key), p);
    return p;
}

std::vector<DispatchPlan>
cached_fixed(const std::vector<const GesUnit*>& units, const std::vector<double>& net,
             const std::vector<UnitView>& views)
{
    std::vector<double> key;
    for (size_t k = 0; k < units.size(); ++k)
    {
        push_unit_key(key, *units[k], views[k], units[k]->soc_init);
    }
    key.push_back(-1.0);
    key.insert(key.end(), net.begin(), net.end());
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto it = g_fixed_cache.find(key);
        if (it != g_fixed_cache.end())
        {
            return it->second;
        }
    }
    std::vector<DispatchPlan> p = fixed_dispatch_schedule(units, net, views);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    g_fixed_cache.emplace(std::move(key), p);
    return p;
}

// Fixed and greedy dispatch plan as if storage were ideal; the mode only
// shapes what the coordinated dispatcher sees.
UncertaintyMode
dispatch_mode(const SimOptions& o)
{
    return o.strategy == Strategy::kCoordinated ? o.mode : UncertaintyMode::kU1;
}

UnitView
static_view(const GesUnit& u, UncertaintyMode mode)
{
    UnitView v;
    v.on = 1.0;
    v.eps = mode == UncertaintyMode::kU1 ? 0.0 : u.self_discharge;
    v.energy = mode == UncertaintyMode::kU1 ? u.energy_rated : available_energy(u, 0.0);
    v.soc_min = u.soc_min;
    v.soc_max = u.soc_max;
    return v;
}

} // namespace

DispatchContext::DispatchContext(const SystemModel& model, const SimOptions& options)
    : model_(model), options_(options)
{
    const int n = static_cast<int>(model.ges_units.size());
    samplers_.resize(n);
    for (int i = 0; i < n; ++i)
    {
        const GesUnit& u = model.ges_units[i];
        if (is_virtual(u.kind) && u.ddu.enabled)
        {
            auto tags = ges_tags(model, i);
            tags.push_back("ddu-sampler");
            samplers_[i] = DduSampler(u.ddu, derive_seed(options.seed, tags));
        }
    }
    if (options.strategy != Strategy::kFixed || n == 0)
    {
        return;
    }
    const int T = model.horizon();
    const int days = (T + 23) / 24;
    fixed_plans_.assign(n, std::vector<DispatchPlan>(days));
    std::vector<std::vector<int>> at_bus(model.num_buses());
    for (int i = 0; i < n; ++i)
    {
        at_bus[model.ges_units[i].bus].push_back(i);
    }
    for (int b = 0; b < model.num_buses(); ++b)
    {
        if (at_bus[b].empty())
        {
            continue;
        }
        std::vector<const GesUnit*> units;
        std::vector<UnitView> views;
        for (int i : at_bus[b])
        {
            units.push_back(&model.ges_units[i]);
            views.push_back(static_view(model.ges_units[i], dispatch_mode(options)));
        }
        for (int d = 0; d < days; ++d)
        {
            const int t0 = d * 24;
            const int len = std::min(24, T - t0);
            std::vector<double> net(len);
            for (int h = 0; h < len; ++h)
            {
                double v = model.load[b][t0 + h];
                for (size_t r = 0; r < model.rg_units.size(); ++r)
                {
                    if (model.rg_units[r].bus == b)
                    {
                        v -= model.rg_units[r].capacity * model.rg_cf[r][t0 + h];
                    }
                }
                net[h] = v;
            }
            std::vector<DispatchPlan> plans = cached_fixed(units, net, views);
            for (size_t k = 0; k < at_bus[b].size(); ++k)
            {
                fixed_plans_[at_bus[b][k]][d] = std::move(plans[k]);
            }
        }
    }
}

namespace
{

// VES baseline for one day: the drawn net power projected into the bounds.
void
ves_baseline(const GesUnit& u, const VesDraws& draws, int t0, int len, bool use_draws, const UnitView& base,
             std::vector<double>& net, std::vector<double>& soc)
{
    net.assign(len, 0.0);
    soc.assign(len + 1, u.soc_init);
    double s = u.soc_init;
    for (int h = 0; h < len; ++h)
    {
        UnitView v = base;
        if (use_draws)
        {
            v.soc_min = draws.diu_min[t0 + h];
            v.soc_max = draws.diu_max[t0 + h];
        }
        double p = use_draws ? draws.baseline_net[t0 + h] : 0.0;
        if (p > 0.0)
        {
            p = std::min(p, charge_room(u, s, v));
        }
        else if (p < 0.0)
        {
            p = -std::min(-p, discharge_room(u, s, std::min(v.soc_min, (1.0 - v.eps) * s), v));
        }
        net[h] = p;
        double next = (1.0 - v.eps) * s;
        if (v.energy > 0.0)
        {
            next += (p > 0.0 ? u.eta_c * p : p / u.eta_d) / v.energy;
        }
        s = std::clamp(next, 0.0, 1.0);
        soc[h + 1] = s;
    }
}

} // namespace

ScenarioOutcome
simulate_scenario(const DispatchContext& ctx, const ScenarioState& sc, int scenario_id)
{
    const SystemModel& m = ctx.model();
    const SimOptions& opt = ctx.options();
    const UncertaintyMode mode = dispatch_mode(opt);
    const int T = m.horizon();
    const int nb = m.num_buses();
    const int ng = static_cast<int>(m.ges_units.size());
    const int days = (T + 23) / 24;

    DcOpf opf(m);
    opf.set_fast_path(!opt.force_lp);

    ScenarioOutcome out;
    out.theoretical.assign(T, 0.0);
    out.extra.assign(T, 0.0);

    std::vector<GesState> st(ng);
    for (int i = 0; i < ng; ++i)
    {
        st[i] = initial_state(m.ges_units[i]);
    }

    // Dispatcher baselines and the consumer's own baseline (for discomfort).
    std::vector<std::vector<double>> bs_net(ng), bs_soc(ng), true_net(ng), true_soc(ng);

    HourInputs in(nb, static_cast<int>(m.lines.size()));
    std::vector<double> charge(ng), discharge(ng), floor_view(ng);
    std::vector<int> offer_unit;
    std::vector<UnitView> views(ng);
    std::vector<double> soc_now(ng);
    std::vector<double> undelivered(ng);

    for (int day = 0; day < days; ++day)
    {
        const int t0 = day * 24;
        const int len = std::min(24, T - t0);
        for (int i = 0; i < ng; ++i)
        {
            const GesUnit& u = m.ges_units[i];
            if (!u.ddu.accumulate_rd)
            {
                st[i].response_sum = 0.0;
            }
            UnitView base;
            base.eps = mode == UncertaintyMode::kU1 ? 0.0 : u.self_discharge;
            base.energy = mode == UncertaintyMode::kU1 ? u.energy_rated : st[i].energy_available;
            base.soc_min = u.soc_min;
            base.soc_max = u.soc_max;
            if (is_virtual(u.kind))
            {
                const bool draws = u.diu.enabled;
                ves_baseline(u, sc.ves[i], t0, len, draws && mode != UncertaintyMode::kU1, base, bs_net[i],
                             bs_soc[i]);
                UnitView real = base;
                real.eps = u.self_discharge;
                real.energy = st[i].energy_available;
                ves_baseline(u, sc.ves[i], t0, len, draws, real, true_net[i], true_soc[i]);
            }
            else if (opt.strategy == Strategy::kCoordinated)
            {
                if (mode != UncertaintyMode::kU1 && u.energy_rated > 0.0)
                {
                    const double q = 1e-3 * u.energy_rated;
                    base.energy = std::round(st[i].energy_available / q) * q;
                }
                const std::vector<double> price(m.price.begin() + t0, m.price.begin() + t0 + len);
                const DispatchPlan p = cached_arbitrage(u, price, u.soc_init, base);
                bs_net[i].resize(len);
                for (int h = 0; h < len; ++h)
                {
                    bs_net[i][h] = p.charge[h] - p.discharge[h];
                }
                bs_soc[i] = p.soc;
                true_net[i] = bs_net[i];
                true_soc[i] = bs_soc[i];
            }
        }

        for (int h = 0; h < len; ++h)
        {
            const int t = t0 + h;
            std::fill(in.gen_max.begin(), in.gen_max.end(), 0.0);
            std::fill(in.gen_min.begin(), in.gen_min.end(), 0.0);
            std::fill(in.fixed_charge.begin(), in.fixed_charge.end(), 0.0);
            std::fill(in.fixed_discharge.begin(), in.fixed_discharge.end(), 0.0);
            in.offers.clear();
            offer_unit.clear();
            double supply = 0.0;
            double demand = 0.0;
            for (size_t k = 0; k < m.cg_units.size(); ++k)
            {
                if (sc.cg_on[k][t])
                {
                    in.gen_max[m.cg_units[k].bus] += m.cg_units[k].capacity;
                    supply += m.cg_units[k].capacity;
                }
            }
            for (size_t k = 0; k < m.rg_units.size(); ++k)
            {
                const double a = sc.rg_available[k][t];
                in.gen_max[m.rg_units[k].bus] += a;
                in.gen_min[m.rg_units[k].bus] += (1.0 - m.rg_units[k].max_curtail_rate) * a;
                supply += a;
            }
            for (int b = 0; b < nb; ++b)
            {
                in.load[b] = sc.load[b][t];
                demand += in.load[b];
            }
            for (size_t l = 0; l < m.lines.size(); ++l)
            {
                in.line_on[l] = sc.line_on[l][t];
            }
            const double rc = supply - demand;
            const bool emergency = rc < 0.0;
            OpState label = emergency ? OpState::kEmergency : OpState::kNormal;

            for (int i = 0; i < ng; ++i)
            {
                const GesUnit& u = m.ges_units[i];
                UnitView& v = views[i];
                v.on = mode == UncertaintyMode::kU1 ? 1.0 : static_cast<double>(sc.ges_on[i][t]);
                v.eps = mode == UncertaintyMode::kU1 ? 0.0 : u.self_discharge;
                v.energy = mode == UncertaintyMode::kU1 ? u.energy_rated : st[i].energy_available;
                v.soc_min = u.soc_min;
                v.soc_max = u.soc_max;
                if (is_virtual(u.kind) && u.diu.enabled && mode != UncertaintyMode::kU1)
                {
                    v.soc_min = sc.ves[i].diu_min[t];
                    v.soc_max = sc.ves[i].diu_max[t];
                }
                floor_view[i] = v.soc_min;
                soc_now[i] = st[i].soc;
                charge[i] = 0.0;
                discharge[i] = 0.0;
            }

            auto offer_all = [&]() {
                for (int i = 0; i < ng; ++i)
                {
                    const GesUnit& u = m.ges_units[i];
                    double fl = floor_view[i];
                    if (mode == UncertaintyMode::kU3 && is_virtual(u.kind) && u.ddu.enabled)
                    {
                        DiscomfortInputs di;
                        di.response_sum = st[i].response_sum;
                        di.soc = st[i].soc;
                        di.baseline_net = true_net[i][h];
                        di.baseline_soc_next = true_soc[i][h + 1];
                        const ChanceFloor cf =
                            chance_floor(u, ctx.sampler(i), sc.ves[i].diu_min[t], views[i], di, opt.gamma);
                        if (!cf.converged)
                        {
                            ++out.warnings;
                        }
                        fl = std::max(fl, cf.floor);
                    }
                    const double room = discharge_room(u, st[i].soc, fl, views[i]);
                    if (room > 0.0)
                    {
                        in.offers.push_back({u.bus, room});
                        offer_unit.push_back(i);
                    }
                }
            };

            if (opt.strategy == Strategy::kFixed)
            {
                for (int i = 0; i < ng; ++i)
                {
                    const DispatchPlan& p = ctx.fixed_plan(i, day);
                    charge[i] = p.charge[h];
                    discharge[i] = p.discharge[h];
                }
            }
            else if (opt.strategy == Strategy::kGreedy)
            {
                if (emergency)
                {
                    offer_all();
                }
                else
                {
                    charge = greedy_normal_charge(rc, m.ges_units, soc_now, views);
                }
            }
            else if (emergency)
            {
                offer_all();
            }
            else
            {
                for (int i = 0; i < ng; ++i)
                {
                    const GesUnit& u = m.ges_units[i];
                    const double share = u.capacity_share;
                    if (std::abs(st[i].soc - bs_soc[i][h]) <= 1e-7)
                    {
                        const double p = bs_net[i][h];
                        if (p > 0.0)
                        {
                            charge[i] = std::min({p, share * rc, charge_room(u, st[i].soc, views[i])});
                        }
                        else if (p < 0.0)
                        {
                            discharge[i] = std::min(-p, discharge_room(u, st[i].soc, floor_view[i], views[i]));
                        }
                    }
                    else
                    {
                        const double target = std::clamp(bs_soc[i][h + 1], views[i].soc_min, views[i].soc_max);
                        const Action a = recovery_action(u, st[i].soc, target, views[i], rc, share);
                        charge[i] = std::min(a.charge, charge_room(u, st[i].soc, views[i]));
                        discharge[i] = std::min(a.discharge, discharge_room(u, st[i].soc, floor_view[i], views[i]));
                        label = OpState::kRecovery;
                    }
                }
            }

            for (int i = 0; i < ng; ++i)
            {
                in.fixed_charge[m.ges_units[i].bus] += charge[i];
                in.fixed_discharge[m.ges_units[i].bus] += discharge[i];
            }

            const OpfResult r = opf.solve(in);
            if (r.used_lp)
            {
                ++out.lp_hours;
            }
            if (r.relaxed_rg_min)
            {
                ++out.warnings;
            }
            out.theoretical[t] = r.curtailment;

            // Scale scheduled actions by what the OPF could absorb.
            for (int i = 0; i < ng; ++i)
            {
                const int b = m.ges_units[i].bus;
                if (in.fixed_charge[b] > 0.0 && r.charge_shed[b] > 0.0)
                {
                    charge[i] *= 1.0 - r.charge_shed[b] / in.fixed_charge[b];
                }
                if (in.fixed_discharge[b] > 0.0 && r.spill[b] > 0.0)
                {
                    discharge[i] *= 1.0 - r.spill[b] / in.fixed_discharge[b];
                }
            }
            for (size_t k = 0; k < offer_unit.size(); ++k)
            {
                discharge[offer_unit[k]] += r.discharge[k];
            }

            // Replay against the realized storage.
            double sum_c = 0.0;
            double sum_d = 0.0;
            double sum_u = 0.0;
            for (int i = 0; i < ng; ++i)
            {
                const GesUnit& u = m.ges_units[i];
                GesState& s = st[i];
                sum_c += charge[i];
                sum_d += discharge[i];
                UnitView real;
                real.on = sc.ges_on[i][t];
                real.eps = u.self_discharge;
                real.energy = s.energy_available;
                real.soc_min = u.soc_min;
                real.soc_max = u.soc_max;
                double rd_next = 0.0;
                double resp = 0.0;
                if (is_virtual(u.kind))
                {
                    const VesDraws& vd = sc.ves[i];
                    if (u.diu.enabled)
                    {
                        real.soc_min = vd.diu_min[t];
                        real.soc_max = vd.diu_max[t];
                    }
                    // Discomfort implied by the scheduled action.
                    resp = normalized_response(u, charge[i] - discharge[i], true_net[i][h]);
                    double planned = (1.0 - real.eps) * s.soc;
                    if (real.energy > 0.0)
                    {
                        planned += (u.eta_c * charge[i] - discharge[i] / u.eta_d) / real.energy;
                    }
                    rd_next = response_discomfort(s.response_sum + resp, planned, true_soc[i][h + 1],
                                                  u.ddu.discomfort_weight);
                    if (u.ddu.enabled)
                    {
                        const double gl = ddu_mu_g(u.ddu, false) * vd.zg_lower[t];
                        const double hl = ddu_mu_h(u.ddu, rd_next, false) * vd.zh_lower[t];
                        const double gu = ddu_mu_g(u.ddu, true) * vd.zg_upper[t];
                        const double hu = ddu_mu_h(u.ddu, rd_next, true) * vd.zh_upper[t];
                        const SocBounds bnd = apply_ddu(real.soc_min, real.soc_max, gl, hl, gu, hu);
                        real.soc_min = bnd.lower;
                        real.soc_max = std::max(bnd.upper, bnd.lower);
                    }
                }
                const double d_ok = std::min(discharge[i], discharge_room(u, s.soc, real.soc_min, real));
                const double c_ok = std::min(charge[i], charge_room(u, s.soc, real));
                undelivered[i] = discharge[i] - d_ok;
                sum_u += undelivered[i];
                step_soc(s, c_ok, d_ok, u, real.energy);
                if (is_virtual(u.kind))
                {
                    s.response_sum += normalized_response(u, c_ok - d_ok, true_net[i][h]);
                    s.rd = response_discomfort(s.response_sum, s.soc, true_soc[i][h + 1], u.ddu.discomfort_weight);
                }
                charge[i] = c_ok;
                discharge[i] = d_ok;
            }
            double y = 0.0;
            if (sum_u > 0.0)
            {
                y = r.curtailment > 0.0 ? sum_u : std::max(0.0, sum_u - std::max(0.0, rc - sum_c + sum_d));
            }
            out.extra[t] = y;
            out.scheduled_discharge += sum_d;
            out.undelivered += sum_u;

            if (opt.record_curtailment)
            {
                const bool congested = r.curtailment > r.copper_curtailment + 1e-6;
                for (int b = 0; b < nb; ++b)
                {
                    if (r.bus_curtailment[b] > 1e-9)
                    {
                        out.records.push_back({scenario_id, t, b, r.bus_curtailment[b],
                                               congested ? CurtailmentRecord::Cause::kCongestion
                                                         : CurtailmentRecord::Cause::kGenerationDeficit});
                    }
                }
                if (y > 0.0)
                {
                    std::vector<double> by_bus(nb, 0.0);
                    for (int i = 0; i < ng; ++i)
                    {
                        by_bus[m.ges_units[i].bus] += undelivered[i] / sum_u * y;
                    }
                    for (int b = 0; b < nb; ++b)
                    {
                        if (by_bus[b] > 1e-9)
                        {
                            out.records.push_back(
                                {scenario_id, t, b, by_bus[b], CurtailmentRecord::Cause::kStorageUnavailable});
                        }
                    }
                }
            }
            if (opt.record_operations)
            {
                OperationRow row;
                row.hour = t;
                row.state = label;
                row.rc = rc;
                row.curtailment = r.curtailment + y;
                for (int i = 0; i < ng; ++i)
                {
                    row.soc.push_back(st[i].soc);
                }
                row.charge = charge;
                row.discharge = discharge;
                out.operations.push_back(std::move(row));
            }
        }

        for (int i = 0; i < ng; ++i)
        {
            update_degradation(st[i], st[i].day_charged, st[i].day_discharged, sc.kappa[i][day], m.ges_units[i]);
            st[i].day_charged = 0.0;
            st[i].day_discharged = 0.0;
        }
    }
    return out;
}

} // namespace adeqsim
