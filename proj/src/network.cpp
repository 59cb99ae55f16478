#include "adeqsim/network.hpp"

#include <algorithm>
#include <cmath>

namespace adeqsim
{

Ptdf
compute_ptdf(const SystemModel& model, const std::vector<std::uint8_t>& line_on)
{
    const int n = model.num_buses();
    const int m = n - 1;
    Ptdf out;
    out.factors.assign(model.lines.size(), std::vector<double>(n, 0.0));
    if (m == 0)
    {
        out.valid = true;
        return out;
    }
    // Reduced susceptance matrix with bus 0 removed, inverted in place.
    std::vector<double> b(static_cast<size_t>(m) * m, 0.0);
    for (size_t l = 0; l < model.lines.size(); ++l)
    {
        if (!line_on[l])
        {
            continue;
        }
        const Line& ln = model.lines[l];
        const double y = 1.0 / ln.reactance;
        const int i = ln.from - 1;
        const int j = ln.to - 1;
        if (i >= 0) b[static_cast<size_t>(i) * m + i] += y;
        if (j >= 0) b[static_cast<size_t>(j) * m + j] += y;
        if (i >= 0 && j >= 0)
        {
            b[static_cast<size_t>(i) * m + j] -= y;
            b[static_cast<size_t>(j) * m + i] -= y;
        }
    }
    std::vector<double> inv(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
    {
        inv[static_cast<size_t>(i) * m + i] = 1.0;
    }
    for (int c = 0; c < m; ++c)
    {
        int p = c;
        for (int r = c + 1; r < m; ++r)
        {
            if (std::abs(b[static_cast<size_t>(r) * m + c]) > std::abs(b[static_cast<size_t>(p) * m + c]))
            {
                p = r;
            }
        }
        if (std::abs(b[static_cast<size_t>(p) * m + c]) < 1e-10)
        {
            return out; // islanded
        }
        if (p != c)
        {
            for (int k = 0; k < m; ++k)
            {
                std::swap(b[static_cast<size_t>(p) * m + k], b[static_cast<size_t>(c) * m + k]);
                std::swap(inv[static_cast<size_t>(p) * m + k], inv[static_cast<size_t>(c) * m + k]);
            }
        }
        const double d = b[static_cast<size_t>(c) * m + c];
        for (int k = 0; k < m; ++k)
        {
            b[static_cast<size_t>(c) * m + k] /= d;
            inv[static_cast<size_t>(c) * m + k] /= d;
        }
        for (int r = 0; r < m; ++r)
        {
            const double f = b[static_cast<size_t>(r) * m + c];
            if (r == c || f == 0.0)
            {
                continue;
            }
            for (int k = 0; k < m; ++k)
            {
                b[static_cast<size_t>(r) * m + k] -= f * b[static_cast<size_t>(c) * m + k];
                inv[static_cast<size_t>(r) * m + k] -= f * inv[static_cast<size_t>(c) * m + k];
            }
        }
    }
    auto x = [&](int bus, int k) {
        return bus == 0 || k == 0 ? 0.0 : inv[static_cast<size_t>(bus - 1) * m + (k - 1)];
    };
    for (size_t l = 0; l < model.lines.size(); ++l)
    {
        if (!line_on[l])
        {
            continue;
        }
        const Line& ln = model.lines[l];
        for (int k = 0; k < n; ++k)
        {
            out.factors[l][k] = (x(ln.from, k) - x(ln.to, k)) / ln.reactance;
        }
    }
    out.valid = true;
    return out;
}

DcOpf::DcOpf(const SystemModel& model) : model_(model) {}

const Ptdf&
DcOpf::ptdf(const std::vector<std::uint8_t>& line_on)
{
    auto it = cache_.find(line_on);
    if (it == cache_.end())
    {
        it = cache_.emplace(line_on, std::make_unique<Ptdf>(compute_ptdf(model_, line_on))).first;
    }
    return *it->second;
}

namespace
{

// Merit-order solution of the hour with line limits dropped. Returns false
// when minimum generation exceeds the requirement.
bool
copper_plate(const HourInputs& in, OpfResult& out)
{
    const int n = static_cast<int>(in.load.size());
    out.bus_curtailment.assign(n, 0.0);
    out.charge_shed.assign(n, 0.0);
    out.spill.assign(n, 0.0);
    out.generation.assign(n, 0.0);
    out.discharge.assign(in.offers.size(), 0.0);
    double need = 0.0;
    double gmin = 0.0;
    double gmax = 0.0;
    for (int b = 0; b < n; ++b)
    {
        need += in.load[b] + in.fixed_charge[b] - in.fixed_discharge[b];
        gmin += in.gen_min[b];
        gmax += in.gen_max[b];
    }
    if (need < gmin - 1e-9)
    {
        return false;
    }
    if (need <= gmax)
    {
        const double span = gmax - gmin;
        const double lambda = span > 0.0 ? std::clamp((need - gmin) / span, 0.0, 1.0) : 0.0;
        for (int b = 0; b < n; ++b)
        {
            out.generation[b] = in.gen_min[b] + lambda * (in.gen_max[b] - in.gen_min[b]);
        }
        out.curtailment = 0.0;
        return true;
    }
    for (int b = 0; b < n; ++b)
    {
        out.generation[b] = in.gen_max[b];
    }
    double gap = need - gmax;
    for (size_t k = 0; k < in.offers.size() && gap > 0.0; ++k)
    {
        const double d = std::min(gap, in.offers[k].max_mw);
        out.discharge[k] = d;
        gap -= d;
    }
    for (int b = 0; b < n && gap > 0.0; ++b)
    {
        const double s = std::min(gap, in.fixed_charge[b]);
        out.charge_shed[b] = s;
        gap -= s;
    }
    double total = 0.0;
    for (int b = 0; b < n && gap > 0.0; ++b)
    {
        const double c = std::min(gap, in.load[b]);
        out.bus_curtailment[b] = c;
        gap -= c;
        total += c;
    }
    out.curtailment = total;
    return true;
}

} // namespace

bool
DcOpf::try_fast(const HourInputs& in, OpfResult& out)
{
    if (!copper_plate(in, out))
    {
        return false;
    }
    out.copper_curtailment = out.curtailment;
    const Ptdf& p = ptdf(in.line_on);
    if (!p.valid)
    {
        return false;
    }
    const int n = model_.num_buses();
    std::vector<double> inj(n, 0.0);
    for (int b = 0; b < n; ++b)
    {
        inj[b] = out.generation[b] + out.bus_curtailment[b] + out.charge_shed[b] - in.load[b] - in.fixed_charge[b] +
                 in.fixed_discharge[b];
    }
    for (size_t k = 0; k < in.offers.size(); ++k)
    {
        inj[in.offers[k].bus] += out.discharge[k];
    }
    out.flows.assign(model_.lines.size(), 0.0);
    for (size_t l = 0; l < model_.lines.size(); ++l)
    {
        if (!in.line_on[l])
        {
            continue;
        }
        double f = 0.0;
        for (int b = 1; b < n; ++b)
        {
            f += p.factors[l][b] * inj[b];
        }
        if (std::abs(f) > model_.lines[l].flow_limit + 1e-7)
        {
            return false;
        }
        out.flows[l] = f;
    }
    return true;
}

lp::LpProblem
DcOpf::build_lp(const HourInputs& in, bool relax_rg_min) const
{
    using lp::kInf;
    const int n = model_.num_buses();
    lp::LpProblem prob;
    std::vector<std::vector<lp::Term>> balance(n);
    for (int b = 0; b < n; ++b)
    {
        if (in.gen_max[b] > 0.0)
        {
            const double lo = relax_rg_min ? 0.0 : std::min(in.gen_min[b], in.gen_max[b]);
            balance[b].push_back({prob.add_variable(lo, in.gen_max[b], 0.0, "g" + std::to_string(b)), 1.0});
        }
    }
    std::vector<int> theta(n, -1);
    for (int b = 1; b < n; ++b)
    {
        theta[b] = prob.add_variable(-kInf, kInf, 0.0, "theta" + std::to_string(b));
    }
    for (size_t k = 0; k < in.offers.size(); ++k)
    {
        const int v = prob.add_variable(0.0, in.offers[k].max_mw, discharge_cost(static_cast<int>(k)),
                                        "d" + std::to_string(k));
        balance[in.offers[k].bus].push_back({v, 1.0});
    }
    for (int b = 0; b < n; ++b)
    {
        if (in.load[b] > 0.0)
        {
            balance[b].push_back({prob.add_variable(0.0, in.load[b], curtail_cost(b), "lc" + std::to_string(b)), 1.0});
        }
        if (in.fixed_charge[b] > 0.0)
        {
            balance[b].push_back(
                {prob.add_variable(0.0, in.fixed_charge[b], shed_cost(b), "cs" + std::to_string(b)), 1.0});
        }
        if (in.fixed_discharge[b] > 0.0)
        {
            balance[b].push_back(
                {prob.add_variable(0.0, in.fixed_discharge[b], shed_cost(b), "sp" + std::to_string(b)), -1.0});
        }
    }
    for (size_t l = 0; l < model_.lines.size(); ++l)
    {
        if (!in.line_on[l])
        {
            continue;
        }
        const Line& ln = model_.lines[l];
        const double y = 1.0 / ln.reactance;
        std::vector<lp::Term> flow;
        if (theta[ln.from] >= 0) flow.push_back({theta[ln.from], y});
        if (theta[ln.to] >= 0) flow.push_back({theta[ln.to], -y});
        prob.add_row(flow, -ln.flow_limit, ln.flow_limit, "f" + std::to_string(l));
        // Flow leaves `from` and enters `to`.
        for (const lp::Term& t : flow)
        {
            balance[ln.from].push_back({t.var, -t.coef});
            balance[ln.to].push_back({t.var, t.coef});
        }
    }
    for (int b = 0; b < n; ++b)
    {
        prob.add_eq(balance[b], in.load[b] + in.fixed_charge[b] - in.fixed_discharge[b], "bal" + std::to_string(b));
    }
    return prob;
}

OpfResult
DcOpf::solve_lp_path(const HourInputs& in)
{
    OpfResult out;
    {
        OpfResult cp;
        copper_plate(in, cp);
        out.copper_curtailment = cp.curtailment;
    }
    out.used_lp = true;
    lp::LpProblem prob = build_lp(in, false);
    lp::LpSolution sol = lp::solve_lp(prob);
    if (sol.status == lp::LpStatus::kInfeasible)
    {
        out.relaxed_rg_min = true;
        prob = build_lp(in, true);
        sol = lp::solve_lp(prob);
    }
    if (!sol.optimal())
    {
        throw std::runtime_error(std::string("DC-OPF LP failed: ") + lp::to_string(sol.status));
    }
    const int n = model_.num_buses();
    out.bus_curtailment.assign(n, 0.0);
    out.charge_shed.assign(n, 0.0);
    out.spill.assign(n, 0.0);
    out.generation.assign(n, 0.0);
    out.discharge.assign(in.offers.size(), 0.0);
    out.flows.assign(model_.lines.size(), 0.0);
    std::vector<double> theta(n, 0.0);
    for (int j = 0; j < prob.num_variables(); ++j)
    {
        const std::string& name = prob.name(j);
        const double v = sol.x[j];
        auto index = [&](size_t prefix) { return std::stoi(name.substr(prefix)); };
        if (name.rfind("theta", 0) == 0) theta[index(5)] = v;
        else if (name[0] == 'g') out.generation[index(1)] = v;
        else if (name[0] == 'd') out.discharge[index(1)] = v;
        else if (name.rfind("lc", 0) == 0) out.bus_curtailment[index(2)] = v;
        else if (name.rfind("cs", 0) == 0) out.charge_shed[index(2)] = v;
        else if (name.rfind("sp", 0) == 0) out.spill[index(2)] = v;
    }
    for (size_t l = 0; l < model_.lines.size(); ++l)
    {
        if (in.line_on[l])
        {
            const Line& ln = model_.lines[l];
            out.flows[l] = (theta[ln.from] - theta[ln.to]) / ln.reactance;
        }
    }
    out.curtailment = 0.0;
    for (double c : out.bus_curtailment)
    {
        out.curtailment += c;
    }
    return out;
}

OpfResult
DcOpf::solve(const HourInputs& in)
{
    OpfResult out;
    if (fast_path_ && try_fast(in, out))
    {
        return out;
    }
    return solve_lp_path(in);
}

double
balance_residual(const SystemModel& model, const HourInputs& in, const OpfResult& r)
{
    const int n = model.num_buses();
    std::vector<double> inj(n, 0.0);
    for (int b = 0; b < n; ++b)
    {
        inj[b] = r.generation[b] + r.bus_curtailment[b] + r.charge_shed[b] - r.spill[b] - in.load[b] -
                 in.fixed_charge[b] + in.fixed_discharge[b];
    }
    for (size_t k = 0; k < in.offers.size(); ++k)
    {
        inj[in.offers[k].bus] += r.discharge[k];
    }
    for (size_t l = 0; l < model.lines.size(); ++l)
    {
        inj[model.lines[l].from] -= r.flows[l];
        inj[model.lines[l].to] += r.flows[l];
    }
    double worst = 0.0;
    for (double v : inj)
    {
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

double
flow_violation(const SystemModel& model, const HourInputs& in, const OpfResult& r)
{
    double worst = 0.0;
    for (size_t l = 0; l < model.lines.size(); ++l)
    {
        if (!in.line_on[l] && r.flows[l] != 0.0)
        {
            worst = std::max(worst, std::abs(r.flows[l]));
        }
        worst = std::max(worst, std::abs(r.flows[l]) - model.lines[l].flow_limit);
    }
    return worst;
}

} // namespace adeqsim
