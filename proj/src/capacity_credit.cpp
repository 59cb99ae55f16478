#include "adeqsim/capacity_credit.hpp"

#include <algorithm>
#include <cmath>

namespace adeqsim
{

const char*
to_string(CcIndex index)
{
    switch (index)
    {
        case CcIndex::kEFC: return "EFC";
        case CcIndex::kECC: return "ECC";
        case CcIndex::kELCC: return "ELCC";
        case CcIndex::kEGCS: return "EGCS";
        case CcIndex::kEPSC: return "EPSC";
    }
    return "?";
}

CcIndex
parse_cc_index(const std::string& text)
{
    if (text == "EFC") return CcIndex::kEFC;
    if (text == "ECC") return CcIndex::kECC;
    if (text == "ELCC") return CcIndex::kELCC;
    if (text == "EGCS") return CcIndex::kEGCS;
    if (text == "EPSC") return CcIndex::kEPSC;
    throw ValidationError("unknown index '" + text + "' (EFC, ECC, ELCC, EGCS, EPSC)");
}

BisectResult
bisect_capacity(const std::function<double(double)>& f, double target, double lo, double hi, double rel_tol,
                int max_iterations, bool increasing)
{
    BisectResult res;
    const double sign = increasing ? -1.0 : 1.0;
    const double goal = sign * target;
    const double tol = std::max(rel_tol * std::abs(target), 1e-9);
    auto g = [&](double c) {
        const double v = f(c);
        res.trace.push_back({c, v});
        return sign * v;
    };

    const double g_lo = g(lo);
    if (std::abs(g_lo - goal) <= tol)
    {
        res.capacity = lo;
        res.value = sign * g_lo;
        return res;
    }
    double xs[5];
    double gs[5];
    xs[0] = lo;
    gs[0] = g_lo;
    for (int i = 1; i < 5; ++i)
    {
        xs[i] = lo + (hi - lo) * i / 4.0;
        gs[i] = g(xs[i]);
        if (gs[i] > gs[i - 1] + tol)
        {
            throw BracketError("reliability is not monotone in capacity over the bracket "
                               "(common random numbers broken?)",
                               res.trace);
        }
    }
    if (gs[0] < goal - tol || gs[4] > goal + tol)
    {
        throw BracketError("target not bracketed by [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
                           res.trace);
    }
    int i = 1;
    while (gs[i] > goal + tol)
    {
        ++i;
    }
    if (std::abs(gs[i] - goal) <= tol)
    {
        res.capacity = xs[i];
        res.value = sign * gs[i];
        return res;
    }
    double a = xs[i - 1];
    double b = xs[i];
    double best_x = b;
    double best_gap = std::abs(gs[i] - goal);
    for (int it = 0; it < max_iterations; ++it)
    {
        res.iterations = it + 1;
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (std::abs(gm - goal) < best_gap)
        {
            best_gap = std::abs(gm - goal);
            best_x = mid;
        }
        if (std::abs(gm - goal) <= tol)
        {
            res.capacity = mid;
            res.value = sign * gm;
            return res;
        }
        if (gm > goal)
        {
            a = mid;
        }
        else
        {
            b = mid;
        }
    }
    res.capacity = best_x;
    for (const TracePoint& p : res.trace)
    {
        if (p.capacity == best_x)
        {
            res.value = p.eens;
        }
    }
    return res;
}

SystemModel
without_ges(const SystemModel& model)
{
    SystemModel m = model;
    m.ges_units.clear();
    m.resolve();
    return m;
}

namespace
{

double
rated_power(const SystemModel& m)
{
    return m.ges_discharge_capacity();
}

double
median(std::vector<double> v)
{
    if (v.empty())
    {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

SystemModel
add_equivalent_generation(const SystemModel& reference, const SystemModel& test, double capacity, bool with_outages)
{
    SystemModel m = reference;
    const double p = rated_power(test);
    std::vector<double> mttf;
    std::vector<double> mttr;
    for (const CgUnit& u : reference.cg_units)
    {
        mttf.push_back(u.mttf);
        mttr.push_back(u.mttr);
    }
    const double f = with_outages ? median(mttf) : 1e9;
    const double r = with_outages ? median(mttr) : 0.0;
    for (const GesUnit& g : test.ges_units)
    {
        const double c = p > 0.0 ? capacity * g.p_discharge_max / p : 0.0;
        if (c > 0.0)
        {
            m.cg_units.push_back({g.bus, c, f > 0.0 ? f : 1e9, r});
        }
    }
    m.resolve();
    return m;
}

SystemModel
scale_load(const SystemModel& model, double factor)
{
    SystemModel m = model;
    for (Bus& b : m.buses)
    {
        b.load_scale *= std::max(0.0, factor);
    }
    m.resolve();
    return m;
}

SystemModel
remove_cg_capacity(const SystemModel& model, double capacity)
{
    SystemModel m = model;
    const double total = m.cg_capacity();
    if (total <= 0.0 || capacity <= 0.0)
    {
        return m;
    }
    const double factor = std::max(1e-9, 1.0 - capacity / total);
    for (CgUnit& u : m.cg_units)
    {
        u.capacity *= factor;
    }
    m.resolve();
    return m;
}

SystemModel
add_template_storage(const SystemModel& reference, const SystemModel& test, const GesUnit& tmpl, double capacity)
{
    SystemModel m = reference;
    const double p = rated_power(test);
    const double duration = tmpl.p_discharge_max > 0.0 ? tmpl.energy_rated / tmpl.p_discharge_max : 0.0;
    for (const GesUnit& g : test.ges_units)
    {
        GesUnit u = tmpl;
        u.bus = g.bus;
        u.name = (tmpl.name.empty() ? std::string("ES") : tmpl.name) + "@" + std::to_string(g.bus);
        const double share = p > 0.0 ? g.p_discharge_max / p : 0.0;
        const double dur = duration > 0.0 ? duration
                                          : (g.p_discharge_max > 0.0 ? g.energy_rated / g.p_discharge_max : 0.0);
        u.p_charge_max = capacity * share;
        u.p_discharge_max = capacity * share;
        u.energy_rated = dur * u.p_discharge_max;
        m.ges_units.push_back(u);
    }
    m.resolve();
    return m;
}

CcResult
evaluate_cc(const SystemModel& model, const CcQuery& query)
{
    CcResult res;
    res.index = query.index;
    res.rated_power = rated_power(model);

    auto metric = [&](const SystemModel& m) {
        ++res.evaluations;
        const ReliabilityReport r = run_smcs(m, query.reliability);
        return query.use_practical ? r.eens_practical : r.eens_theoretical;
    };

    const SystemModel reference = without_ges(model);
    res.eens_reference = metric(reference);
    if (res.rated_power <= 0.0)
    {
        res.eens_test = res.eens_reference;
        return res;
    }
    res.eens_test = metric(model);
    res.storage_helps = res.eens_test < res.eens_reference * (1.0 - 1e-12);
    if (!res.storage_helps)
    {
        res.trace.push_back({0.0, res.eens_reference});
        return res;
    }

    const double p = res.rated_power;
    double hi = 4.0 * p;
    std::function<double(double)> f;
    double target = res.eens_test;
    bool increasing = false;
    GesUnit tmpl;
    switch (query.index)
    {
        case CcIndex::kEFC:
            f = [&](double c) { return metric(add_equivalent_generation(reference, model, c, false)); };
            break;
        case CcIndex::kECC:
            f = [&](double c) { return metric(add_equivalent_generation(reference, model, c, true)); };
            break;
        case CcIndex::kELCC:
        {
            const double mean = reference.mean_load();
            hi = std::min(hi, mean);
            f = [&, mean](double c) { return metric(scale_load(reference, 1.0 - c / mean)); };
            break;
        }
        case CcIndex::kEGCS:
            hi = std::min(hi, 0.999 * model.cg_capacity());
            target = res.eens_reference;
            increasing = true;
            f = [&](double c) { return metric(remove_cg_capacity(model, c)); };
            break;
        case CcIndex::kEPSC:
            if (query.epsc_template)
            {
                tmpl = *query.epsc_template;
            }
            else if (model.study.epsc_template)
            {
                tmpl = *model.study.epsc_template;
            }
            else
            {
                throw ValidationError("EPSC requires an ES template (study.epsc_template)");
            }
            f = [&](double c) { return metric(add_template_storage(reference, model, tmpl, c)); };
            break;
    }
    res.target = target;
    const BisectResult b = bisect_capacity(f, target, 0.0, hi, query.rel_tol, query.max_iterations, increasing);
    res.capacity = b.capacity;
    res.matched = b.value;
    res.normalized = res.capacity / p;
    res.trace = b.trace;
    return res;
}

} // namespace adeqsim
