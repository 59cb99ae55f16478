#include "adeqsim/report.hpp"

#include "json.hpp"

#include <cstdio>
#include <sstream>

namespace adeqsim
{

using ojson = nlohmann::ordered_json;

std::string
format_float(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace
{

ojson
context_json(const RunContext& c)
{
    ojson j;
    j["strategy"] = to_string(c.strategy);
    j["mode"] = to_string(c.mode);
    j["years"] = c.years;
    j["scenarios"] = c.scenarios;
    j["seed"] = c.seed;
    j["gamma"] = c.gamma;
    return j;
}

} // namespace

std::string
reliability_json(const ReliabilityReport& r, const RunContext& ctx)
{
    ojson j;
    j["run"] = context_json(ctx);
    j["eens_theoretical_mwh_per_yr"] = r.eens_theoretical;
    j["eens_practical_mwh_per_yr"] = r.eens_practical;
    j["lolp"] = r.lolp;
    j["samples"] = r.samples;
    j["horizon_hours"] = r.horizon;
    j["converged"] = r.converged;
    j["final_cov"] = r.running_cov.empty() ? 0.0 : r.running_cov.back();
    j["scheduled_discharge_mwh_per_yr"] = r.scheduled_discharge;
    j["undelivered_mwh_per_yr"] = r.undelivered;
    j["lp_hours"] = r.lp_hours;
    j["warnings"] = r.warnings;
    j["sample_eens_theoretical_mwh_per_yr"] = r.sample_eens_theoretical;
    j["sample_eens_practical_mwh_per_yr"] = r.sample_eens_practical;
    j["running_cov"] = r.running_cov;
    return j.dump(2) + "\n";
}

std::string
cc_json(const CcResult& r, const RunContext& ctx)
{
    ojson j;
    j["run"] = context_json(ctx);
    j["index"] = to_string(r.index);
    j["capacity_mw"] = r.capacity;
    j["normalized"] = r.normalized;
    j["rated_power_mw"] = r.rated_power;
    j["eens_reference_mwh_per_yr"] = r.eens_reference;
    j["eens_test_mwh_per_yr"] = r.eens_test;
    j["target_mwh_per_yr"] = r.target;
    j["matched_mwh_per_yr"] = r.matched;
    j["storage_helps"] = r.storage_helps;
    j["evaluations"] = r.evaluations;
    ojson trace = ojson::array();
    for (const TracePoint& p : r.trace)
    {
        trace.push_back({{"capacity_mw", p.capacity}, {"eens_mwh_per_yr", p.eens}});
    }
    j["trace"] = trace;
    return j.dump(2) + "\n";
}

std::string
convergence_csv(const ReliabilityReport& r)
{
    std::ostringstream os;
    os << "year,eens_mwh_per_yr,running_eens_mwh_per_yr,cov\n";
    double sum = 0.0;
    for (size_t k = 0; k < r.sample_eens_practical.size(); ++k)
    {
        sum += r.sample_eens_practical[k];
        os << k + 1 << ',' << format_float(r.sample_eens_practical[k]) << ',' << format_float(sum / (k + 1)) << ','
           << format_float(k < r.running_cov.size() ? r.running_cov[k] : 0.0) << '\n';
    }
    return os.str();
}

std::string
operations_csv(const ReliabilityReport& r)
{
    std::ostringstream os;
    const size_t n = r.operations.empty() ? 0 : r.operations.front().soc.size();
    os << "hour,state,rc_mw,curtailment_mw";
    for (size_t i = 0; i < n; ++i)
    {
        os << ",soc_" << i << ",charge_mw_" << i << ",discharge_mw_" << i;
    }
    os << '\n';
    for (const OperationRow& row : r.operations)
    {
        const char* state = row.state == OpState::kNormal      ? "normal"
                            : row.state == OpState::kEmergency ? "emergency"
                                                               : "recovery";
        os << row.hour << ',' << state << ',' << format_float(row.rc) << ',' << format_float(row.curtailment);
        for (size_t i = 0; i < n; ++i)
        {
            os << ',' << format_float(row.soc[i]) << ',' << format_float(row.charge[i]) << ','
               << format_float(row.discharge[i]);
        }
        os << '\n';
    }
    return os.str();
}

std::string
curtailment_csv(const std::vector<CurtailmentRecord>& records)
{
    std::ostringstream os;
    os << "scenario,hour,bus,mw,cause\n";
    for (const CurtailmentRecord& c : records)
    {
        os << c.scenario << ',' << c.hour << ',' << c.bus << ',' << format_float(c.mw) << ',' << to_string(c.cause) << '\n';
    }
    return os.str();
}

const char*
to_string(SweepParameter p)
{
    switch (p)
    {
        case SweepParameter::kResPenetration: return "res_penetration";
        case SweepParameter::kRatedPowerFraction: return "rated_power_fraction";
        case SweepParameter::kDurationHours: return "duration_hours";
        case SweepParameter::kEfficiency: return "efficiency";
        case SweepParameter::kMttr: return "mttr";
        case SweepParameter::kSelfDischarge: return "self_discharge";
        case SweepParameter::kGamma: return "gamma";
        case SweepParameter::kDduLevel: return "ddu_level";
    }
    return "?";
}

SweepParameter
parse_sweep_parameter(const std::string& text)
{
    for (SweepParameter p :
         {SweepParameter::kResPenetration, SweepParameter::kRatedPowerFraction, SweepParameter::kDurationHours,
          SweepParameter::kEfficiency, SweepParameter::kMttr, SweepParameter::kSelfDischarge, SweepParameter::kGamma,
          SweepParameter::kDduLevel})
    {
        if (text == to_string(p))
        {
            return p;
        }
    }
    throw ValidationError("sweep.parameter: unknown parameter '" + text + "'");
}

SweepSpec
parse_sweep_spec(const std::string& text)
{
    ojson j;
    try
    {
        j = ojson::parse(text);
    }
    catch (const ojson::parse_error& e)
    {
        throw ValidationError(std::string("sweep: ") + e.what());
    }
    if (!j.is_object() || !j.contains("parameter") || !j.contains("values"))
    {
        throw ValidationError("sweep: 'parameter' and 'values' are required");
    }
    SweepSpec s;
    if (!j["parameter"].is_string())
    {
        throw ValidationError("sweep.parameter: expected a string");
    }
    s.parameter = parse_sweep_parameter(j["parameter"].get<std::string>());
    if (!j["values"].is_array() || j["values"].empty())
    {
        throw ValidationError("sweep.values: expected a nonempty array");
    }
    for (const ojson& v : j["values"])
    {
        if (!v.is_number())
        {
            throw ValidationError("sweep.values: expected numbers");
        }
        s.values.push_back(v.get<double>());
    }
    if (j.contains("strategy"))
    {
        s.strategy = parse_strategy(j["strategy"].get<std::string>());
    }
    if (j.contains("mode"))
    {
        s.mode = parse_mode(j["mode"].get<std::string>());
    }
    if (j.contains("index"))
    {
        s.index = parse_cc_index(j["index"].get<std::string>());
    }
    return s;
}

namespace
{

template <typename F>
void
for_each_ges(SystemModel& m, F f)
{
    for (GesUnit& u : m.ges_units)
    {
        f(u);
    }
    if (m.study.ges_fleet)
    {
        f(m.study.ges_fleet->unit);
    }
}

} // namespace

SystemModel
apply_sweep_value(const SystemModel& config, SweepParameter p, double value)
{
    SystemModel m = config;
    switch (p)
    {
        case SweepParameter::kResPenetration:
            m.study.res_penetration = value;
            break;
        case SweepParameter::kRatedPowerFraction:
            if (!m.study.ges_fleet)
            {
                throw ValidationError("sweep rated_power_fraction requires study.ges_fleet");
            }
            m.study.ges_fleet->power_fraction = value;
            break;
        case SweepParameter::kDurationHours:
            if (!m.study.ges_fleet)
            {
                throw ValidationError("sweep duration_hours requires study.ges_fleet");
            }
            m.study.ges_fleet->duration_hours = value;
            break;
        case SweepParameter::kEfficiency:
            for_each_ges(m, [&](GesUnit& u) {
                u.eta_c = value;
                u.eta_d = value;
            });
            break;
        case SweepParameter::kMttr:
            for_each_ges(m, [&](GesUnit& u) { u.outage_mttr = value; });
            break;
        case SweepParameter::kSelfDischarge:
            for_each_ges(m, [&](GesUnit& u) { u.self_discharge = value; });
            break;
        case SweepParameter::kGamma:
            m.study.chance_level = value;
            break;
        case SweepParameter::kDduLevel:
            for_each_ges(m, [&](GesUnit& u) {
                u.ddu.incentive_level = value;
                u.ddu.discomfort_level = value;
            });
            break;
    }
    for (const GesUnit& u : m.ges_units)
    {
        validate_ges(u);
    }
    if (m.study.ges_fleet)
    {
        validate_ges(m.study.ges_fleet->unit);
    }
    return m;
}

std::vector<SweepRow>
run_sweep(const SystemModel& config, const SweepSpec& spec, CcQuery base, std::optional<CcIndex> index)
{
    std::vector<SweepRow> rows;
    for (double v : spec.values)
    {
        SweepRow row;
        row.value = v;
        try
        {
            CcQuery q = base;
            if (spec.parameter == SweepParameter::kGamma)
            {
                q.reliability.gamma = v;
            }
            const SystemModel model = apply_study(apply_sweep_value(config, spec.parameter, v));
            const ReliabilityReport r = run_smcs(model, q.reliability);
            row.eens_theoretical = r.eens_theoretical;
            row.eens_practical = r.eens_practical;
            row.lolp = r.lolp;
            if (index)
            {
                q.index = *index;
                const CcResult cc = evaluate_cc(model, q);
                row.cc = cc.capacity;
                row.cc_normalized = cc.normalized;
            }
        }
        catch (const std::exception& e)
        {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

std::string
sweep_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream os;
    os << "value,eens_t_mwh_per_yr,eens_p_mwh_per_yr,lolp,cc_mw,cc_normalized,error\n";
    for (const SweepRow& r : rows)
    {
        std::string err = r.error;
        for (char& c : err)
        {
            if (c == ',' || c == '\n' || c == '"')
            {
                c = ' ';
            }
        }
        os << format_float(r.value) << ',';
        if (r.error.empty())
        {
            os << format_float(r.eens_theoretical) << ',' << format_float(r.eens_practical) << ','
               << format_float(r.lolp);
        }
        else
        {
            os << ",,";
        }
        os << ',' << (r.cc ? format_float(*r.cc) : "") << ','
           << (r.cc_normalized ? format_float(*r.cc_normalized) : "") << ',' << err << '\n';
    }
    return os.str();
}

} // namespace adeqsim
