#include "adeqsim/ges.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace adeqsim
{

const char*
to_string(GesKind kind)
{
    switch (kind)
    {
        case GesKind::kEsR: return "ES-R";
        case GesKind::kEsD: return "ES-D";
        case GesKind::kVesT: return "VES-T";
        case GesKind::kVesE: return "VES-E";
    }
    return "?";
}

GesKind
parse_ges_kind(const std::string& text)
{
    if (text == "ES-R") return GesKind::kEsR;
    if (text == "ES-D") return GesKind::kEsD;
    if (text == "VES-T") return GesKind::kVesT;
    if (text == "VES-E") return GesKind::kVesE;
    throw ValidationError("unknown GES kind '" + text + "'");
}

void
validate_ges(const GesUnit& u)
{
    auto fail = [&](const std::string& what) {
        throw ValidationError("GES '" + u.name + "': " + what);
    };
    if (u.p_charge_max < 0.0 || u.p_discharge_max < 0.0) fail("power limits must be >= 0");
    if (u.energy_rated < 0.0) fail("energy_rated must be >= 0");
    if (!(u.eta_c > 0.0 && u.eta_c <= 1.0) || !(u.eta_d > 0.0 && u.eta_d <= 1.0))
        fail("0 < eta <= 1 violated");
    if (!(u.self_discharge >= 0.0 && u.self_discharge < 1.0)) fail("0 <= self_discharge < 1 violated");
    if (!(u.soc_min >= 0.0 && u.soc_min < u.soc_max && u.soc_max <= 1.0))
        fail("0 <= soc_min < soc_max <= 1 violated");
    if (u.soc_init < u.soc_min || u.soc_init > u.soc_max) fail("soc_init outside [soc_min, soc_max]");
    if (u.for_rate < 0.0 || u.for_rate > 1.0) fail("for_rate outside [0,1]");
    if (u.on_prob < 0.0 || u.on_prob > 1.0) fail("on_prob outside [0,1]");
    if (u.outage_mttr < 0.0) fail("outage_mttr must be >= 0");
    const DegradationSpec& d = u.degradation;
    if (d.enabled)
    {
        if (!(d.soh_end < d.soh_initial && d.soh_initial <= 1.0)) fail("soh_end < soh_initial <= 1 violated");
        if (d.life_cycles <= 0.0) fail("life_cycles must be > 0");
    }
    const DduSpec& k = u.ddu;
    if (k.enabled)
    {
        if (k.discomfort_weight < 0.0 || k.discomfort_weight > 1.0) fail("discomfort_weight outside [0,1]");
        if (k.charge_price > k.price_cap || k.discharge_price > k.price_cap) fail("capacity prices exceed price_cap");
        if (k.price_cap <= 0.0) fail("price_cap must be > 0");
        if (k.samples < 1) fail("ddu samples must be >= 1");
        if (k.cov < 0.0) fail("ddu cov must be >= 0");
    }
}

double
available_energy(const GesUnit& unit, double alpha)
{
    const DegradationSpec& d = unit.degradation;
    if (!d.enabled)
    {
        return unit.energy_rated;
    }
    return unit.energy_rated * (d.soh_initial - (d.soh_initial - d.soh_end) * alpha);
}

GesState
initial_state(const GesUnit& unit)
{
    GesState s;
    s.soc = unit.soc_init;
    s.energy_available = available_energy(unit, 0.0);
    return s;
}

double
next_soc(double soc, double p_charge, double p_discharge, const GesUnit& unit, double energy, double dt)
{
    double delta = 0.0;
    if (energy > 0.0)
    {
        delta = (unit.eta_c * p_charge - p_discharge / unit.eta_d) * dt / energy;
    }
    const double out = (1.0 - unit.self_discharge) * soc + delta;
    if (out < -1e-9 || out > 1.0 + 1e-9)
    {
        throw std::logic_error("GES '" + unit.name + "': SoC step leaves [0,1]");
    }
    return std::clamp(out, 0.0, 1.0);
}

void
step_soc(GesState& state, double p_charge, double p_discharge, const GesUnit& unit, double energy, double dt)
{
    state.soc = next_soc(state.soc, p_charge, p_discharge, unit, energy, dt);
    state.day_charged += p_charge * dt;
    state.day_discharged += p_discharge * dt;
}

void
update_degradation(GesState& state, double e_charged, double e_discharged, double kappa, const GesUnit& unit)
{
    const DegradationSpec& d = unit.degradation;
    if (!d.enabled || unit.energy_rated <= 0.0)
    {
        return;
    }
    const double throughput = e_charged + e_discharged;
    if (throughput <= 0.0)
    {
        return;
    }
    double alpha = state.alpha + kappa * throughput / unit.energy_rated / d.life_cycles;
    // Snap round-off so the end of life lands exactly on SoH_end.
    if (alpha > 1.0 - 1e-12)
    {
        alpha = 1.0;
    }
    state.alpha = alpha;
    state.energy_available = available_energy(unit, alpha);
}

double
ddu_mu_g(const DduSpec& ddu, bool upper)
{
    const double a = upper ? ddu.a_g_upper : ddu.a_g_lower;
    return ddu.incentive_level * a * ddu.charge_price / ddu.price_cap;
}

double
ddu_mu_h(const DduSpec& ddu, double rd, bool upper)
{
    const double b = upper ? ddu.b_h_upper : ddu.b_h_lower;
    return ddu.discomfort_level * b * rd;
}

SocBounds
apply_ddu(double diu_min, double diu_max, double g_lower, double h_lower, double g_upper, double h_upper)
{
    SocBounds b;
    b.upper = std::clamp(diu_max * (1.0 + g_upper) * (1.0 - h_upper), 0.0, 1.0);
    b.lower = std::clamp(diu_min * (1.0 - g_lower) * (1.0 + h_lower), 0.0, 1.0);
    return b;
}

double
DduSampler::standardized(const DduSpec& ddu, double u1, double u2)
{
    const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (ddu.family == DduFamily::kNormal)
    {
        return 1.0 + ddu.cov * z;
    }
    const double s2 = std::log1p(ddu.cov * ddu.cov);
    return std::exp(-0.5 * s2 + std::sqrt(s2) * z);
}

DduSampler::DduSampler(const DduSpec& ddu, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    zg_.resize(ddu.samples);
    zh_.resize(ddu.samples);
    for (int k = 0; k < ddu.samples; ++k)
    {
        const double a = u(rng);
        const double b = u(rng);
        const double c = u(rng);
        const double d = u(rng);
        zg_[k] = standardized(ddu, a, b);
        zh_[k] = standardized(ddu, c, d);
    }
}

namespace
{

double
empirical_quantile(std::vector<double>& v, double q)
{
    std::sort(v.begin(), v.end());
    const int n = static_cast<int>(v.size());
    int k = static_cast<int>(std::ceil(q * n)) - 1;
    k = std::clamp(k, 0, n - 1);
    return v[k];
}

} // namespace

double
DduSampler::lower_quantile(const DduSpec& ddu, double diu_min, double rd, double q) const
{
    const double mg = ddu_mu_g(ddu, false);
    const double mh = ddu_mu_h(ddu, rd, false);
    std::vector<double> v(zg_.size());
    for (size_t k = 0; k < zg_.size(); ++k)
    {
        v[k] = std::clamp(diu_min * (1.0 - mg * zg_[k]) * (1.0 + mh * zh_[k]), 0.0, 1.0);
    }
    return empirical_quantile(v, q);
}

double
DduSampler::upper_quantile(const DduSpec& ddu, double diu_max, double rd, double q) const
{
    const double mg = ddu_mu_g(ddu, true);
    const double mh = ddu_mu_h(ddu, rd, true);
    std::vector<double> v(zg_.size());
    for (size_t k = 0; k < zg_.size(); ++k)
    {
        v[k] = std::clamp(diu_max * (1.0 + mg * zg_[k]) * (1.0 - mh * zh_[k]), 0.0, 1.0);
    }
    return empirical_quantile(v, q);
}

double
response_discomfort(double response_sum, double soc_rt, double soc_baseline, double rho, double horizon)
{
    return rho * response_sum / horizon + (1.0 - rho) * std::abs(soc_rt - soc_baseline);
}

ThermalGes
thermal_to_ges(const ThermalVesSpec& spec, double dt)
{
    if (spec.thermal_resistance <= 0.0 || spec.thermal_capacity <= 0.0 || spec.conversion_efficiency <= 0.0)
    {
        throw ValidationError("thermal VES: R, C, K must be > 0");
    }
    if (!(spec.temp_in_min < spec.temp_in_max))
    {
        throw ValidationError("thermal VES: temp_in_min < temp_in_max violated");
    }
    const double kr = spec.conversion_efficiency * spec.thermal_resistance;
    ThermalGes out;
    out.epsilon = -std::expm1(-dt / (spec.thermal_resistance * spec.thermal_capacity));
    out.energy_capacity = dt * (spec.temp_in_max - spec.temp_in_min) / (kr * out.epsilon);
    out.power.reserve(spec.temp_out.size());
    for (double t : spec.temp_out)
    {
        out.power.push_back((t - spec.temp_in_setpoint) / kr);
    }
    return out;
}

} // namespace adeqsim
