#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adeqsim
{

class ValidationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class GesKind
{
    kEsR,  // ES bundled with RG
    kEsD,  // ES at load buses
    kVesT, // thermostatic loads
    kVesE, // EV fleets
};

const char* to_string(GesKind kind);
GesKind parse_ges_kind(const std::string& text);
inline bool
is_virtual(GesKind kind)
{
    return kind == GesKind::kVesT || kind == GesKind::kVesE;
}

struct DegradationSpec
{
    bool enabled = false;
    double life_cycles = 4000.0;
    double soh_initial = 1.0;
    double soh_end = 0.8;
    double kappa_mean = 0.5;
    double kappa_std = 0.1;
};

/// Hourly decision-independent draws for VES: SoC bounds are normal,
/// baseline charge and discharge (as fractions of rated power) lognormal
/// with log-space parameters.
struct DiuSpec
{
    bool enabled = false;
    double soc_min_mean = 0.1;
    double soc_min_std = 0.02;
    double soc_max_mean = 0.9;
    double soc_max_std = 0.02;
    double baseline_mu = -2.5;
    double baseline_sigma = 0.5;
};

enum class DduFamily
{
    kLognormal,
    kNormal,
};

struct DduSpec
{
    bool enabled = false;
    double a_g_lower = 1.0;
    double a_g_upper = 1.0;
    double b_h_lower = 2.0;
    double b_h_upper = 6.0;
    double charge_price = 50.0;
    double discharge_price = 250.0;
    double price_cap = 300.0;
    double discomfort_weight = 0.5;
    // sweep multipliers on the g and h locations
    double incentive_level = 1.0;
    double discomfort_level = 1.0;
    DduFamily family = DduFamily::kLognormal;
    double cov = 0.25;
    int samples = 1000;
    bool accumulate_rd = false;
};

struct GesUnit
{
    std::string name;
    GesKind kind = GesKind::kEsD;
    int bus = 0;
    double p_charge_max = 0.0;    // MW
    double p_discharge_max = 0.0; // MW
    double energy_rated = 0.0;    // MWh
    double eta_c = 1.0;
    double eta_d = 1.0;
    double self_discharge = 0.0; // per hour
    double soc_init = 0.5;
    double soc_min = 0.0;
    double soc_max = 1.0;
    double for_rate = 0.0;
    // VES on-probability: named hourly series, else the constant.
    std::string on_prob_series;
    double on_prob = 0.95;
    // > 0 switches ES outages from hourly Bernoulli to a two-state path
    double outage_mttr = 0.0;
    DegradationSpec degradation;
    DiuSpec diu;
    DduSpec ddu;
    double capacity_share = 0.0;
};

void validate_ges(const GesUnit& unit);

struct GesState
{
    double soc = 0.0;
    double alpha = 0.0;
    double energy_available = 0.0; // MWh
    double rd = 0.0;
    // Normalized response accumulated since the RD window opened.
    double response_sum = 0.0;
    double day_charged = 0.0;    // MWh
    double day_discharged = 0.0; // MWh
};

GesState initial_state(const GesUnit& unit);

/// S^AV for a cumulative degradation fraction.
double available_energy(const GesUnit& unit, double alpha);

/// SoC after one step. Throws std::logic_error when the result leaves [0,1]
/// by more than 1e-9.
double next_soc(double soc, double p_charge, double p_discharge, const GesUnit& unit, double energy,
                double dt = 1.0);

/// Advance the state by one step against capacity `energy` and log energies.
void step_soc(GesState& state, double p_charge, double p_discharge, const GesUnit& unit, double energy,
              double dt = 1.0);

void update_degradation(GesState& state, double e_charged, double e_discharged, double kappa,
                        const GesUnit& unit);

/// Location parameters of the distortion factors.
double ddu_mu_g(const DduSpec& ddu, bool upper);
double ddu_mu_h(const DduSpec& ddu, double rd, bool upper);

struct SocBounds
{
    double lower = 0.0;
    double upper = 1.0;
};

/// Distorted bounds for given factor values, clamped to [0,1].
SocBounds apply_ddu(double diu_min, double diu_max, double g_lower, double h_lower, double g_upper,
                    double h_upper);

/// Standardized (mean 1) distortion draws shared by quantile evaluation.
class DduSampler
{
  public:
    DduSampler() = default;
    DduSampler(const DduSpec& ddu, std::uint64_t seed);

    /// Standardized variate with mean 1 from a uniform pair.
    static double standardized(const DduSpec& ddu, double u1, double u2);

    /// q-quantile of the distorted lower bound at discomfort `rd`.
    double lower_quantile(const DduSpec& ddu, double diu_min, double rd, double q) const;
    double upper_quantile(const DduSpec& ddu, double diu_max, double rd, double q) const;
    int size() const { return static_cast<int>(zg_.size()); }

  private:
    std::vector<double> zg_;
    std::vector<double> zh_;
};

double response_discomfort(double response_sum, double soc_rt, double soc_baseline, double rho,
                           double horizon = 24.0);

struct ThermalVesSpec
{
    double thermal_resistance = 2.0;    // degC/kW
    double thermal_capacity = 1.0;      // kWh/degC
    double conversion_efficiency = 3.0; // K
    double temp_in_min = 20.0;
    double temp_in_max = 24.0;
    double temp_in_setpoint = 22.0;
    std::vector<double> temp_out; // degC per hour
};

struct ThermalGes
{
    double epsilon = 0.0;
    double energy_capacity = 0.0; // kWh
    std::vector<double> power;    // kW per hour
};

ThermalGes thermal_to_ges(const ThermalVesSpec& spec, double dt = 1.0);

} // namespace adeqsim
