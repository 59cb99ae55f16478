#pragma once

#include "adeqsim/system_model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace adeqsim
{

/// Stable 64-bit seed for (master_seed, tag path).
std::uint64_t derive_seed(std::uint64_t master_seed, const std::vector<std::string>& tags);

class RandomStream
{
  public:
    RandomStream(std::uint64_t master_seed, const std::vector<std::string>& tags)
        : engine_(derive_seed(master_seed, tags))
    {
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal(double mu, double sigma);
    double lognormal(double mu, double sigma);
    double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(engine_); }
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

class SamplingError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class Distribution
{
    kNormal,
    kLognormal,
    kTruncatedNormal,
};

struct Interval
{
    double lo;
    double hi;
};

/// Truncated normal re-draws at most 100 times, then throws SamplingError.
double sample_distribution(Distribution kind, double mu, double sigma, std::optional<Interval> bounds,
                           RandomStream& stream);

bool sample_bernoulli_state(double p_on, RandomStream& stream);

/// Alternating exponential up/down durations rounded up to whole hours,
/// starting up. mttr == 0 gives an all-up path.
std::vector<std::uint8_t> sample_two_state_path(double mttf, double mttr, int horizon, RandomStream& stream);

/// Per-VES hourly draws.
struct VesDraws
{
    std::vector<double> diu_min;
    std::vector<double> diu_max;
    std::vector<double> baseline_net; // MW, positive = charging
    // standardized distortion draws (mean 1) for the realized bounds
    std::vector<double> zg_lower;
    std::vector<double> zh_lower;
    std::vector<double> zg_upper;
    std::vector<double> zh_upper;
};

struct ScenarioState
{
    int year_index = 0;
    std::vector<std::vector<std::uint8_t>> cg_on;
    std::vector<std::vector<std::uint8_t>> rg_on;
    std::vector<std::vector<double>> rg_available; // MW
    std::vector<std::vector<std::uint8_t>> line_on;
    std::vector<std::vector<double>> load; // [bus][hour] MW
    std::vector<std::vector<std::uint8_t>> ges_on;
    std::vector<VesDraws> ves; // empty entries for physical ES
    std::vector<std::vector<double>> kappa; // [ges][day]
};

/// Stream tags for a GES unit: bus plus ordinal among units at that bus.
std::vector<std::string> ges_tags(const SystemModel& model, int ges_index);

ScenarioState build_scenario(const SystemModel& model, int year_index, std::uint64_t master_seed);

/// Stationary on-probability mttf / (mttf + mttr).
inline double
availability(double mttf, double mttr)
{
    return mttf / (mttf + mttr);
}

} // namespace adeqsim
