#pragma once

#include "adeqsim/ges.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adeqsim
{

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class BusKind
{
    kPV,
    kPQ,
};

struct Bus
{
    int id = 0;
    BusKind kind = BusKind::kPQ;
    std::string load_series;
    double load_scale = 1.0;
};

struct Line
{
    int from = 0;
    int to = 0;
    double reactance = 0.1;  // p.u.
    double flow_limit = 0.0; // MW
    double mttf = 0.0;       // hours; 0 means never fails
    double mttr = 0.0;
};

struct CgUnit
{
    int bus = 0;
    double capacity = 0.0;
    double mttf = 1000.0;
    double mttr = 0.0;
};

struct RgUnit
{
    int bus = 0;
    double capacity = 0.0;
    std::string capacity_factor_series;
    double mttf = 1000.0;
    double mttr = 0.0;
    double max_curtail_rate = 0.0;
};

enum class Placement
{
    kBundledWithRg,
    kAtLoadBuses,
};

struct GesFleetSpec
{
    GesUnit unit;
    Placement placement = Placement::kBundledWithRg;
    double power_fraction = 0.3;
    double duration_hours = 4.0;
};

struct StudyConfig
{
    int horizon_hours = 24;
    double chance_level = 0.05;
    std::uint64_t seed = 1;
    int years = 1;
    int scenarios = 50;
    double reliability_price = 1000.0;
    std::string price_series;
    double res_penetration = 0.0;
    RgUnit rg_template;
    std::optional<GesFleetSpec> ges_fleet;
    std::optional<GesUnit> epsc_template;
};

struct SystemModel
{
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<CgUnit> cg_units;
    std::vector<RgUnit> rg_units;
    std::vector<GesUnit> ges_units;
    std::map<std::string, std::vector<double>> series;
    StudyConfig study;

    // Resolved per-hour data, filled by resolve().
    std::vector<std::vector<double>> load;  // [bus][hour] MW
    std::vector<std::vector<double>> rg_cf; // [rg unit][hour]
    std::vector<std::vector<double>> ves_on_prob;
    std::vector<double> price;

    int horizon() const { return study.horizon_hours; }
    int num_buses() const { return static_cast<int>(buses.size()); }
    double total_load(int hour) const;
    double peak_load() const;
    double mean_load() const;
    double cg_capacity() const;
    double rg_capacity() const;
    double ges_discharge_capacity() const;

    /// Validate invariants and fill the resolved series. Throws ConfigError.
    void resolve();
};

/// Parse and validate a configuration document. `base_dir` anchors relative
/// sidecar CSV paths.
SystemModel load_system_config(const std::string& text, const std::string& base_dir = ".");
SystemModel load_system_file(const std::string& path);

std::string serialize_system(const SystemModel& model);

/// Hourly values from a series, tiled to `horizon`.
std::vector<double> tile_series(const std::vector<double>& values, int horizon);

/// Per PV bus: move `fraction` of CG capacity into RG units built from the
/// study's RG template.
SystemModel scale_res_penetration(const SystemModel& model, double fraction);

SystemModel attach_ges(const SystemModel& model, const GesUnit& unit, Placement placement, double power_fraction,
                       double duration_hours);

/// Recompute capacity shares over the whole fleet.
void assign_capacity_shares(std::vector<GesUnit>& units);

/// Model with the study's fleet spec applied (RES penetration, then GES).
SystemModel apply_study(const SystemModel& model);

} // namespace adeqsim
