#pragma once

#include "adeqsim/ges.hpp"
#include "adeqsim/network.hpp"
#include "adeqsim/stochastic.hpp"
#include "adeqsim/system_model.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace adeqsim
{

enum class Strategy
{
    kFixed,
    kGreedy,
    kCoordinated,
};

enum class UncertaintyMode
{
    kU1, // no uncertainty modeled by the dispatcher
    kU2, // decision-independent uncertainty observed
    kU3, // U2 plus chance-constrained decision-dependent floors
};

enum class OpState
{
    kNormal,
    kEmergency,
    kRecovery,
};

const char* to_string(Strategy s);
const char* to_string(UncertaintyMode m);
const char* to_string(OpState s);
Strategy parse_strategy(const std::string& text);
UncertaintyMode parse_mode(const std::string& text);

/// Day plan for one unit: hourly charge/discharge and the SoC at the start
/// of each hour plus the closing value (25 entries for a 24-hour day).
struct DispatchPlan
{
    std::vector<double> charge;
    std::vector<double> discharge;
    std::vector<double> soc;
    double objective = 0.0;
};

/// Parameters the dispatcher believes for one unit in one hour.
struct UnitView
{
    double on = 1.0;
    double eps = 0.0;
    double energy = 0.0; // MWh
    double soc_min = 0.0;
    double soc_max = 1.0;
};

/// Peak-shaving plan for the units at one bus against a day of net load.
/// All units share the bus peak variable.
std::vector<DispatchPlan> fixed_dispatch_schedule(const std::vector<const GesUnit*>& units,
                                                  const std::vector<double>& net_load,
                                                  const std::vector<UnitView>& views, double* peak = nullptr);

/// Price arbitrage plan over one day with SoC returning to its start.
DispatchPlan arbitrage_schedule(const GesUnit& unit, const std::vector<double>& price, double soc0,
                                const UnitView& view);

/// Charge headroom (MW) and discharge room (MW) from the SoC limits.
double charge_room(const GesUnit& unit, double soc, const UnitView& view, double dt = 1.0);
double discharge_room(const GesUnit& unit, double soc, double floor, const UnitView& view, double dt = 1.0);

/// Surplus charging split by capacity share.
std::vector<double> greedy_normal_charge(double rc, const std::vector<GesUnit>& units,
                                         const std::vector<double>& soc, const std::vector<UnitView>& views);

struct Action
{
    double charge = 0.0;
    double discharge = 0.0;
};

/// Move the SoC toward `target` (the baseline at the end of the hour).
Action recovery_action(const GesUnit& unit, double soc, double target, const UnitView& view, double rc,
                       double share, double dt = 1.0);

/// Discomfort a unit would carry after discharging `discharge` MW this hour.
struct DiscomfortInputs
{
    double response_sum = 0.0;
    double soc = 0.0;
    double baseline_net = 0.0;
    double baseline_soc_next = 0.0;
};

struct ChanceFloor
{
    double floor = 0.0;
    double rd = 0.0;
    int iterations = 0;
    bool converged = true;
};

/// (1-gamma)-quantile floor of the distorted lower SoC bound, solved by
/// damped fixed point on the discomfort implied by discharging at the floor.
ChanceFloor chance_floor(const GesUnit& unit, const DduSampler& sampler, double diu_min, const UnitView& view,
                         const DiscomfortInputs& d, double gamma, double dt = 1.0);

struct CurtailmentRecord
{
    enum class Cause
    {
        kGenerationDeficit,
        kCongestion,
        kStorageUnavailable,
    };
    int scenario = 0;
    int hour = 0;
    int bus = 0;
    double mw = 0.0;
    Cause cause = Cause::kGenerationDeficit;
};

const char* to_string(CurtailmentRecord::Cause c);

struct OperationRow
{
    int hour = 0;
    OpState state = OpState::kNormal;
    double rc = 0.0;
    double curtailment = 0.0;
    std::vector<double> soc; // end of hour, per GES
    std::vector<double> charge;
    std::vector<double> discharge;
};

struct SimOptions
{
    Strategy strategy = Strategy::kCoordinated;
    UncertaintyMode mode = UncertaintyMode::kU2;
    double gamma = 0.05;
    std::uint64_t seed = 1;
    bool record_curtailment = false;
    bool record_operations = false;
    bool force_lp = false;
};

struct ScenarioOutcome
{
    std::vector<double> theoretical; // MW per hour
    std::vector<double> extra;       // MW per hour from replay
    double scheduled_discharge = 0.0; // MWh
    double undelivered = 0.0;         // MWh
    int lp_hours = 0;
    int warnings = 0;
    std::vector<CurtailmentRecord> records;
    std::vector<OperationRow> operations;
};

/// Scenario-independent data shared by all scenarios of one evaluation.
class DispatchContext
{
  public:
    DispatchContext(const SystemModel& model, const SimOptions& options);

    const SystemModel& model() const { return model_; }
    const SimOptions& options() const { return options_; }
    const DduSampler& sampler(int ges) const { return samplers_[ges]; }
    /// Frozen peak-shaving plan of unit `ges` for `day`.
    const DispatchPlan& fixed_plan(int ges, int day) const { return fixed_plans_[ges][day]; }

  private:
    const SystemModel& model_;
    SimOptions options_;
    std::vector<DduSampler> samplers_;
    std::vector<std::vector<DispatchPlan>> fixed_plans_;
};

/// Run one scenario chronologically through dispatch and replay.
ScenarioOutcome simulate_scenario(const DispatchContext& ctx, const ScenarioState& scenario, int scenario_id);

} // namespace adeqsim
