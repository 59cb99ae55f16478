#pragma once

#include "adeqsim/lp.hpp"
#include "adeqsim/system_model.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

namespace adeqsim
{

/// Dispatchable storage discharge offered to the OPF.
struct DischargeOffer
{
    int bus = 0;
    double max_mw = 0.0;
};

/// One hour of network state. Fixed charges are sheddable load; fixed
/// discharges are injections the OPF may spill.
struct HourInputs
{
    std::vector<double> load;     // [bus]
    std::vector<double> gen_max;  // [bus] available CG + RG
    std::vector<double> gen_min;  // [bus] RG output that cannot be curtailed
    std::vector<double> fixed_charge;
    std::vector<double> fixed_discharge;
    std::vector<std::uint8_t> line_on;
    std::vector<DischargeOffer> offers;

    explicit HourInputs(int buses = 0, int lines = 0)
        : load(buses, 0.0), gen_max(buses, 0.0), gen_min(buses, 0.0), fixed_charge(buses, 0.0),
          fixed_discharge(buses, 0.0), line_on(lines, 1)
    {
    }
};

struct OpfResult
{
    double curtailment = 0.0;        // MW, load only
    double copper_curtailment = 0.0; // same hour with line limits ignored
    std::vector<double> bus_curtailment;
    std::vector<double> charge_shed; // [bus]
    std::vector<double> spill;       // [bus]
    std::vector<double> generation;  // [bus]
    std::vector<double> discharge;   // [offer]
    std::vector<double> flows;       // [line], zero when out of service
    bool used_lp = false;
    bool relaxed_rg_min = false;
};

struct Ptdf
{
    bool valid = false;
    std::vector<std::vector<double>> factors; // [line][bus], slack bus 0
};

Ptdf compute_ptdf(const SystemModel& model, const std::vector<std::uint8_t>& line_on);

/// DC-OPF minimizing load curtailment. Instances cache PTDF matrices by
/// outage pattern and are not thread safe; use one per worker.
class DcOpf
{
  public:
    explicit DcOpf(const SystemModel& model);

    OpfResult solve(const HourInputs& in);

    /// The LP solved for `in` (for dumps and tests).
    lp::LpProblem build_lp(const HourInputs& in, bool relax_rg_min) const;

    /// Force every hour through the LP.
    void set_fast_path(bool on) { fast_path_ = on; }

    static double curtail_cost(int bus) { return 1.0 + 1e-6 * bus; }
    static double shed_cost(int bus) { return 0.5 * (1.0 + 1e-6 * bus); }
    static double discharge_cost(int offer) { return 1e-4 * (1.0 + 1e-3 * offer); }

  private:
    bool try_fast(const HourInputs& in, OpfResult& out);
    OpfResult solve_lp_path(const HourInputs& in);
    const Ptdf& ptdf(const std::vector<std::uint8_t>& line_on);

    const SystemModel& model_;
    bool fast_path_ = true;
    std::map<std::vector<std::uint8_t>, std::unique_ptr<Ptdf>> cache_;
};

/// Node balance and flow-limit residuals of a result.
double balance_residual(const SystemModel& model, const HourInputs& in, const OpfResult& r);
double flow_violation(const SystemModel& model, const HourInputs& in, const OpfResult& r);

} // namespace adeqsim
