#pragma once

#include "adeqsim/capacity_credit.hpp"
#include "adeqsim/reliability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adeqsim
{

/// Ten significant digits, locale independent.
std::string format_float(double v);

struct RunContext
{
    Strategy strategy = Strategy::kCoordinated;
    UncertaintyMode mode = UncertaintyMode::kU2;
    int years = 1;
    int scenarios = 50;
    std::uint64_t seed = 1;
    double gamma = 0.05;
};

std::string reliability_json(const ReliabilityReport& report, const RunContext& ctx);
std::string cc_json(const CcResult& result, const RunContext& ctx);

std::string convergence_csv(const ReliabilityReport& report);
std::string operations_csv(const ReliabilityReport& report);
std::string curtailment_csv(const std::vector<CurtailmentRecord>& records);

enum class SweepParameter
{
    kResPenetration,
    kRatedPowerFraction,
    kDurationHours,
    kEfficiency,
    kMttr,
    kSelfDischarge,
    kGamma,
    kDduLevel,
};

const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& text);

struct SweepSpec
{
    SweepParameter parameter = SweepParameter::kResPenetration;
    std::vector<double> values;
    std::optional<Strategy> strategy;
    std::optional<UncertaintyMode> mode;
    std::optional<CcIndex> index;
};

/// `{"parameter": "...", "values": [...], "strategy": ..., "mode": ..., "index": ...}`
SweepSpec parse_sweep_spec(const std::string& text);

/// Config-level model with one grid value applied (before apply_study).
SystemModel apply_sweep_value(const SystemModel& config, SweepParameter p, double value);

struct SweepRow
{
    double value = 0.0;
    double eens_theoretical = 0.0;
    double eens_practical = 0.0;
    double lolp = 0.0;
    std::optional<double> cc;
    std::optional<double> cc_normalized;
    std::string error;
};

/// `base` carries the common seed and run sizes; `index` empty skips CC.
std::vector<SweepRow> run_sweep(const SystemModel& config, const SweepSpec& spec, CcQuery base,
                                std::optional<CcIndex> index);

std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace adeqsim
