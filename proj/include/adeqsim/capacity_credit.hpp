#pragma once

#include "adeqsim/reliability.hpp"
#include "adeqsim/system_model.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adeqsim
{

enum class CcIndex
{
    kEFC,
    kECC,
    kELCC,
    kEGCS,
    kEPSC,
};

const char* to_string(CcIndex index);
CcIndex parse_cc_index(const std::string& text);

struct TracePoint
{
    double capacity = 0.0; // MW
    double eens = 0.0;     // MWh/yr
};

class BracketError : public std::runtime_error
{
  public:
    BracketError(const std::string& what, std::vector<TracePoint> trace)
        : std::runtime_error(what), trace(std::move(trace))
    {
    }
    std::vector<TracePoint> trace;
};

struct BisectResult
{
    double capacity = 0.0;
    double value = 0.0;
    int iterations = 0;
    std::vector<TracePoint> trace;
};

/// Root of f(c) = target for f nonincreasing on [lo, hi] (nondecreasing when
/// `increasing`). A 5-point scan checks monotonicity and seeds the bracket.
BisectResult bisect_capacity(const std::function<double(double)>& f, double target, double lo, double hi,
                             double rel_tol = 0.02, int max_iterations = 40, bool increasing = false);

struct CcQuery
{
    CcIndex index = CcIndex::kEGCS;
    ReliabilityOptions reliability;
    double rel_tol = 0.02;
    int max_iterations = 40;
    bool use_practical = true;
    /// ES template for EPSC; falls back to the study's template.
    std::optional<GesUnit> epsc_template;
};

struct CcResult
{
    CcIndex index = CcIndex::kEGCS;
    double capacity = 0.0;   // MW
    double normalized = 0.0; // of GES rated discharge power
    double rated_power = 0.0;
    double eens_reference = 0.0;
    double eens_test = 0.0;
    double target = 0.0;
    double matched = 0.0;
    bool storage_helps = false;
    int evaluations = 0;
    std::vector<TracePoint> trace;
};

SystemModel without_ges(const SystemModel& model);

/// Reference model plus `capacity` MW of equivalence resource for EFC/ECC.
SystemModel add_equivalent_generation(const SystemModel& reference, const SystemModel& test, double capacity,
                                      bool with_outages);
SystemModel scale_load(const SystemModel& model, double factor);
SystemModel remove_cg_capacity(const SystemModel& model, double capacity);
/// Reference model plus template ES sized to `capacity` MW at the test fleet's buses.
SystemModel add_template_storage(const SystemModel& reference, const SystemModel& test, const GesUnit& tmpl,
                                 double capacity);

CcResult evaluate_cc(const SystemModel& model, const CcQuery& query);

} // namespace adeqsim
