#pragma once

#include "adeqsim/dispatch.hpp"
#include "adeqsim/system_model.hpp"

#include <cstdint>
#include <vector>

namespace adeqsim
{

enum class LolpBasis
{
    kPractical,
    kTheoretical,
};

struct ReliabilityOptions
{
    Strategy strategy = Strategy::kCoordinated;
    UncertaintyMode mode = UncertaintyMode::kU2;
    int years = 1;
    int scenarios = 50;
    std::uint64_t seed = 1;
    double gamma = 0.05;
    LolpBasis lolp_basis = LolpBasis::kPractical;
    bool record_curtailment = false;
    bool record_operations = false; // first sample only
    bool force_lp = false;
    int threads = 0; // 0: ADEQSIM_THREADS or hardware concurrency
    double convergence_threshold = 0.05;
};

struct ReliabilityReport
{
    double eens_theoretical = 0.0; // MWh/yr
    double eens_practical = 0.0;   // MWh/yr
    double lolp = 0.0;
    int samples = 0; // scenarios x years
    int horizon = 0;
    // per simulated year, in sample order
    std::vector<double> sample_eens_theoretical;
    std::vector<double> sample_eens_practical;
    std::vector<double> running_cov;
    bool converged = false;
    double scheduled_discharge = 0.0; // MWh/yr
    double undelivered = 0.0;         // MWh/yr
    int lp_hours = 0;
    int warnings = 0;
    std::vector<CurtailmentRecord> records;
    std::vector<OperationRow> operations;
};

/// Worker count from ADEQSIM_THREADS, else the hardware.
int worker_threads(int requested = 0);

ReliabilityReport run_smcs(const SystemModel& model, const ReliabilityOptions& options);

/// Indices from curtailment records alone.
ReliabilityReport compute_indices(const std::vector<CurtailmentRecord>& records, int scenarios, int horizon);

struct ConvergenceResult
{
    std::vector<double> cov; // entry k-1 for the first k values; 0 for k = 1
    bool converged = false;
};

/// Running coefficient of variation of the mean estimate, s_k / (sqrt(k) m_k).
ConvergenceResult convergence_check(const std::vector<double>& values, double threshold = 0.05);

} // namespace adeqsim
