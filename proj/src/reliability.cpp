#include "adeqsim/reliability.hpp"

#include "adeqsim/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace adeqsim
{

int
worker_threads(int requested)
{
    if (requested > 0)
    {
        return requested;
    }
    if (const char* env = std::getenv("ADEQSIM_THREADS"))
    {
        const int n = std::atoi(env);
        if (n > 0)
        {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ConvergenceResult
convergence_check(const std::vector<double>& values, double threshold)
{
    ConvergenceResult r;
    double sum = 0.0;
    double sumsq = 0.0;
    for (size_t k = 1; k <= values.size(); ++k)
    {
        const double v = values[k - 1];
        sum += v;
        sumsq += v * v;
        if (k < 2)
        {
            r.cov.push_back(0.0);
            continue;
        }
        const double mean = sum / k;
        const double var = std::max(0.0, (sumsq - k * mean * mean) / (k - 1));
        r.cov.push_back(mean > 0.0 ? std::sqrt(var) / (std::sqrt(static_cast<double>(k)) * mean) : 0.0);
    }
    r.converged = values.size() >= 2 && r.cov.back() < threshold;
    return r;
}

ReliabilityReport
run_smcs(const SystemModel& model, const ReliabilityOptions& options)
{
    if (options.years < 1 || options.scenarios < 1)
    {
        throw ValidationError("run_smcs: years and scenarios must be >= 1");
    }
    SimOptions sim;
    sim.strategy = options.strategy;
    sim.mode = options.mode;
    sim.gamma = options.gamma;
    sim.seed = options.seed;
    sim.record_curtailment = options.record_curtailment;
    sim.force_lp = options.force_lp;
    const DispatchContext ctx(model, sim);
    SimOptions first = sim;
    first.record_operations = options.record_operations;
    const DispatchContext ctx_first(model, first);

    const int total = options.scenarios * options.years;
    std::vector<ScenarioOutcome> outcomes(total);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        while (true)
        {
            const int k = next.fetch_add(1);
            if (k >= total)
            {
                return;
            }
            try
            {
                const ScenarioState sc = build_scenario(model, k, options.seed);
                outcomes[k] = simulate_scenario(k == 0 ? ctx_first : ctx, sc, k);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next.store(total);
            }
        }
    };
    const int threads = std::min(worker_threads(options.threads), total);
    if (threads <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i)
        {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool)
        {
            t.join();
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }

    ReliabilityReport rep;
    rep.samples = total;
    rep.horizon = model.horizon();
    const double per_year = 8760.0 / model.horizon();
    double ens_t = 0.0;
    double ens_p = 0.0;
    long lol_hours = 0;
    for (int k = 0; k < total; ++k)
    {
        ScenarioOutcome& o = outcomes[k];
        double et = 0.0;
        double ex = 0.0;
        for (int t = 0; t < model.horizon(); ++t)
        {
            et += o.theoretical[t];
            ex += o.extra[t];
            const double basis =
                options.lolp_basis == LolpBasis::kPractical ? o.theoretical[t] + o.extra[t] : o.theoretical[t];
            if (basis > 1e-9)
            {
                ++lol_hours;
            }
        }
        ens_t += et;
        ens_p += et + ex;
        rep.sample_eens_theoretical.push_back(et * per_year);
        rep.sample_eens_practical.push_back((et + ex) * per_year);
        rep.scheduled_discharge += o.scheduled_discharge;
        rep.undelivered += o.undelivered;
        rep.lp_hours += o.lp_hours;
        rep.warnings += o.warnings;
        rep.records.insert(rep.records.end(), o.records.begin(), o.records.end());
        if (k == 0)
        {
            rep.operations = std::move(o.operations);
        }
    }
    rep.eens_theoretical = ens_t / total * per_year;
    rep.eens_practical = ens_p / total * per_year;
    rep.lolp = static_cast<double>(lol_hours) / (static_cast<double>(total) * model.horizon());
    rep.scheduled_discharge = rep.scheduled_discharge / total * per_year;
    rep.undelivered = rep.undelivered / total * per_year;
    const ConvergenceResult c = convergence_check(rep.sample_eens_practical, options.convergence_threshold);
    rep.running_cov = c.cov;
    rep.converged = c.converged;
    return rep;
}

ReliabilityReport
compute_indices(const std::vector<CurtailmentRecord>& records, int scenarios, int horizon)
{
    ReliabilityReport rep;
    rep.samples = scenarios;
    rep.horizon = horizon;
    if (scenarios <= 0 || horizon <= 0)
    {
        return rep;
    }
    double ens_t = 0.0;
    double ens_p = 0.0;
    std::set<std::pair<int, int>> hours;
    for (const CurtailmentRecord& r : records)
    {
        if (r.mw <= 0.0)
        {
            continue;
        }
        if (r.cause != CurtailmentRecord::Cause::kStorageUnavailable)
        {
            ens_t += r.mw;
        }
        ens_p += r.mw;
        hours.insert({r.scenario, r.hour});
    }
    const double scale = 8760.0 / (static_cast<double>(scenarios) * horizon);
    rep.eens_theoretical = ens_t * scale;
    rep.eens_practical = ens_p * scale;
    rep.lolp = static_cast<double>(hours.size()) / (static_cast<double>(scenarios) * horizon);
    rep.records = records;
    return rep;
}

} // namespace adeqsim
