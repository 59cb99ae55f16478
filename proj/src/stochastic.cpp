#include "adeqsim/stochastic.hpp"

#include <algorithm>
#include <cmath>

namespace adeqsim
{

namespace
{

std::uint64_t
splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t
fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::uint64_t
derive_seed(std::uint64_t master_seed, const std::vector<std::string>& tags)
{
    std::uint64_t h = splitmix64(master_seed);
    for (const std::string& t : tags)
    {
        h = splitmix64(h ^ fnv1a(t));
    }
    return h;
}

double
RandomStream::normal(double mu, double sigma)
{
    if (sigma <= 0.0)
    {
        return mu;
    }
    return std::normal_distribution<double>(mu, sigma)(engine_);
}

double
RandomStream::lognormal(double mu, double sigma)
{
    return std::exp(normal(mu, sigma));
}

double
sample_distribution(Distribution kind, double mu, double sigma, std::optional<Interval> bounds,
                    RandomStream& stream)
{
    switch (kind)
    {
        case Distribution::kNormal: return stream.normal(mu, sigma);
        case Distribution::kLognormal: return stream.lognormal(mu, sigma);
        case Distribution::kTruncatedNormal:
        {
            const Interval b = bounds.value_or(Interval{-HUGE_VAL, HUGE_VAL});
            for (int attempt = 0; attempt < 100; ++attempt)
            {
                const double v = stream.normal(mu, sigma);
                if (v > b.lo && v < b.hi)
                {
                    return v;
                }
            }
            throw SamplingError("truncated normal: no draw inside bounds after 100 attempts");
        }
    }
    return mu;
}

bool
sample_bernoulli_state(double p_on, RandomStream& stream)
{
    return stream.uniform() < p_on;
}

std::vector<std::uint8_t>
sample_two_state_path(double mttf, double mttr, int horizon, RandomStream& stream)
{
    std::vector<std::uint8_t> path(horizon, 1);
    if (mttr <= 0.0 || mttf <= 0.0)
    {
        return path;
    }
    int t = 0;
    bool up = true;
    while (t < horizon)
    {
        const double d = stream.exponential(up ? mttf : mttr);
        const long hours = std::max(1L, static_cast<long>(std::ceil(d)));
        const int end = static_cast<int>(std::min<long>(horizon, t + hours));
        if (!up)
        {
            std::fill(path.begin() + t, path.begin() + end, 0);
        }
        t = end;
        up = !up;
    }
    return path;
}

std::vector<std::string>
ges_tags(const SystemModel& model, int ges_index)
{
    const int bus = model.ges_units[ges_index].bus;
    int slot = 0;
    for (int k = 0; k < ges_index; ++k)
    {
        if (model.ges_units[k].bus == bus)
        {
            ++slot;
        }
    }
    return {"ges", std::to_string(bus), std::to_string(slot)};
}

namespace
{

std::vector<std::string>
with_year(int year, std::vector<std::string> tags)
{
    tags.insert(tags.begin(), "y" + std::to_string(year));
    return tags;
}

} // namespace

ScenarioState
build_scenario(const SystemModel& model, int year_index, std::uint64_t master_seed)
{
    const int T = model.horizon();
    const int days = (T + 23) / 24;
    ScenarioState s;
    s.year_index = year_index;

    for (size_t i = 0; i < model.cg_units.size(); ++i)
    {
        const CgUnit& u = model.cg_units[i];
        RandomStream rs(master_seed, with_year(year_index, {"cg", std::to_string(i)}));
        s.cg_on.push_back(sample_two_state_path(u.mttf, u.mttr, T, rs));
    }
    for (size_t i = 0; i < model.rg_units.size(); ++i)
    {
        const RgUnit& u = model.rg_units[i];
        RandomStream rs(master_seed, with_year(year_index, {"rg", std::to_string(i)}));
        s.rg_on.push_back(sample_two_state_path(u.mttf, u.mttr, T, rs));
        std::vector<double> avail(T);
        for (int h = 0; h < T; ++h)
        {
            avail[h] = s.rg_on.back()[h] ? u.capacity * model.rg_cf[i][h] : 0.0;
        }
        s.rg_available.push_back(std::move(avail));
    }
    for (size_t i = 0; i < model.lines.size(); ++i)
    {
        const Line& l = model.lines[i];
        RandomStream rs(master_seed, with_year(year_index, {"line", std::to_string(i)}));
        s.line_on.push_back(sample_two_state_path(l.mttf, l.mttr, T, rs));
    }
    s.load = model.load;

    s.ges_on.resize(model.ges_units.size());
    s.ves.resize(model.ges_units.size());
    s.kappa.resize(model.ges_units.size());
    for (size_t i = 0; i < model.ges_units.size(); ++i)
    {
        const GesUnit& u = model.ges_units[i];
        const auto tags = ges_tags(model, static_cast<int>(i));
        auto tagged = [&](const char* purpose) {
            auto t = with_year(year_index, tags);
            t.push_back(purpose);
            return t;
        };

        RandomStream on(master_seed, tagged("on"));
        std::vector<std::uint8_t>& path = s.ges_on[i];
        if (!is_virtual(u.kind) && u.outage_mttr > 0.0 && u.for_rate > 0.0)
        {
            const double mttf = u.outage_mttr * (1.0 - u.for_rate) / u.for_rate;
            path = sample_two_state_path(mttf, u.outage_mttr, T, on);
        }
        else
        {
            path.resize(T);
            for (int h = 0; h < T; ++h)
            {
                const double p = is_virtual(u.kind) ? model.ves_on_prob[i][h] : 1.0 - u.for_rate;
                path[h] = sample_bernoulli_state(p, on) ? 1 : 0;
            }
        }

        RandomStream kap(master_seed, tagged("kappa"));
        s.kappa[i].resize(days, u.degradation.kappa_mean);
        if (u.degradation.enabled && u.degradation.kappa_std > 0.0)
        {
            for (int d = 0; d < days; ++d)
            {
                s.kappa[i][d] = sample_distribution(Distribution::kTruncatedNormal, u.degradation.kappa_mean,
                                                    u.degradation.kappa_std, Interval{0.0, 1.0}, kap);
            }
        }

        if (!is_virtual(u.kind))
        {
            continue;
        }
        VesDraws& v = s.ves[i];
        v.diu_min.assign(T, u.soc_min);
        v.diu_max.assign(T, u.soc_max);
        v.baseline_net.assign(T, 0.0);
        if (u.diu.enabled)
        {
            RandomStream diu(master_seed, tagged("diu"));
            for (int h = 0; h < T; ++h)
            {
                double lo = std::clamp(diu.normal(u.diu.soc_min_mean, u.diu.soc_min_std), 0.0, 1.0);
                double hi = std::clamp(diu.normal(u.diu.soc_max_mean, u.diu.soc_max_std), 0.0, 1.0);
                if (lo > hi)
                {
                    std::swap(lo, hi);
                }
                v.diu_min[h] = lo;
                v.diu_max[h] = hi;
                const double c = std::min(1.0, diu.lognormal(u.diu.baseline_mu, u.diu.baseline_sigma));
                const double d = std::min(1.0, diu.lognormal(u.diu.baseline_mu, u.diu.baseline_sigma));
                v.baseline_net[h] = c * u.p_charge_max - d * u.p_discharge_max;
            }
        }
        if (u.ddu.enabled)
        {
            RandomStream ddu(master_seed, tagged("ddu"));
            auto draw = [&](std::vector<double>& out) {
                out.resize(T);
                for (int h = 0; h < T; ++h)
                {
                    const double a = ddu.uniform();
                    const double b = ddu.uniform();
                    out[h] = DduSampler::standardized(u.ddu, a, b);
                }
            };
            draw(v.zg_lower);
            draw(v.zh_lower);
            draw(v.zg_upper);
            draw(v.zh_upper);
        }
    }
    return s;
}

} // namespace adeqsim
