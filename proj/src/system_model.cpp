#include "adeqsim/system_model.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace adeqsim
{

using nlohmann::json;

double
SystemModel::total_load(int hour) const
{
    double s = 0.0;
    for (const auto& l : load)
    {
        s += l[hour];
    }
    return s;
}

double
SystemModel::peak_load() const
{
    double p = 0.0;
    for (int h = 0; h < horizon(); ++h)
    {
        p = std::max(p, total_load(h));
    }
    return p;
}

double
SystemModel::mean_load() const
{
    double s = 0.0;
    for (int h = 0; h < horizon(); ++h)
    {
        s += total_load(h);
    }
    return horizon() > 0 ? s / horizon() : 0.0;
}

double
SystemModel::cg_capacity() const
{
    double s = 0.0;
    for (const CgUnit& u : cg_units)
    {
        s += u.capacity;
    }
    return s;
}

double
SystemModel::rg_capacity() const
{
    double s = 0.0;
    for (const RgUnit& u : rg_units)
    {
        s += u.capacity;
    }
    return s;
}

double
SystemModel::ges_discharge_capacity() const
{
    double s = 0.0;
    for (const GesUnit& u : ges_units)
    {
        s += u.p_discharge_max;
    }
    return s;
}

std::vector<double>
tile_series(const std::vector<double>& values, int horizon)
{
    std::vector<double> out(horizon);
    for (int h = 0; h < horizon; ++h)
    {
        out[h] = values[h % values.size()];
    }
    return out;
}

namespace
{

std::string
at(const std::string& what, size_t i)
{
    return what + "[" + std::to_string(i) + "]";
}

const std::vector<double>&
find_series(const SystemModel& m, const std::string& name, const std::string& field)
{
    auto it = m.series.find(name);
    if (it == m.series.end())
    {
        throw ConfigError(field + ": dangling series reference '" + name + "'");
    }
    if (it->second.empty())
    {
        throw ConfigError(field + ": series '" + name + "' is empty");
    }
    return it->second;
}

void
check_bus(const SystemModel& m, int bus, const std::string& field)
{
    if (bus < 0 || bus >= m.num_buses())
    {
        throw ConfigError(field + ": dangling bus reference " + std::to_string(bus) + " (have " +
                          std::to_string(m.num_buses()) + " buses)");
    }
}

bool
connected(const SystemModel& m)
{
    const int n = m.num_buses();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x)
        {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    for (const Line& l : m.lines)
    {
        parent[find(l.from)] = find(l.to);
    }
    for (int b = 1; b < n; ++b)
    {
        if (find(b) != find(0))
        {
            return false;
        }
    }
    return true;
}

} // namespace

void
SystemModel::resolve()
{
    if (study.horizon_hours <= 0)
    {
        throw ConfigError("study.horizon_hours: must be > 0");
    }
    if (!(study.chance_level > 0.0 && study.chance_level < 1.0))
    {
        throw ConfigError("study.chance_level: gamma in (0,1) violated");
    }
    if (study.years < 1 || study.scenarios < 1)
    {
        throw ConfigError("study: years and scenarios must be >= 1");
    }
    if (buses.empty())
    {
        throw ConfigError("buses: at least one bus required");
    }
    const int T = horizon();
    load.assign(buses.size(), std::vector<double>(T, 0.0));
    for (size_t i = 0; i < buses.size(); ++i)
    {
        const Bus& b = buses[i];
        const std::string f = at("buses", i);
        if (b.id != static_cast<int>(i))
        {
            throw ConfigError(f + ".id: ids must be unique and contiguous from 0");
        }
        if (b.load_series.empty())
        {
            if (b.kind == BusKind::kPQ)
            {
                throw ConfigError(f + ".load_series: PQ bus requires a load series");
            }
            continue;
        }
        const auto& s = find_series(*this, b.load_series, f + ".load_series");
        for (int h = 0; h < T; ++h)
        {
            const double v = s[h % s.size()] * b.load_scale;
            if (!(v >= 0.0))
            {
                throw ConfigError(f + ": load must be >= 0");
            }
            load[i][h] = v;
        }
    }
    for (size_t i = 0; i < lines.size(); ++i)
    {
        const Line& l = lines[i];
        const std::string f = at("lines", i);
        check_bus(*this, l.from, f + ".from");
        check_bus(*this, l.to, f + ".to");
        if (l.from == l.to) throw ConfigError(f + ": self loop");
        if (!(l.reactance > 0.0)) throw ConfigError(f + ".reactance: must be > 0");
        if (!(l.flow_limit > 0.0)) throw ConfigError(f + ".flow_limit: must be > 0");
        if (l.mttf < 0.0 || l.mttr < 0.0) throw ConfigError(f + ": mttf/mttr must be >= 0");
    }
    if (!connected(*this))
    {
        throw ConfigError("lines: network is not connected");
    }
    for (size_t i = 0; i < cg_units.size(); ++i)
    {
        const CgUnit& u = cg_units[i];
        const std::string f = at("cg_units", i);
        check_bus(*this, u.bus, f + ".bus");
        if (!(u.capacity > 0.0)) throw ConfigError(f + ".capacity: must be > 0");
        if (!(u.mttf > 0.0)) throw ConfigError(f + ".mttf: must be > 0");
        if (u.mttr < 0.0) throw ConfigError(f + ".mttr: must be >= 0");
    }
    rg_cf.clear();
    for (size_t i = 0; i < rg_units.size(); ++i)
    {
        const RgUnit& u = rg_units[i];
        const std::string f = at("rg_units", i);
        check_bus(*this, u.bus, f + ".bus");
        if (u.capacity < 0.0) throw ConfigError(f + ".capacity: must be >= 0");
        if (!(u.mttf > 0.0)) throw ConfigError(f + ".mttf: must be > 0");
        if (u.mttr < 0.0) throw ConfigError(f + ".mttr: must be >= 0");
        if (u.max_curtail_rate < 0.0 || u.max_curtail_rate > 1.0)
            throw ConfigError(f + ".max_curtail_rate: outside [0,1]");
        const auto& s = find_series(*this, u.capacity_factor_series, f + ".capacity_factor_series");
        for (double v : s)
        {
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(f + ": capacity factors outside [0,1]");
        }
        rg_cf.push_back(tile_series(s, T));
    }
    assign_capacity_shares(ges_units);
    ves_on_prob.clear();
    for (size_t i = 0; i < ges_units.size(); ++i)
    {
        const GesUnit& u = ges_units[i];
        const std::string f = at("ges_units", i);
        check_bus(*this, u.bus, f + ".bus");
        try
        {
            validate_ges(u);
        }
        catch (const ValidationError& e)
        {
            throw ConfigError(f + ": " + e.what());
        }
        if (!u.on_prob_series.empty())
        {
            const auto& s = find_series(*this, u.on_prob_series, f + ".on_prob_series");
            for (double v : s)
            {
                if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(f + ": on-probabilities outside [0,1]");
            }
            ves_on_prob.push_back(tile_series(s, T));
        }
        else
        {
            ves_on_prob.emplace_back(T, u.on_prob);
        }
    }
    if (study.price_series.empty())
    {
        price.assign(T, 1.0);
    }
    else
    {
        price = tile_series(find_series(*this, study.price_series, "study.price_series"), T);
    }
    if (!(cg_capacity() + rg_capacity() > 0.0))
    {
        throw ConfigError("installed capacity: sum of CG and RG capacity must be > 0");
    }
}

namespace
{

// Field readers that name the offending path.
double
num(const json& j, const char* key, double fallback, const std::string& path)
{
    if (!j.contains(key))
    {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number())
    {
        throw ConfigError(path + "." + key + ": expected a number");
    }
    return v.get<double>();
}

int
integer(const json& j, const char* key, int fallback, const std::string& path)
{
    if (!j.contains(key))
    {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer())
    {
        throw ConfigError(path + "." + key + ": expected an integer");
    }
    return v.get<int>();
}

std::string
str(const json& j, const char* key, const std::string& fallback, const std::string& path)
{
    if (!j.contains(key))
    {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_string())
    {
        throw ConfigError(path + "." + key + ": expected a string");
    }
    return v.get<std::string>();
}

bool
boolean(const json& j, const char* key, bool fallback, const std::string& path)
{
    if (!j.contains(key))
    {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_boolean())
    {
        throw ConfigError(path + "." + key + ": expected true/false");
    }
    return v.get<bool>();
}

const json&
array(const json& j, const char* key, const std::string& path)
{
    static const json empty = json::array();
    if (!j.contains(key))
    {
        return empty;
    }
    const json& v = j.at(key);
    if (!v.is_array())
    {
        throw ConfigError(path + key + ": expected an array");
    }
    return v;
}

GesUnit
parse_ges(const json& j, const std::string& path)
{
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    GesUnit u;
    u.name = str(j, "name", "", path);
    try
    {
        u.kind = parse_ges_kind(str(j, "kind", "ES-D", path));
    }
    catch (const ValidationError& e)
    {
        throw ConfigError(path + ".kind: " + e.what());
    }
    u.bus = integer(j, "bus", 0, path);
    u.p_charge_max = num(j, "p_charge_max", 0.0, path);
    u.p_discharge_max = num(j, "p_discharge_max", u.p_charge_max, path);
    u.energy_rated = num(j, "energy_rated", 0.0, path);
    u.eta_c = num(j, "eta_c", 1.0, path);
    u.eta_d = num(j, "eta_d", 1.0, path);
    u.self_discharge = num(j, "self_discharge", 0.0, path);
    u.soc_init = num(j, "soc_init", 0.5, path);
    u.soc_min = num(j, "soc_min", 0.0, path);
    u.soc_max = num(j, "soc_max", 1.0, path);
    u.for_rate = num(j, "for_rate", 0.0, path);
    u.on_prob_series = str(j, "on_prob_series", "", path);
    u.on_prob = num(j, "on_prob", 0.95, path);
    u.outage_mttr = num(j, "outage_mttr", 0.0, path);
    if (j.contains("degradation"))
    {
        const json& d = j.at("degradation");
        const std::string p = path + ".degradation";
        u.degradation.enabled = boolean(d, "enabled", true, p);
        u.degradation.life_cycles = num(d, "life_cycles", 4000.0, p);
        u.degradation.soh_initial = num(d, "soh_initial", 1.0, p);
        u.degradation.soh_end = num(d, "soh_end", 0.8, p);
        u.degradation.kappa_mean = num(d, "kappa_mean", 0.5, p);
        u.degradation.kappa_std = num(d, "kappa_std", 0.1, p);
    }
    if (j.contains("diu"))
    {
        const json& d = j.at("diu");
        const std::string p = path + ".diu";
        DiuSpec& s = u.diu;
        s.enabled = boolean(d, "enabled", true, p);
        s.soc_min_mean = num(d, "soc_min_mean", s.soc_min_mean, p);
        s.soc_min_std = num(d, "soc_min_std", s.soc_min_std, p);
        s.soc_max_mean = num(d, "soc_max_mean", s.soc_max_mean, p);
        s.soc_max_std = num(d, "soc_max_std", s.soc_max_std, p);
        s.baseline_mu = num(d, "baseline_mu", s.baseline_mu, p);
        s.baseline_sigma = num(d, "baseline_sigma", s.baseline_sigma, p);
    }
    if (j.contains("ddu"))
    {
        const json& d = j.at("ddu");
        const std::string p = path + ".ddu";
        DduSpec& s = u.ddu;
        s.enabled = boolean(d, "enabled", true, p);
        s.a_g_lower = num(d, "a_g_lower", s.a_g_lower, p);
        s.a_g_upper = num(d, "a_g_upper", s.a_g_upper, p);
        s.b_h_lower = num(d, "b_h_lower", s.b_h_lower, p);
        s.b_h_upper = num(d, "b_h_upper", s.b_h_upper, p);
        s.charge_price = num(d, "charge_price", s.charge_price, p);
        s.discharge_price = num(d, "discharge_price", s.discharge_price, p);
        s.price_cap = num(d, "price_cap", s.price_cap, p);
        s.discomfort_weight = num(d, "discomfort_weight", s.discomfort_weight, p);
        s.incentive_level = num(d, "incentive_level", s.incentive_level, p);
        s.discomfort_level = num(d, "discomfort_level", s.discomfort_level, p);
        const std::string fam = str(d, "family", "lognormal", p);
        if (fam == "lognormal") s.family = DduFamily::kLognormal;
        else if (fam == "normal") s.family = DduFamily::kNormal;
        else throw ConfigError(p + ".family: expected lognormal or normal");
        s.cov = num(d, "cov", s.cov, p);
        s.samples = integer(d, "samples", s.samples, p);
        s.accumulate_rd = boolean(d, "accumulate_rd", s.accumulate_rd, p);
    }
    return u;
}

json
ges_to_json(const GesUnit& u)
{
    json j = {
        {"name", u.name},
        {"kind", to_string(u.kind)},
        {"bus", u.bus},
        {"p_charge_max", u.p_charge_max},
        {"p_discharge_max", u.p_discharge_max},
        {"energy_rated", u.energy_rated},
        {"eta_c", u.eta_c},
        {"eta_d", u.eta_d},
        {"self_discharge", u.self_discharge},
        {"soc_init", u.soc_init},
        {"soc_min", u.soc_min},
        {"soc_max", u.soc_max},
        {"for_rate", u.for_rate},
        {"on_prob", u.on_prob},
        {"outage_mttr", u.outage_mttr},
    };
    if (!u.on_prob_series.empty())
    {
        j["on_prob_series"] = u.on_prob_series;
    }
    const DegradationSpec& d = u.degradation;
    j["degradation"] = {{"enabled", d.enabled},         {"life_cycles", d.life_cycles},
                        {"soh_initial", d.soh_initial}, {"soh_end", d.soh_end},
                        {"kappa_mean", d.kappa_mean},   {"kappa_std", d.kappa_std}};
    const DiuSpec& i = u.diu;
    j["diu"] = {{"enabled", i.enabled},         {"soc_min_mean", i.soc_min_mean}, {"soc_min_std", i.soc_min_std},
                {"soc_max_mean", i.soc_max_mean}, {"soc_max_std", i.soc_max_std}, {"baseline_mu", i.baseline_mu},
                {"baseline_sigma", i.baseline_sigma}};
    const DduSpec& k = u.ddu;
    j["ddu"] = {{"enabled", k.enabled},
                {"a_g_lower", k.a_g_lower},
                {"a_g_upper", k.a_g_upper},
                {"b_h_lower", k.b_h_lower},
                {"b_h_upper", k.b_h_upper},
                {"charge_price", k.charge_price},
                {"discharge_price", k.discharge_price},
                {"price_cap", k.price_cap},
                {"discomfort_weight", k.discomfort_weight},
                {"incentive_level", k.incentive_level},
                {"discomfort_level", k.discomfort_level},
                {"family", k.family == DduFamily::kNormal ? "normal" : "lognormal"},
                {"cov", k.cov},
                {"samples", k.samples},
                {"accumulate_rd", k.accumulate_rd}};
    return j;
}

RgUnit
parse_rg(const json& j, const std::string& path)
{
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    RgUnit u;
    u.bus = integer(j, "bus", 0, path);
    u.capacity = num(j, "capacity", 0.0, path);
    u.capacity_factor_series = str(j, "capacity_factor_series", "", path);
    u.mttf = num(j, "mttf", 1000.0, path);
    u.mttr = num(j, "mttr", 0.0, path);
    u.max_curtail_rate = num(j, "max_curtail_rate", 0.0, path);
    return u;
}

json
rg_to_json(const RgUnit& u)
{
    return {{"bus", u.bus},   {"capacity", u.capacity}, {"capacity_factor_series", u.capacity_factor_series},
            {"mttf", u.mttf}, {"mttr", u.mttr},         {"max_curtail_rate", u.max_curtail_rate}};
}

void
read_csv_series(const std::string& path, std::map<std::string, std::vector<double>>& out)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("series_files: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line))
    {
        throw ConfigError(path + ": missing header row");
    }
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            cell.erase(std::remove_if(cell.begin(), cell.end(), [](unsigned char c) { return std::isspace(c); }),
                       cell.end());
            names.push_back(cell);
        }
    }
    std::vector<std::vector<double>> cols(names.size());
    int row = 1;
    while (std::getline(in, line))
    {
        ++row;
        if (line.empty() || line == "\r")
        {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        size_t c = 0;
        while (std::getline(ss, cell, ','))
        {
            if (c >= names.size())
            {
                throw ConfigError(path + ":" + std::to_string(row) + ": too many columns");
            }
            try
            {
                cols[c].push_back(std::stod(cell));
            }
            catch (const std::exception&)
            {
                throw ConfigError(path + ":" + std::to_string(row) + ": bad number '" + cell + "'");
            }
            ++c;
        }
        if (c != names.size())
        {
            throw ConfigError(path + ":" + std::to_string(row) + ": expected " + std::to_string(names.size()) +
                              " columns");
        }
    }
    for (size_t c = 0; c < names.size(); ++c)
    {
        out[names[c]] = std::move(cols[c]);
    }
}

Placement
parse_placement(const std::string& s, const std::string& path)
{
    if (s == "bundled-with-rg") return Placement::kBundledWithRg;
    if (s == "at-load-buses") return Placement::kAtLoadBuses;
    throw ConfigError(path + ": expected bundled-with-rg or at-load-buses");
}

} // namespace

SystemModel
load_system_config(const std::string& text, const std::string& base_dir)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        const size_t upto = std::min(static_cast<size_t>(e.byte), text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw ConfigError("parse error at line " + std::to_string(line) + ": " + e.what());
    }
    if (!doc.is_object())
    {
        throw ConfigError("document: expected a JSON object");
    }

    SystemModel m;
    const json& buses = array(doc, "buses", "");
    for (size_t i = 0; i < buses.size(); ++i)
    {
        const json& b = buses[i];
        const std::string p = at("buses", i);
        Bus bus;
        bus.id = integer(b, "id", static_cast<int>(i), p);
        const std::string kind = str(b, "kind", "PQ", p);
        if (kind == "PV") bus.kind = BusKind::kPV;
        else if (kind == "PQ") bus.kind = BusKind::kPQ;
        else throw ConfigError(p + ".kind: expected PV or PQ");
        bus.load_series = str(b, "load_series", "", p);
        bus.load_scale = num(b, "load_scale", 1.0, p);
        m.buses.push_back(bus);
    }
    const json& lines = array(doc, "lines", "");
    for (size_t i = 0; i < lines.size(); ++i)
    {
        const json& l = lines[i];
        const std::string p = at("lines", i);
        Line line;
        line.from = integer(l, "from", -1, p);
        line.to = integer(l, "to", -1, p);
        line.reactance = num(l, "reactance", 0.0, p);
        line.flow_limit = num(l, "flow_limit", 0.0, p);
        line.mttf = num(l, "mttf", 0.0, p);
        line.mttr = num(l, "mttr", 0.0, p);
        m.lines.push_back(line);
    }
    const json& cgs = array(doc, "cg_units", "");
    for (size_t i = 0; i < cgs.size(); ++i)
    {
        const json& c = cgs[i];
        const std::string p = at("cg_units", i);
        CgUnit u;
        u.bus = integer(c, "bus", -1, p);
        u.capacity = num(c, "capacity", 0.0, p);
        u.mttf = num(c, "mttf", 1000.0, p);
        u.mttr = num(c, "mttr", 0.0, p);
        m.cg_units.push_back(u);
    }
    const json& rgs = array(doc, "rg_units", "");
    for (size_t i = 0; i < rgs.size(); ++i)
    {
        m.rg_units.push_back(parse_rg(rgs[i], at("rg_units", i)));
    }
    const json& ges = array(doc, "ges_units", "");
    for (size_t i = 0; i < ges.size(); ++i)
    {
        m.ges_units.push_back(parse_ges(ges[i], at("ges_units", i)));
    }
    if (doc.contains("series"))
    {
        const json& s = doc.at("series");
        if (!s.is_object()) throw ConfigError("series: expected an object of named arrays");
        for (auto it = s.begin(); it != s.end(); ++it)
        {
            if (!it.value().is_array()) throw ConfigError("series." + it.key() + ": expected an array");
            std::vector<double> v;
            for (const json& x : it.value())
            {
                if (!x.is_number()) throw ConfigError("series." + it.key() + ": expected numbers");
                v.push_back(x.get<double>());
            }
            m.series[it.key()] = std::move(v);
        }
    }
    const json& files = array(doc, "series_files", "");
    for (const json& f : files)
    {
        if (!f.is_string()) throw ConfigError("series_files: expected file names");
        std::filesystem::path p(f.get<std::string>());
        if (p.is_relative())
        {
            p = std::filesystem::path(base_dir) / p;
        }
        read_csv_series(p.string(), m.series);
    }
    if (doc.contains("study"))
    {
        const json& s = doc.at("study");
        const std::string p = "study";
        StudyConfig& st = m.study;
        st.horizon_hours = integer(s, "horizon_hours", st.horizon_hours, p);
        st.chance_level = num(s, "chance_level", st.chance_level, p);
        if (s.contains("seed"))
        {
            if (!s.at("seed").is_number_unsigned()) throw ConfigError("study.seed: expected a nonnegative integer");
            st.seed = s.at("seed").get<std::uint64_t>();
        }
        st.years = integer(s, "years", st.years, p);
        st.scenarios = integer(s, "scenarios", st.scenarios, p);
        st.reliability_price = num(s, "reliability_price", st.reliability_price, p);
        st.price_series = str(s, "price_series", "", p);
        st.res_penetration = num(s, "res_penetration", 0.0, p);
        if (st.res_penetration < 0.0 || st.res_penetration > 1.0)
            throw ConfigError("study.res_penetration: outside [0,1]");
        if (s.contains("rg_template"))
        {
            st.rg_template = parse_rg(s.at("rg_template"), "study.rg_template");
        }
        if (s.contains("ges_fleet"))
        {
            const json& g = s.at("ges_fleet");
            const std::string gp = "study.ges_fleet";
            GesFleetSpec fleet;
            fleet.unit = parse_ges(g.contains("template") ? g.at("template") : json::object(), gp + ".template");
            fleet.placement = parse_placement(str(g, "placement", "bundled-with-rg", gp), gp + ".placement");
            fleet.power_fraction = num(g, "power_fraction", fleet.power_fraction, gp);
            fleet.duration_hours = num(g, "duration_hours", fleet.duration_hours, gp);
            st.ges_fleet = fleet;
        }
        if (s.contains("epsc_template"))
        {
            st.epsc_template = parse_ges(s.at("epsc_template"), "study.epsc_template");
        }
    }
    m.resolve();
    return m;
}

SystemModel
load_system_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return load_system_config(ss.str(), dir.empty() ? "." : dir);
}

std::string
serialize_system(const SystemModel& m)
{
    json doc;
    doc["buses"] = json::array();
    for (const Bus& b : m.buses)
    {
        json j = {{"id", b.id}, {"kind", b.kind == BusKind::kPV ? "PV" : "PQ"}, {"load_scale", b.load_scale}};
        if (!b.load_series.empty())
        {
            j["load_series"] = b.load_series;
        }
        doc["buses"].push_back(j);
    }
    doc["lines"] = json::array();
    for (const Line& l : m.lines)
    {
        doc["lines"].push_back({{"from", l.from},
                                {"to", l.to},
                                {"reactance", l.reactance},
                                {"flow_limit", l.flow_limit},
                                {"mttf", l.mttf},
                                {"mttr", l.mttr}});
    }
    doc["cg_units"] = json::array();
    for (const CgUnit& u : m.cg_units)
    {
        doc["cg_units"].push_back({{"bus", u.bus}, {"capacity", u.capacity}, {"mttf", u.mttf}, {"mttr", u.mttr}});
    }
    doc["rg_units"] = json::array();
    for (const RgUnit& u : m.rg_units)
    {
        doc["rg_units"].push_back(rg_to_json(u));
    }
    doc["ges_units"] = json::array();
    for (const GesUnit& u : m.ges_units)
    {
        doc["ges_units"].push_back(ges_to_json(u));
    }
    doc["series"] = json::object();
    for (const auto& [name, v] : m.series)
    {
        doc["series"][name] = v;
    }
    const StudyConfig& st = m.study;
    json s = {{"horizon_hours", st.horizon_hours},
              {"chance_level", st.chance_level},
              {"seed", st.seed},
              {"years", st.years},
              {"scenarios", st.scenarios},
              {"reliability_price", st.reliability_price},
              {"res_penetration", st.res_penetration},
              {"rg_template", rg_to_json(st.rg_template)}};
    if (!st.price_series.empty())
    {
        s["price_series"] = st.price_series;
    }
    if (st.ges_fleet)
    {
        s["ges_fleet"] = {
            {"template", ges_to_json(st.ges_fleet->unit)},
            {"placement",
             st.ges_fleet->placement == Placement::kBundledWithRg ? "bundled-with-rg" : "at-load-buses"},
            {"power_fraction", st.ges_fleet->power_fraction},
            {"duration_hours", st.ges_fleet->duration_hours}};
    }
    if (st.epsc_template)
    {
        s["epsc_template"] = ges_to_json(*st.epsc_template);
    }
    doc["study"] = s;
    return doc.dump(2);
}

SystemModel
scale_res_penetration(const SystemModel& model, double fraction)
{
    if (fraction < 0.0 || fraction > 1.0)
    {
        throw ValidationError("res penetration fraction outside [0,1]");
    }
    if (fraction == 0.0)
    {
        return model;
    }
    SystemModel m = model;
    std::vector<double> cg_at_bus(m.num_buses(), 0.0);
    for (const CgUnit& u : m.cg_units)
    {
        cg_at_bus[u.bus] += u.capacity;
    }
    std::vector<CgUnit> kept;
    for (CgUnit u : m.cg_units)
    {
        if (fraction < 1.0)
        {
            u.capacity *= 1.0 - fraction;
            kept.push_back(u);
        }
    }
    m.cg_units = std::move(kept);
    for (int b = 0; b < m.num_buses(); ++b)
    {
        if (cg_at_bus[b] <= 0.0 || m.buses[b].kind != BusKind::kPV)
        {
            continue;
        }
        RgUnit rg = model.study.rg_template;
        rg.bus = b;
        rg.capacity = fraction * cg_at_bus[b];
        m.rg_units.push_back(rg);
    }
    m.resolve();
    return m;
}

void
assign_capacity_shares(std::vector<GesUnit>& units)
{
    double total = 0.0;
    for (const GesUnit& u : units)
    {
        total += u.energy_rated;
    }
    for (GesUnit& u : units)
    {
        u.capacity_share = total > 0.0 ? u.energy_rated / total : 0.0;
    }
}

SystemModel
attach_ges(const SystemModel& model, const GesUnit& unit, Placement placement, double power_fraction,
           double duration_hours)
{
    if (!(power_fraction >= 0.0) || !(duration_hours > 0.0))
    {
        throw ValidationError("attach_ges: power_fraction >= 0 and duration_hours > 0 required");
    }
    SystemModel m = model;
    std::vector<double> basis(m.num_buses(), 0.0);
    if (placement == Placement::kBundledWithRg)
    {
        if (m.rg_units.empty())
        {
            throw ValidationError("attach_ges: bundled-with-rg placement on a model with no RG");
        }
        for (const RgUnit& u : m.rg_units)
        {
            basis[u.bus] += u.capacity;
        }
    }
    else
    {
        for (int b = 0; b < m.num_buses(); ++b)
        {
            basis[b] = *std::max_element(m.load[b].begin(), m.load[b].end());
        }
    }
    for (int b = 0; b < m.num_buses(); ++b)
    {
        if (basis[b] <= 0.0)
        {
            continue;
        }
        GesUnit g = unit;
        g.bus = b;
        g.name = (unit.name.empty() ? std::string(to_string(unit.kind)) : unit.name) + "@" + std::to_string(b);
        g.p_charge_max = power_fraction * basis[b];
        g.p_discharge_max = g.p_charge_max;
        g.energy_rated = duration_hours * g.p_charge_max;
        m.ges_units.push_back(g);
    }
    assign_capacity_shares(m.ges_units);
    m.resolve();
    return m;
}

SystemModel
apply_study(const SystemModel& model)
{
    SystemModel m = scale_res_penetration(model, model.study.res_penetration);
    if (m.study.ges_fleet)
    {
        const GesFleetSpec& f = *m.study.ges_fleet;
        m = attach_ges(m, f.unit, f.placement, f.power_fraction, f.duration_hours);
    }
    return m;
}

} // namespace adeqsim
