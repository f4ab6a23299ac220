// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/scenario.hpp"

#include "jbb/errors.hpp"
#include "jbb/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace jbb
{

using json = nlohmann::json;

namespace
{

std::string join(const std::string &path, const std::string &key)
{
    return path.empty() ? key : path + "." + key;
}

// Typed access to one JSON object that remembers which keys were consumed.
class Reader
{
public:
    Reader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ValidationError(path_.empty() ? "scenario" : path_, "must be a JSON object");
    }

    bool has(const std::string &key) const { return j_.contains(key); }

    const json &raw(const std::string &key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    Reader object(const std::string &key) { return Reader(raw(key), join(path_, key)); }

    int integer(const std::string &key, std::optional<int> fallback = std::nullopt)
    {
        if (!has(key))
            return required(key, fallback);
        const json &v = raw(key);
        if (!v.is_number_integer())
            throw ValidationError(join(path_, key), "must be an integer");
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            throw ValidationError(join(path_, key), "is out of range");
        return static_cast<int>(x);
    }

    std::uint64_t unsigned_integer(const std::string &key, std::optional<std::uint64_t> fallback = std::nullopt)
    {
        if (!has(key))
            return required(key, fallback);
        const json &v = raw(key);
        if (!v.is_number_unsigned())
            throw ValidationError(join(path_, key), "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    double number(const std::string &key, std::optional<double> fallback = std::nullopt)
    {
        if (!has(key))
            return required(key, fallback);
        return to_number(raw(key), join(path_, key));
    }

    std::vector<double> numbers(const std::string &key)
    {
        const json &v = raw(key);
        const std::string p = join(path_, key);
        if (!v.is_array())
            throw ValidationError(p, "must be an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(to_number(v[i], p + "[" + std::to_string(i) + "]", p));
        return out;
    }

    std::string string(const std::string &key, std::optional<std::string> fallback = std::nullopt)
    {
        if (!has(key))
            return required(key, fallback);
        const json &v = raw(key);
        if (!v.is_string())
            throw ValidationError(join(path_, key), "must be a string");
        return v.get<std::string>();
    }

    const std::string &path() const { return path_; }

    void finish() const
    {
        for (const auto &item : j_.items())
            if (!seen_.count(item.key()))
                throw ValidationError(join(path_, item.key()), "unknown field");
    }

private:
    template <class T>
    T required(const std::string &key, const std::optional<T> &fallback) const
    {
        if (!fallback)
            throw ValidationError(join(path_, key), "is required");
        return *fallback;
    }

    // _db fields may use the strings "-inf" / "inf" for zero / unbounded power.
    static double to_number(const json &v, const std::string &p, const std::string &unit_key = {})
    {
        if (v.is_number())
            return v.get<double>();
        const std::string &k = unit_key.empty() ? p : unit_key;
        if (v.is_string() && k.size() > 3 && k.compare(k.size() - 3, 3, "_db") == 0)
        {
            const std::string s = v.get<std::string>();
            if (s == "-inf")
                return -std::numeric_limits<double>::infinity();
            if (s == "inf")
                return std::numeric_limits<double>::infinity();
        }
        throw ValidationError(p, "must be a number");
    }

    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

json db_value(double x)
{
    if (std::isinf(x))
        return x < 0 ? "-inf" : "inf";
    return x;
}

json db_values(const std::vector<double> &xs)
{
    json a = json::array();
    for (double x : xs)
        a.push_back(db_value(x));
    return a;
}

template <class F>
void with_prefix(const std::string &prefix, F &&f)
{
    try
    {
        f();
    }
    catch (const ValidationError &e)
    {
        const std::string msg = e.what();
        const std::string constraint = msg.substr(e.field().size() + 2);
        throw ValidationError(prefix + "." + e.field(), constraint);
    }
}

} // namespace

double Scenario::beta_o() const
{
    const double margin = db_to_linear(-o_terminal.margin_db);
    if (o_terminal.beta_o)
        return *o_terminal.beta_o * margin;
    return pathloss_at(geometry, o_terminal.distance.value_or(geometry.outer_radius)) * margin;
}

PathLossProfile Scenario::profile() const
{
    if (drop.seed)
        return profile_for_seed(*drop.seed);
    return {drop.beta, beta_o()};
}

PathLossProfile Scenario::profile_for_seed(std::uint64_t seed) const
{
    return drop_terminals(geometry, system.K, seed, beta_o());
}

OperatingPoint Scenario::point(Scheme scheme) const
{
    if (!operating_point)
        throw ValidationError("operating_point", "is required for this command");
    return {db_to_linear(operating_point->rho_b_db), db_to_linear(operating_point->rho_o_db), scheme};
}

void Scenario::validate() const
{
    with_prefix("system", [&] { system.validate(Scheme::JBBPrime); });
    if (system.K < 1)
        throw ValidationError("system.K", "must be >= 1");
    if (!std::isfinite(rho_u_db))
        throw ValidationError("system.rho_u_db", "must be finite");
    with_prefix("geometry", [&] { geometry.validate(); });

    if (drop.seed.has_value() == !drop.beta.empty())
        throw ValidationError("drop", "must contain exactly one of 'beta' or 'seed'");
    if (!drop.seed)
    {
        if (static_cast<int>(drop.beta.size()) != system.K)
            throw ValidationError("drop.beta", "must list system.K = " + std::to_string(system.K) + " gains");
        for (std::size_t k = 0; k < drop.beta.size(); ++k)
            if (!std::isfinite(drop.beta[k]) || drop.beta[k] <= 0.0)
                throw ValidationError("drop.beta[" + std::to_string(k) + "]", "must be finite and > 0");
    }

    if (o_terminal.beta_o.has_value() == o_terminal.distance.has_value())
        throw ValidationError("o_terminal", "must contain exactly one of 'beta_o' or 'distance'");
    if (o_terminal.beta_o && !(std::isfinite(*o_terminal.beta_o) && *o_terminal.beta_o > 0.0))
        throw ValidationError("o_terminal.beta_o", "must be finite and > 0");
    if (o_terminal.distance && !(std::isfinite(*o_terminal.distance) && *o_terminal.distance > 0.0))
        throw ValidationError("o_terminal.distance", "must be finite and > 0");
    if (!std::isfinite(o_terminal.margin_db))
        throw ValidationError("o_terminal.margin_db", "must be finite");

    if (targets)
    {
        if (!(std::isfinite(targets->net_b) && targets->net_b > 0.0))
            throw ValidationError("targets.net_b", "must be finite and > 0");
        if (!(std::isfinite(targets->net_o) && targets->net_o > 0.0))
            throw ValidationError("targets.net_o", "must be finite and > 0");
    }
    if (operating_point)
    {
        if (std::isnan(operating_point->rho_b_db) || operating_point->rho_b_db == INFINITY)
            throw ValidationError("operating_point.rho_b_db", "must be finite or -inf");
        if (std::isnan(operating_point->rho_o_db) || operating_point->rho_o_db == INFINITY)
            throw ValidationError("operating_point.rho_o_db", "must be finite or -inf");
    }

    if (!std::isfinite(grid.ratio_lo_db) || !std::isfinite(grid.ratio_hi_db) || grid.ratio_hi_db < grid.ratio_lo_db)
        throw ValidationError("grid.ratio_hi_db", "must be finite and >= grid.ratio_lo_db");
    if (grid.points < 2)
        throw ValidationError("grid.points", "must be >= 2");

    if (mc.channel_draws < 10000)
        throw ValidationError("mc.channel_draws", "must be >= 10000");
    if (mc.scalar_draws < 10000)
        throw ValidationError("mc.scalar_draws", "must be >= 10000");

    if (sweep)
    {
        if (sweep->rho_u_db.empty())
            throw ValidationError("sweep.rho_u_db", "must not be empty");
        for (double x : sweep->rho_u_db)
            if (!std::isfinite(x))
                throw ValidationError("sweep.rho_u_db", "entries must be finite");
        if (sweep->rho_o_db.empty())
            throw ValidationError("sweep.rho_o_db", "must not be empty");
        for (double x : sweep->rho_o_db)
            if (std::isnan(x) || x == INFINITY)
                throw ValidationError("sweep.rho_o_db", "entries must be finite or -inf");
        if (!(std::isfinite(sweep->net_b) && sweep->net_b > 0.0))
            throw ValidationError("sweep.net_b", "must be finite and > 0");
        if (sweep->scheme == Scheme::OA)
            throw ValidationError("sweep.scheme", "must be JBB or JBB_PRIME");
    }
    if (statistics.drops < 1)
        throw ValidationError("statistics.drops", "must be >= 1");
    if (!(std::isfinite(verify.leakage_scale) && verify.leakage_scale >= 0.0))
        throw ValidationError("verify.leakage_scale", "must be finite and >= 0");
}

Scenario parse_scenario(const std::string &json_text)
{
    json root;
    try
    {
        root = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ValidationError("scenario", std::string("is not valid JSON: ") + e.what());
    }

    Scenario s;
    Reader r(root, "");
    s.name = r.string("name", std::string());
    s.description = r.string("description", std::string());

    {
        Reader sys = r.object("system");
        s.system.M = sys.integer("M");
        s.system.K = sys.integer("K");
        s.system.Mp = sys.integer("Mp");
        s.system.tau_c = sys.integer("tau_c");
        s.system.tau_pu = sys.integer("tau_pu");
        s.system.tau_po = sys.integer("tau_po");
        s.rho_u_db = sys.number("rho_u_db");
        s.system.rho_u = db_to_linear(s.rho_u_db);
        sys.finish();
    }
    if (r.has("geometry"))
    {
        Reader g = r.object("geometry");
        s.geometry.inner_radius = g.number("inner_radius", 0.1);
        s.geometry.outer_radius = g.number("outer_radius", 1.0);
        s.geometry.pathloss_exponent = g.number("pathloss_exponent", 4.0);
        g.finish();
    }
    {
        Reader d = r.object("drop");
        if (d.has("beta"))
            s.drop.beta = d.numbers("beta");
        if (d.has("seed"))
            s.drop.seed = d.unsigned_integer("seed");
        d.finish();
    }
    {
        Reader o = r.object("o_terminal");
        if (o.has("beta_o"))
            s.o_terminal.beta_o = o.number("beta_o");
        if (o.has("distance"))
            s.o_terminal.distance = o.number("distance");
        s.o_terminal.margin_db = o.number("margin_db", 0.0);
        o.finish();
    }
    {
        s.precoder = parse_precoder(r.string("precoder", std::string("ZF")));
    }
    if (r.has("targets"))
    {
        Reader t = r.object("targets");
        s.targets = Scenario::Targets{t.number("net_b"), t.number("net_o")};
        t.finish();
    }
    if (r.has("operating_point"))
    {
        Reader p = r.object("operating_point");
        s.operating_point = Scenario::Point{p.number("rho_b_db"), p.number("rho_o_db")};
        p.finish();
    }
    if (r.has("grid"))
    {
        Reader g = r.object("grid");
        s.grid.ratio_lo_db = g.number("ratio_lo_db", -10.0);
        s.grid.ratio_hi_db = g.number("ratio_hi_db", 20.0);
        s.grid.points = g.integer("points", 121);
        g.finish();
    }
    if (r.has("mc"))
    {
        Reader m = r.object("mc");
        s.mc.channel_draws = m.unsigned_integer("channel_draws", 100000);
        s.mc.scalar_draws = m.unsigned_integer("scalar_draws", 1000000);
        s.mc.seed = m.unsigned_integer("seed", 1);
        m.finish();
    }
    if (r.has("sweep"))
    {
        Reader w = r.object("sweep");
        Scenario::Sweep sw;
        sw.rho_u_db = w.numbers("rho_u_db");
        sw.rho_o_db = w.numbers("rho_o_db");
        sw.net_b = w.number("net_b");
        const std::string scheme = w.string("scheme", std::string("JBB"));
        with_prefix("sweep", [&] { sw.scheme = parse_scheme(scheme); });
        w.finish();
        s.sweep = sw;
    }
    if (r.has("statistics"))
    {
        Reader st = r.object("statistics");
        s.statistics.drops = st.integer("drops", 50);
        st.finish();
    }
    if (r.has("verify"))
    {
        Reader v = r.object("verify");
        s.verify.leakage_scale = v.number("leakage_scale", 1.0);
        v.finish();
    }
    r.finish();
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("scenario", "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario &s)
{
    json j;
    j["name"] = s.name;
    j["description"] = s.description;
    j["system"] = {{"M", s.system.M},         {"K", s.system.K},           {"Mp", s.system.Mp},
                   {"tau_c", s.system.tau_c}, {"tau_pu", s.system.tau_pu}, {"tau_po", s.system.tau_po},
                   {"rho_u_db", s.rho_u_db}};
    j["geometry"] = {{"inner_radius", s.geometry.inner_radius},
                     {"outer_radius", s.geometry.outer_radius},
                     {"pathloss_exponent", s.geometry.pathloss_exponent}};
    json drop = json::object();
    if (s.drop.seed)
        drop["seed"] = *s.drop.seed;
    else
        drop["beta"] = s.drop.beta;
    j["drop"] = drop;
    json o = json::object();
    if (s.o_terminal.beta_o)
        o["beta_o"] = *s.o_terminal.beta_o;
    if (s.o_terminal.distance)
        o["distance"] = *s.o_terminal.distance;
    o["margin_db"] = s.o_terminal.margin_db;
    j["o_terminal"] = o;
    j["precoder"] = std::string(to_string(s.precoder));
    if (s.targets)
        j["targets"] = {{"net_b", s.targets->net_b}, {"net_o", s.targets->net_o}};
    if (s.operating_point)
        j["operating_point"] = {{"rho_b_db", db_value(s.operating_point->rho_b_db)},
                                {"rho_o_db", db_value(s.operating_point->rho_o_db)}};
    j["grid"] = {{"ratio_lo_db", s.grid.ratio_lo_db}, {"ratio_hi_db", s.grid.ratio_hi_db}, {"points", s.grid.points}};
    j["mc"] = {{"channel_draws", s.mc.channel_draws}, {"scalar_draws", s.mc.scalar_draws}, {"seed", s.mc.seed}};
    if (s.sweep)
        j["sweep"] = {{"rho_u_db", db_values(s.sweep->rho_u_db)},
                      {"rho_o_db", db_values(s.sweep->rho_o_db)},
                      {"net_b", s.sweep->net_b},
                      {"scheme", std::string(to_string(s.sweep->scheme))}};
    j["statistics"] = {{"drops", s.statistics.drops}};
    j["verify"] = {{"leakage_scale", s.verify.leakage_scale}};
    return j.dump(2) + "\n";
}

std::string scenario_hash(const Scenario &scenario)
{
    const std::string text = serialize_scenario(scenario);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t drop_seed(std::uint64_t base, std::uint64_t index)
{
    return splitmix64(base ^ splitmix64(index + 1));
}

} // namespace jbb
