#include "hypflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hypflow/errors.hpp"
#include "hypflow/geometry.hpp"

namespace hypflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& val) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(val, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse number '" + val + "'");
    }
    if (pos != val.size())
        throw ConfigError(key + ": trailing junk in '" + val + "'");
    return x;
}

int to_int(const std::string& key, const std::string& val) {
    const double x = to_double(key, val);
    if (x != std::floor(x) || std::fabs(x) > 2e9)
        throw ConfigError(key + ": expected an integer, got '" + val + "'");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "true" || val == "1" || val == "on" || val == "yes") return true;
    if (val == "false" || val == "0" || val == "off" || val == "no")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + val + "'");
}

std::vector<std::string> split_list(const std::string& val) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(val);
    while (std::getline(is, item, '|')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

} // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": empty key");
        kv[key] = val;
    }
    return kv;
}

RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> known = {
        "ambient.field",     "ambient.n",        "speed",
        "init.family",       "init.tau",         "init.eps",
        "init.mode",         "grid.nodes",       "time.cfl",
        "time.dt_min",       "time.dt_max",      "time.t_end",
        "time.max_steps",    "output.dir",       "output.dt",
        "diagnostics.rates", "diagnostics.masses",
        "diagnostics.limit", "diagnostics.residuals",
        "sweep.speeds",      "sweep.taus",       "sweep.eps",
        "sweep.max_runs"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

    RunConfig cfg;
    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("ambient.field")) cfg.field = field_from_string(*v);
    if (const auto* v = get("ambient.n")) cfg.n = to_int("ambient.n", *v);
    if (const auto* v = get("speed")) cfg.speed = *v;
    if (const auto* v = get("init.family")) cfg.init.family = *v;
    if (const auto* v = get("init.tau")) cfg.init.tau = to_double("init.tau", *v);
    if (const auto* v = get("init.eps")) cfg.init.eps = to_double("init.eps", *v);
    if (const auto* v = get("init.mode")) cfg.init.mode = to_int("init.mode", *v);
    if (const auto* v = get("grid.nodes"))
        cfg.nodes = to_int("grid.nodes", *v);
    if (const auto* v = get("time.cfl")) cfg.control.cfl = to_double("time.cfl", *v);
    if (const auto* v = get("time.dt_min"))
        cfg.control.dt_min = to_double("time.dt_min", *v);
    if (const auto* v = get("time.dt_max"))
        cfg.control.dt_max = to_double("time.dt_max", *v);
    if (const auto* v = get("time.t_end"))
        cfg.control.t_end = to_double("time.t_end", *v);
    if (const auto* v = get("time.max_steps"))
        cfg.control.max_steps = to_int("time.max_steps", *v);
    if (const auto* v = get("output.dir")) cfg.output_dir = *v;
    if (const auto* v = get("output.dt"))
        cfg.control.out_dt = to_double("output.dt", *v);
    if (const auto* v = get("diagnostics.rates"))
        cfg.diag.rates = to_bool("diagnostics.rates", *v);
    if (const auto* v = get("diagnostics.masses"))
        cfg.diag.masses = to_bool("diagnostics.masses", *v);
    if (const auto* v = get("diagnostics.limit"))
        cfg.diag.limit = to_bool("diagnostics.limit", *v);
    if (const auto* v = get("diagnostics.residuals"))
        cfg.diag.residuals = to_bool("diagnostics.residuals", *v);
    if (const auto* v = get("sweep.speeds")) cfg.sweep.speeds = split_list(*v);
    if (const auto* v = get("sweep.taus"))
        for (const auto& s : split_list(*v))
            cfg.sweep.taus.push_back(to_double("sweep.taus", s));
    if (const auto* v = get("sweep.eps"))
        for (const auto& s : split_list(*v))
            cfg.sweep.eps.push_back(to_double("sweep.eps", s));
    if (const auto* v = get("sweep.max_runs"))
        cfg.sweep.max_runs = to_int("sweep.max_runs", *v);

    // range checks (the deeper admissibility checks live in the modules)
    if (cfg.nodes < 16) throw ConfigError("grid.nodes must be >= 16");
    if (!(cfg.control.cfl > 0.0) || cfg.control.cfl > 1.0)
        throw ConfigError("time.cfl must lie in (0, 1]");
    if (!(cfg.control.dt_min > 0.0))
        throw ConfigError("time.dt_min must be positive");
    if (!(cfg.control.dt_max >= cfg.control.dt_min))
        throw ConfigError("time.dt_max must be >= time.dt_min");
    if (!(cfg.control.t_end > 0.0))
        throw ConfigError("time.t_end must be positive");
    if (cfg.control.max_steps < 1)
        throw ConfigError("time.max_steps must be positive");
    if (!(cfg.control.out_dt > 0.0))
        throw ConfigError("output.dt must be positive");
    if (cfg.sweep.max_runs < 1)
        throw ConfigError("sweep.max_runs must be positive");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    return config_from_kv(parse_kv_file(path));
}

std::vector<double> initial_rho(const RunConfig& cfg,
                                const std::vector<double>& theta) {
    const InitialData& in = cfg.init;
    if (!(in.tau > 0.0)) throw ConfigError("init.tau must be positive");
    if (in.mode < 0) throw ConfigError("init.mode must be >= 0");
    if (!(std::fabs(in.eps) < in.tau) && in.family != "constant")
        throw ConfigError("init.eps must satisfy |eps| < tau (rho > 0)");
    if (cfg.field != Field::R && in.eps != 0.0 && in.mode % 2 != 0)
        throw ConfigError(
            "K != R profiles live on [0, pi/2]: init.mode must be even for "
            "a smooth invariant datum");

    std::vector<double> rho(theta.size());
    if (in.family == "constant") {
        for (auto& r : rho) r = in.tau;
    } else if (in.family == "cosk") {
        for (std::size_t j = 0; j < theta.size(); ++j)
            rho[j] = in.tau + in.eps * std::cos(in.mode * theta[j]);
    } else if (in.family == "legendre") {
        for (std::size_t j = 0; j < theta.size(); ++j)
            rho[j] = in.tau +
                     in.eps * std::legendre(in.mode, std::cos(theta[j]));
    } else {
        throw ConfigError("unknown init.family '" + in.family + "'");
    }
    return rho;
}

} // namespace hypflow
