#include "d2drobust/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "d2drobust/errors.hpp"

namespace d2d {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::logic_error&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long out = 0;
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        out = std::stoull(v, &used);
    } catch (const std::logic_error&) {
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void rebuild_distribution(RunConfig& c) {
    if (c.distribution == "gaussian") {
        GaussianError g;
        g.mean = Vec2(c.gauss_mean_d, c.gauss_mean_cd);
        const double cov = c.gauss_corr * std::sqrt(c.gauss_var_d * c.gauss_var_cd);
        g.covariance << c.gauss_var_d, cov, cov, c.gauss_var_cd;
        c.experiment.distribution = g;
    } else if (c.distribution == "truncated-exponential") {
        TruncatedExponentialError t;
        t.rate = Vec2(c.texp_rate_d, c.texp_rate_cd);
        t.truncation = TruncatedExponentialError::l1_ball(c.texp_l1_radius);
        c.experiment.distribution = t;
    } else {
        throw ConfigError("distribution", "expected gaussian or truncated-exponential, got '" + c.distribution + "'");
    }
}

struct Entry {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define D2D_NUM(name, field)                                                                     \
    Entry {                                                                                      \
        name, [](RunConfig& c, const std::string& v) { c.field = to_double(name, v); },          \
            [](const RunConfig& c) { return fmt17(c.field); }                                    \
    }
#define D2D_DBM(name, field)                                                                      \
    Entry {                                                                                       \
        name, [](RunConfig& c, const std::string& v) { c.field = dbm_to_watts(to_double(name, v)); }, \
            [](const RunConfig& c) { return fmt17(watts_to_dbm(c.field)); }                       \
    }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        D2D_NUM("d_c", experiment.scenario.d_c_m),
        D2D_NUM("d_cd", experiment.scenario.d_cd_m),
        D2D_NUM("d_db", experiment.scenario.d_db_m),
        D2D_NUM("d_d", experiment.scenario.d_d_m),
        D2D_NUM("bandwidth_hz", experiment.scenario.bandwidth_hz),
        D2D_DBM("noise_dbm", experiment.scenario.noise_w),
        D2D_NUM("carrier_ghz", experiment.scenario.carrier_ghz),
        D2D_NUM("cell_pl_intercept", experiment.scenario.cell_pl_intercept_db),
        D2D_NUM("cell_pl_slope", experiment.scenario.cell_pl_slope_db),
        Entry{"d2d_model",
              [](RunConfig& c, const std::string& v) {
                  if (v == "winner-b1-los") c.experiment.scenario.d2d_model = D2dPathloss::WinnerB1Los;
                  else if (v == "macro") c.experiment.scenario.d2d_model = D2dPathloss::MacroCell;
                  else throw ConfigError("d2d_model", "expected winner-b1-los or macro, got '" + v + "'");
              },
              [](const RunConfig& c) {
                  return std::string(c.experiment.scenario.d2d_model == D2dPathloss::WinnerB1Los ? "winner-b1-los"
                                                                                                 : "macro");
              }},
        D2D_NUM("shadow_cell_db", experiment.scenario.shadow_cell_db),
        D2D_NUM("shadow_d2d_db", experiment.scenario.shadow_d2d_db),
        D2D_NUM("delta", experiment.scenario.delta),
        D2D_DBM("p_max_c_dbm", experiment.scenario.p_max_c_w),
        D2D_DBM("p_max_d_dbm", experiment.scenario.p_max_d_w),
        D2D_NUM("gamma_min_c", experiment.scenario.gamma_min_c),
        D2D_NUM("gamma_min_d", experiment.scenario.gamma_min_d),
        D2D_NUM("epsilon", experiment.scenario.epsilon),
        Entry{"unit_small_scale",
              [](RunConfig& c, const std::string& v) { c.experiment.scenario.unit_small_scale = to_bool("unit_small_scale", v); },
              [](const RunConfig& c) { return std::string(c.experiment.scenario.unit_small_scale ? "true" : "false"); }},
        Entry{"seed",
              [](RunConfig& c, const std::string& v) {
                  c.experiment.seed = to_u64("seed", v);
                  c.experiment.scenario.seed = c.experiment.seed;
              },
              [](const RunConfig& c) { return std::to_string(c.experiment.seed); }},
        Entry{"distribution", [](RunConfig& c, const std::string& v) { c.distribution = v; },
              [](const RunConfig& c) { return c.distribution; }},
        D2D_NUM("gauss.mean_d", gauss_mean_d),
        D2D_NUM("gauss.mean_cd", gauss_mean_cd),
        D2D_NUM("gauss.var_d", gauss_var_d),
        D2D_NUM("gauss.var_cd", gauss_var_cd),
        D2D_NUM("gauss.corr", gauss_corr),
        D2D_NUM("texp.rate_d", texp_rate_d),
        D2D_NUM("texp.rate_cd", texp_rate_cd),
        D2D_NUM("texp.l1_radius", texp_l1_radius),
        Entry{"n_train", [](RunConfig& c, const std::string& v) { c.experiment.n_train = to_u64("n_train", v); },
              [](const RunConfig& c) { return std::to_string(c.experiment.n_train); }},
        Entry{"n_test", [](RunConfig& c, const std::string& v) { c.experiment.n_test = to_u64("n_test", v); },
              [](const RunConfig& c) { return std::to_string(c.experiment.n_test); }},
        Entry{"methods",
              [](RunConfig& c, const std::string& v) {
                  std::vector<Method> methods;
                  for (const std::string& m : split_list(v)) methods.push_back(parse_method(m));
                  if (methods.empty()) throw ConfigError("methods", "empty method list");
                  c.experiment.methods = methods;
              },
              [](const RunConfig& c) {
                  std::string out;
                  for (Method m : c.experiment.methods) out += (out.empty() ? "" : ",") + std::string(to_string(m));
                  return out;
              }},
        Entry{"sweep", [](RunConfig& c, const std::string& v) { c.experiment.sweep = parse_sweep_var(v); },
              [](const RunConfig& c) { return std::string(to_string(c.experiment.sweep)); }},
        Entry{"grid",
              [](RunConfig& c, const std::string& v) {
                  c.experiment.grid.clear();
                  for (const std::string& x : split_list(v)) c.experiment.grid.push_back(to_double("grid", x));
              },
              [](const RunConfig& c) {
                  std::string out;
                  for (double x : c.experiment.grid) out += (out.empty() ? "" : ",") + fmt17(x);
                  return out;
              }},
        D2D_NUM("zeta", experiment.zeta),
        Entry{"common_random_numbers",
              [](RunConfig& c, const std::string& v) { c.experiment.common_random_numbers = to_bool("common_random_numbers", v); },
              [](const RunConfig& c) { return std::string(c.experiment.common_random_numbers ? "true" : "false"); }},
        D2D_NUM("cdf_max", experiment.cdf_max),
        Entry{"cdf_points", [](RunConfig& c, const std::string& v) { c.experiment.cdf_points = to_u64("cdf_points", v); },
              [](const RunConfig& c) { return std::to_string(c.experiment.cdf_points); }},
        Entry{"threads",
              [](RunConfig& c, const std::string& v) { c.experiment.threads = static_cast<unsigned>(to_u64("threads", v)); },
              [](const RunConfig& c) { return std::to_string(c.experiment.threads); }},
        Entry{"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
              [](const RunConfig& c) { return c.out_dir; }},
        Entry{"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; },
              [](const RunConfig& c) { return c.dataset; }},
        Entry{"set_file", [](RunConfig& c, const std::string& v) { c.set_file = v; },
              [](const RunConfig& c) { return c.set_file; }},
        Entry{"method",
              [](RunConfig& c, const std::string& v) {
                  parse_method(v);
                  c.method = v;
              },
              [](const RunConfig& c) { return c.method; }},
        Entry{"verbosity", [](RunConfig& c, const std::string& v) { c.verbosity = static_cast<int>(to_double("verbosity", v)); },
              [](const RunConfig& c) { return std::to_string(c.verbosity); }},
    };
    return table;
}

#undef D2D_NUM
#undef D2D_DBM

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    for (const Entry& e : entries()) {
        if (key == e.key) {
            e.set(config, value);
            rebuild_distribution(config);
            return;
        }
    }
    throw ConfigError(key, "unknown configuration key");
}

void apply_assignment(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(trim(assignment), "expected KEY=VALUE");
    apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void apply_config_text(RunConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        apply_assignment(config, t);
    }
}

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(config, ss.str());
}

std::string dump(const RunConfig& config) {
    std::string out;
    for (const Entry& e : entries()) out += std::string(e.key) + "=" + e.get(config) + "\n";
    return out;
}

}  // namespace d2d
