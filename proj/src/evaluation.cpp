#include "d2drobust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <thread>

#include "d2drobust/errors.hpp"
#include "d2drobust/quantile_sets.hpp"
#include "d2drobust/svc_learner.hpp"

namespace d2d {

const char* to_string(Method method) {
    switch (method) {
    case Method::NonRobust: return "NonRobust";
    case Method::L1Ball: return "L1Ball";
    case Method::L2Ball: return "L2Ball";
    case Method::BoxSet: return "BoxSet";
    case Method::Svc: return "SVC";
    case Method::QuantileSvc: return "QuantileSVC";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "nonrobust" || lower == "non-robust") return Method::NonRobust;
    if (lower == "l1ball" || lower == "l1") return Method::L1Ball;
    if (lower == "l2ball" || lower == "l2") return Method::L2Ball;
    if (lower == "boxset" || lower == "box") return Method::BoxSet;
    if (lower == "svc") return Method::Svc;
    if (lower == "quantilesvc" || lower == "quantile-svc" || lower == "qsvc") return Method::QuantileSvc;
    throw ConfigError("method", "unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
    return {Method::NonRobust, Method::L1Ball, Method::L2Ball, Method::BoxSet, Method::Svc, Method::QuantileSvc};
}

bool is_robust(Method method) { return method != Method::NonRobust; }

UncertaintySet fit_uncertainty_set(Method method, const Dataset& train, double epsilon) {
    switch (method) {
    case Method::NonRobust:
        return UncertaintySet(SymmetricSet{SetShape::L2Ball, fit_center(train), 0.0, epsilon, train.size()});
    case Method::L1Ball: return UncertaintySet(calibrate(train, fit_center(train), SetShape::L1Ball, epsilon));
    case Method::L2Ball: return UncertaintySet(calibrate(train, fit_center(train), SetShape::L2Ball, epsilon));
    case Method::BoxSet: return UncertaintySet(calibrate(train, fit_center(train), SetShape::BoxSet, epsilon));
    case Method::Svc: return UncertaintySet(extract_polytope(fit_svc(train, epsilon)), SetKind::Svc);
    case Method::QuantileSvc:
        return UncertaintySet(extract_polytope(fit_quantile_svc(train, epsilon)), SetKind::QuantileSvc);
    }
    throw ConfigError("method", "unhandled method");
}

double empirical_outage(double p_c, double p_d, const Dataset& test, double gamma_min_d, double noise_w) {
    if (test.size() == 0) throw DatasetError("empty test set");
    std::size_t bad = 0;
    for (const ChannelSample& s : test.samples)
        if (sinr_d(p_c, p_d, s, noise_w) < gamma_min_d) ++bad;
    return static_cast<double>(bad) / static_cast<double>(test.size());
}

double mean_due_sinr(double p_c, double p_d, const Dataset& test, double noise_w) {
    if (test.size() == 0) throw DatasetError("empty test set");
    double total = 0.0;
    for (const ChannelSample& s : test.samples) total += sinr_d(p_c, p_d, s, noise_w);
    return total / static_cast<double>(test.size());
}

std::vector<double> sinr_cdf(double p_c, double p_d, const Dataset& test, const std::vector<double>& grid,
                             double noise_w) {
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("cdf_grid", "grid must be sorted");
    std::vector<double> sinr;
    sinr.reserve(test.size());
    for (const ChannelSample& s : test.samples) sinr.push_back(sinr_d(p_c, p_d, s, noise_w));
    std::sort(sinr.begin(), sinr.end());
    std::vector<double> cdf;
    cdf.reserve(grid.size());
    const double n = static_cast<double>(sinr.size());
    for (double x : grid) {
        const auto count = std::upper_bound(sinr.begin(), sinr.end(), x) - sinr.begin();
        cdf.push_back(static_cast<double>(count) / n);
    }
    return cdf;
}

const char* to_string(SweepVar var) {
    switch (var) {
    case SweepVar::None: return "none";
    case SweepVar::Epsilon: return "epsilon";
    case SweepVar::GammaMinD: return "gamma_min_d";
    case SweepVar::PMaxD: return "p_max_d";
    case SweepVar::Delta: return "delta";
    }
    return "?";
}

SweepVar parse_sweep_var(std::string_view name) {
    if (name == "none") return SweepVar::None;
    if (name == "epsilon") return SweepVar::Epsilon;
    if (name == "gamma_min_d") return SweepVar::GammaMinD;
    if (name == "p_max_d") return SweepVar::PMaxD;
    if (name == "delta") return SweepVar::Delta;
    throw ConfigError("sweep", "unknown sweep variable '" + std::string(name) + "'");
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVar var, double value) {
    ScenarioConfig cfg = base;
    switch (var) {
    case SweepVar::None: break;
    case SweepVar::Epsilon: cfg.epsilon = value; break;
    case SweepVar::GammaMinD: cfg.gamma_min_d = value; break;
    case SweepVar::PMaxD: cfg.p_max_d_w = dbm_to_watts(value); break;
    case SweepVar::Delta: cfg.delta = value; break;
    }
    return cfg;
}

void validate(const ExperimentSpec& spec) {
    validate(spec.scenario);
    validate(spec.distribution);
    if (spec.methods.empty()) throw ConfigError("methods", "no methods selected");
    if (spec.n_train < 3) throw ConfigError("n_train", "need at least 3 training samples");
    if (spec.cdf_points < 2) throw ConfigError("cdf_points", "need at least 2 grid points");
    if (!(spec.cdf_max > 0.0)) throw ConfigError("cdf_max", "must be positive");
    std::vector<double> eps{spec.scenario.epsilon};
    if (spec.sweep != SweepVar::None) {
        if (spec.grid.empty()) throw ConfigError("grid", "sweep grid is empty");
        if (!std::is_sorted(spec.grid.begin(), spec.grid.end())) throw ConfigError("grid", "sweep grid must be sorted");
        for (double v : spec.grid) validate(apply_sweep(spec.scenario, spec.sweep, v));
        if (spec.sweep == SweepVar::Epsilon) eps = spec.grid;
    }
    for (double e : eps) {
        if (static_cast<double>(spec.n_test) < 10.0 / e)
            throw ConfigError("n_test", "test set must hold at least 10/epsilon samples");
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::string_view stream) {
    // FNV-1a keeps stream tags stable across platforms.
    std::uint64_t tag = 1469598103934665603ULL;
    for (unsigned char c : stream) {
        tag ^= c;
        tag *= 1099511628211ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

struct PointResult {
    std::vector<MetricRow> rows;
    std::vector<CdfTable> cdfs;
};

PointResult run_point(const ExperimentSpec& spec, std::size_t index, double value, bool want_cdf) {
    const ScenarioConfig cfg = apply_sweep(spec.scenario, spec.sweep, value);
    const Scenario scenario = build_scenario(cfg);
    const std::uint64_t stream = spec.common_random_numbers ? 0 : index;
    const Dataset train = generate_dataset(scenario, spec.distribution, spec.n_train, derive_seed(spec.seed, stream, "train"));
    const Dataset test = generate_dataset(scenario, spec.distribution, spec.n_test, derive_seed(spec.seed, stream, "test"));

    std::vector<double> grid(spec.cdf_points);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = spec.cdf_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);

    PointResult out;
    for (Method method : spec.methods) {
        MetricRow row;
        row.method = method;
        row.sweep_var = spec.sweep;
        row.sweep_value = value;
        try {
            const UncertaintySet set = fit_uncertainty_set(method, train, cfg.epsilon);
            const AllocationResult r = allocate(scenario, set, spec.zeta);
            row.iterations = r.iterations;
            row.status = r.status;
            row.feasible = r.feasible;
            if (r.feasible) {
                row.p_c = r.p_c;
                row.p_d = r.p_d;
            }
        } catch (const Error& e) {
            row.feasible = false;
            row.status = e.what();
        }
        const double m = static_cast<double>(test.size());
        row.throughput_bps = throughput(row.p_c, row.p_d, scenario);
        row.outage = empirical_outage(row.p_c, row.p_d, test, cfg.gamma_min_d, cfg.noise_w);
        row.outage_se = std::sqrt(row.outage * (1.0 - row.outage) / m);
        row.mean_due_sinr = mean_due_sinr(row.p_c, row.p_d, test, cfg.noise_w);
        if (want_cdf) out.cdfs.push_back({method, value, grid, sinr_cdf(row.p_c, row.p_d, test, grid, cfg.noise_w)});
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    validate(spec);
    const std::vector<double> values = spec.sweep == SweepVar::None ? std::vector<double>{0.0} : spec.grid;

    std::vector<PointResult> points(values.size());
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(values.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < values.size(); ++i) points[i] = run_point(spec, i, values[i], i == 0);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < values.size(); i += threads)
                        points[i] = run_point(spec, i, values[i], i == 0);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    ExperimentResult result;
    for (PointResult& p : points) {
        for (MetricRow& r : p.rows) result.rows.push_back(std::move(r));
        for (CdfTable& c : p.cdfs) result.cdfs.push_back(std::move(c));
    }
    return result;
}

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "method,sweep_var,sweep_value,p_c,p_d,feasible,throughput_bps,outage,outage_se,mean_due_sinr\n";
    for (const MetricRow& r : rows) {
        out << to_string(r.method) << ',' << to_string(r.sweep_var) << ',' << fmt17(r.sweep_value) << ','
            << fmt17(r.p_c) << ',' << fmt17(r.p_d) << ',' << (r.feasible ? "true" : "false") << ','
            << fmt17(r.throughput_bps) << ',' << fmt17(r.outage) << ',' << fmt17(r.outage_se) << ','
            << fmt17(r.mean_due_sinr) << '\n';
    }
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfTable>& tables) {
    out << "method,sinr,cdf\n";
    for (const CdfTable& t : tables)
        for (std::size_t i = 0; i < t.sinr.size(); ++i)
            out << to_string(t.method) << ',' << fmt17(t.sinr[i]) << ',' << fmt17(t.cdf[i]) << '\n';
}

}  // namespace d2d
