#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "d2drobust/errors.hpp"
#include "d2drobust/evaluation.hpp"
#include "d2drobust/power_allocator.hpp"
#include "d2drobust/quantile_sets.hpp"
#include "d2drobust/run_config.hpp"
#include "d2drobust/svc_learner.hpp"

namespace d2d::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    std::string method;
    int verbosity = -1;
};

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config.empty()) apply_config_file(c, f.config);
    for (const std::string& s : f.sets) apply_assignment(c, s);
    if (f.seed_given) apply_setting(c, "seed", std::to_string(f.seed));
    if (!f.out.empty()) c.out_dir = f.out;
    if (!f.method.empty()) apply_setting(c, "method", f.method);
    if (f.verbosity >= 0) c.verbosity = f.verbosity;
    return c;
}

void echo(const RunConfig& c, std::ostream& err) {
    err << "# effective configuration\n";
    std::istringstream lines(dump(c));
    std::string line;
    while (std::getline(lines, line)) err << "#   " << line << '\n';
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DatasetError("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw DatasetError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string set_path(const RunConfig& c) {
    if (!c.set_file.empty()) return c.set_file;
    return (fs::path(c.out_dir) / ("set_" + std::string(to_string(parse_method(c.method))) + ".txt")).string();
}

int cmd_gen_data(const RunConfig& c, std::ostream& out) {
    validate(c.experiment);
    const Scenario scenario = build_scenario(c.experiment.scenario);
    ensure_dir(c.out_dir);
    const std::pair<const char*, std::size_t> splits[] = {{"train", c.experiment.n_train}, {"test", c.experiment.n_test}};
    for (const auto& [name, n] : splits) {
        const std::uint64_t seed = derive_seed(c.experiment.seed, 0, name);
        const Dataset ds = generate_dataset(scenario, c.experiment.distribution, n, seed);
        const std::string path = (fs::path(c.out_dir) / (std::string(name) + ".csv")).string();
        save_dataset(path, ds);
        out << name << ": N=" << ds.size() << " seed=" << seed << " -> " << path << '\n';
    }
    return 0;
}

int cmd_fit_set(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const Method method = parse_method(c.method);
    const std::string in = c.dataset.empty() ? (fs::path(c.out_dir) / "train.csv").string() : c.dataset;
    const Dataset ds = load_dataset(in);
    const double eps = c.experiment.scenario.epsilon;
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon", "must lie in (0,1)");
    ensure_dir(c.out_dir);
    const std::string path = set_path(c);
    out << "fitting " << to_string(method) << " on " << in << " (N=" << ds.size() << ", epsilon=" << eps << ")\n";
    try {
        if (method == Method::Svc || method == Method::QuantileSvc) {
            const SvcModel m = method == Method::Svc ? fit_svc(ds, eps) : fit_quantile_svc(ds, eps);
            write_text(path, serialize(m));
            out << to_string(method) << ": C=" << fmt("%.6g", m.cap) << " rho=" << fmt("%.17g", m.rho)
                << " support_vectors=" << m.supports.size() << " boundary=" << m.boundary.size()
                << " outliers=" << m.outliers.size() << " -> " << path << '\n';
            for (const std::string& w : m.warnings) out << "warning: " << w << '\n';
        } else {
            const UncertaintySet set = fit_uncertainty_set(method, ds, eps);
            write_text(path, serialize(set.symmetric()));
            out << to_string(method) << ": shape=" << to_string(set.symmetric().shape)
                << " size=" << fmt("%.17g", set.symmetric().size) << " -> " << path << '\n';
        }
    } catch (const Error&) {
        err << "fit-set: fitting " << to_string(method) << " failed\n";
        throw;
    }
    return 0;
}

struct LoadedSet {
    UncertaintySet set;
    std::string label;
};

LoadedSet load_set(const std::string& path) {
    const std::string text = read_text(path);
    if (text.rfind("variant,", 0) == 0) {
        const SvcModel m = parse_svc_model(text);
        const bool soft = m.variant == SvcVariant::Soft;
        return {UncertaintySet(extract_polytope(m), soft ? SetKind::Svc : SetKind::QuantileSvc),
                soft ? "SVC" : "QuantileSVC"};
    }
    const SymmetricSet s = parse_symmetric_set(text);
    return {UncertaintySet(s), s.size == 0.0 ? "NonRobust" : to_string(s.shape)};
}

int cmd_allocate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    validate(c.experiment.scenario);
    const Scenario scenario = build_scenario(c.experiment.scenario);
    const LoadedSet loaded = load_set(set_path(c));
    const AllocationResult r = allocate(scenario, loaded.set, c.experiment.zeta);
    if (c.verbosity >= 1) {
        out << "# iteration,p_d,p_c,feasible\n";
        for (std::size_t i = 0; i < r.trace.size(); ++i)
            out << "# " << i + 1 << ',' << fmt("%.17g", r.trace[i].p_d) << ',' << fmt("%.17g", r.trace[i].p_c) << ','
                << (r.trace[i].feasible ? "true" : "false") << '\n';
    }
    for (const std::string& w : r.warnings) err << "warning: " << w << '\n';
    out << allocation_csv_header() << '\n' << allocation_csv_row(loaded.label, scenario, r) << '\n';
    if (!r.feasible) {
        err << "feasible=false (" << r.status << ")\n";
        return 2;
    }
    return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    const ExperimentResult res = run_experiment(c.experiment);
    ensure_dir(c.out_dir);
    const std::string metrics = (fs::path(c.out_dir) / "metrics.csv").string();
    {
        std::ofstream f(metrics);
        if (!f) throw DatasetError("cannot open " + metrics + " for writing");
        write_metrics_csv(f, res.rows);
    }
    out << "metrics: " << res.rows.size() << " rows -> " << metrics << '\n';
    for (const CdfTable& t : res.cdfs) {
        const std::string path = (fs::path(c.out_dir) / ("cdf_" + std::string(to_string(t.method)) + ".csv")).string();
        std::ofstream f(path);
        if (!f) throw DatasetError("cannot open " + path + " for writing");
        write_cdf_csv(f, {t});
        out << "cdf: " << to_string(t.method) << " -> " << path << '\n';
    }
    if (c.verbosity >= 1) write_metrics_csv(out, res.rows);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust D2D power allocation with learned uncertainty sets", "d2drobust"};
    app.require_subcommand(1);
    Flags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key=value configuration file");
        sub->add_option("--set", flags.sets, "override KEY=VALUE (repeatable)");
        sub->add_option("--seed", flags.seed, "random seed")->each([&](const std::string&) { flags.seed_given = true; });
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--method", flags.method, "nonrobust, l1, l2, box, svc or quantile-svc");
        sub->add_option("--verbosity", flags.verbosity, "0 quiet, 1 traces");
    };
    CLI::App* gen = app.add_subcommand("gen-data", "generate train.csv and test.csv");
    CLI::App* fit = app.add_subcommand("fit-set", "fit an uncertainty set on a dataset");
    CLI::App* alloc = app.add_subcommand("allocate", "run the bisection allocator on a fitted set");
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep and write metric/CDF tables");
    for (CLI::App* sub : {gen, fit, alloc, sweep}) add_common(sub);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const RunConfig config = resolve(flags);
        echo(config, err);
        if (gen->parsed()) return cmd_gen_data(config, out);
        if (fit->parsed()) return cmd_fit_set(config, out, err);
        if (alloc->parsed()) return cmd_allocate(config, out, err);
        if (sweep->parsed()) return cmd_sweep(config, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DatasetError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 1;
}

}  // namespace d2d::cli
