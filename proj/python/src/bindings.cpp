#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "d2drobust/channel_model.hpp"
#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"
#include "d2drobust/evaluation.hpp"
#include "d2drobust/power_allocator.hpp"
#include "d2drobust/quantile_sets.hpp"
#include "d2drobust/run_config.hpp"
#include "d2drobust/svc_learner.hpp"

namespace py = pybind11;
using namespace d2d;

namespace {

using Samples = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

Dataset to_dataset(const Samples& samples) {
    Dataset ds;
    ds.samples.reserve(static_cast<std::size_t>(samples.rows()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) ds.samples.push_back({samples(i, 0), samples(i, 1)});
    return ds;
}

Samples to_array(const Dataset& ds) {
    Samples out(static_cast<Eigen::Index>(ds.size()), 2);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out(static_cast<Eigen::Index>(i), 0) = ds.samples[i].g_d;
        out(static_cast<Eigen::Index>(i), 1) = ds.samples[i].g_cd;
    }
    return out;
}

ErrorDistributionSpec distribution(const std::string& name) {
    if (name == "gaussian") return GaussianError{};
    if (name == "truncated-exponential") return TruncatedExponentialError{};
    throw ConfigError("distribution", "expected gaussian or truncated-exponential, got '" + name + "'");
}

std::string to_text(const py::handle& v) {
    if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
    if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
        std::string out;
        for (const py::handle& x : v) out += (out.empty() ? "" : ",") + to_text(x);
        return out;
    }
    if (py::isinstance<py::float_>(v)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.cast<double>());
        return buf;
    }
    return py::str(v).cast<std::string>();
}

RunConfig config_from(const py::dict& settings) {
    RunConfig c;
    for (const auto& [k, v] : settings) apply_setting(c, py::str(k).cast<std::string>(), to_text(v));
    return c;
}

py::dict row_dict(const MetricRow& r) {
    py::dict d;
    d["method"] = to_string(r.method);
    d["sweep_var"] = to_string(r.sweep_var);
    d["sweep_value"] = r.sweep_value;
    d["p_c"] = r.p_c;
    d["p_d"] = r.p_d;
    d["feasible"] = r.feasible;
    d["throughput_bps"] = r.throughput_bps;
    d["outage"] = r.outage;
    d["outage_se"] = r.outage_se;
    d["mean_due_sinr"] = r.mean_due_sinr;
    d["iterations"] = r.iterations;
    d["status"] = r.status;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust D2D power allocation with learned uncertainty sets";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DatasetError>(m, "DatasetError", base.ptr());
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("d_c_m", &ScenarioConfig::d_c_m)
        .def_readwrite("d_cd_m", &ScenarioConfig::d_cd_m)
        .def_readwrite("d_db_m", &ScenarioConfig::d_db_m)
        .def_readwrite("d_d_m", &ScenarioConfig::d_d_m)
        .def_readwrite("bandwidth_hz", &ScenarioConfig::bandwidth_hz)
        .def_readwrite("noise_w", &ScenarioConfig::noise_w)
        .def_readwrite("carrier_ghz", &ScenarioConfig::carrier_ghz)
        .def_readwrite("shadow_cell_db", &ScenarioConfig::shadow_cell_db)
        .def_readwrite("shadow_d2d_db", &ScenarioConfig::shadow_d2d_db)
        .def_readwrite("delta", &ScenarioConfig::delta)
        .def_readwrite("p_max_c_w", &ScenarioConfig::p_max_c_w)
        .def_readwrite("p_max_d_w", &ScenarioConfig::p_max_d_w)
        .def_readwrite("gamma_min_c", &ScenarioConfig::gamma_min_c)
        .def_readwrite("gamma_min_d", &ScenarioConfig::gamma_min_d)
        .def_readwrite("epsilon", &ScenarioConfig::epsilon)
        .def_readwrite("unit_small_scale", &ScenarioConfig::unit_small_scale)
        .def_readwrite("seed", &ScenarioConfig::seed);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("g_c", &Scenario::g_c)
        .def_readonly("g_db", &Scenario::g_db)
        .def_readonly("alpha_d", &Scenario::alpha_d)
        .def_readonly("alpha_cd", &Scenario::alpha_cd)
        .def_readonly("noise_w", &Scenario::noise_w)
        .def_readonly("bandwidth_hz", &Scenario::bandwidth_hz)
        .def_readonly("p_max_c_w", &Scenario::p_max_c_w)
        .def_readonly("p_max_d_w", &Scenario::p_max_d_w)
        .def_readwrite("gamma_min_c", &Scenario::gamma_min_c)
        .def_readwrite("gamma_min_d", &Scenario::gamma_min_d)
        .def_readonly("epsilon", &Scenario::epsilon)
        .def("__repr__", [](const Scenario& s) { return to_string(s); });

    m.def("build_scenario", &build_scenario, py::arg("config") = ScenarioConfig{});
    m.def(
        "generate_dataset",
        [](const Scenario& s, std::size_t n, std::uint64_t seed, const std::string& dist) {
            return to_array(generate_dataset(s, distribution(dist), n, seed));
        },
        py::arg("scenario"), py::arg("n"), py::arg("seed"), py::arg("distribution") = "gaussian",
        "Samples (g_d, g_cd) as an (n, 2) array.");
    m.def("sinr_c", &sinr_c, py::arg("p_c"), py::arg("p_d"), py::arg("scenario"));
    m.def("throughput", &throughput, py::arg("p_c"), py::arg("p_d"), py::arg("scenario"));

    py::class_<SymmetricSet>(m, "SymmetricSet")
        .def_property_readonly("shape", [](const SymmetricSet& s) { return std::string(to_string(s.shape)); })
        .def_readonly("center", &SymmetricSet::center)
        .def_readonly("size", &SymmetricSet::size)
        .def_readonly("epsilon", &SymmetricSet::epsilon)
        .def("contains", [](const SymmetricSet& s, const Vec2& g) { return contains(s, g); })
        .def("worst_case_value", [](const SymmetricSet& s, const Vec2& p) { return worst_case_value(s, p); })
        .def("worst_case_point", [](const SymmetricSet& s, const Vec2& p) { return worst_case_point(s, p); })
        .def("serialize", [](const SymmetricSet& s) { return serialize(s); });

    m.def(
        "calibrate",
        [](const Samples& samples, const std::string& shape, double epsilon) {
            const Dataset ds = to_dataset(samples);
            return calibrate(ds, fit_center(ds), parse_set_shape(shape), epsilon);
        },
        py::arg("samples"), py::arg("shape"), py::arg("epsilon"));

    py::class_<SvcModel>(m, "SvcModel")
        .def_property_readonly("variant", [](const SvcModel& s) { return std::string(to_string(s.variant)); })
        .def_readonly("cap", &SvcModel::cap)
        .def_readonly("epsilon", &SvcModel::epsilon)
        .def_readonly("q", &SvcModel::q)
        .def_readonly("widths", &SvcModel::widths)
        .def_readonly("rho", &SvcModel::rho)
        .def_readonly("anchor", &SvcModel::anchor)
        .def_readonly("weights", &SvcModel::lambda)
        .def_readonly("boundary", &SvcModel::boundary)
        .def_readonly("outliers", &SvcModel::outliers)
        .def_readonly("warnings", &SvcModel::warnings)
        .def_property_readonly("support_indices",
                               [](const SvcModel& s) {
                                   std::vector<std::size_t> out;
                                   for (const SupportVector& v : s.supports) out.push_back(v.index);
                                   return out;
                               })
        .def("contains", [](const SvcModel& s, const Vec2& g) { return svc_membership(s, g); })
        .def("kernel_sphere_contains", [](const SvcModel& s, const Vec2& g) { return kernel_sphere_contains(s, g); })
        .def(
            "worst_case",
            [](const SvcModel& s, const Vec2& p) {
                const SvcWorstCase w = svc_worst_case(extract_polytope(s), p);
                return py::make_tuple(w.point, w.value);
            },
            "Minimiser and value of p.g over the polytope.")
        .def("serialize", [](const SvcModel& s) { return serialize(s); });

    m.def(
        "fit_svc", [](const Samples& samples, double epsilon) { return fit_svc(to_dataset(samples), epsilon); },
        py::arg("samples"), py::arg("epsilon"));
    m.def(
        "fit_quantile_svc",
        [](const Samples& samples, double epsilon) { return fit_quantile_svc(to_dataset(samples), epsilon); },
        py::arg("samples"), py::arg("epsilon"));

    py::class_<UncertaintySet>(m, "UncertaintySet")
        .def("contains", &UncertaintySet::contains)
        .def("worst_case_value", &UncertaintySet::worst_case_value)
        .def("worst_case_point", &UncertaintySet::worst_case_point)
        .def_property_readonly("min_crosstalk", &UncertaintySet::min_crosstalk)
        .def_property_readonly("max_crosstalk", &UncertaintySet::max_crosstalk);

    m.def(
        "fit_set",
        [](const std::string& method, const Samples& samples, double epsilon) {
            return fit_uncertainty_set(parse_method(method), to_dataset(samples), epsilon);
        },
        py::arg("method"), py::arg("samples"), py::arg("epsilon"),
        "Method is one of nonrobust, l1, l2, box, svc, quantile-svc.");

    py::class_<AllocationResult>(m, "AllocationResult")
        .def_readonly("p_c", &AllocationResult::p_c)
        .def_readonly("p_d", &AllocationResult::p_d)
        .def_readonly("feasible", &AllocationResult::feasible)
        .def_readonly("margin", &AllocationResult::margin)
        .def_readonly("iterations", &AllocationResult::iterations)
        .def_readonly("status", &AllocationResult::status)
        .def_readonly("warnings", &AllocationResult::warnings)
        .def_property_readonly("trace", [](const AllocationResult& r) {
            py::list out;
            for (const TraceStep& t : r.trace) out.append(py::make_tuple(t.p_d, t.p_c, t.feasible));
            return out;
        });

    m.def("allocate", &allocate, py::arg("scenario"), py::arg("set"), py::arg("zeta") = 0.0);
    m.def(
        "pc_max_robust",
        [](const UncertaintySet& set, double p_d, double gamma_min_d, double noise_w) {
            const PcMax r = pc_max_robust(set, p_d, gamma_min_d, noise_w);
            return py::make_tuple(r.feasible, r.p_c);
        },
        py::arg("set"), py::arg("p_d"), py::arg("gamma_min_d"), py::arg("noise_w"));

    m.def(
        "run_experiment",
        [](const py::dict& settings) {
            const RunConfig c = config_from(settings);
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(c.experiment);
            }
            py::list rows;
            for (const MetricRow& r : res.rows) rows.append(row_dict(r));
            return rows;
        },
        py::arg("settings") = py::dict(),
        "Runs a sweep configured with the same keys as the command-line tool; returns one dict per row.");
    m.def(
        "effective_config", [](const py::dict& settings) { return dump(config_from(settings)); },
        py::arg("settings") = py::dict());
}
