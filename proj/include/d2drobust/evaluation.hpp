#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2drobust/channel_model.hpp"
#include "d2drobust/power_allocator.hpp"

namespace d2d {

enum class Method { NonRobust, L1Ball, L2Ball, BoxSet, Svc, QuantileSvc };

const char* to_string(Method method);
/// Accepts the canonical names and the short forms nonrobust, l1, l2, box, svc, quantile-svc.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();
bool is_robust(Method method);

/// Fits the set for `method` on the training data. NonRobust is the singleton {sample mean}.
UncertaintySet fit_uncertainty_set(Method method, const Dataset& train, double epsilon);

double empirical_outage(double p_c, double p_d, const Dataset& test, double gamma_min_d, double noise_w);
double mean_due_sinr(double p_c, double p_d, const Dataset& test, double noise_w);
/// Right-continuous empirical CDF of the DUE SINR evaluated at each grid point.
std::vector<double> sinr_cdf(double p_c, double p_d, const Dataset& test, const std::vector<double>& grid,
                             double noise_w);

enum class SweepVar { None, Epsilon, GammaMinD, PMaxD, Delta };

const char* to_string(SweepVar var);
SweepVar parse_sweep_var(std::string_view name);

struct ExperimentSpec {
    ScenarioConfig scenario;
    ErrorDistributionSpec distribution = GaussianError{};
    std::vector<Method> methods = all_methods();
    SweepVar sweep = SweepVar::None;
    /// Sweep values in natural units: epsilon, linear gamma, dBm for p_max_d, delta.
    std::vector<double> grid;
    std::size_t n_train = 1000;
    std::size_t n_test = 10000;
    std::uint64_t seed = 1;
    /// Same train/test draws at every sweep point; otherwise streams depend on the sweep index.
    bool common_random_numbers = true;
    double zeta = 0.0;  ///< allocator tolerance in watts, <= 0 for 1e-4 P_max^d
    double cdf_max = 2.0;
    std::size_t cdf_points = 201;
    unsigned threads = 1;
};

/// Throws ConfigError on an empty/unsorted grid or a test set too small to resolve epsilon.
void validate(const ExperimentSpec& spec);

struct MetricRow {
    Method method = Method::NonRobust;
    SweepVar sweep_var = SweepVar::None;
    double sweep_value = 0.0;
    double p_c = 0.0;
    double p_d = 0.0;
    bool feasible = false;
    double throughput_bps = 0.0;
    double outage = 1.0;
    double outage_se = 0.0;
    double mean_due_sinr = 0.0;
    int iterations = 0;
    std::string status;
};

struct CdfTable {
    Method method = Method::NonRobust;
    double sweep_value = 0.0;
    std::vector<double> sinr;
    std::vector<double> cdf;
};

struct ExperimentResult {
    std::vector<MetricRow> rows;
    /// One table per method, taken at the first sweep point.
    std::vector<CdfTable> cdfs;
};

/// Seed of the named stream ("train", "test", ...) for a sweep index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::string_view stream);

/// Scenario config with the sweep variable set to `value`.
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVar var, double value);

ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);
/// `method,sinr,cdf`; pass a single method's table or all of them.
void write_cdf_csv(std::ostream& out, const std::vector<CdfTable>& tables);

}  // namespace d2d
