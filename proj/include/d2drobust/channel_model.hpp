#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace d2d {

using Vec2 = Eigen::Vector2d;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);

/// Pathloss model used for the two user-to-user links (D2D and CUE->DUE).
enum class D2dPathloss {
    WinnerB1Los,  ///< 22.7 log10(d[m]) + 41 + 20 log10(fc[GHz]/5)
    MacroCell,    ///< same intercept/slope model as the cellular links
};

struct ScenarioConfig {
    // Node distances in metres.
    double d_c_m = 42.0;    ///< CUE -> BS
    double d_cd_m = 50.16;  ///< CUE -> DUE receiver
    double d_db_m = 85.0;   ///< DUE transmitter -> BS
    double d_d_m = 44.0;    ///< DUE transmitter -> DUE receiver

    double bandwidth_hz = 10e6;
    double noise_w = 3.981071705534973e-17;  // -134 dBm

    double cell_pl_intercept_db = 128.1;  // at 1 km
    double cell_pl_slope_db = 37.6;       // per decade of km
    D2dPathloss d2d_model = D2dPathloss::WinnerB1Los;
    double carrier_ghz = 2.0;

    double shadow_cell_db = 8.0;
    double shadow_d2d_db = 4.0;

    double delta = 0.9;  ///< channel estimation error coefficient

    double p_max_c_w = 0.1;  // 20 dBm
    double p_max_d_w = 0.1;
    double gamma_min_c = 5.0;
    double gamma_min_d = 0.1;
    double epsilon = 0.05;

    /// Replace every small-scale draw (perfect links and the frozen estimate) by its mean, 1.
    bool unit_small_scale = false;
    std::uint64_t seed = 1;
};

/// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

/// Frozen network realisation. All quantities linear.
struct Scenario {
    // Large-scale gains (pathloss x shadowing).
    double alpha_c = 0.0;
    double alpha_d = 0.0;
    double alpha_cd = 0.0;
    double alpha_db = 0.0;

    // Perfectly known links seen by the BS.
    double g_c = 0.0;
    double g_db = 0.0;

    // Frozen channel estimate |h_hat|^2 of the two uncertain links.
    double estimate_d = 1.0;
    double estimate_cd = 1.0;

    double bandwidth_hz = 0.0;
    double noise_w = 0.0;
    double delta = 0.0;
    double p_max_c_w = 0.0;
    double p_max_d_w = 0.0;
    double gamma_min_c = 0.0;
    double gamma_min_d = 0.0;
    double epsilon = 0.0;
};

Scenario build_scenario(const ScenarioConfig& config);

/// Key-value dump with 17 significant digits; identical scenarios give identical text.
std::string to_string(const Scenario& scenario);

/// Path loss in dB of the cellular (macro cell) model at distance `d_m`.
double macro_pathloss_db(const ScenarioConfig& config, double d_m);
/// Path loss in dB of the configured user-to-user model at distance `d_m`.
double d2d_pathloss_db(const ScenarioConfig& config, double d_m);

struct ChannelSample {
    double g_d = 0.0;
    double g_cd = 0.0;

    Vec2 vec() const { return {g_d, g_cd}; }
    friend bool operator==(const ChannelSample&, const ChannelSample&) = default;
};

/// Half-space `normal . x <= offset`.
struct HalfSpace {
    Vec2 normal;
    double offset = 0.0;
};

/// Correlated Gaussian error (e_d, e_cd) before squaring.
struct GaussianError {
    Vec2 mean = Vec2::Zero();
    Eigen::Matrix2d covariance = (Eigen::Matrix2d() << 1.0, 0.5, 0.5, 1.0).finished();
};

/// Independent exponentials conditioned on a polytope, before squaring.
struct TruncatedExponentialError {
    Vec2 rate = Vec2::Ones();
    std::vector<HalfSpace> truncation = l1_ball(3.0);

    static std::vector<HalfSpace> l1_ball(double radius);
};

using ErrorDistributionSpec = std::variant<GaussianError, TruncatedExponentialError>;

/// "gaussian" or "truncated-exponential".
std::string distribution_tag(const ErrorDistributionSpec& spec);
void validate(const ErrorDistributionSpec& spec);

struct Dataset {
    std::vector<ChannelSample> samples;
    std::uint64_t seed = 0;
    std::string distribution;

    std::size_t size() const { return samples.size(); }
};

Dataset generate_dataset(const Scenario& scenario, const ErrorDistributionSpec& spec,
                         std::size_t n, std::uint64_t seed);

/// D2D receiver SINR; sample gains already include pathloss and error composition.
double sinr_d(double p_c, double p_d, const ChannelSample& sample, double noise_w);
/// SINR of the cellular uplink at the BS.
double sinr_c(double p_c, double p_d, const Scenario& scenario);
/// CUE throughput in bits/s.
double throughput(double p_c, double p_d, const Scenario& scenario);

/// CSV with header `g_d,g_cd` and 17 significant digits per value.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace d2d
