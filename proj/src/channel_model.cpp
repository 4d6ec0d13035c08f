#include "d2drobust/channel_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"

namespace d2d {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void validate(const ScenarioConfig& c) {
    require(c.d_c_m > 0, "d_c", "distance must be positive");
    require(c.d_cd_m > 0, "d_cd", "distance must be positive");
    require(c.d_db_m > 0, "d_db", "distance must be positive");
    require(c.d_d_m > 0, "d_d", "distance must be positive");
    require(c.bandwidth_hz > 0, "bandwidth_hz", "must be positive");
    require(c.noise_w > 0 && std::isfinite(c.noise_w), "noise_dbm", "noise power must be positive");
    require(c.carrier_ghz > 0, "carrier_ghz", "must be positive");
    require(c.shadow_cell_db >= 0, "shadow_cell_db", "must be non-negative");
    require(c.shadow_d2d_db >= 0, "shadow_d2d_db", "must be non-negative");
    require(c.delta > 0 && c.delta < 1, "delta", "must lie in (0,1)");
    require(c.epsilon > 0 && c.epsilon < 1, "epsilon", "must lie in (0,1)");
    require(c.p_max_c_w > 0, "p_max_c_dbm", "power cap must be positive");
    require(c.p_max_d_w > 0, "p_max_d_dbm", "power cap must be positive");
    require(c.gamma_min_c > 0, "gamma_min_c", "SINR floor must be positive");
    require(c.gamma_min_d > 0, "gamma_min_d", "SINR floor must be positive");
}

double macro_pathloss_db(const ScenarioConfig& c, double d_m) {
    return c.cell_pl_intercept_db + c.cell_pl_slope_db * std::log10(d_m / 1000.0);
}

double d2d_pathloss_db(const ScenarioConfig& c, double d_m) {
    switch (c.d2d_model) {
    case D2dPathloss::WinnerB1Los:
        return 22.7 * std::log10(d_m) + 41.0 + 20.0 * std::log10(c.carrier_ghz / 5.0);
    case D2dPathloss::MacroCell:
        return macro_pathloss_db(c, d_m);
    }
    return 0.0;
}

Scenario build_scenario(const ScenarioConfig& config) {
    validate(config);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> rayleigh_power(1.0);

    // Fixed draw order: shadowing c, d, cd, dB; small scale g_c, g_dB; estimates d, cd.
    auto large_scale = [&](double pathloss_db, double shadow_db) {
        const double shadow = shadow_db * normal(rng);
        return db_to_linear(-(pathloss_db + shadow));
    };
    Scenario s;
    s.alpha_c = large_scale(macro_pathloss_db(config, config.d_c_m), config.shadow_cell_db);
    s.alpha_d = large_scale(d2d_pathloss_db(config, config.d_d_m), config.shadow_d2d_db);
    s.alpha_cd = large_scale(d2d_pathloss_db(config, config.d_cd_m), config.shadow_d2d_db);
    s.alpha_db = large_scale(macro_pathloss_db(config, config.d_db_m), config.shadow_cell_db);

    auto small_scale = [&] { return config.unit_small_scale ? 1.0 : rayleigh_power(rng); };
    s.g_c = s.alpha_c * small_scale();
    s.g_db = s.alpha_db * small_scale();
    s.estimate_d = small_scale();
    s.estimate_cd = small_scale();

    s.bandwidth_hz = config.bandwidth_hz;
    s.noise_w = config.noise_w;
    s.delta = config.delta;
    s.p_max_c_w = config.p_max_c_w;
    s.p_max_d_w = config.p_max_d_w;
    s.gamma_min_c = config.gamma_min_c;
    s.gamma_min_d = config.gamma_min_d;
    s.epsilon = config.epsilon;
    return s;
}

std::string to_string(const Scenario& s) {
    std::ostringstream os;
    os << "alpha_c=" << fmt17(s.alpha_c) << '\n'
       << "alpha_d=" << fmt17(s.alpha_d) << '\n'
       << "alpha_cd=" << fmt17(s.alpha_cd) << '\n'
       << "alpha_db=" << fmt17(s.alpha_db) << '\n'
       << "g_c=" << fmt17(s.g_c) << '\n'
       << "g_db=" << fmt17(s.g_db) << '\n'
       << "estimate_d=" << fmt17(s.estimate_d) << '\n'
       << "estimate_cd=" << fmt17(s.estimate_cd) << '\n'
       << "bandwidth_hz=" << fmt17(s.bandwidth_hz) << '\n'
       << "noise_w=" << fmt17(s.noise_w) << '\n'
       << "delta=" << fmt17(s.delta) << '\n'
       << "p_max_c_w=" << fmt17(s.p_max_c_w) << '\n'
       << "p_max_d_w=" << fmt17(s.p_max_d_w) << '\n'
       << "gamma_min_c=" << fmt17(s.gamma_min_c) << '\n'
       << "gamma_min_d=" << fmt17(s.gamma_min_d) << '\n'
       << "epsilon=" << fmt17(s.epsilon) << '\n';
    return os.str();
}

std::vector<HalfSpace> TruncatedExponentialError::l1_ball(double radius) {
    return {{Vec2(1, 1), radius}, {Vec2(1, -1), radius}, {Vec2(-1, 1), radius}, {Vec2(-1, -1), radius}};
}

std::string distribution_tag(const ErrorDistributionSpec& spec) {
    return std::holds_alternative<GaussianError>(spec) ? "gaussian" : "truncated-exponential";
}

namespace {

// Feasibility of {x >= 0, H x <= h} with some slack in every half-space.
bool truncation_has_interior(const std::vector<HalfSpace>& halfspaces) {
    if (halfspaces.empty()) return true;
    // max t  s.t.  n_k . x + t <= h_k,  x >= 0,  0 <= t <= 1
    LpProblem lp;
    lp.c = Eigen::Vector3d(0, 0, -1);
    lp.a_ineq.resize(static_cast<Eigen::Index>(halfspaces.size()), 3);
    lp.b_ineq.resize(static_cast<Eigen::Index>(halfspaces.size()));
    for (std::size_t k = 0; k < halfspaces.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        lp.a_ineq.row(r) << halfspaces[k].normal.x(), halfspaces[k].normal.y(), 1.0;
        lp.b_ineq(r) = halfspaces[k].offset;
    }
    lp.lower = Eigen::Vector3d::Zero();
    lp.upper = Eigen::Vector3d(std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity(), 1.0);
    const LpSolution sol = solve_lp(lp);
    return sol.status == LpStatus::Optimal && -sol.objective > 1e-12;
}

}  // namespace

void validate(const ErrorDistributionSpec& spec) {
    if (const auto* g = std::get_if<GaussianError>(&spec)) {
        const Eigen::Matrix2d& cov = g->covariance;
        if (!cov.allFinite() || std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 * (1.0 + cov.norm()))
            throw ConfigError("gauss.covariance", "covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
        if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + cov.norm()))
            throw ConfigError("gauss.covariance", "covariance must be positive semidefinite");
        if (!g->mean.allFinite()) throw ConfigError("gauss.mean", "mean must be finite");
        return;
    }
    const auto& t = std::get<TruncatedExponentialError>(spec);
    if (!(t.rate.array() > 0).all()) throw ConfigError("texp.rate", "rates must be positive");
    if (!truncation_has_interior(t.truncation))
        throw ConfigError("texp.truncation", "truncation polytope is empty on the positive orthant");
}

namespace {

class ErrorSampler {
public:
    ErrorSampler(const ErrorDistributionSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {
        if (const auto* g = std::get_if<GaussianError>(&spec)) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(g->covariance);
            const Eigen::Vector2d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            factor_ = eig.eigenvectors() * root.asDiagonal();
        }
    }

    Vec2 draw() {
        if (const auto* g = std::get_if<GaussianError>(&spec_)) {
            const Vec2 z(normal_(rng_), normal_(rng_));
            return g->mean + factor_ * z;
        }
        const auto& t = std::get<TruncatedExponentialError>(spec_);
        std::exponential_distribution<double> e1(t.rate.x());
        std::exponential_distribution<double> e2(t.rate.y());
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            const Vec2 x(e1(rng_), e2(rng_));
            bool inside = true;
            for (const HalfSpace& h : t.truncation) {
                if (h.normal.dot(x) > h.offset) {
                    inside = false;
                    break;
                }
            }
            if (inside) return x;
        }
        throw DatasetError("truncated exponential: rejection sampler exhausted " +
                           std::to_string(kMaxAttempts) + " attempts");
    }

private:
    static constexpr int kMaxAttempts = 1'000'000;
    const ErrorDistributionSpec& spec_;
    std::mt19937_64& rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    Eigen::Matrix2d factor_ = Eigen::Matrix2d::Identity();
};

}  // namespace

Dataset generate_dataset(const Scenario& scenario, const ErrorDistributionSpec& spec,
                         std::size_t n, std::uint64_t seed) {
    if (n < 2) throw DatasetError("dataset needs at least 2 samples, got " + std::to_string(n));
    validate(spec);
    std::mt19937_64 rng(seed);
    ErrorSampler sampler(spec, rng);

    const double known = scenario.delta * scenario.delta;
    const double unknown = 1.0 - known;
    Dataset ds;
    ds.seed = seed;
    ds.distribution = distribution_tag(spec);
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = sampler.draw();
        ds.samples.push_back({
            scenario.alpha_d * (known * scenario.estimate_d + unknown * e.x() * e.x()),
            scenario.alpha_cd * (known * scenario.estimate_cd + unknown * e.y() * e.y()),
        });
    }
    return ds;
}

double sinr_d(double p_c, double p_d, const ChannelSample& s, double noise_w) {
    return p_d * s.g_d / (noise_w + p_c * s.g_cd);
}

double sinr_c(double p_c, double p_d, const Scenario& s) {
    return p_c * s.g_c / (s.noise_w + p_d * s.g_db);
}

double throughput(double p_c, double p_d, const Scenario& s) {
    return s.bandwidth_hz * std::log2(1.0 + sinr_c(p_c, p_d, s));
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
    out << "g_d,g_cd\n";
    char line[96];
    for (const ChannelSample& s : dataset.samples) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", s.g_d, s.g_cd);
        out << line;
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("g_d,g_cd", 0) != 0)
        throw DatasetError("dataset CSV must start with header g_d,g_cd");
    Dataset ds;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DatasetError("dataset CSV line " + std::to_string(row) + ": expected two columns");
        try {
            ds.samples.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw DatasetError("dataset CSV line " + std::to_string(row) + ": not a number");
        }
    }
    return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot open " + path + " for writing");
    write_dataset_csv(out, dataset);
    if (!out) throw DatasetError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset " + path);
    try {
        return read_dataset_csv(in);
    } catch (const DatasetError& e) {
        throw DatasetError(path + ": " + e.what());
    }
}

}  // namespace d2d
