// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "d2drobust/channel_model.hpp"
#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/evaluation.hpp"
#include "d2drobust/power_allocator.hpp"
#include "d2drobust/quantile_sets.hpp"
#include "d2drobust/svc_learner.hpp"

using namespace d2d;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void fail(Verdict& v, const std::string& why) {
    if (v.pass) v.detail = why;
    v.pass = false;
}

std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + 1); }

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec2 normal_vec(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng)};
}

Dataset skewed_cloud(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const double rho = uniform(rng, -0.8, 0.8);
    const Vec2 offset(uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 3.0));
    const Vec2 scale(uniform(rng, 0.3, 2.0), uniform(rng, 0.3, 2.0));
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = n01(rng), z2 = rho * z1 + std::sqrt(1 - rho * rho) * n01(rng);
        ds.samples.push_back({offset.x() + scale.x() * z1 * z1, offset.y() + scale.y() * z2 * z2});
    }
    return ds;
}

std::size_t covered(const SymmetricSet& s, const Dataset& ds) {
    std::size_t k = 0;
    for (const ChannelSample& x : ds.samples) k += contains(s, x.vec());
    return k;
}

const SetShape kShapes[] = {SetShape::L1Ball, SetShape::L2Ball, SetShape::BoxSet};

// 1. Calibration coverage.
Verdict calibration_coverage() {
    Verdict v;
    const Scenario scenario = build_scenario(ScenarioConfig{});
    const std::pair<const char*, ErrorDistributionSpec> dists[] = {{"gaussian", GaussianError{}},
                                                                   {"truncated-exponential", TruncatedExponentialError{}}};
    double lo = 1, hi = 0, slowest = 0;
    for (const auto& [name, dist] : dists) {
        const Dataset train = generate_dataset(scenario, dist, 1000, derive_seed(1, 0, "train"));
        const Dataset test = generate_dataset(scenario, dist, 10000, derive_seed(1, 0, "test"));
        for (SetShape shape : kShapes) {
            const auto t0 = std::chrono::steady_clock::now();
            const SymmetricSet s = calibrate(train, fit_center(train), shape, 0.05);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            slowest = std::max(slowest, secs);
            const std::size_t in_train = covered(s, train);
            const double held = static_cast<double>(covered(s, test)) / 10000.0;
            lo = std::min(lo, held);
            hi = std::max(hi, held);
            if (in_train < 950)
                fail(v, std::string(name) + " " + to_string(shape) + " training coverage " + std::to_string(in_train));
            if (held < 0.93 || held > 0.97)
                fail(v, std::string(name) + " " + to_string(shape) + " held-out coverage " + fmt("%.4f", held));
            if (secs >= 1.0) fail(v, std::string(to_string(shape)) + " took " + fmt("%.3f", secs) + " s");
        }
    }
    if (v.pass)
        v.detail = "held-out coverage in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "], slowest fit " +
                   fmt("%.2g", slowest) + " s";
    return v;
}

double enumerate_vertices(const SymmetricSet& s, const Vec2& p) {
    const double r = s.size;
    std::vector<Vec2> d;
    if (s.shape == SetShape::L1Ball) d = {Vec2(r, 0), Vec2(-r, 0), Vec2(0, r), Vec2(0, -r)};
    else d = {Vec2(r, r), Vec2(r, -r), Vec2(-r, r), Vec2(-r, -r)};
    double best = kInf;
    for (const Vec2& x : d) best = std::min(best, p.dot(s.center + x));
    return best;
}

double sample_boundary(const SymmetricSet& s, const Vec2& p, int n) {
    const double r = std::sqrt(s.size);
    double best = kInf;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        best = std::min(best, p.dot(s.center + r * Vec2(std::cos(t), std::sin(t))));
    }
    return best;
}

// 2. Worst-case oracle exactness.
Verdict oracle_exactness() {
    Verdict v;
    auto rng = rng_for(2);
    double poly_err = 0, l2_err = 0;
    for (int i = 0; i < 100; ++i) {
        const SetShape shape = kShapes[i % 3];
        const Dataset ds = skewed_cloud(rng, 200);
        const SymmetricSet s = calibrate(ds, fit_center(ds), shape, uniform(rng, 0.01, 0.2));
        const Vec2 p = normal_vec(rng);
        const double closed = worst_case_value(s, p);
        const double scale = std::max(1.0, std::abs(closed));
        if (shape == SetShape::L2Ball) {
            const double sampled = sample_boundary(s, p, 1'000'000);
            const double err = std::abs(closed - sampled) / scale;
            l2_err = std::max(l2_err, err);
            if (err > 1e-6 || closed > sampled) fail(v, "L2 pair " + std::to_string(i) + " error " + fmt("%.3g", err));
        } else {
            // Exact up to the rounding of two different summation orders.
            const double err = std::abs(closed - enumerate_vertices(s, p)) / scale;
            poly_err = std::max(poly_err, err);
            if (err > 1e-15) fail(v, std::string(to_string(shape)) + " pair " + std::to_string(i) + " error " + fmt("%.3g", err));
        }
    }
    if (v.pass)
        v.detail = "max rel. error L1/Linf " + fmt("%.2g", poly_err) + ", L2 " + fmt("%.2g", l2_err);
    return v;
}

// 3. SVC QP correctness.
Verdict svc_qp() {
    Verdict v;
    auto rng = rng_for(3);
    double worst_obj = 0, worst_kkt = 0;
    for (int i = 0; i < 20; ++i) {
        const Dataset ds = skewed_cloud(rng, 50);
        const double eps = uniform(rng, 0.05, 0.3);
        const SvcModel m = fit_svc(ds, eps);
        std::vector<Vec2> pts;
        for (const ChannelSample& s : ds.samples) pts.push_back(s.vec());
        const Eigen::MatrixXd k = kernel_matrix(pts, m.q, m.widths);
        const Eigen::VectorXd ref = reference_qp(k, -k.diagonal(), m.cap);
        const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(m.lambda.data(), 50);
        const double gap = std::abs(svc_dual_objective(k, lam) - svc_dual_objective(k, ref));
        worst_obj = std::max(worst_obj, gap);
        if (gap > 1e-5) fail(v, "instance " + std::to_string(i) + " objective gap " + fmt("%.3g", gap));

        const double r2 = feature_radius_sq(m);
        for (std::size_t j = 0; j < 50; ++j) {
            const double d = feature_distance_sq(m, pts[j]), l = m.lambda[j];
            double viol = 0;
            if (l <= 1e-8) viol = d - r2;
            else if (l >= m.cap - 1e-8) viol = r2 - d;
            else viol = std::abs(d - r2);
            worst_kkt = std::max(worst_kkt, viol);
            if (viol > 1e-6) fail(v, "instance " + std::to_string(i) + " KKT violation " + fmt("%.3g", viol));
        }
        if (static_cast<double>(m.outliers.size()) > eps * 50)
            fail(v, "instance " + std::to_string(i) + " has " + std::to_string(m.outliers.size()) + " outliers");
    }
    if (v.pass) v.detail = "max objective gap " + fmt("%.2g", worst_obj) + ", max KKT violation " + fmt("%.2g", worst_kkt);
    return v;
}

// 4. Polytope-sphere equivalence.
Verdict sphere_equivalence() {
    Verdict v;
    const Scenario scenario = build_scenario(ScenarioConfig{});
    const Dataset train = generate_dataset(scenario, GaussianError{}, 1000, derive_seed(1, 0, "train"));
    const SvcModel m = fit_svc(train, 0.05);
    const SvcPolytope poly = extract_polytope(m);
    Vec2 lo = train.samples[0].vec(), hi = lo;
    for (const ChannelSample& s : train.samples) lo = lo.cwiseMin(s.vec()), hi = hi.cwiseMax(s.vec());
    const Vec2 pad = 0.25 * (hi - lo);
    auto rng = rng_for(4);
    int disagree = 0, inside = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vec2 g(uniform(rng, lo.x() - pad.x(), hi.x() + pad.x()), uniform(rng, lo.y() - pad.y(), hi.y() + pad.y()));
        const bool a = svc_membership(poly, g);
        inside += a;
        disagree += a != kernel_sphere_contains(m, g);
    }
    if (disagree != 0) fail(v, std::to_string(disagree) + " disagreements");
    else v.detail = "0 disagreements on 1000 points (" + std::to_string(inside) + " members)";
    return v;
}

// 5. LP duality.
Verdict lp_duality() {
    Verdict v;
    auto rng = rng_for(5);
    double gap = 0, resid = 0;
    for (int i = 0; i < 100; ++i) {
        const Dataset ds = skewed_cloud(rng, 150);
        const SvcPolytope poly = extract_polytope(fit_svc(ds, uniform(rng, 0.03, 0.15)));
        const Vec2 p = normal_vec(rng);
        const SvcWorstCase w = svc_worst_case(poly, p);
        SvcDualCertificate c;
        try {
            c = svc_dual_certificate(poly, p, w);
        } catch (const std::exception& e) {
            fail(v, std::string("instance ") + std::to_string(i) + ": " + e.what());
            continue;
        }
        const double rel = std::abs(c.value - w.value) / std::max(1.0, std::abs(w.value));
        const double r = std::max(c.stationarity_residual, c.coupling_residual);
        gap = std::max(gap, rel);
        resid = std::max(resid, r);
        if (rel > 1e-8) fail(v, "instance " + std::to_string(i) + " gap " + fmt("%.3g", rel));
        if (r >= 1e-9) fail(v, "instance " + std::to_string(i) + " residual " + fmt("%.3g", r));
    }
    if (v.pass) v.detail = "max rel. gap " + fmt("%.2g", gap) + ", max residual " + fmt("%.2g", resid);
    return v;
}

const MetricRow* find_row(const ExperimentResult& r, Method m, double value) {
    for (const MetricRow& row : r.rows)
        if (row.method == m && row.sweep_value == value) return &row;
    return nullptr;
}

const ExperimentResult& default_run() {
    static const ExperimentResult r = run_experiment(ExperimentSpec{});
    return r;
}

// 6. Robust outage.
Verdict robust_outage() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult& r = default_run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string summary;
    for (const MetricRow& row : r.rows) {
        summary += std::string(summary.empty() ? "" : ", ") + to_string(row.method) + " " + fmt("%.4f", row.outage);
        if (!row.feasible) {
            fail(v, std::string(to_string(row.method)) + " infeasible: " + row.status);
            continue;
        }
        if (is_robust(row.method) && row.outage > 0.06)
            fail(v, std::string(to_string(row.method)) + " outage " + fmt("%.4f", row.outage));
        if (!is_robust(row.method) && row.outage < 0.3) fail(v, "NonRobust outage " + fmt("%.4f", row.outage));
    }
    if (secs >= 120) fail(v, "took " + fmt("%.1f", secs) + " s");
    if (v.pass) v.detail = summary;
    return v;
}

// 7. Conservatism ordering.
Verdict conservatism() {
    Verdict v;
    const ExperimentResult& r = default_run();
    const MetricRow* svc = find_row(r, Method::Svc, 0.0);
    const MetricRow* qsvc = find_row(r, Method::QuantileSvc, 0.0);
    if (!svc || !qsvc || !svc->feasible) {
        fail(v, "SVC row missing or infeasible");
        return v;
    }
    if (svc->throughput_bps < qsvc->throughput_bps * (1 - 1e-9)) fail(v, "SVC throughput below QuantileSVC");
    for (Method m : {Method::L1Ball, Method::L2Ball, Method::BoxSet}) {
        const MetricRow* row = find_row(r, m, 0.0);
        if (svc->throughput_bps < row->throughput_bps) fail(v, std::string("SVC throughput below ") + to_string(m));
        if (row->mean_due_sinr < svc->mean_due_sinr) fail(v, std::string(to_string(m)) + " DUE SINR below SVC");
    }
    if (v.pass) {
        std::string t;
        for (const MetricRow& row : r.rows)
            if (is_robust(row.method))
                t += std::string(t.empty() ? "" : ", ") + to_string(row.method) + " " + fmt("%.4g", row.throughput_bps);
        v.detail = "throughput (bit/s) " + t;
    }
    return v;
}

// 8. Endpoint structure of the allocation.
Verdict endpoint() {
    Verdict v;
    const Dataset train = generate_dataset(build_scenario(ScenarioConfig{}), GaussianError{}, 1000,
                                           derive_seed(1, 0, "train"));
    std::vector<std::pair<Method, UncertaintySet>> sets;
    for (Method m : all_methods()) sets.emplace_back(m, fit_uncertainty_set(m, train, 0.05));
    int feasible = 0, max_iter = 0;
    for (double gamma : {0.05, 0.1, 0.3, 1.0, 3.0}) {
        for (double pmax_dbm : {14.0, 17.0, 20.0, 23.0, 26.0}) {
            ScenarioConfig cfg;
            cfg.gamma_min_d = gamma;
            cfg.p_max_d_w = dbm_to_watts(pmax_dbm);
            const Scenario s = build_scenario(cfg);
            const double zeta = 1e-4 * s.p_max_d_w;
            for (const auto& [m, set] : sets) {
                const AllocationResult r = allocate(s, set, zeta);
                max_iter = std::max(max_iter, r.iterations);
                if (r.iterations > 25) fail(v, std::string(to_string(m)) + " used " + std::to_string(r.iterations) + " iterations");
                if (!r.feasible) continue;
                ++feasible;
                if (std::abs(r.p_c - s.p_max_c_w) > zeta && std::abs(r.p_d - s.p_max_d_w) > zeta)
                    fail(v, std::string(to_string(m)) + " at gamma=" + fmt("%g", gamma) + ", P=" + fmt("%g", pmax_dbm) +
                                " dBm is interior");
            }
        }
    }
    if (v.pass)
        v.detail = std::to_string(feasible) + " feasible allocations on the endpoint, max iterations " + std::to_string(max_iter);
    return v;
}

int inversions(const std::vector<double>& y, bool increasing) {
    int n = 0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        const double d = y[i] - y[i - 1], tol = 1e-12 * std::max(std::abs(y[i]), std::abs(y[i - 1]));
        if (increasing ? d < -tol : d > tol) ++n;
    }
    return n;
}

// 9. Trends in epsilon, over feasible rows.
Verdict epsilon_trends() {
    Verdict v;
    ExperimentSpec spec;
    spec.methods = {Method::L1Ball, Method::L2Ball, Method::BoxSet, Method::Svc, Method::QuantileSvc};
    spec.sweep = SweepVar::Epsilon;
    for (int k = 1; k <= 10; ++k) spec.grid.push_back(0.01 * k);
    spec.threads = 4;
    const ExperimentResult r = run_experiment(spec);
    std::string summary;
    for (Method m : spec.methods) {
        std::vector<double> thr, sinr;
        for (double e : spec.grid) {
            const MetricRow* row = find_row(r, m, e);
            if (row && row->feasible) {
                thr.push_back(row->throughput_bps);
                sinr.push_back(row->mean_due_sinr);
            }
        }
        const int a = inversions(thr, true), b = inversions(sinr, false);
        summary += std::string(summary.empty() ? "" : ", ") + to_string(m) + " " + std::to_string(thr.size()) + "pts/" +
                   std::to_string(a) + "+" + std::to_string(b) + "inv";
        if (thr.size() < 2) fail(v, std::string(to_string(m)) + " has fewer than 2 feasible points");
        if (a > 1) fail(v, std::string(to_string(m)) + " throughput has " + std::to_string(a) + " inversions");
        if (b > 1) fail(v, std::string(to_string(m)) + " DUE SINR has " + std::to_string(b) + " inversions");
    }
    if (v.pass) v.detail = summary;
    return v;
}

// 10. Collapse order as gamma_min_d grows.
Verdict collapse_order() {
    Verdict v;
    ExperimentSpec spec;
    spec.methods = {Method::L1Ball, Method::L2Ball, Method::BoxSet, Method::Svc};
    spec.sweep = SweepVar::GammaMinD;
    spec.grid = {0.1, 0.3, 1, 3, 10, 30, 100, 300, 1000, 3000};
    spec.threads = 4;
    const ExperimentResult r = run_experiment(spec);
    auto first_collapse = [&](Method m) {
        for (std::size_t i = 0; i < spec.grid.size(); ++i)
            if (!find_row(r, m, spec.grid[i])->feasible) return i;
        return spec.grid.size();
    };
    const std::size_t svc = first_collapse(Method::Svc);
    auto label = [&](std::size_t i) { return i < spec.grid.size() ? fmt("%g", spec.grid[i]) : std::string("never"); };
    std::string summary = "first infeasible gamma: SVC " + label(svc);
    for (Method m : {Method::L1Ball, Method::L2Ball, Method::BoxSet}) {
        const std::size_t k = first_collapse(m);
        summary += std::string(", ") + to_string(m) + " " + label(k);
        if (k > svc) fail(v, std::string(to_string(m)) + " collapses after SVC (" + label(k) + " vs " + label(svc) + ")");
    }
    if (svc == spec.grid.size()) fail(v, "SVC never collapses on the grid");
    if (v.pass) v.detail = summary;
    return v;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"calibration coverage", calibration_coverage},
        {"worst-case oracle exactness", oracle_exactness},
        {"SVC QP correctness", svc_qp},
        {"polytope-sphere equivalence", sphere_equivalence},
        {"LP duality", lp_duality},
        {"robust outage", robust_outage},
        {"conservatism ordering", conservatism},
        {"allocation endpoint", endpoint},
        {"epsilon trends", epsilon_trends},
        {"collapse order", collapse_order},
    };
    int failed = 0, index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %-28s %7.2fs  %s\n", v.pass ? "PASS" : "FAIL", index, name, secs, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
