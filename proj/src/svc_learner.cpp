#include "d2drobust/svc_learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "d2drobust/errors.hpp"
#include "d2drobust/quantile_sets.hpp"

namespace d2d {

const char* to_string(SvcVariant variant) {
    return variant == SvcVariant::Soft ? "soft" : "hard-quantile";
}

CovarianceWeights covariance_weights(const Dataset& dataset) {
    const std::size_t n = dataset.size();
    if (n < 3) throw DatasetError("covariance weights need at least 3 samples");
    const Vec2 mean = fit_center(dataset);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const ChannelSample& s : dataset.samples) {
        const Vec2 d = s.vec() - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);
    cov.diagonal().array() += 1e-10 * cov.trace() / 2.0;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Vec2 ev = eig.eigenvalues();
    if (!(ev.maxCoeff() > 0.0) || ev.minCoeff() < 1e-12 * ev.maxCoeff())
        throw SingularCovariance("sample covariance is singular (eigenvalues " + std::to_string(ev.minCoeff()) +
                                 ", " + std::to_string(ev.maxCoeff()) + ")");
    const Eigen::Matrix2d v = eig.eigenvectors();
    Eigen::Matrix2d q = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    q = 0.5 * (q + q.transpose());
    return {q, cov};
}

Vec2 interval_widths(const Dataset& dataset, const Eigen::Matrix2d& q, double margin) {
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const ChannelSample& s : dataset.samples) {
        // q_k is the k-th column of Q; Q is symmetric so Q^T xi gives all projections.
        const Vec2 proj = q.transpose() * s.vec();
        lo = lo.cwiseMin(proj);
        hi = hi.cwiseMax(proj);
    }
    return (1.0 + margin) * (hi - lo);
}

double wgik(const Eigen::Matrix2d& q, const Vec2& widths, const Vec2& a, const Vec2& b) {
    return widths.sum() - (q * (a - b)).cwiseAbs().sum();
}

Eigen::MatrixXd kernel_matrix(const std::vector<Vec2>& points, const Eigen::Matrix2d& q, const Vec2& widths) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::Matrix2Xd w(2, n);
    for (Eigen::Index i = 0; i < n; ++i) w.col(i) = q * points[static_cast<std::size_t>(i)];
    const double diag = widths.sum();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k(j, j) = diag;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = diag - (w.col(i) - w.col(j)).cwiseAbs().sum();
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

double svc_dual_objective(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& lambda) {
    return lambda.dot(kernel * lambda) - kernel.diagonal().dot(lambda);
}

SimplexQpResult solve_svc_dual(const Eigen::MatrixXd& kernel, double cap, const SvcQpOptions& options) {
    const Eigen::Index n = kernel.rows();
    if (n == 0) throw DatasetError("empty kernel matrix");
    if (cap * static_cast<double>(n) < 1.0 - 1e-12)
        throw ConfigError("epsilon", "C * N < 1 leaves the dual infeasible");

    SimplexQpResult res;
    res.lambda = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd grad = 2.0 * (kernel * res.lambda) - kernel.diagonal();

    for (;;) {
        // Most violating pair: i can grow (lambda < C), j can shrink (lambda > 0).
        Eigen::Index up = -1, down = -1;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (res.lambda(k) < cap && grad(k) < g_up) {
                g_up = grad(k);
                up = k;
            }
            if (res.lambda(k) > 0.0 && grad(k) > g_down) {
                g_down = grad(k);
                down = k;
            }
        }
        res.kkt_violation = (up < 0 || down < 0) ? 0.0 : std::max(0.0, g_down - g_up);
        if (res.kkt_violation < options.kkt_tolerance) {
            res.converged = true;
            break;
        }
        if (res.pair_updates >= options.max_pair_updates) break;

        const double curvature = 2.0 * (kernel(up, up) + kernel(down, down) - 2.0 * kernel(up, down));
        const double room_up = cap - res.lambda(up);
        const double room_down = res.lambda(down);
        double step = curvature > 0.0 ? (g_down - g_up) / curvature : std::numeric_limits<double>::infinity();
        step = std::min({step, room_up, room_down});

        if (step == room_up) {
            res.lambda(up) = cap;
        } else {
            res.lambda(up) += step;
        }
        if (step == room_down) {
            res.lambda(down) = 0.0;
        } else {
            res.lambda(down) -= step;
        }
        grad += (2.0 * step) * (kernel.col(up) - kernel.col(down));
        ++res.pair_updates;
    }
    return res;
}

namespace {

struct Prepared {
    std::vector<Vec2> points;
    CovarianceWeights weights;
    Vec2 widths;
    Eigen::MatrixXd kernel;
};

Prepared prepare(const Dataset& dataset) {
    Prepared p;
    p.points.reserve(dataset.size());
    for (const ChannelSample& s : dataset.samples) p.points.push_back(s.vec());
    p.weights = covariance_weights(dataset);
    p.widths = interval_widths(dataset, p.weights.q);
    if (!(p.widths.array() > 0).all()) throw DatasetError("degenerate dataset: zero projection range");
    p.kernel = kernel_matrix(p.points, p.weights.q, p.widths);
    return p;
}

double rho_at(const std::vector<SupportVector>& supports, const Eigen::Matrix2d& q, const Vec2& g) {
    double total = 0.0;
    for (const SupportVector& sv : supports) total += sv.lambda * (q * (g - sv.point)).cwiseAbs().sum();
    return total;
}

// Zeroes weights below `tol` and hands their (tiny) mass to the interior weights.
void clean_weights(Eigen::VectorXd& lambda, double cap, double tol) {
    double removed = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) != 0.0 && lambda(i) <= tol) {
            removed += lambda(i);
            lambda(i) = 0.0;
        }
    }
    if (removed == 0.0) return;
    double interior = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda(i) > 0.0 && lambda(i) < cap - tol) interior += lambda(i);
    if (interior <= 0.0) return;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda(i) > 0.0 && lambda(i) < cap - tol) lambda(i) += removed * lambda(i) / interior;
}

SvcModel base_model(const Prepared& p, SvcVariant variant, double cap, double epsilon,
                    const SimplexQpResult& qp, const SvcQpOptions& options) {
    SvcModel m;
    m.variant = variant;
    m.cap = cap;
    m.epsilon = epsilon;
    m.n = p.points.size();
    m.q = p.weights.q;
    m.widths = p.widths;
    Eigen::VectorXd lambda = qp.lambda;
    clean_weights(lambda, cap, options.zero_tolerance);
    m.lambda.assign(lambda.data(), lambda.data() + lambda.size());
    m.objective = svc_dual_objective(p.kernel, lambda);
    m.kkt_violation = qp.kkt_violation;
    m.pair_updates = qp.pair_updates;
    for (std::size_t i = 0; i < m.n; ++i) {
        const double l = m.lambda[i];
        if (l > options.zero_tolerance) m.supports.push_back({i, l, p.points[i]});
        if (l > options.zero_tolerance && l < cap - options.zero_tolerance) m.boundary.push_back(i);
        if (std::isfinite(cap) && l >= cap - options.zero_tolerance) m.outliers.push_back(i);
    }
    return m;
}

void set_anchor(SvcModel& m, std::size_t index, const Vec2& point) {
    m.anchor = index;
    m.anchor_point = point;
    m.rho = rho_at(m.supports, m.q, point);
}

}  // namespace

SvcModel fit_svc(const Dataset& dataset, double epsilon, const SvcQpOptions& options) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0,1)");
    const Prepared p = prepare(dataset);
    const double n = static_cast<double>(p.points.size());
    const double cap = 1.0 / (epsilon * n);

    const SimplexQpResult qp = solve_svc_dual(p.kernel, cap, options);
    if (!qp.converged)
        throw QpNotConverged("SVC dual stopped after " + std::to_string(qp.pair_updates) +
                             " pair updates with KKT violation " + std::to_string(qp.kkt_violation));
    SvcModel m = base_model(p, SvcVariant::Soft, cap, epsilon, qp, options);
    if (epsilon * n < 1.0) m.warnings.push_back("epsilon*N < 1: C > 1 makes the outlier cap vacuous");
    if (m.supports.empty()) throw NoBoundaryVector("SVC fit produced no support vectors");

    for (std::size_t i : m.boundary) m.boundary_rho.push_back(rho_at(m.supports, m.q, p.points[i]));

    if (!m.boundary.empty()) {
        // Boundary vector whose weight sits deepest inside (0, C).
        std::size_t best = 0;
        for (std::size_t k = 1; k < m.boundary.size(); ++k) {
            if (std::abs(m.lambda[m.boundary[k]] - cap / 2) < std::abs(m.lambda[m.boundary[best]] - cap / 2))
                best = k;
        }
        set_anchor(m, m.boundary[best], p.points[m.boundary[best]]);
        const auto [lo, hi] = std::minmax_element(m.boundary_rho.begin(), m.boundary_rho.end());
        if (*hi - *lo > 1e-4 * std::max(1.0, m.rho))
            m.warnings.push_back("boundary support vectors disagree on rho by " + std::to_string(*hi - *lo));
    } else {
        // All weights at a bound: take the support whose feature distance is nearest the median.
        std::vector<std::pair<double, std::size_t>> dist;
        for (const SupportVector& sv : m.supports) dist.emplace_back(feature_distance_sq(m, sv.point), sv.index);
        std::vector<std::pair<double, std::size_t>> sorted = dist;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2].first;
        const auto pick = std::min_element(dist.begin(), dist.end(), [&](const auto& a, const auto& b) {
            return std::abs(a.first - median) < std::abs(b.first - median);
        });
        if (pick == dist.end()) throw NoBoundaryVector("no support vector available as anchor");
        set_anchor(m, pick->second, p.points[pick->second]);
        m.warnings.push_back("no boundary support vector; anchored at support " + std::to_string(pick->second));
    }
    return m;
}

SvcModel fit_quantile_svc(const Dataset& dataset, double epsilon, const SvcQpOptions& options) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0,1)");
    if (dataset.size() < 2) throw DatasetError("quantile SVC needs at least 2 samples");
    const Prepared p = prepare(dataset);
    const double cap = std::numeric_limits<double>::infinity();
    const SimplexQpResult qp = solve_svc_dual(p.kernel, cap, options);
    if (!qp.converged)
        throw QpNotConverged("hard-margin SVC dual stopped after " + std::to_string(qp.pair_updates) +
                             " pair updates with KKT violation " + std::to_string(qp.kkt_violation));
    SvcModel m = base_model(p, SvcVariant::HardQuantile, cap, epsilon, qp, options);
    if (m.supports.empty()) throw NoBoundaryVector("hard-margin SVC produced no support vectors");

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(p.points.size());
    for (std::size_t i = 0; i < p.points.size(); ++i) ranked.emplace_back(feature_distance_sq(m, p.points[i]), i);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t rank = quantile_rank(p.points.size(), epsilon);
    const std::size_t anchor = ranked[rank - 1].second;
    set_anchor(m, anchor, p.points[anchor]);
    return m;
}

SvcPolytope extract_polytope(const SvcModel& model) {
    SvcPolytope poly;
    poly.q = model.q;
    poly.rho = model.rho;
    poly.points.reserve(model.supports.size());
    poly.weights.reserve(model.supports.size());
    for (const SupportVector& sv : model.supports) {
        poly.points.push_back(sv.point);
        poly.weights.push_back(sv.lambda);
    }
    return poly;
}

double svc_level(const SvcPolytope& polytope, const Vec2& g) {
    double total = 0.0;
    for (std::size_t i = 0; i < polytope.points.size(); ++i)
        total += polytope.weights[i] * (polytope.q * (g - polytope.points[i])).cwiseAbs().sum();
    return total;
}

bool svc_membership(const SvcPolytope& polytope, const Vec2& g) { return svc_level(polytope, g) <= polytope.rho; }

bool svc_membership(const SvcModel& model, const Vec2& g) { return rho_at(model.supports, model.q, g) <= model.rho; }

namespace {

double center_norm_sq(const SvcModel& m) {
    double total = 0.0;
    for (const SupportVector& a : m.supports)
        for (const SupportVector& b : m.supports) total += a.lambda * b.lambda * wgik(m.q, m.widths, a.point, b.point);
    return total;
}

double feature_distance_sq(const SvcModel& m, const Vec2& g, double center_sq) {
    double cross = 0.0;
    for (const SupportVector& sv : m.supports) cross += sv.lambda * wgik(m.q, m.widths, g, sv.point);
    return wgik(m.q, m.widths, g, g) - 2.0 * cross + center_sq;
}

}  // namespace

double feature_distance_sq(const SvcModel& model, const Vec2& g) {
    return feature_distance_sq(model, g, center_norm_sq(model));
}

double feature_radius_sq(const SvcModel& model) { return feature_distance_sq(model, model.anchor_point); }

bool kernel_sphere_contains(const SvcModel& model, const Vec2& g) {
    const double c = center_norm_sq(model);
    return feature_distance_sq(model, g, c) <= feature_distance_sq(model, model.anchor_point, c);
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kHeader =
    "variant,cap,epsilon,n,q11,q12,q21,q22,xi1,xi2,rho,anchor,anchor_g_d,anchor_g_cd";
constexpr const char* kRowHeader = "index,lambda,g_d,g_cd";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

std::string serialize(const SvcModel& m) {
    std::ostringstream os;
    os << kHeader << '\n'
       << to_string(m.variant) << ',' << fmt17(m.cap) << ',' << fmt17(m.epsilon) << ',' << m.n << ','
       << fmt17(m.q(0, 0)) << ',' << fmt17(m.q(0, 1)) << ',' << fmt17(m.q(1, 0)) << ',' << fmt17(m.q(1, 1)) << ','
       << fmt17(m.widths.x()) << ',' << fmt17(m.widths.y()) << ',' << fmt17(m.rho) << ',' << m.anchor << ','
       << fmt17(m.anchor_point.x()) << ',' << fmt17(m.anchor_point.y()) << '\n'
       << kRowHeader << '\n';
    for (const SupportVector& sv : m.supports)
        os << sv.index << ',' << fmt17(sv.lambda) << ',' << fmt17(sv.point.x()) << ',' << fmt17(sv.point.y()) << '\n';
    return os.str();
}

SvcModel parse_svc_model(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    auto next = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next() || line != kHeader) throw ConfigError("svc_model", "missing SVC header record");
    if (!next()) throw ConfigError("svc_model", "missing SVC parameter row");
    SvcModel m;
    try {
        const auto f = split_csv(line);
        if (f.size() != 14) throw ConfigError("svc_model", "parameter row needs 14 fields");
        if (f[0] == "soft") {
            m.variant = SvcVariant::Soft;
        } else if (f[0] == "hard-quantile") {
            m.variant = SvcVariant::HardQuantile;
        } else {
            throw ConfigError("variant", "unknown SVC variant '" + f[0] + "'");
        }
        m.cap = std::stod(f[1]);
        m.epsilon = std::stod(f[2]);
        m.n = std::stoull(f[3]);
        m.q << std::stod(f[4]), std::stod(f[5]), std::stod(f[6]), std::stod(f[7]);
        m.widths = Vec2(std::stod(f[8]), std::stod(f[9]));
        m.rho = std::stod(f[10]);
        m.anchor = std::stoull(f[11]);
        m.anchor_point = Vec2(std::stod(f[12]), std::stod(f[13]));
        if (!next() || line != kRowHeader) throw ConfigError("svc_model", "missing support vector header");
        while (next()) {
            const auto r = split_csv(line);
            if (r.size() != 4) throw ConfigError("svc_model", "support row needs 4 fields: " + line);
            m.supports.push_back({std::stoull(r[0]), std::stod(r[1]), Vec2(std::stod(r[2]), std::stod(r[3]))});
        }
    } catch (const std::logic_error&) {
        throw ConfigError("svc_model", "malformed number in: " + line);
    }
    if (m.supports.empty()) throw ConfigError("svc_model", "no support vectors");
    return m;
}

}  // namespace d2d
