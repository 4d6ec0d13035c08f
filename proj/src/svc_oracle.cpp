#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"
#include "d2drobust/svc_learner.hpp"

namespace d2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Variables: u = Q g (2, free), then v_i (2 each, free).
// Rows: budget, then for each support i: u - Q xi_i - v_i <= 0 (2 rows), -u + Q xi_i - v_i <= 0 (2 rows).
LpProblem worst_case_lp(const SvcPolytope& poly, const Eigen::Vector2d& c_u) {
    const auto f = static_cast<Eigen::Index>(poly.points.size());
    const Eigen::Index n = 2 + 2 * f;
    const Eigen::Index m = 1 + 4 * f;
    LpProblem lp;
    lp.c = Eigen::VectorXd::Zero(n);
    lp.c.head<2>() = c_u;
    lp.a_ineq = Eigen::MatrixXd::Zero(m, n);
    lp.b_ineq = Eigen::VectorXd::Zero(m);
    lp.lower = Eigen::VectorXd::Constant(n, -kInf);
    lp.upper = Eigen::VectorXd::Constant(n, kInf);
    lp.b_ineq(0) = poly.rho;
    for (Eigen::Index i = 0; i < f; ++i) {
        const double w = poly.weights[static_cast<std::size_t>(i)];
        const Eigen::Vector2d qx = poly.q * poly.points[static_cast<std::size_t>(i)];
        const Eigen::Index v = 2 + 2 * i;
        lp.a_ineq(0, v) = w;
        lp.a_ineq(0, v + 1) = w;
        for (int k = 0; k < 2; ++k) {
            const Eigen::Index up = 1 + 4 * i + k;
            const Eigen::Index lo = 1 + 4 * i + 2 + k;
            lp.a_ineq(up, k) = 1.0;
            lp.a_ineq(up, v + k) = -1.0;
            lp.b_ineq(up) = qx(k);
            lp.a_ineq(lo, k) = -1.0;
            lp.a_ineq(lo, v + k) = -1.0;
            lp.b_ineq(lo) = -qx(k);
        }
    }
    return lp;
}

}  // namespace

SvcWorstCase svc_worst_case(const SvcPolytope& polytope, const Vec2& p) {
    if (!(polytope.rho > 0.0)) throw DegenerateSet("SVC polytope has rho <= 0");
    if (polytope.points.empty()) throw DegenerateSet("SVC polytope has no support points");

    const Eigen::Matrix2d q_inv = polytope.q.inverse();
    Eigen::Vector2d c_u = q_inv.transpose() * p;
    SvcWorstCase out;
    out.objective_scale = c_u.cwiseAbs().maxCoeff();
    if (out.objective_scale > 0.0) c_u /= out.objective_scale;
    else out.objective_scale = 1.0;

    out.lp = solve_lp(worst_case_lp(polytope, c_u));
    if (out.lp.status != LpStatus::Optimal)
        throw NumericalFailure(std::string("SVC worst-case LP returned ") + to_string(out.lp.status));
    out.point = q_inv * out.lp.z.head<2>();
    out.value = p.dot(out.point);
    return out;
}

SvcDualCertificate svc_dual_certificate(const SvcPolytope& polytope, const Vec2& p) {
    return svc_dual_certificate(polytope, p, svc_worst_case(polytope, p));
}

SvcDualCertificate svc_dual_certificate(const SvcPolytope& polytope, const Vec2& p, const SvcWorstCase& primal) {
    const std::size_t f = polytope.points.size();
    const double s = primal.objective_scale;
    const Eigen::VectorXd& y = primal.lp.ineq_duals;

    SvcDualCertificate cert;
    cert.kappa = std::max(0.0, -s * y(0));
    cert.phi.resize(f);
    cert.omega.resize(f);
    Vec2 grad = Vec2::Zero();
    double value = -polytope.rho * cert.kappa;
    for (std::size_t i = 0; i < f; ++i) {
        const auto base = static_cast<Eigen::Index>(1 + 4 * i);
        cert.phi[i] = (-s * Vec2(y(base), y(base + 1))).cwiseMax(0.0);
        cert.omega[i] = (-s * Vec2(y(base + 2), y(base + 3))).cwiseMax(0.0);
        const Vec2 diff = cert.omega[i] - cert.phi[i];
        grad += polytope.q.transpose() * diff;
        value += diff.dot(polytope.q * polytope.points[i]);
        const Vec2 coupling = cert.omega[i] + cert.phi[i] - Vec2::Constant(polytope.weights[i] * cert.kappa);
        cert.coupling_residual = std::max(cert.coupling_residual, coupling.cwiseAbs().maxCoeff());
    }
    cert.value = value;
    cert.stationarity_residual = (grad - p).cwiseAbs().maxCoeff();

    double scale = std::abs(primal.value);
    for (const Vec2& x : polytope.points) scale = std::max(scale, std::abs(p.dot(x)));
    scale = std::max(scale, 1e-300);
    if (std::abs(cert.value - primal.value) > 1e-8 * scale)
        throw DualityGapError("SVC dual value " + std::to_string(cert.value) + " misses primal " +
                              std::to_string(primal.value));
    return cert;
}

}  // namespace d2d
