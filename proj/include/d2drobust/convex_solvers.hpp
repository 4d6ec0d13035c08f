#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "d2drobust/channel_model.hpp"

namespace d2d {

struct SvcPolytope;

/// min c.z  s.t.  A z <= b,  E z = f,  lower <= z <= upper.
///
/// Empty `lower` means z >= 0 and empty `upper` means no upper bound; use
/// -inf / +inf entries for free coordinates.
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_ineq;
    Eigen::VectorXd b_ineq;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index num_vars() const { return c.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

/// Dual values follow the sensitivity convention: d(objective)/d(rhs).
/// Inequality duals are therefore <= 0; `reduced_costs` = c - A^T y - E^T w
/// are the multipliers of the variable bounds.
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd z;
    double objective = 0.0;
    Eigen::VectorXd ineq_duals;
    Eigen::VectorXd eq_duals;
    Eigen::VectorXd reduced_costs;
    int iterations = 0;
    bool used_bland = false;
};

struct LpOptions {
    /// When non-null and verbosity > 0, tableau snapshots are written here.
    std::ostream* debug = nullptr;
    int verbosity = 0;
};

/// Dense two-phase primal simplex. Throws NumericalFailure when the pivot cap is hit.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

/// Optimality residuals of a solution, each scaled by the problem magnitude.
struct LpResiduals {
    double primal = 0.0;          ///< max constraint/bound violation
    double dual = 0.0;            ///< max sign violation of duals and reduced costs
    double complementarity = 0.0; ///< max |multiplier * slack|
    double gap = 0.0;             ///< |primal - dual objective| / max(1, |primal|)
    double dual_objective = 0.0;
};

LpResiduals lp_residuals(const LpProblem& problem, const LpSolution& solution);

/// Minimiser of p.g over the SVC polytope, solved as the auxiliary-variable LP.
struct SvcWorstCase {
    Vec2 point;
    double value = 0.0;
    /// Multipliers of the LP rows, in the order [budget, upper_i (x2), lower_i (x2)...].
    LpSolution lp;
    double objective_scale = 1.0;
};

SvcWorstCase svc_worst_case(const SvcPolytope& polytope, const Vec2& p);

/// Lagrange multipliers (kappa, phi_i, omega_i) of the SVC worst-case LP.
/// phi_i belongs to Q(g - xi_i) <= v_i and omega_i to -v_i <= Q(g - xi_i).
struct SvcDualCertificate {
    double kappa = 0.0;
    std::vector<Vec2> phi;
    std::vector<Vec2> omega;
    double value = 0.0;
    double stationarity_residual = 0.0;  ///< |sum (omega_i - phi_i)^T Q - p^T|_inf
    double coupling_residual = 0.0;      ///< max_i |omega_i + phi_i - lambda_i kappa 1|_inf
};

/// Throws DualityGapError if the certified value misses the primal by more than 1e-8 relative.
SvcDualCertificate svc_dual_certificate(const SvcPolytope& polytope, const Vec2& p);
SvcDualCertificate svc_dual_certificate(const SvcPolytope& polytope, const Vec2& p,
                                        const SvcWorstCase& primal);

/// Active-set solve of  min l^T K l + linear^T l  s.t.  sum l = 1, 0 <= l <= cap.
/// Intended for small N (<= 100) as an independent check of the SVC solver.
Eigen::VectorXd reference_qp(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& linear, double cap);

}  // namespace d2d
