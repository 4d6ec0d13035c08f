#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "d2drobust/channel_model.hpp"

namespace d2d {

struct CovarianceWeights {
    Eigen::Matrix2d q;           ///< Sigma^{-1/2}, symmetric positive definite
    Eigen::Matrix2d covariance;  ///< regularised sample covariance
};

/// Unbiased sample covariance, ridge 1e-10 tr/2, then inverse square root.
/// Throws SingularCovariance for degenerate data.
CovarianceWeights covariance_weights(const Dataset& dataset);

/// Per-axis projection ranges of the whitened samples, inflated by `margin`.
Vec2 interval_widths(const Dataset& dataset, const Eigen::Matrix2d& q, double margin = 0.01);

/// Weighted generalized intersection kernel: sum(widths) - |Q (a - b)|_1.
double wgik(const Eigen::Matrix2d& q, const Vec2& widths, const Vec2& a, const Vec2& b);

Eigen::MatrixXd kernel_matrix(const std::vector<Vec2>& points, const Eigen::Matrix2d& q, const Vec2& widths);

enum class SvcVariant { Soft, HardQuantile };

const char* to_string(SvcVariant variant);

struct SupportVector {
    std::size_t index = 0;  ///< position in the training set
    double lambda = 0.0;
    Vec2 point = Vec2::Zero();
};

struct SvcQpOptions {
    double kkt_tolerance = 1e-6;
    long max_pair_updates = 100000;
    double zero_tolerance = 1e-8;  ///< classifies lambda against 0 and C
};

struct SvcModel {
    SvcVariant variant = SvcVariant::Soft;
    double cap = std::numeric_limits<double>::infinity();  ///< C
    double epsilon = 0.0;
    std::size_t n = 0;
    Eigen::Matrix2d q = Eigen::Matrix2d::Identity();
    Vec2 widths = Vec2::Zero();
    double rho = 0.0;
    std::size_t anchor = 0;  ///< training index of the point fixing rho
    Vec2 anchor_point = Vec2::Zero();
    std::vector<SupportVector> supports;  ///< F (soft) or S_v (hard)

    // Fit diagnostics; empty after deserialisation.
    std::vector<double> lambda;                 ///< all N weights
    std::vector<std::size_t> boundary;          ///< B_v, training indices
    std::vector<std::size_t> outliers;          ///< lambda at C
    std::vector<double> boundary_rho;           ///< rho evaluated at each boundary vector
    double objective = 0.0;
    double kkt_violation = 0.0;
    long pair_updates = 0;
    std::vector<std::string> warnings;
};

/// Soft-margin SVC with C = 1/(eps N).
SvcModel fit_svc(const Dataset& dataset, double epsilon, const SvcQpOptions& options = {});
/// Hard-margin SVC with the radius recalibrated to the ceil((1-eps)N)-th feature distance.
SvcModel fit_quantile_svc(const Dataset& dataset, double epsilon, const SvcQpOptions& options = {});

/// Solution of min l^T K l - diag(K)^T l over the capped simplex by pairwise updates.
struct SimplexQpResult {
    Eigen::VectorXd lambda;
    double kkt_violation = 0.0;
    long pair_updates = 0;
    bool converged = false;
};
SimplexQpResult solve_svc_dual(const Eigen::MatrixXd& kernel, double cap, const SvcQpOptions& options = {});

/// Dual objective l^T K l - diag(K)^T l.
double svc_dual_objective(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& lambda);

/// Polyhedral preimage { g : sum_i lambda_i |Q (g - xi_i)|_1 <= rho }.
struct SvcPolytope {
    std::vector<Vec2> points;
    std::vector<double> weights;
    Eigen::Matrix2d q = Eigen::Matrix2d::Identity();
    double rho = 0.0;
};

SvcPolytope extract_polytope(const SvcModel& model);

/// Left-hand side sum_i lambda_i |Q (g - xi_i)|_1.
double svc_level(const SvcPolytope& polytope, const Vec2& g);
bool svc_membership(const SvcPolytope& polytope, const Vec2& g);
bool svc_membership(const SvcModel& model, const Vec2& g);

/// Squared feature-space distance from phi(g) to the sphere centre, via the kernel expansion.
double feature_distance_sq(const SvcModel& model, const Vec2& g);
/// Squared radius: feature distance of the anchor.
double feature_radius_sq(const SvcModel& model);
/// Kernel-form sphere test K(g,g) - 2 sum l K(g, xi) + sum sum l l K <= R^2.
bool kernel_sphere_contains(const SvcModel& model, const Vec2& g);

/// Header record plus `index,lambda,g_d,g_cd` rows for the support vectors.
std::string serialize(const SvcModel& model);
SvcModel parse_svc_model(std::string_view text);

}  // namespace d2d
