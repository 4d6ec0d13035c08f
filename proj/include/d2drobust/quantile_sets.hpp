#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "d2drobust/channel_model.hpp"

namespace d2d {

enum class SetShape { L1Ball, L2Ball, BoxSet };

const char* to_string(SetShape shape);
SetShape parse_set_shape(std::string_view name);

/// Norm ball around the sample mean, sized by an empirical quantile.
///
/// `size` is Gamma for the L1 ball, Lambda (a squared radius) for the L2 ball
/// and Psi for the box. A zero size is the singleton {center}.
struct SymmetricSet {
    SetShape shape = SetShape::L1Ball;
    Vec2 center = Vec2::Zero();
    double size = 0.0;
    double epsilon = 0.0;
    std::size_t n = 0;

    /// Radius in the set's own norm (sqrt(Lambda) for the L2 ball).
    double radius() const;
};

/// Rank ceil((1 - epsilon) n), clamped to [1, n].
std::size_t quantile_rank(std::size_t n, double epsilon);

Vec2 fit_center(const Dataset& dataset);

/// Distance transform used for calibration: L1 distance, squared L2 distance or L-inf distance.
double calibration_score(SetShape shape, const Vec2& center, const Vec2& g);

SymmetricSet calibrate(const Dataset& dataset, const Vec2& center, SetShape shape, double epsilon);

bool contains(const SymmetricSet& set, const Vec2& g);

/// min over g in the set of p.g, via dual-norm closed forms.
double worst_case_value(const SymmetricSet& set, const Vec2& p);
/// A minimiser of p.g over the set (a vertex for L1/box).
Vec2 worst_case_point(const SymmetricSet& set, const Vec2& p);

bool robust_constraint_holds(const SymmetricSet& set, const Vec2& p, double gamma_min_d);

/// Row matrix of the polyhedral description M (g - center) <= size * 1.
/// L1 rows are (+-1, +-1); box rows are (+-1, 0) and (0, +-1).
Eigen::Matrix<double, 4, 2> constraint_matrix(SetShape shape);

/// Multipliers x >= 0 with M^T x = -p certifying the worst-case value
/// -(size * 1 + M center)^T x.
struct DualCertificate {
    std::array<double, 4> multipliers{};
    double value = 0.0;
    double stationarity_residual = 0.0;
};

/// L1Ball or BoxSet only. Throws DualityGapError when the certificate and the
/// closed form differ by more than 1e-9 relative to |p| (|center| + size).
DualCertificate dual_certificate(const SymmetricSet& set, const Vec2& p);

/// `shape=`, `center=`, `size=`, `epsilon=`, `n=` lines, 17 significant digits.
std::string serialize(const SymmetricSet& set);
SymmetricSet parse_symmetric_set(std::string_view text);

}  // namespace d2d
