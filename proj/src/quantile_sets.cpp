#include "d2drobust/quantile_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "d2drobust/errors.hpp"

namespace d2d {

const char* to_string(SetShape shape) {
    switch (shape) {
    case SetShape::L1Ball: return "L1Ball";
    case SetShape::L2Ball: return "L2Ball";
    case SetShape::BoxSet: return "BoxSet";
    }
    return "?";
}

SetShape parse_set_shape(std::string_view name) {
    if (name == "L1Ball") return SetShape::L1Ball;
    if (name == "L2Ball") return SetShape::L2Ball;
    if (name == "BoxSet") return SetShape::BoxSet;
    throw ConfigError("shape", "unknown set shape '" + std::string(name) + "'");
}

double SymmetricSet::radius() const { return shape == SetShape::L2Ball ? std::sqrt(size) : size; }

std::size_t quantile_rank(std::size_t n, double epsilon) {
    const double target = (1.0 - epsilon) * static_cast<double>(n);
    // Guard against (1 - eps) n landing a hair above an integer.
    auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

Vec2 fit_center(const Dataset& dataset) {
    Vec2 sum = Vec2::Zero();
    for (const ChannelSample& s : dataset.samples) sum += s.vec();
    return sum / static_cast<double>(dataset.size());
}

double calibration_score(SetShape shape, const Vec2& center, const Vec2& g) {
    const Vec2 d = g - center;
    switch (shape) {
    case SetShape::L1Ball: return d.cwiseAbs().sum();
    case SetShape::L2Ball: return d.squaredNorm();
    case SetShape::BoxSet: return d.cwiseAbs().maxCoeff();
    }
    return 0.0;
}

SymmetricSet calibrate(const Dataset& dataset, const Vec2& center, SetShape shape, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0,1)");
    if (dataset.size() == 0) throw DatasetError("cannot calibrate on an empty dataset");
    std::vector<double> scores;
    scores.reserve(dataset.size());
    for (const ChannelSample& s : dataset.samples) scores.push_back(calibration_score(shape, center, s.vec()));
    std::stable_sort(scores.begin(), scores.end());
    const std::size_t k = quantile_rank(dataset.size(), epsilon);
    return {shape, center, scores[k - 1], epsilon, dataset.size()};
}

bool contains(const SymmetricSet& set, const Vec2& g) {
    return calibration_score(set.shape, set.center, g) <= set.size;
}

double worst_case_value(const SymmetricSet& set, const Vec2& p) {
    const double nominal = p.dot(set.center);
    switch (set.shape) {
    case SetShape::L1Ball: return nominal - set.size * p.cwiseAbs().maxCoeff();
    case SetShape::L2Ball: return nominal - std::sqrt(set.size) * p.norm();
    case SetShape::BoxSet: return nominal - set.size * p.cwiseAbs().sum();
    }
    return nominal;
}

namespace {
double sign_or_one(double v) { return v < 0 ? -1.0 : 1.0; }
}  // namespace

Vec2 worst_case_point(const SymmetricSet& set, const Vec2& p) {
    switch (set.shape) {
    case SetShape::L1Ball: {
        Vec2 step = Vec2::Zero();
        const int k = std::abs(p.x()) >= std::abs(p.y()) ? 0 : 1;
        step(k) = -sign_or_one(p(k)) * set.size;
        return set.center + step;
    }
    case SetShape::L2Ball: {
        const double norm = p.norm();
        if (norm == 0.0) return set.center;
        return set.center - std::sqrt(set.size) * p / norm;
    }
    case SetShape::BoxSet:
        return set.center - set.size * Vec2(sign_or_one(p.x()), sign_or_one(p.y()));
    }
    return set.center;
}

bool robust_constraint_holds(const SymmetricSet& set, const Vec2& p, double gamma_min_d) {
    return worst_case_value(set, p) >= gamma_min_d;
}

Eigen::Matrix<double, 4, 2> constraint_matrix(SetShape shape) {
    Eigen::Matrix<double, 4, 2> m;
    if (shape == SetShape::L1Ball) {
        m << 1, 1, 1, -1, -1, 1, -1, -1;
    } else if (shape == SetShape::BoxSet) {
        m << 1, 0, -1, 0, 0, 1, 0, -1;
    } else {
        throw ConfigError("shape", "L2Ball has no polyhedral description");
    }
    return m;
}

DualCertificate dual_certificate(const SymmetricSet& set, const Vec2& p) {
    const Eigen::Matrix<double, 4, 2> m = constraint_matrix(set.shape);
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    // Multipliers live on the rows active at the worst-case vertex; complementary
    // slackness plus M^T x = -p fixes them uniquely.
    if (set.shape == SetShape::L1Ball) {
        const double s1 = sign_or_one(p.x()), s2 = sign_or_one(p.y());
        if (std::abs(p.x()) >= std::abs(p.y())) {
            // Active rows (-s1, +1) and (-s1, -1).
            const int row_plus = s1 > 0 ? 2 : 0;   // (-1, 1) or (1, 1)
            const int row_minus = s1 > 0 ? 3 : 1;  // (-1,-1) or (1,-1)
            x(row_plus) = 0.5 * (std::abs(p.x()) - p.y());
            x(row_minus) = 0.5 * (std::abs(p.x()) + p.y());
        } else {
            const int row_plus = s2 > 0 ? 1 : 0;   // (1,-1) or (1, 1)
            const int row_minus = s2 > 0 ? 3 : 2;  // (-1,-1) or (-1, 1)
            x(row_plus) = 0.5 * (std::abs(p.y()) - p.x());
            x(row_minus) = 0.5 * (std::abs(p.y()) + p.x());
        }
    } else {
        x(p.x() < 0 ? 0 : 1) = std::abs(p.x());
        x(p.y() < 0 ? 2 : 3) = std::abs(p.y());
    }

    DualCertificate cert;
    for (int i = 0; i < 4; ++i) cert.multipliers[static_cast<std::size_t>(i)] = x(i);
    const Eigen::Vector4d rhs = Eigen::Vector4d::Constant(set.size) + m * set.center;
    cert.value = -rhs.dot(x);
    cert.stationarity_residual = (m.transpose() * x + p).cwiseAbs().maxCoeff();

    const double primal = worst_case_value(set, p);
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff() * (set.center.cwiseAbs().maxCoeff() + set.size));
    if ((x.array() < 0).any() || std::abs(cert.value - primal) > 1e-9 * scale ||
        cert.stationarity_residual > 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff())) {
        throw DualityGapError("dual certificate " + std::to_string(cert.value) + " does not match worst case " +
                              std::to_string(primal));
    }
    return cert;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string serialize(const SymmetricSet& set) {
    std::ostringstream os;
    os << "shape=" << to_string(set.shape) << '\n'
       << "center=" << fmt17(set.center.x()) << ',' << fmt17(set.center.y()) << '\n'
       << "size=" << fmt17(set.size) << '\n'
       << "epsilon=" << fmt17(set.epsilon) << '\n'
       << "n=" << set.n << '\n';
    return os.str();
}

SymmetricSet parse_symmetric_set(std::string_view text) {
    SymmetricSet set;
    bool seen_shape = false, seen_center = false, seen_size = false;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "shape") {
                set.shape = parse_set_shape(value);
                seen_shape = true;
            } else if (key == "center") {
                const auto comma = value.find(',');
                if (comma == std::string::npos) throw ConfigError("center", "expected two comma-separated values");
                set.center = Vec2(std::stod(value.substr(0, comma)), std::stod(value.substr(comma + 1)));
                seen_center = true;
            } else if (key == "size") {
                set.size = std::stod(value);
                seen_size = true;
            } else if (key == "epsilon") {
                set.epsilon = std::stod(value);
            } else if (key == "n") {
                set.n = static_cast<std::size_t>(std::stoull(value));
            } else {
                throw ConfigError(key, "unknown key in set file");
            }
        } catch (const std::logic_error&) {
            throw ConfigError(key, "malformed value '" + value + "'");
        }
    }
    if (!seen_shape) throw ConfigError("shape", "missing");
    if (!seen_center) throw ConfigError("center", "missing");
    if (!seen_size) throw ConfigError("size", "missing");
    if (set.size < 0) throw ConfigError("size", "must be non-negative");
    return set;
}

}  // namespace d2d
