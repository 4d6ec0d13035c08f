#include "d2drobust/power_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"

namespace d2d {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

SetKind kind_of(SetShape shape) {
    switch (shape) {
    case SetShape::L1Ball: return SetKind::L1Ball;
    case SetShape::L2Ball: return SetKind::L2Ball;
    case SetShape::BoxSet: return SetKind::BoxSet;
    }
    return SetKind::L2Ball;
}
}  // namespace

UncertaintySet::UncertaintySet(SymmetricSet set) : kind_(kind_of(set.shape)), set_(std::move(set)) {
    min_cd_ = symmetric().center.y() - symmetric().radius();
    max_cd_ = symmetric().center.y() + symmetric().radius();
}

UncertaintySet::UncertaintySet(SvcPolytope polytope, SetKind kind) : kind_(kind), set_(std::move(polytope)) {
    if (kind != SetKind::Svc && kind != SetKind::QuantileSvc)
        throw ConfigError("kind", "polytope sets must be Svc or QuantileSvc");
    min_cd_ = svc_worst_case(this->polytope(), Vec2(0.0, 1.0)).value;
    max_cd_ = -svc_worst_case(this->polytope(), Vec2(0.0, -1.0)).value;
}

bool UncertaintySet::contains(const Vec2& g) const {
    if (is_polytope()) return svc_membership(polytope(), g);
    return d2d::contains(symmetric(), g);
}

double UncertaintySet::worst_case_value(const Vec2& p) const {
    if (is_polytope()) return svc_worst_case(polytope(), p).value;
    return d2d::worst_case_value(symmetric(), p);
}

Vec2 UncertaintySet::worst_case_point(const Vec2& p) const {
    if (is_polytope()) return svc_worst_case(polytope(), p).point;
    return d2d::worst_case_point(symmetric(), p);
}

Vec2 constraint_direction(double p_c, double p_d, double gamma_min_d, double noise_w) {
    return {p_d / noise_w, -p_c * gamma_min_d / noise_w};
}

double pc_lower_bound(const Scenario& s, double p_d) { return s.gamma_min_c * (s.noise_w + p_d * s.g_db) / s.g_c; }

namespace {

// The constraint scaled by sigma^2 / p_d and written in x = p_c gamma / p_d:
//   h(x) = min_g (g_d - x g_cd) - gamma sigma^2 / p_d.
// h is concave and p_c = x p_d / gamma.
struct Scaled {
    const UncertaintySet& set;
    double required;
    int calls = 0;

    struct Eval {
        double h;
        double slope;  // supergradient -g*_cd
        double scale;  // magnitude of the terms summed into h
    };

    Eval operator()(double x) {
        ++calls;
        const Vec2 dir(1.0, -x);
        const Vec2 g = set.worst_case_point(dir);
        const double value = set.is_polytope() ? dir.dot(g) : set.worst_case_value(dir);
        return {value - required, -g.y(), std::abs(g.x()) + std::abs(x * g.y()) + required};
    }
};

// Roots of the symmetric-set constraints in closed form. Returns +inf when h never turns negative.
double symmetric_root(const SymmetricSet& set, double required) {
    const double gd = set.center.x(), gc = set.center.y();
    const double a = gd - required;
    auto affine_root = [](double c0, double c1) { return c1 < 0.0 ? std::max(0.0, c0 / -c1) : kInf; };
    if (set.size == 0.0) return affine_root(a, -gc);
    switch (set.shape) {
    case SetShape::L1Ball:
        // -size * max(1, x) splits into two affine pieces.
        return std::min(affine_root(a - set.size, -gc), affine_root(a, -(gc + set.size)));
    case SetShape::BoxSet:
        return affine_root(a - set.size, -(gc + set.size));
    case SetShape::L2Ball: {
        const double z = std::sqrt(set.size);
        if (gc + z <= 0.0) return kInf;
        // (a - gc x)^2 = z^2 (1 + x^2) on the branch a - gc x >= 0.
        const double qa = gc * gc - z * z, qb = -2.0 * a * gc, qc = a * a - z * z;
        std::vector<double> roots;
        if (std::abs(qa) <= 1e-14 * (gc * gc + z * z)) {
            if (qb != 0.0) roots.push_back(-qc / qb);
        } else {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double t = -0.5 * (qb + std::copysign(sq, qb));
                if (t != 0.0) roots.push_back(qc / t);
                if (qa != 0.0) roots.push_back(t / qa);
            }
        }
        double best = -1.0, best_res = kInf;
        for (double r : roots) {
            if (!(r >= 0.0)) continue;
            const double res = std::abs(a - gc * r - z * std::hypot(1.0, r));
            if (res < best_res) {
                best_res = res;
                best = r;
            }
        }
        if (best < 0.0) return 0.0;
        // Newton polish on the unsquared form.
        for (int i = 0; i < 3; ++i) {
            const double h = a - gc * best - z * std::hypot(1.0, best);
            const double dh = -gc - z * best / std::hypot(1.0, best);
            if (dh >= 0.0 || h == 0.0) break;
            best = std::max(0.0, best - h / dh);
        }
        return best;
    }
    }
    return 0.0;
}

}  // namespace

PcMax pc_max_robust(const UncertaintySet& set, double p_d, double gamma_min_d, double noise_w) {
    PcMax out;
    if (!(p_d > 0.0)) return out;  // p^T g = -p_c gamma g_cd / sigma^2 < gamma for any member
    Scaled h{set, gamma_min_d * noise_w / p_d};

    if (set.min_crosstalk() < 0.0)
        out.warnings.push_back("SetAllowsNegativeCrosstalk: set reaches g_cd < 0; steering monotonicity is checked");

    const auto e0 = h(0.0);
    if (e0.h < 0.0) {
        out.oracle_calls = h.calls;
        return out;
    }
    out.feasible = true;

    double x = 0.0;
    Scaled::Eval e = e0;
    if (!set.is_polytope()) {
        x = symmetric_root(set.symmetric(), h.required);
        if (std::isinf(x)) {
            out.p_c = kInf;
            out.oracle_calls = h.calls;
            return out;
        }
        e = h(x);
    } else {
        // Cutting planes from the right: tangent roots of a concave function overshoot the root.
        if (set.max_crosstalk() <= 0.0) {
            out.p_c = kInf;
            out.oracle_calls = h.calls;
            return out;
        }
        if (e0.slope < 0.0) {
            x = e0.h / -e0.slope;
        } else {
            x = 1.0;
            while (h(x).h >= 0.0) {
                x *= 2.0;
                if (x > 1e300) throw NumericalFailure("pc_max_robust: no sign change found");
            }
        }
        e = h(x);
        for (int it = 0; it < 200 && e.h < 0.0; ++it) {
            if (!(e.slope < 0.0)) throw NumericalFailure("pc_max_robust: non-decreasing constraint beyond root");
            const double next = x + e.h / -e.slope;
            if (!(next < x) || x - next <= 1e-12 * x) {
                x = std::max(0.0, next);
                e = h(x);
                break;
            }
            x = std::max(0.0, next);
            e = h(x);
        }
    }

    // Settle on the feasible side with a few ulps of headroom.
    for (int it = 0; it < 100; ++it) {
        const double headroom = 1e-14 * e.scale;
        if (e.h >= headroom || x == 0.0) break;
        const double slope = e.slope < 0.0 ? -e.slope : 1.0;
        x = std::max(0.0, x - (headroom - e.h) / slope - 1e-15 * x);
        e = h(x);
    }
    if (e.h < 0.0) throw NumericalFailure("pc_max_robust: could not reach the feasible side of the root");
    out.p_c = x * p_d / gamma_min_d;
    out.oracle_calls = h.calls;
    return out;
}

SubproblemResult solve_subproblem(const Scenario& scenario, const UncertaintySet& set, double p_d) {
    SubproblemResult r;
    r.p_c_floor = pc_lower_bound(scenario, p_d);
    const PcMax m = pc_max_robust(set, p_d, scenario.gamma_min_d, scenario.noise_w);
    r.p_c = m.p_c;
    r.feasible = m.feasible && m.p_c >= r.p_c_floor * (1.0 - 1e-9);
    return r;
}

namespace {

double steering_value(const PcMax& m) { return m.feasible ? m.p_c : -kInf; }

void check_monotone(double lo, double mid, double hi, double p_d) {
    auto leq = [](double x, double y) { return x <= y || x - y <= 1e-9 * std::max(std::abs(x), std::abs(y)); };
    if (!leq(lo, mid) || !leq(mid, hi)) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "steering not monotone at p_d=%.6g: p_c(lo)=%.6g p_c(mid)=%.6g p_c(hi)=%.6g",
                      p_d, lo, mid, hi);
        throw NumericalFailure(buf);
    }
}

}  // namespace

AllocationResult allocate(const Scenario& s, const UncertaintySet& set, double zeta) {
    if (zeta <= 0.0) zeta = 1e-4 * s.p_max_d_w;
    if (!(zeta < 1.0)) throw ConfigError("zeta", "must lie in (0, 1)");
    AllocationResult r;
    const double pc_cap = s.p_max_c_w, pd_cap = s.p_max_d_w;
    auto eval = [&](double p_d) { return pc_max_robust(set, p_d, s.gamma_min_d, s.noise_w); };

    PcMax at_cap = eval(pd_cap);
    for (const std::string& w : at_cap.warnings) r.warnings.push_back(w);
    if (!at_cap.feasible) {
        r.status = "infeasible: robust D2D constraint fails at P_max^d";
        r.p_d = pd_cap;
        return r;
    }

    double lo = 0.0, hi = pd_cap;
    double v_lo = -kInf, v_hi = at_cap.p_c;
    double p_d = 0.5 * (lo + hi);
    bool settled = false;
    double p_c = 0.0;

    while (p_d < pd_cap - zeta) {
        const PcMax m = eval(p_d);
        ++r.iterations;
        r.trace.push_back({p_d, m.feasible ? m.p_c : 0.0, m.feasible});
        const double v = steering_value(m);
        check_monotone(v_lo, v, v_hi, p_d);

        if (v > pc_cap + zeta) {
            hi = p_d;
            v_hi = v;
        } else if (v < pc_cap - zeta) {
            lo = p_d;
            v_lo = v;
        } else {
            p_c = std::min(v, pc_cap);
            settled = true;
            r.status = "band";
            break;
        }
        if (hi - lo < zeta && hi < pd_cap) {
            p_d = hi;
            p_c = pc_cap;
            settled = true;
            r.status = "bracket";
            break;
        }
        p_d = 0.5 * (lo + hi);
    }
    if (!settled) {
        p_d = pd_cap;
        p_c = std::min(pc_cap, at_cap.p_c);
        r.status = "p_d_cap";
    }

    r.p_c = p_c;
    r.p_d = p_d;
    r.margin = set.worst_case_value(constraint_direction(p_c, p_d, s.gamma_min_d, s.noise_w)) - s.gamma_min_d;
    if (p_c < pc_lower_bound(s, p_d) * (1.0 - 1e-9)) {
        r.status = "infeasible: cellular SINR floor not met";
        return r;
    }
    r.feasible = true;
    return r;
}

std::string allocation_csv_header() { return "method,epsilon,gamma_min_d,p_c,p_d,feasible,iterations,margin"; }

std::string allocation_csv_row(const std::string& method, const Scenario& s, const AllocationResult& r) {
    char buf[400];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%s,%d,%.17g", method.c_str(), s.epsilon,
                  s.gamma_min_d, r.p_c, r.p_d, r.feasible ? "true" : "false", r.iterations, r.margin);
    return buf;
}

}  // namespace d2d
