#pragma once

#include <string>
#include <variant>
#include <vector>

#include "d2drobust/channel_model.hpp"
#include "d2drobust/quantile_sets.hpp"
#include "d2drobust/svc_learner.hpp"

namespace d2d {

enum class SetKind { L1Ball, L2Ball, BoxSet, Svc, QuantileSvc };

/// A fitted uncertainty set bound to its worst-case oracle.
class UncertaintySet {
public:
    UncertaintySet(SymmetricSet set);
    UncertaintySet(SvcPolytope polytope, SetKind kind = SetKind::Svc);

    SetKind kind() const { return kind_; }
    bool is_polytope() const { return std::holds_alternative<SvcPolytope>(set_); }
    const SymmetricSet& symmetric() const { return std::get<SymmetricSet>(set_); }
    const SvcPolytope& polytope() const { return std::get<SvcPolytope>(set_); }

    bool contains(const Vec2& g) const;
    /// min over the set of p.g.
    double worst_case_value(const Vec2& p) const;
    /// A minimiser of p.g; always a member up to solver tolerance.
    Vec2 worst_case_point(const Vec2& p) const;
    /// Extreme g_cd coordinates over the set.
    double min_crosstalk() const { return min_cd_; }
    double max_crosstalk() const { return max_cd_; }

private:
    SetKind kind_;
    std::variant<SymmetricSet, SvcPolytope> set_;
    double min_cd_ = 0.0;
    double max_cd_ = 0.0;
};

/// Robust constraint direction [p_d / sigma^2, -p_c gamma_min_d / sigma^2].
Vec2 constraint_direction(double p_c, double p_d, double gamma_min_d, double noise_w);

/// Smallest p_c meeting the cellular SINR floor at the given p_d.
double pc_lower_bound(const Scenario& scenario, double p_d);

struct PcMax {
    bool feasible = false;  ///< false when even p_c = 0 violates the robust constraint
    double p_c = 0.0;       ///< may be +inf
    int oracle_calls = 0;
    std::vector<std::string> warnings;
};

/// Largest p_c >= 0 with worst_case(p(p_c, p_d)) >= gamma_min_d, to relative tolerance 1e-10.
/// The returned p_c always lies on the feasible side of the root.
PcMax pc_max_robust(const UncertaintySet& set, double p_d, double gamma_min_d, double noise_w);

struct SubproblemResult {
    bool feasible = false;
    double p_c = 0.0;  ///< uncapped robust cap, meaningful when feasible
    double p_c_floor = 0.0;
};

/// Throughput-maximising p_c for fixed p_d, without the P_max^c cap.
SubproblemResult solve_subproblem(const Scenario& scenario, const UncertaintySet& set, double p_d);

struct TraceStep {
    double p_d = 0.0;
    double p_c = 0.0;  ///< uncapped subproblem value (0 if infeasible)
    bool feasible = false;
};

struct AllocationResult {
    double p_c = 0.0;
    double p_d = 0.0;
    bool feasible = false;
    double margin = 0.0;  ///< worst-case p.g - gamma_min_d at the returned point
    int iterations = 0;
    std::vector<TraceStep> trace;
    std::string status;  ///< "band", "bracket", "p_d_cap", or the infeasibility reason
    std::vector<std::string> warnings;
};

/// Bisection over p_d in [0, P_max^d]. `zeta` <= 0 selects 1e-4 P_max^d.
AllocationResult allocate(const Scenario& scenario, const UncertaintySet& set, double zeta = 0.0);

/// CSV header / row: method,epsilon,gamma_min_d,p_c,p_d,feasible,iterations,margin
std::string allocation_csv_header();
std::string allocation_csv_row(const std::string& method, const Scenario& scenario, const AllocationResult& r);

}  // namespace d2d
