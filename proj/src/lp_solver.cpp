#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"

namespace d2d {

const char* to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-10;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One original variable expressed through standard-form columns: z = offset + sum coef * x.
struct VarMap {
    double offset = 0.0;
    int col = -1;
    double coef = 1.0;
    int neg_col = -1;  // free variables: z = x+ - x-
};

// Standard form  A x (+/- slack) = rhs,  x >= 0, with every rhs >= 0 after row flips.
struct StandardForm {
    Eigen::Index m = 0;
    Eigen::Index n_struct = 0;
    Eigen::Index n_slack = 0;
    Eigen::MatrixXd a;      // m x n_struct, rows already flipped
    Eigen::VectorXd rhs;    // >= 0
    Eigen::VectorXd cost;   // n_struct
    std::vector<int> slack_of_row;  // -1 for equality rows
    std::vector<double> flip;       // +1 / -1 applied to row
    std::vector<VarMap> vars;
    Eigen::Index m_ineq_orig = 0;
    Eigen::Index m_eq = 0;
    double cost_offset = 0.0;
};

StandardForm to_standard_form(const LpProblem& p) {
    const Eigen::Index n = p.num_vars();
    Eigen::VectorXd lower = p.lower.size() ? p.lower : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd upper = p.upper.size() ? p.upper : Eigen::VectorXd::Constant(n, kInf);
    if (lower.size() != n || upper.size() != n) throw NumericalFailure("LP bound vectors have wrong size");
    const Eigen::Index m1 = p.a_ineq.rows();
    const Eigen::Index m2 = p.a_eq.rows();
    if ((m1 && p.a_ineq.cols() != n) || p.b_ineq.size() != m1 || (m2 && p.a_eq.cols() != n) ||
        p.b_eq.size() != m2)
        throw NumericalFailure("LP constraint dimensions are inconsistent");

    StandardForm sf;
    sf.vars.resize(static_cast<std::size_t>(n));
    std::vector<std::pair<int, double>> bound_rows;  // (struct col, bound)
    int cols = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        VarMap& v = sf.vars[static_cast<std::size_t>(j)];
        const double lo = lower(j), hi = upper(j);
        if (std::isfinite(lo)) {
            v.offset = lo;
            v.col = cols++;
            if (std::isfinite(hi)) bound_rows.emplace_back(v.col, hi - lo);
        } else if (std::isfinite(hi)) {
            v.offset = hi;
            v.col = cols++;
            v.coef = -1.0;
        } else {
            v.col = cols++;
            v.neg_col = cols++;
        }
    }
    sf.n_struct = cols;
    sf.m_ineq_orig = m1;
    sf.m_eq = m2;
    const Eigen::Index mb = static_cast<Eigen::Index>(bound_rows.size());
    sf.m = m1 + mb + m2;
    sf.a = Eigen::MatrixXd::Zero(sf.m, cols);
    sf.rhs = Eigen::VectorXd::Zero(sf.m);
    sf.cost = Eigen::VectorXd::Zero(cols);

    auto expand_row = [&](Eigen::Index r, const auto& row, double b) {
        double shifted = b;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = row(j);
            if (a == 0.0) continue;
            const VarMap& v = sf.vars[static_cast<std::size_t>(j)];
            shifted -= a * v.offset;
            sf.a(r, v.col) += a * v.coef;
            if (v.neg_col >= 0) sf.a(r, v.neg_col) -= a;
        }
        sf.rhs(r) = shifted;
    };
    for (Eigen::Index i = 0; i < m1; ++i) expand_row(i, p.a_ineq.row(i), p.b_ineq(i));
    for (Eigen::Index k = 0; k < mb; ++k) {
        sf.a(m1 + k, bound_rows[static_cast<std::size_t>(k)].first) = 1.0;
        sf.rhs(m1 + k) = bound_rows[static_cast<std::size_t>(k)].second;
    }
    for (Eigen::Index i = 0; i < m2; ++i) expand_row(m1 + mb + i, p.a_eq.row(i), p.b_eq(i));

    for (Eigen::Index j = 0; j < n; ++j) {
        const VarMap& v = sf.vars[static_cast<std::size_t>(j)];
        sf.cost_offset += p.c(j) * v.offset;
        sf.cost(v.col) += p.c(j) * v.coef;
        if (v.neg_col >= 0) sf.cost(v.neg_col) -= p.c(j);
    }

    sf.slack_of_row.assign(static_cast<std::size_t>(sf.m), -1);
    sf.flip.assign(static_cast<std::size_t>(sf.m), 1.0);
    int slack = 0;
    for (Eigen::Index i = 0; i < m1 + mb; ++i) sf.slack_of_row[static_cast<std::size_t>(i)] = slack++;
    sf.n_slack = slack;
    for (Eigen::Index i = 0; i < sf.m; ++i) {
        if (sf.rhs(i) < 0) {
            sf.flip[static_cast<std::size_t>(i)] = -1.0;
            sf.a.row(i) *= -1.0;
            sf.rhs(i) *= -1.0;
        }
    }
    return sf;
}

class Tableau {
public:
    Tableau(const StandardForm& sf, const LpOptions& options) : sf_(sf), opts_(options) {
        m_ = sf.m;
        n_struct_ = sf.n_struct;
        n_slack_ = sf.n_slack;
        // Artificial for every row whose slack cannot start basic.
        art_of_row_.assign(static_cast<std::size_t>(m_), -1);
        n_art_ = 0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const bool slack_ok = sf.slack_of_row[static_cast<std::size_t>(i)] >= 0 &&
                                  sf.flip[static_cast<std::size_t>(i)] > 0;
            if (!slack_ok) art_of_row_[static_cast<std::size_t>(i)] = static_cast<int>(n_art_++);
        }
        ncols_ = n_struct_ + n_slack_ + n_art_;
        t_ = RowMatrix::Zero(m_, ncols_ + 1);
        row_scale_ = Eigen::VectorXd::Ones(m_);
        basis_.assign(static_cast<std::size_t>(m_), -1);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const auto si = static_cast<std::size_t>(i);
            t_.row(i).head(n_struct_) = sf.a.row(i);
            t_(i, ncols_) = sf.rhs(i);
            const double amax = n_struct_ ? sf.a.row(i).cwiseAbs().maxCoeff() : 0.0;
            const double scale = amax > 0 ? amax : 1.0;
            t_.row(i) /= scale;
            row_scale_(i) = scale;
            // Slacks are rescaled with their row so the starting basis stays the identity.
            if (sf.slack_of_row[si] >= 0) t_(i, n_struct_ + sf.slack_of_row[si]) = sf.flip[si];
            if (art_of_row_[si] >= 0) {
                const Eigen::Index col = n_struct_ + n_slack_ + art_of_row_[si];
                t_(i, col) = 1.0;
                basis_[si] = static_cast<int>(col);
            } else {
                basis_[si] = static_cast<int>(n_struct_ + sf.slack_of_row[si]);
            }
        }
        max_iterations_ = 50 * static_cast<int>(m_ + ncols_) + 1000;
        bland_after_ = 10 * static_cast<int>(m_ + ncols_);
    }

    bool is_artificial(Eigen::Index col) const { return col >= n_struct_ + n_slack_; }

    // Returns false on unboundedness.
    bool run(const Eigen::VectorXd& cost, bool phase_one) {
        cost_ = cost;
        obj_ = Eigen::VectorXd::Zero(ncols_ + 1);
        obj_.head(ncols_) = cost;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = cost(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) obj_ -= cb * t_.row(i).transpose();
        }
        int degenerate_run = 0;
        bool bland = false;
        const double cost_scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
        for (;;) {
            if (iterations_ >= max_iterations_)
                throw NumericalFailure("simplex pivot limit reached (" + std::to_string(iterations_) + ")");
            const Eigen::Index allowed = phase_one ? ncols_ : n_struct_ + n_slack_;
            Eigen::Index enter = -1;
            double best = -kOptTol * cost_scale;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                if (obj_(j) < best) {
                    enter = j;
                    if (bland) break;
                    best = obj_(j);
                }
            }
            if (enter < 0) return true;

            double min_ratio = kInf;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = t_(i, enter);
                if (a > kPivotTol) min_ratio = std::min(min_ratio, t_(i, ncols_) / a);
            }
            Eigen::Index leave = -1;
            if (std::isfinite(min_ratio)) {
                const double cutoff = min_ratio + 1e-12 * std::max(1.0, std::abs(min_ratio));
                for (Eigen::Index i = 0; i < m_; ++i) {
                    const double a = t_(i, enter);
                    if (a <= kPivotTol || t_(i, ncols_) / a > cutoff) continue;
                    if (leave < 0) {
                        leave = i;
                    } else if (bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                     : a > t_(leave, enter)) {
                        leave = i;
                    }
                }
            }
            const double best_ratio = min_ratio;
            if (leave < 0) return false;

            if (best_ratio <= 1e-12) {
                if (++degenerate_run >= bland_after_ && !bland) {
                    bland = true;
                    used_bland_ = true;
                }
            } else {
                degenerate_run = 0;
            }
            pivot(leave, enter);
            ++iterations_;
            if (opts_.debug && opts_.verbosity > 0) dump(*opts_.debug, leave, enter);
        }
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) {
                t_.row(i) -= f * t_.row(r);
                t_(i, c) = 0.0;
            }
        }
        const double f = obj_(c);
        if (f != 0.0) {
            obj_ -= f * t_.row(r).transpose();
            obj_(c) = 0.0;
        }
        basis_[static_cast<std::size_t>(r)] = static_cast<int>(c);
    }

    // Pivots basic artificials out where possible; leftover rows are redundant.
    void expel_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
            Eigen::Index best = -1;
            double mag = 1e-9;
            for (Eigen::Index j = 0; j < n_struct_ + n_slack_; ++j) {
                if (std::abs(t_(i, j)) > mag) {
                    mag = std::abs(t_(i, j));
                    best = j;
                }
            }
            if (best >= 0) pivot(i, best);
        }
    }

    double objective_value() const { return -obj_(ncols_); }
    double phase_one_scale() const { return std::max(1.0, t_.col(ncols_).cwiseAbs().maxCoeff()); }
    const std::vector<int>& basis() const { return basis_; }
    Eigen::Index ncols() const { return ncols_; }
    Eigen::Index n_struct() const { return n_struct_; }
    Eigen::Index n_slack() const { return n_slack_; }
    const std::vector<int>& art_of_row() const { return art_of_row_; }
    int iterations() const { return iterations_; }
    bool used_bland() const { return used_bland_; }
    double rhs(Eigen::Index i) const { return t_(i, ncols_); }

private:
    void dump(std::ostream& os, Eigen::Index r, Eigen::Index c) const {
        os << "pivot " << iterations_ << ": row " << r << " col " << c << " obj " << objective_value() << '\n';
        if (opts_.verbosity > 1 && m_ * ncols_ <= 400) {
            os << t_ << '\n' << obj_.transpose() << '\n';
        }
    }

    const StandardForm& sf_;
    const LpOptions& opts_;
    Eigen::Index m_ = 0, n_struct_ = 0, n_slack_ = 0, n_art_ = 0, ncols_ = 0;
    RowMatrix t_;
    Eigen::VectorXd obj_;
    Eigen::VectorXd cost_;
    Eigen::VectorXd row_scale_;
    std::vector<int> basis_;
    std::vector<int> art_of_row_;
    int iterations_ = 0;
    int max_iterations_ = 0;
    int bland_after_ = 0;
    bool used_bland_ = false;
};

// Column `col` of the (flipped, unscaled) standard-form matrix.
Eigen::VectorXd std_column(const StandardForm& sf, const Tableau& tab, Eigen::Index col) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sf.m);
    if (col < sf.n_struct) return sf.a.col(col);
    if (col < sf.n_struct + sf.n_slack) {
        const int s = static_cast<int>(col - sf.n_struct);
        for (Eigen::Index i = 0; i < sf.m; ++i)
            if (sf.slack_of_row[static_cast<std::size_t>(i)] == s) v(i) = sf.flip[static_cast<std::size_t>(i)];
        return v;
    }
    const int a = static_cast<int>(col - sf.n_struct - sf.n_slack);
    for (Eigen::Index i = 0; i < sf.m; ++i)
        if (tab.art_of_row()[static_cast<std::size_t>(i)] == a) v(i) = 1.0;
    return v;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
    const Eigen::Index n = problem.num_vars();
    LpSolution sol;
    sol.z = Eigen::VectorXd::Zero(n);
    sol.ineq_duals = Eigen::VectorXd::Zero(problem.a_ineq.rows());
    sol.eq_duals = Eigen::VectorXd::Zero(problem.a_eq.rows());
    sol.reduced_costs = Eigen::VectorXd::Zero(n);

    if (problem.lower.size() && problem.upper.size() && (problem.lower.array() > problem.upper.array()).any()) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    const StandardForm sf = to_standard_form(problem);
    Tableau tab(sf, options);

    // Phase one: drive the artificials to zero.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.ncols());
    phase1.tail(tab.ncols() - sf.n_struct - sf.n_slack).setOnes();
    tab.run(phase1, true);
    if (tab.objective_value() > 1e-9 * tab.phase_one_scale()) {
        sol.status = LpStatus::Infeasible;
        sol.iterations = tab.iterations();
        return sol;
    }
    tab.expel_artificials();

    const double cscale = std::max(1e-300, sf.cost.cwiseAbs().maxCoeff());
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tab.ncols());
    phase2.head(sf.n_struct) = sf.cost / (sf.cost.size() ? cscale : 1.0);
    if (!tab.run(phase2, false)) {
        sol.status = LpStatus::Unbounded;
        sol.iterations = tab.iterations();
        return sol;
    }
    sol.iterations = tab.iterations();
    sol.used_bland = tab.used_bland();

    // Recover primal and dual values from the final basis on unscaled data.
    const Eigen::Index m = sf.m;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(tab.ncols());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (m > 0) {
        Eigen::MatrixXd basis(m, m);
        Eigen::VectorXd cb(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const int col = tab.basis()[static_cast<std::size_t>(i)];
            basis.col(i) = std_column(sf, tab, col);
            cb(i) = col < sf.n_struct ? sf.cost(col) : 0.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        Eigen::VectorXd xb;
        if (lu.isInvertible()) {
            xb = lu.solve(sf.rhs);
            y = lu.transpose().solve(cb);
        } else {
            // Redundant rows left a singular basis: keep tableau values, least-squares duals.
            xb.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) xb(i) = tab.rhs(i);
            y = basis.transpose().completeOrthogonalDecomposition().solve(cb);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            const double v = xb(i);
            x(tab.basis()[static_cast<std::size_t>(i)]) = v < 0 && v > -1e-9 * (1.0 + sf.rhs.cwiseAbs().maxCoeff()) ? 0.0 : v;
        }
    }

    for (Eigen::Index j = 0; j < n; ++j) {
        const VarMap& v = sf.vars[static_cast<std::size_t>(j)];
        double z = v.offset + v.coef * x(v.col);
        if (v.neg_col >= 0) z -= x(v.neg_col);
        sol.z(j) = z;
    }
    // Undo row flips; duals of upper-bound rows are folded into the reduced costs.
    const Eigen::Index m1 = sf.m_ineq_orig;
    const Eigen::Index mb = m - m1 - sf.m_eq;
    for (Eigen::Index i = 0; i < m1; ++i) sol.ineq_duals(i) = y(i) * sf.flip[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < sf.m_eq; ++i)
        sol.eq_duals(i) = y(m1 + mb + i) * sf.flip[static_cast<std::size_t>(m1 + mb + i)];
    sol.reduced_costs = problem.c;
    if (m1) sol.reduced_costs -= problem.a_ineq.transpose() * sol.ineq_duals;
    if (sf.m_eq) sol.reduced_costs -= problem.a_eq.transpose() * sol.eq_duals;
    sol.objective = problem.c.dot(sol.z);
    sol.status = LpStatus::Optimal;
    return sol;
}

LpResiduals lp_residuals(const LpProblem& p, const LpSolution& s) {
    LpResiduals r;
    const Eigen::Index n = p.num_vars();
    const Eigen::VectorXd lower = p.lower.size() ? p.lower : Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd upper = p.upper.size() ? p.upper : Eigen::VectorXd::Constant(n, kInf);
    const double bscale = 1.0 + std::max(p.b_ineq.size() ? p.b_ineq.cwiseAbs().maxCoeff() : 0.0,
                                         p.b_eq.size() ? p.b_eq.cwiseAbs().maxCoeff() : 0.0);
    const double cscale = 1.0 + (n ? p.c.cwiseAbs().maxCoeff() : 0.0);

    for (Eigen::Index i = 0; i < p.a_ineq.rows(); ++i) {
        const double slack = p.b_ineq(i) - p.a_ineq.row(i).dot(s.z);
        r.primal = std::max(r.primal, -slack / bscale);
        r.dual = std::max(r.dual, s.ineq_duals(i) / cscale);
        r.complementarity = std::max(r.complementarity, std::abs(s.ineq_duals(i) * slack) / (bscale * cscale));
    }
    for (Eigen::Index i = 0; i < p.a_eq.rows(); ++i)
        r.primal = std::max(r.primal, std::abs(p.b_eq(i) - p.a_eq.row(i).dot(s.z)) / bscale);

    double dual_obj = 0.0;
    if (p.b_ineq.size()) dual_obj += p.b_ineq.dot(s.ineq_duals);
    if (p.b_eq.size()) dual_obj += p.b_eq.dot(s.eq_duals);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double rc = s.reduced_costs(j);
        r.primal = std::max({r.primal, (lower(j) - s.z(j)) / bscale, (s.z(j) - upper(j)) / bscale});
        if (rc > 0) {
            if (!std::isfinite(lower(j))) {
                r.dual = std::max(r.dual, rc / cscale);
            } else {
                dual_obj += rc * lower(j);
                r.complementarity = std::max(r.complementarity, std::abs(rc * (s.z(j) - lower(j))) / (bscale * cscale));
            }
        } else if (rc < 0) {
            if (!std::isfinite(upper(j))) {
                r.dual = std::max(r.dual, -rc / cscale);
            } else {
                dual_obj += rc * upper(j);
                r.complementarity = std::max(r.complementarity, std::abs(rc * (upper(j) - s.z(j))) / (bscale * cscale));
            }
        }
    }
    r.dual_objective = dual_obj;
    r.gap = std::abs(s.objective - dual_obj) / std::max(1.0, std::abs(s.objective));
    return r;
}

}  // namespace d2d
