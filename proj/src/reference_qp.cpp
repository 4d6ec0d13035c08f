#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "d2drobust/convex_solvers.hpp"
#include "d2drobust/errors.hpp"

namespace d2d {

// Primal active-set method. Each working-set entry pins one coordinate to 0 or to cap.
Eigen::VectorXd reference_qp(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& linear, double cap) {
    const Eigen::Index n = kernel.rows();
    if (n == 0 || kernel.cols() != n || linear.size() != n) throw NumericalFailure("reference_qp: bad dimensions");
    if (cap * static_cast<double>(n) < 1.0 - 1e-12) throw NumericalFailure("reference_qp: infeasible cap");

    enum State : char { Free, AtZero, AtCap };
    std::vector<State> state(static_cast<std::size_t>(n), Free);
    Eigen::VectorXd lambda = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const double tol = 1e-12;

    const long max_iter = 50 * n + 200;
    for (long iter = 0; iter < max_iter; ++iter) {
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (state[static_cast<std::size_t>(i)] == Free) free_idx.push_back(i);
        const auto nf = static_cast<Eigen::Index>(free_idx.size());

        Eigen::VectorXd target = lambda;
        double mu = 0.0;
        if (nf > 0) {
            // KKT of the equality-constrained subproblem in the free coordinates.
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
            Eigen::VectorXd rhs(nf + 1);
            double fixed_mass = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (state[static_cast<std::size_t>(i)] != Free) fixed_mass += lambda(i);
            for (Eigen::Index a = 0; a < nf; ++a) {
                const Eigen::Index i = free_idx[static_cast<std::size_t>(a)];
                double r = -linear(i);
                for (Eigen::Index j = 0; j < n; ++j)
                    if (state[static_cast<std::size_t>(j)] != Free) r -= 2.0 * kernel(i, j) * lambda(j);
                rhs(a) = r;
                for (Eigen::Index b = 0; b < nf; ++b) kkt(a, b) = 2.0 * kernel(i, free_idx[static_cast<std::size_t>(b)]);
                kkt(a, nf) = 1.0;
                kkt(nf, a) = 1.0;
            }
            rhs(nf) = 1.0 - fixed_mass;
            const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
            for (Eigen::Index a = 0; a < nf; ++a) target(free_idx[static_cast<std::size_t>(a)]) = sol(a);
            mu = sol(nf);
        }

        // Largest feasible step toward the subproblem solution.
        double alpha = 1.0;
        Eigen::Index blocking = -1;
        State block_state = Free;
        for (Eigen::Index i : free_idx) {
            const double d = target(i) - lambda(i);
            if (d < -tol && target(i) < 0.0) {
                const double a = lambda(i) / -d;
                if (a < alpha) {
                    alpha = a;
                    blocking = i;
                    block_state = AtZero;
                }
            } else if (d > tol && target(i) > cap) {
                const double a = (cap - lambda(i)) / d;
                if (a < alpha) {
                    alpha = a;
                    blocking = i;
                    block_state = AtCap;
                }
            }
        }
        lambda += alpha * (target - lambda);
        if (blocking >= 0) {
            lambda(blocking) = block_state == AtZero ? 0.0 : cap;
            state[static_cast<std::size_t>(blocking)] = block_state;
            continue;
        }

        // At the subproblem optimum: check bound multipliers.
        const Eigen::VectorXd grad = 2.0 * (kernel * lambda) + linear;
        if (nf == 0) {
            // All pinned: recover mu from the best-placed pinned coordinate.
            mu = -grad(0);
            double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                if (state[static_cast<std::size_t>(i)] == AtZero) lo = std::max(lo, -grad(i));
                else hi = std::min(hi, -grad(i));
            }
            mu = std::isfinite(lo) ? (std::isfinite(hi) ? 0.5 * (lo + hi) : lo) : hi;
        }
        Eigen::Index worst = -1;
        double worst_violation = 1e-10;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double nu = grad(i) + mu;
            double violation = 0.0;
            if (state[static_cast<std::size_t>(i)] == AtZero) violation = -nu;
            else if (state[static_cast<std::size_t>(i)] == AtCap) violation = nu;
            if (violation > worst_violation) {
                worst_violation = violation;
                worst = i;
            }
        }
        if (worst < 0) return lambda;
        state[static_cast<std::size_t>(worst)] = Free;
    }
    throw QpNotConverged("reference_qp exceeded its iteration cap");
}

}  // namespace d2d
