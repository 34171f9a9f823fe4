#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tkgr {

struct LeastSquaresOptions {
    int max_iterations = 500;
    double initial_damping = 1e-3;
    // Stop when an accepted step reduces SSE by less than this fraction.
    double relative_tolerance = 1e-14;
    double absolute_tolerance = 1e-30;
};

template <int N>
struct LeastSquaresResult {
    Eigen::Matrix<double, N, 1> x;
    double sse = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt on a box [lower, upper]. Iterates are projected onto the
// box; variables sitting on a bound whose gradient points outward are held
// fixed for that step.
//
// `model(x, residuals, jacobian)` fills the (already weighted) residual vector
// and its Jacobian, both with one row per observation.
template <int N, typename Model>
LeastSquaresResult<N> minimize_box(Model&& model, Eigen::Matrix<double, N, 1> x0,
                                   const Eigen::Matrix<double, N, 1>& lower,
                                   const Eigen::Matrix<double, N, 1>& upper,
                                   const LeastSquaresOptions& options = {}) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    using Jac = Eigen::Matrix<double, Eigen::Dynamic, N>;

    LeastSquaresResult<N> result;
    Vec x = x0.cwiseMax(lower).cwiseMin(upper);
    Eigen::VectorXd r;
    Jac J;
    model(x, r, J);
    double sse = r.squaredNorm();
    if (!std::isfinite(sse)) {
        result.x = x;
        return result;
    }

    double mu = options.initial_damping;
    Eigen::VectorXd r_trial;
    Jac J_trial;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (sse <= options.absolute_tolerance) {
            result.converged = true;
            break;
        }
        const Vec g = J.transpose() * r;
        const Mat H = J.transpose() * J;

        Eigen::Array<bool, N, 1> free;
        for (int i = 0; i < N; ++i) {
            const bool pinned_low = x[i] <= lower[i] && g[i] > 0.0;
            const bool pinned_high = x[i] >= upper[i] && g[i] < 0.0;
            free[i] = !(pinned_low || pinned_high);
        }
        double grad_norm = 0.0;
        for (int i = 0; i < N; ++i) {
            if (free[i]) grad_norm = std::max(grad_norm, std::abs(g[i]));
        }
        if (grad_norm <= 1e-300) {
            result.converged = true;
            break;
        }

        bool accepted = false;
        while (mu < 1e20) {
            Mat A = H;
            Vec b = -g;
            for (int i = 0; i < N; ++i) {
                if (!free[i]) {
                    A.row(i).setZero();
                    A.col(i).setZero();
                    A(i, i) = 1.0;
                    b[i] = 0.0;
                } else {
                    A(i, i) += mu * std::max(H(i, i), 1e-12);
                }
            }
            const Vec step = A.ldlt().solve(b);
            const Vec x_trial = (x + step).cwiseMax(lower).cwiseMin(upper);
            if (!step.allFinite() || x_trial == x) {
                mu *= 10.0;
                if (x_trial == x && step.allFinite()) break;
                continue;
            }
            model(x_trial, r_trial, J_trial);
            const double sse_trial = r_trial.squaredNorm();
            if (std::isfinite(sse_trial) && sse_trial < sse) {
                const double reduction = sse - sse_trial;
                x = x_trial;
                r.swap(r_trial);
                J.swap(J_trial);
                sse = sse_trial;
                mu = std::max(mu * 0.3, 1e-15);
                accepted = true;
                if (reduction <= options.relative_tolerance * sse + options.absolute_tolerance &&
                    step.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) {
                    result.converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if (!accepted || result.converged) {
            result.converged = result.converged || !accepted;
            break;
        }
    }
    result.x = x;
    result.sse = sse;
    result.iterations = it;
    return result;
}

}  // namespace tkgr
