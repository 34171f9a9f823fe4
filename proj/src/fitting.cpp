#include "tkgrules/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tkgrules/least_squares.hpp"

namespace tkgr {

namespace {

using Vec3 = Eigen::Vector3d;
using Jac3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

double recency_sse(std::span<const RecencyTarget> targets, double alpha, double lambda, double phi) {
    ConfidenceModel m;
    m.alpha = alpha;
    m.lambda = lambda;
    m.phi = phi;
    double sse = 0.0;
    for (const auto& t : targets) {
        const double e = m.recency(t.min_delta) - t.target;
        sse += t.weight * e * e;
    }
    return sse;
}

// Weighted linear least squares of targets on (q, 1/m); returns nullopt when
// the design is rank deficient.
std::optional<Eigen::Vector2d> linear_fit(std::span<const FrequencyTarget> targets, std::span<const double> residual,
                                          std::span<const char> use, double window) {
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    std::size_t n = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!use[i]) continue;
        const Eigen::Vector2d x(static_cast<double>(targets[i].window_count) / window,
                                1.0 / static_cast<double>(targets[i].min_delta));
        A += targets[i].weight * x * x.transpose();
        b += targets[i].weight * residual[i] * x;
        ++n;
    }
    if (n < 2) return std::nullopt;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(A);
    if (lu.rank() < 2) return std::nullopt;
    return lu.solve(b);
}

}  // namespace

RecencyFit fit_recency(std::span<const RecencyTarget> targets, double fallback_level) {
    RecencyFit flat;
    flat.alpha = std::clamp(fallback_level, 0.0, FitBounds::alpha_max);
    flat.fallback = true;
    flat.sse = recency_sse(targets, flat.alpha, 0.0, 0.0);
    if (targets.empty()) return flat;

    auto model = [&](const Vec3& x, Eigen::VectorXd& r, Jac3& J) {
        const double alpha = x[0], lambda = x[1], phi = x[2];
        r.resize(static_cast<Eigen::Index>(targets.size()));
        J.resize(static_cast<Eigen::Index>(targets.size()), 3);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& t = targets[i];
            const double sw = std::sqrt(t.weight);
            const double k = static_cast<double>(t.min_delta - 1);
            const double decay = std::exp2(-lambda * k);
            const double f = alpha / (1.0 + phi) * (decay + phi);
            const auto row = static_cast<Eigen::Index>(i);
            r[row] = sw * (f - t.target);
            J(row, 0) = sw * (decay + phi) / (1.0 + phi);
            J(row, 1) = sw * alpha / (1.0 + phi) * decay * (-std::log(2.0) * k);
            J(row, 2) = sw * alpha * (1.0 - decay) / ((1.0 + phi) * (1.0 + phi));
        }
    };

    const Vec3 lower(0.0, 0.0, 0.0);
    const Vec3 upper(FitBounds::alpha_max, FitBounds::lambda_max, FitBounds::phi_max);
    const double alpha0 = std::clamp(targets.front().target, 0.0, FitBounds::alpha_max);

    RecencyFit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (double lambda0 : {0.1, 1.0}) {
        for (double phi0 : {0.0, 0.2}) {
            auto res = minimize_box<3>(model, Vec3(alpha0, lambda0, phi0), lower, upper);
            if (res.x.allFinite() && std::isfinite(res.sse) && res.sse < best.sse) {
                best.alpha = res.x[0];
                best.lambda = res.x[1];
                best.phi = res.x[2];
                best.sse = res.sse;
            }
        }
    }
    if (!std::isfinite(best.sse) || best.sse > flat.sse) return flat;
    return best;
}

double frequency_sse(std::span<const FrequencyTarget> targets, const ConfidenceModel& model) {
    double sse = 0.0;
    for (const auto& t : targets) {
        const double e = model.recency(t.min_delta) + model.frequency(t.min_delta, t.window_count) - t.target;
        sse += t.weight * e * e;
    }
    return sse;
}

constexpr std::size_t kGridStarts = 4;
constexpr double kLeak = 0.05;

FrequencyFit fit_frequency(std::span<const FrequencyTarget> targets, const ConfidenceModel& recency) {
    ConfidenceModel base = recency;
    base.rho = base.kappa = base.gamma = 0.0;
    FrequencyFit zero;
    zero.fallback = true;
    zero.sse = frequency_sse(targets, base);
    if (targets.empty()) return zero;

    const double window = static_cast<double>(base.window);
    // Residual of the target after f; g is fitted against it.
    std::vector<double> residual(targets.size());
    double max_abs = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        residual[i] = targets[i].target - base.recency(targets[i].min_delta);
        max_abs = std::max(max_abs, std::abs(residual[i]));
    }

    // With leak > 0 a point clipped on the side away from its target keeps a
    // slope of `leak`, so (rho, kappa) still move it back.
    auto leaky_model = [&](double leak) {
        return [&, leak](const Vec3& x, Eigen::VectorXd& r, Jac3& J) {
            const double rho = x[0], kappa = x[1], gamma = x[2];
            r.resize(static_cast<Eigen::Index>(targets.size()));
            J.resize(static_cast<Eigen::Index>(targets.size()), 3);
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const auto& t = targets[i];
                const double sw = std::sqrt(t.weight);
                const double q = static_cast<double>(t.window_count) / window;
                const double inv_m = 1.0 / static_cast<double>(t.min_delta);
                const double u = rho * q + kappa * inv_m;
                const auto row = static_cast<Eigen::Index>(i);
                if (u > gamma) {
                    const double slope = residual[i] < gamma ? leak : 0.0;
                    r[row] = sw * (gamma + slope * (u - gamma) - residual[i]);
                    J.row(row) << sw * slope * q, sw * slope * inv_m, sw * (1.0 - slope);
                } else if (u < -gamma) {
                    const double slope = residual[i] > -gamma ? leak : 0.0;
                    r[row] = sw * (-gamma + slope * (u + gamma) - residual[i]);
                    J.row(row) << sw * slope * q, sw * slope * inv_m, -sw * (1.0 - slope);
                } else {
                    r[row] = sw * (u - residual[i]);
                    J.row(row) << sw * q, sw * inv_m, 0.0;
                }
            }
        };
    };
    const auto model = leaky_model(0.0);
    const auto leaky = leaky_model(kLeak);

    const Vec3 lower(-FitBounds::rho_max, -FitBounds::kappa_max, 0.0);
    const Vec3 upper(FitBounds::rho_max, FitBounds::kappa_max, FitBounds::gamma_max);

    // Starts: (a) gamma at the largest residual with (rho, kappa) fitted on the
    // points strictly inside it, (b) (rho, kappa) fitted on everything with the
    // widest clip, (c) the few points of a fixed (rho, kappa) grid at the
    // largest residual with the lowest initial error.
    std::vector<Vec3> starts;
    const double gamma0 = std::min(max_abs, FitBounds::gamma_max);
    std::vector<char> inside(targets.size()), all(targets.size(), 1);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        inside[i] = std::abs(residual[i]) < gamma0 * (1.0 - 1e-9) ? 1 : 0;
    }
    if (auto lin = linear_fit(targets, residual, inside, window)) starts.emplace_back((*lin)[0], (*lin)[1], gamma0);
    if (auto lin = linear_fit(targets, residual, all, window)) {
        starts.emplace_back((*lin)[0], (*lin)[1], FitBounds::gamma_max);
    }
    std::vector<std::pair<double, Vec3>> grid;
    Eigen::VectorXd r;
    Jac3 J;
    for (double rho : {0.0, -10.0, -3.0, -1.0, 1.0, 3.0, 10.0}) {
        for (double kappa : {0.0, -1.0, -0.3, 0.3, 1.0}) {
            const Vec3 x(rho, kappa, gamma0);
            model(x, r, J);
            grid.emplace_back(r.squaredNorm(), x);
        }
    }
    std::stable_sort(grid.begin(), grid.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(kGridStarts, grid.size()); ++i) starts.push_back(grid[i].second);

    FrequencyFit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        const auto pre = minimize_box<3>(leaky, start, lower, upper);
        auto res = minimize_box<3>(model, pre.x.allFinite() ? pre.x : start, lower, upper);
        if (!res.x.allFinite() || !std::isfinite(res.sse)) continue;
        if (res.sse < best.sse) {
            best.rho = res.x[0];
            best.kappa = res.x[1];
            best.gamma = res.x[2];
            best.sse = res.sse;
        }
    }
    if (!std::isfinite(best.sse) || best.sse > zero.sse) return zero;
    return best;
}

}  // namespace tkgr
