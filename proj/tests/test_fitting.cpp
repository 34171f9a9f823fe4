#include <cmath>
#include <random>

#include "doctest.h"
#include "tkgrules/fitting.hpp"
#include "tkgrules/learner.hpp"
#include "tkgrules/least_squares.hpp"

using namespace tkgr;

namespace {

std::vector<RecencyTarget> recency_targets(const ConfidenceModel& m, Timestamp max_delta = 50) {
    std::vector<RecencyTarget> out;
    for (Timestamp d = 1; d <= max_delta; ++d) out.push_back({d, m.recency(d), 1.0});
    return out;
}

// Feasible (min(Delta), |Delta_W|) pairs: at most W - minDelta + 1 distances fit in the window.
std::vector<FrequencyTarget> frequency_targets(const ConfidenceModel& m) {
    std::vector<FrequencyTarget> out;
    for (Timestamp d = 1; d <= 50; ++d) {
        for (std::int64_t k = 1; k <= m.window - d + 1; ++k) {
            out.push_back({d, k, m.recency(d) + m.frequency(d, k), 1.0});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("least squares: box-constrained quadratic") {
    // Minimize (x0 - 2)^2 + (x1 + 1)^2 + (x2 - 0.5)^2 on [0,1]^3.
    auto model = [](const Eigen::Vector3d& x, Eigen::VectorXd& r, Eigen::Matrix<double, Eigen::Dynamic, 3>& J) {
        r.resize(3);
        J.setZero(3, 3);
        r << x[0] - 2.0, x[1] + 1.0, x[2] - 0.5;
        J(0, 0) = J(1, 1) = J(2, 2) = 1.0;
    };
    auto res = minimize_box<3>(model, Eigen::Vector3d(0.5, 0.5, 0.5), Eigen::Vector3d::Zero(),
                               Eigen::Vector3d::Ones());
    CHECK(res.x[0] == doctest::Approx(1.0));
    CHECK(res.x[1] == doctest::Approx(0.0));
    CHECK(res.x[2] == doctest::Approx(0.5));
    CHECK(res.sse == doctest::Approx(2.0));
}

TEST_CASE("fit_recency: noiseless recovery") {
    ConfidenceModel truth;
    truth.alpha = 0.44;
    truth.lambda = 0.3;
    truth.phi = 0.1;
    auto fit = fit_recency(recency_targets(truth), 0.1);
    CHECK_FALSE(fit.fallback);
    CHECK(std::abs(fit.alpha - 0.44) <= 1e-3);
    CHECK(std::abs(fit.lambda - 0.3) <= 1e-3);
    CHECK(std::abs(fit.phi - 0.1) <= 1e-3);
    CHECK(fit.sse < 1e-20);
}

TEST_CASE("fit_recency: flat and single-bucket cases") {
    std::vector<RecencyTarget> flat;
    for (Timestamp d = 1; d <= 20; ++d) flat.push_back({d, 0.3, 2.0});
    auto f = fit_recency(flat, 0.3);
    for (Timestamp d : {1, 7, 20}) {
        ConfidenceModel m;
        m.alpha = f.alpha;
        m.lambda = f.lambda;
        m.phi = f.phi;
        CHECK(m.recency(d) == doctest::Approx(0.3));
    }
    CHECK(f.sse < 1e-20);

    auto one = fit_recency(std::vector<RecencyTarget>{{1, 0.44, 3.0}}, 0.2);
    CHECK(one.alpha == doctest::Approx(0.44));

    auto none = fit_recency({}, 0.25);
    CHECK(none.fallback);
    CHECK(none.alpha == 0.25);
    CHECK(none.lambda == 0.0);
}

TEST_CASE("fit_frequency: zero residuals keep g at zero") {
    ConfidenceModel base;
    base.alpha = 0.5;
    base.lambda = 0.2;
    base.phi = 0.3;
    auto fit = fit_frequency(frequency_targets(base), base);
    CHECK(fit.sse == doctest::Approx(0.0));
    CHECK(std::abs(fit.rho) < 1e-9);
    CHECK(std::abs(fit.kappa) < 1e-9);
}

TEST_CASE("fit_frequency: noiseless recovery with an active clip") {
    ConfidenceModel truth;
    truth.alpha = 0.5;
    truth.lambda = 0.2;
    truth.phi = 0.3;
    truth.rho = 1.5;
    truth.kappa = 0.02;
    truth.gamma = 0.05;
    auto fit = fit_frequency(frequency_targets(truth), truth);
    CHECK(std::abs(fit.rho - 1.5) <= 1e-3);
    CHECK(std::abs(fit.kappa - 0.02) <= 1e-3);
    CHECK(std::abs(fit.gamma - 0.05) <= 1e-3);
}

TEST_CASE("fit_frequency: large residuals saturate at the clip") {
    ConfidenceModel base;
    base.alpha = 0.2;
    std::vector<FrequencyTarget> targets;
    for (Timestamp d = 1; d <= 10; ++d) {
        for (std::int64_t k = 1; k <= 10; ++k) targets.push_back({d, k, 0.2 + 5.0, 1.0});
    }
    auto fit = fit_frequency(targets, base);
    CHECK(fit.gamma == doctest::Approx(1.0));
    ConfidenceModel m = base;
    m.rho = fit.rho;
    m.kappa = fit.kappa;
    m.gamma = fit.gamma;
    // Every target sits above the reachable range, so all bounds are active.
    CHECK(fit.rho == doctest::Approx(FitBounds::rho_max));
    CHECK(fit.kappa == doctest::Approx(FitBounds::kappa_max));
    for (const auto& t : targets) {
        const double u = 10.0 * static_cast<double>(t.window_count) / 50.0 + 1.0 / static_cast<double>(t.min_delta);
        CHECK(m.frequency(t.min_delta, t.window_count) == doctest::Approx(std::min(1.0, u)));
    }
}

TEST_CASE("fit: repeated runs are bit-identical") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<RecencyTarget> noisy;
    for (Timestamp d = 1; d <= 30; ++d) noisy.push_back({d, 0.3 * std::exp2(-0.2 * (d - 1)) + 0.05 * unit(rng), 5.0});
    auto a = fit_recency(noisy, 0.1);
    auto b = fit_recency(noisy, 0.1);
    CHECK(a.alpha == b.alpha);
    CHECK(a.lambda == b.lambda);
    CHECK(a.phi == b.phi);
}

TEST_CASE("fit_confidence: variants") {
    ExampleSet ex;
    for (Timestamp d = 1; d <= 10; ++d) {
        for (int i = 0; i < 40; ++i) ex.add(d, 1 + i % 3, i < 40 / static_cast<int>(d));
    }
    LearnOptions opts;
    opts.variant = ConfVariant::Static;
    auto s = fit_confidence(ex, opts);
    CHECK(s.alpha == doctest::Approx(static_cast<double>(ex.positives()) / (ex.size() + 10.0)));
    CHECK(s.lambda == 0.0);
    CHECK(s.gamma == 0.0);

    opts.variant = ConfVariant::FOnly;
    auto f = fit_confidence(ex, opts);
    CHECK(f.lambda > 0.0);
    CHECK(f.gamma == 0.0);

    opts.variant = ConfVariant::GOnly;
    auto g = fit_confidence(ex, opts);
    CHECK(g.alpha == 0.0);
    CHECK(g.gamma > 0.0);

    opts.variant = ConfVariant::FPlusG;
    auto fg = fit_confidence(ex, opts);
    CHECK(fg.alpha == f.alpha);
    CHECK(fg.lambda == f.lambda);

    CHECK(conf_variant_from_string("g-only") == ConfVariant::GOnly);
    CHECK_THROWS(conf_variant_from_string("h"));
}
