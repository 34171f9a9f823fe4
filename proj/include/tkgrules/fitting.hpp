#pragma once

#include <span>

#include "tkgrules/confidence.hpp"
#include "tkgrules/examples.hpp"

namespace tkgr {

// Parameter boxes for the two fitting steps.
struct FitBounds {
    static constexpr double alpha_max = 1.0;
    static constexpr double lambda_max = 16.0;
    static constexpr double phi_max = 10.0;
    static constexpr double rho_max = 10.0;
    static constexpr double kappa_max = 1.0;
    static constexpr double gamma_max = 1.0;
};

struct RecencyFit {
    double alpha = 0.0;
    double lambda = 0.0;
    double phi = 0.0;
    double sse = 0.0;
    bool fallback = false;
};

struct FrequencyFit {
    double rho = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double sse = 0.0;
    bool fallback = false;
};

// Step 1: weighted least squares of f(min(Delta)) against the recency targets,
// ignoring g. Multi-start from alpha = target at the smallest min(Delta),
// lambda in {0.1, 1}, phi in {0, 0.2}. When no start beats the flat model
// alpha = fallback_level (or the fit is not finite) the flat model is returned
// with fallback set.
RecencyFit fit_recency(std::span<const RecencyTarget> targets, double fallback_level);

// Step 2: with alpha, lambda, phi (and window) taken from `recency`, weighted
// least squares of f + g against the frequency targets. Falls back to g = 0.
FrequencyFit fit_frequency(std::span<const FrequencyTarget> targets, const ConfidenceModel& recency);

// Weighted SSE of f + g of `model` over the frequency targets.
double frequency_sse(std::span<const FrequencyTarget> targets, const ConfidenceModel& model);

}  // namespace tkgr
