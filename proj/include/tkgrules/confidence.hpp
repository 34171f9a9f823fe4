#pragma once

#include <cstdint>

#include "tkgrules/temporal_index.hpp"
#include "tkgrules/types.hpp"

namespace tkgr {

// Parameterized temporal confidence of an xy- or c-rule:
//
//   f = alpha / (1 + phi) * (2^(-lambda * (minDelta - 1)) + phi)
//   g = clip(rho * |Delta_W| / W + kappa / minDelta, -gamma, gamma)
//   conf = clamp(f + g, 0, 1)
//
// alpha is the value of f at minDelta = 1, lambda the decay rate, phi sets the
// asymptote alpha * phi / (1 + phi). gamma bounds the frequency term.
struct ConfidenceModel {
    double alpha = 0.0;
    double lambda = 0.0;
    double phi = 0.0;
    double rho = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    Timestamp window = 50;

    double recency(Timestamp min_delta) const;
    double frequency(Timestamp min_delta, std::int64_t window_count) const;
    double confidence(const DeltaFeatures& features) const;
    // Precondition: !deltas.empty().
    double confidence(const DeltaSet& deltas) const;

    // Largest value conf can take: min(1, alpha + gamma).
    double peak() const;

    friend bool operator==(const ConfidenceModel&, const ConfidenceModel&) = default;
};

}  // namespace tkgr
