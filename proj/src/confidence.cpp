#include "tkgrules/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tkgr {

double ConfidenceModel::recency(Timestamp min_delta) const {
    const double decay = std::exp2(-lambda * static_cast<double>(min_delta - 1));
    return alpha / (1.0 + phi) * (decay + phi);
}

double ConfidenceModel::frequency(Timestamp min_delta, std::int64_t window_count) const {
    const double raw = rho * static_cast<double>(window_count) / static_cast<double>(window) +
                       kappa / static_cast<double>(min_delta);
    return std::min(std::max(raw, -gamma), gamma);
}

double ConfidenceModel::confidence(const DeltaFeatures& features) const {
    const double value = recency(features.min_delta) + frequency(features.min_delta, features.window_count);
    return std::clamp(value, 0.0, 1.0);
}

double ConfidenceModel::confidence(const DeltaSet& deltas) const {
    if (deltas.empty()) throw std::invalid_argument("confidence of an empty DeltaSet");
    return confidence(*deltas.features(window));
}

double ConfidenceModel::peak() const { return std::min(1.0, alpha + std::max(0.0, gamma)); }

}  // namespace tkgr
