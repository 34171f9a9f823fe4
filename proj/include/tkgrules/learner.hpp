#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>

#include "tkgrules/examples.hpp"
#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr {

class Vocabulary;

// Which parts of the confidence function are learned for xy- and c-rules.
enum class ConfVariant {
    Static,  // alpha = smoothed static confidence, everything else zero
    FOnly,   // step 1 only, g = 0
    GOnly,   // f = 0, g fitted directly against the targets
    FPlusG,  // step 1 then step 2
};

std::string_view to_string(ConfVariant variant);
ConfVariant conf_variant_from_string(std::string_view name);

struct LearnOptions {
    Timestamp window = 50;
    double smoothing = 10.0;
    std::size_t top_constants = 100;
    std::size_t min_support = 5;
    double floor = 0.001;
    ConfVariant variant = ConfVariant::FPlusG;
    unsigned threads = 0;
    bool xy_rules = true;
    bool c_rules = true;
    bool z_rules = true;
    bool f_rules = true;
};

struct LearnStats {
    std::size_t xy = 0;
    std::size_t c = 0;
    std::size_t z = 0;
    std::size_t f = 0;
    std::size_t candidates = 0;
    std::size_t dropped = 0;
    std::size_t fallbacks = 0;
};

// Fits the confidence model of one xy- or c-rule from its examples.
ConfidenceModel fit_confidence(const ExampleSet& examples, const LearnOptions& options, bool* fallback = nullptr);

// Mines, fits and filters all rule types over a training-only index. Rules
// come back in canonical key order; the result does not depend on the number
// of threads.
RuleSet learn_rules(const TemporalIndex& train, const LearnOptions& options, LearnStats* stats = nullptr);

// Re-collects examples for every fitted rule and writes, per rule, the
// min(Delta) table and the (min(Delta), |Delta_W|/W) residual table as
// tab-separated text.
void write_fit_diagnostics(std::ostream& out, const TemporalIndex& train, const RuleSet& rules,
                           const Vocabulary* vocab = nullptr);

}  // namespace tkgr
