#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr {

// Candidate xy-rules (h, b): pairs where at least min_support head facts
// h(x, y, t) have a body grounding b(x, y, t') with t' < t. `positives` holds
// that count. Output is sorted by (head, body).
std::vector<Rule> enumerate_xy_rules(const TemporalIndex& index, std::size_t min_support, unsigned threads = 1);

// Top-k entities by occurrence count, ties by ascending id.
std::vector<EntityId> frequent_constants(const TemporalIndex& index, std::size_t k);

// Candidate c-rules (h, d, b, d') with d and d' drawn from `constants`: at
// least min_support head facts h(x, d, t) preceded by b(x, d', t') with
// t - window <= t' < t. Sorted by rule key.
std::vector<Rule> enumerate_c_rules(const TemporalIndex& index, std::span<const EntityId> constants,
                                    std::size_t min_support, Timestamp window, unsigned threads = 1);

// conf(p, d) = |{(x,t) : p(x,d,t)}| / (|{(x,t) : exists z p(x,z,t)}| + smoothing)
std::vector<Rule> compute_z_confidences(const TemporalIndex& index, double smoothing);

// conf(p, c, d) = |{t : p(c,d,t)}| / (|{t : exists z p(c,z,t)}| + smoothing)
std::vector<Rule> compute_f_confidences(const TemporalIndex& index, double smoothing);

}  // namespace tkgr
