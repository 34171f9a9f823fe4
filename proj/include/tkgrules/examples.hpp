#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr {

struct ExampleBucket {
    std::uint64_t count = 0;
    std::uint64_t positives = 0;

    friend bool operator==(const ExampleBucket&, const ExampleBucket&) = default;
};

// Training examples of one rule, kept as counts per (min(Delta), |Delta_W|)
// feature pair. Two example multisets are equal iff their buckets are.
class ExampleSet {
public:
    using Key = std::pair<Timestamp, std::int64_t>;

    void add(Timestamp min_delta, std::int64_t window_count, bool label);

    const std::map<Key, ExampleBucket>& buckets() const { return buckets_; }
    // Coarser view keyed by min(Delta) only.
    std::map<Timestamp, ExampleBucket> by_min_delta() const;

    std::uint64_t size() const { return size_; }
    std::uint64_t positives() const { return positives_; }
    bool empty() const { return size_ == 0; }

    friend bool operator==(const ExampleSet&, const ExampleSet&) = default;

private:
    std::map<Key, ExampleBucket> buckets_;
    std::uint64_t size_ = 0;
    std::uint64_t positives_ = 0;
};

// For every timestamp t of the index and every subject c with some h(c, z, t):
// each candidate the rule body predicts from facts strictly before t yields an
// example labelled by whether the prediction h(c, d, t) is in the graph.
// Candidates with no earlier body grounding produce no example.
// Precondition: rule.fitted().
ExampleSet collect_examples(const TemporalIndex& index, const Rule& rule, Timestamp window);

struct RecencyTarget {
    Timestamp min_delta = 0;
    double target = 0.0;
    double weight = 0.0;
};

struct FrequencyTarget {
    Timestamp min_delta = 0;
    std::int64_t window_count = 0;
    double target = 0.0;
    double weight = 0.0;
};

struct FitTargets {
    std::vector<RecencyTarget> recency;      // ascending min(Delta)
    std::vector<FrequencyTarget> frequency;  // ascending (min(Delta), |Delta_W|)
    double overall = 0.0;                    // positives / (size + smoothing)
};

// Smoothed bucket means positives / (count + smoothing), weighted by count.
FitTargets transform_observed(const ExampleSet& examples, double smoothing);

}  // namespace tkgr
