#include "tkgrules/examples.hpp"

#include <algorithm>
#include <stdexcept>

namespace tkgr {

void ExampleSet::add(Timestamp min_delta, std::int64_t window_count, bool label) {
    auto& bucket = buckets_[{min_delta, window_count}];
    ++bucket.count;
    ++size_;
    if (label) {
        ++bucket.positives;
        ++positives_;
    }
}

std::map<Timestamp, ExampleBucket> ExampleSet::by_min_delta() const {
    std::map<Timestamp, ExampleBucket> out;
    for (const auto& [key, bucket] : buckets_) {
        auto& b = out[key.first];
        b.count += bucket.count;
        b.positives += bucket.positives;
    }
    return out;
}

ExampleSet collect_examples(const TemporalIndex& index, const Rule& rule, Timestamp window) {
    if (!rule.fitted()) throw std::invalid_argument("collect_examples: rule has a static confidence");
    ExampleSet examples;
    auto heads = index.facts(rule.head);
    std::vector<EntityId> true_objects;
    std::size_t i = 0;
    while (i < heads.size()) {
        // One group per (t, c) with exists z h(c, z, t); objects arrive sorted.
        const Timestamp t = heads[i].timestamp;
        const EntityId c = heads[i].subject;
        true_objects.clear();
        for (; i < heads.size() && heads[i].timestamp == t && heads[i].subject == c; ++i) {
            true_objects.push_back(heads[i].object);
        }
        if (rule.kind == RuleKind::Xy) {
            for (EntityId d : index.objects(rule.body, c)) {
                auto feats = index.features(rule.body, c, d, t, window);
                if (!feats) continue;
                const bool label = std::binary_search(true_objects.begin(), true_objects.end(), d);
                examples.add(feats->min_delta, feats->window_count, label);
            }
        } else {
            auto feats = index.features(rule.body, c, rule.body_constant, t, window);
            if (!feats) continue;
            const bool label = std::binary_search(true_objects.begin(), true_objects.end(), rule.head_constant);
            examples.add(feats->min_delta, feats->window_count, label);
        }
    }
    return examples;
}

FitTargets transform_observed(const ExampleSet& examples, double smoothing) {
    FitTargets out;
    auto mean = [smoothing](const ExampleBucket& b) {
        return static_cast<double>(b.positives) / (static_cast<double>(b.count) + smoothing);
    };
    for (const auto& [min_delta, bucket] : examples.by_min_delta()) {
        if (bucket.count == 0) continue;
        out.recency.push_back({min_delta, mean(bucket), static_cast<double>(bucket.count)});
    }
    for (const auto& [key, bucket] : examples.buckets()) {
        if (bucket.count == 0) continue;
        out.frequency.push_back({key.first, key.second, mean(bucket), static_cast<double>(bucket.count)});
    }
    out.overall = examples.empty() ? 0.0 : mean({examples.size(), examples.positives()});
    return out;
}

}  // namespace tkgr
