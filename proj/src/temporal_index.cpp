#include "tkgrules/temporal_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tkgr {

namespace {

std::uint64_t triple_key(RelationId p, EntityId s, EntityId o) {
    return (std::uint64_t{p} << 48) | (std::uint64_t{s} << 24) | std::uint64_t{o};
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 24) | std::uint64_t{b}; }

bool by_time_then_key(const Quadruple& a, const Quadruple& b) {
    return std::tie(a.timestamp, a.relation, a.subject, a.object) <
           std::tie(b.timestamp, b.relation, b.subject, b.object);
}

}  // namespace

Timestamp DeltaSet::min() const {
    if (distances_.empty()) throw std::logic_error("min() of an empty DeltaSet");
    return distances_.front();
}

std::int64_t DeltaSet::count_within(Timestamp window) const {
    return std::upper_bound(distances_.begin(), distances_.end(), window) - distances_.begin();
}

std::optional<DeltaFeatures> DeltaSet::features(Timestamp window) const {
    if (distances_.empty()) return std::nullopt;
    return DeltaFeatures{distances_.front(), count_within(window)};
}

TemporalIndex::TemporalIndex(std::size_t num_entities, std::size_t num_relations)
    : num_entities_(num_entities),
      num_relations_(num_relations),
      outgoing_(num_entities),
      facts_(num_relations),
      occurrences_(num_entities, 0) {
    if (num_entities >= (std::size_t{1} << 24) || num_relations >= (std::size_t{1} << 16)) {
        throw std::invalid_argument("index key space exceeded");
    }
}

TemporalIndex TemporalIndex::build(std::span<const Quadruple> quads, std::size_t num_entities,
                                   std::size_t num_relations) {
    TemporalIndex index(num_entities, num_relations);
    std::vector<Quadruple> sorted(quads.begin(), quads.end());
    for (const auto& q : sorted) index.check_ids(q);
    std::sort(sorted.begin(), sorted.end(), by_time_then_key);
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    auto begin = sorted.begin();
    while (begin != sorted.end()) {
        auto end = std::find_if(begin, sorted.end(), [t = begin->timestamp](const auto& q) { return q.timestamp != t; });
        index.insert_sorted_batch({begin, end});
        begin = end;
    }
    return index;
}

void TemporalIndex::check_ids(const Quadruple& q) const {
    if (q.subject >= num_entities_ || q.object >= num_entities_ || q.relation >= num_relations_) {
        throw std::invalid_argument("quadruple id out of range");
    }
    if (q.timestamp < 0) throw std::invalid_argument("negative timestamp");
}

void TemporalIndex::extend(std::span<const Quadruple> quads) {
    if (quads.empty()) return;
    const Timestamp t = quads.front().timestamp;
    for (const auto& q : quads) {
        check_ids(q);
        if (q.timestamp != t) throw std::invalid_argument("extend(): batch spans several timestamps");
    }
    if (!timestamps_.empty() && t <= timestamps_.back()) {
        throw std::invalid_argument("extend(): timestamp " + std::to_string(t) + " is not after indexed maximum " +
                                    std::to_string(timestamps_.back()));
    }
    std::vector<Quadruple> sorted(quads.begin(), quads.end());
    std::sort(sorted.begin(), sorted.end(), by_time_then_key);
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    insert_sorted_batch(sorted);
}

void TemporalIndex::insert_sorted_batch(std::span<const Quadruple> quads) {
    const Timestamp t = quads.front().timestamp;
    timestamps_.push_back(t);
    for (const auto& q : quads) {
        auto& times = key_times_[triple_key(q.relation, q.subject, q.object)];
        if (times.empty()) {
            objects_[pair_key(q.relation, q.subject)].push_back(q.object);
            pair_relations_[pair_key(q.subject, q.object)].push_back(q.relation);
            outgoing_[q.subject].emplace_back(q.relation, q.object);
        }
        times.push_back(t);
        facts_[q.relation].push_back({t, q.subject, q.object});
        ++occurrences_[q.subject];
        ++num_facts_;
    }
}

std::optional<Timestamp> TemporalIndex::min_timestamp() const {
    if (timestamps_.empty()) return std::nullopt;
    return timestamps_.front();
}

std::optional<Timestamp> TemporalIndex::max_timestamp() const {
    if (timestamps_.empty()) return std::nullopt;
    return timestamps_.back();
}

std::span<const Timestamp> TemporalIndex::timestamps(RelationId p, EntityId s, EntityId o) const {
    auto it = key_times_.find(triple_key(p, s, o));
    if (it == key_times_.end()) return {};
    if (probe_ && !it->second.empty()) probe_->on_read(it->second.back());
    return it->second;
}

bool TemporalIndex::contains(RelationId p, EntityId s, EntityId o, Timestamp t) const {
    auto it = key_times_.find(triple_key(p, s, o));
    if (it == key_times_.end()) return false;
    if (probe_) probe_->on_read(t);
    return std::binary_search(it->second.begin(), it->second.end(), t);
}

DeltaSet TemporalIndex::deltas(RelationId p, EntityId s, EntityId o, Timestamp t_star,
                               std::optional<Timestamp> cap) const {
    auto it = key_times_.find(triple_key(p, s, o));
    if (it == key_times_.end()) return {};
    const auto& times = it->second;
    auto end = std::lower_bound(times.begin(), times.end(), t_star);
    if (end == times.begin()) return {};
    if (probe_) probe_->on_read(*(end - 1));
    auto begin = times.begin();
    if (cap) begin = std::min(end - 1, std::lower_bound(times.begin(), end, t_star - *cap));
    std::vector<Timestamp> distances;
    distances.reserve(static_cast<std::size_t>(end - begin));
    for (auto i = end; i != begin;) distances.push_back(t_star - *--i);
    return DeltaSet(std::move(distances));
}

std::optional<DeltaFeatures> TemporalIndex::features(RelationId p, EntityId s, EntityId o, Timestamp t_star,
                                                     Timestamp window) const {
    auto it = key_times_.find(triple_key(p, s, o));
    if (it == key_times_.end()) return std::nullopt;
    const auto& times = it->second;
    auto end = std::lower_bound(times.begin(), times.end(), t_star);
    if (end == times.begin()) return std::nullopt;
    if (probe_) probe_->on_read(*(end - 1));
    auto first_in_window = std::lower_bound(times.begin(), end, t_star - window);
    return DeltaFeatures{t_star - *(end - 1), end - first_in_window};
}

std::span<const EntityId> TemporalIndex::objects(RelationId p, EntityId s) const {
    auto it = objects_.find(pair_key(p, s));
    if (it == objects_.end()) return {};
    return it->second;
}

std::span<const RelationId> TemporalIndex::relations_between(EntityId s, EntityId o) const {
    auto it = pair_relations_.find(pair_key(s, o));
    if (it == pair_relations_.end()) return {};
    return it->second;
}

std::span<const std::pair<RelationId, EntityId>> TemporalIndex::outgoing(EntityId s) const {
    if (s >= outgoing_.size()) return {};
    return outgoing_[s];
}

std::span<const IndexedFact> TemporalIndex::facts(RelationId p) const {
    if (p >= facts_.size()) return {};
    if (probe_ && !facts_[p].empty()) probe_->on_read(facts_[p].back().timestamp);
    return facts_[p];
}

std::size_t TemporalIndex::occurrences(EntityId e) const { return e < occurrences_.size() ? occurrences_[e] : 0; }

}  // namespace tkgr
