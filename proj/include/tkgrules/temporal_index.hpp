#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tkgrules/types.hpp"

namespace tkgr {

// The two features the confidence function reads from a set of distances:
// recency min(Delta) and frequency |Delta_W|.
struct DeltaFeatures {
    Timestamp min_delta = 0;
    std::int64_t window_count = 0;

    friend bool operator==(const DeltaFeatures&, const DeltaFeatures&) = default;
};

// Sorted ascending list of positive distances t* - t'.
class DeltaSet {
public:
    DeltaSet() = default;
    explicit DeltaSet(std::vector<Timestamp> sorted_distances) : distances_(std::move(sorted_distances)) {}

    bool empty() const { return distances_.empty(); }
    std::size_t size() const { return distances_.size(); }
    std::span<const Timestamp> distances() const { return distances_; }

    // Precondition: !empty().
    Timestamp min() const;
    // |Delta_W|: number of distances <= window.
    std::int64_t count_within(Timestamp window) const;
    std::optional<DeltaFeatures> features(Timestamp window) const;

    friend bool operator==(const DeltaSet&, const DeltaSet&) = default;

private:
    std::vector<Timestamp> distances_;
};

// Observer notified with the largest timestamp handed out by each index read
// (all timestamps a read exposes are <= that value). Implementations must be
// thread-safe when the index is read concurrently.
class ReadProbe {
public:
    virtual ~ReadProbe() = default;
    virtual void on_read(Timestamp t) = 0;
    // Called by the evaluation driver before queries at t* are answered.
    virtual void on_query_time(Timestamp /*t_star*/) {}
};

struct IndexedFact {
    Timestamp timestamp = 0;
    EntityId subject = 0;
    EntityId object = 0;

    friend bool operator==(const IndexedFact&, const IndexedFact&) = default;
    friend auto operator<=>(const IndexedFact&, const IndexedFact&) = default;
};

// Read-optimized grounding index over an inverse-augmented graph.
//
// Immutable after build() except through extend(), which appends a batch of
// facts at a timestamp strictly later than everything already indexed. Const
// member functions are safe to call from many threads at once.
class TemporalIndex {
public:
    TemporalIndex(std::size_t num_entities, std::size_t num_relations);

    // num_relations is the augmented count 2R.
    static TemporalIndex build(std::span<const Quadruple> quads, std::size_t num_entities,
                               std::size_t num_relations);

    // All quads must share one timestamp, strictly greater than max_timestamp().
    // Throws std::invalid_argument otherwise.
    void extend(std::span<const Quadruple> quads);

    std::size_t num_entities() const { return num_entities_; }
    std::size_t num_relations() const { return num_relations_; }
    std::size_t num_facts() const { return num_facts_; }
    bool empty() const { return num_facts_ == 0; }
    std::optional<Timestamp> min_timestamp() const;
    std::optional<Timestamp> max_timestamp() const;
    std::span<const Timestamp> distinct_timestamps() const { return timestamps_; }

    // Sorted, deduplicated timestamps of (s, p, o); all of them, no cutoff.
    std::span<const Timestamp> timestamps(RelationId p, EntityId s, EntityId o) const;
    bool contains(RelationId p, EntityId s, EntityId o, Timestamp t) const;

    // {t* - t' : p(s, o, t') indexed, t' < t*}. With a cap, distances above it
    // are dropped except the smallest one, which is always kept.
    DeltaSet deltas(RelationId p, EntityId s, EntityId o, Timestamp t_star,
                    std::optional<Timestamp> cap = std::nullopt) const;
    // min(Delta) and |Delta_W| of the same set in O(log n); nullopt if empty.
    std::optional<DeltaFeatures> features(RelationId p, EntityId s, EntityId o, Timestamp t_star,
                                          Timestamp window) const;

    // Distinct objects o with some p(s, o, t), in first-insertion order.
    std::span<const EntityId> objects(RelationId p, EntityId s) const;
    // Distinct relations p with some p(s, o, t), in first-insertion order.
    std::span<const RelationId> relations_between(EntityId s, EntityId o) const;
    // Distinct (relation, object) keys with subject s, in first-insertion order.
    std::span<const std::pair<RelationId, EntityId>> outgoing(EntityId s) const;
    // Distinct facts of relation p ordered by (timestamp, subject, object).
    std::span<const IndexedFact> facts(RelationId p) const;
    // Number of distinct augmented facts with subject e, i.e. occurrences of e
    // as subject or object in the original graph.
    std::size_t occurrences(EntityId e) const;

    void set_probe(ReadProbe* probe) { probe_ = probe; }
    ReadProbe* probe() const { return probe_; }

private:
    void insert_sorted_batch(std::span<const Quadruple> quads);
    void check_ids(const Quadruple& q) const;

    std::size_t num_entities_;
    std::size_t num_relations_;
    std::size_t num_facts_ = 0;
    std::vector<Timestamp> timestamps_;
    std::unordered_map<std::uint64_t, std::vector<Timestamp>> key_times_;
    std::unordered_map<std::uint64_t, std::vector<EntityId>> objects_;
    std::unordered_map<std::uint64_t, std::vector<RelationId>> pair_relations_;
    std::vector<std::vector<std::pair<RelationId, EntityId>>> outgoing_;
    std::vector<std::vector<IndexedFact>> facts_;
    std::vector<std::size_t> occurrences_;
    ReadProbe* probe_ = nullptr;
};

}  // namespace tkgr
