#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr {

class Vocabulary;

// Object query (s, p, ?, t*). Subject queries arrive as inverse-relation
// object queries.
struct Query {
    EntityId subject = 0;
    RelationId relation = 0;
    Timestamp time = 0;

    friend bool operator==(const Query&, const Query&) = default;
};

// Which rule kinds take part in inference.
struct RuleTypeFilter {
    bool recurrent = true;  // xy with head == body
    bool xy = true;         // other xy
    bool c = true;
    bool z = true;
    bool f = true;

    bool admits(const Rule& rule) const;

    static RuleTypeFilter all() { return {}; }
    static RuleTypeFilter none() { return {false, false, false, false, false}; }
    // Comma-separated subset of {rec, xy, c, z, f, all, none}; "xy" includes
    // recurrent rules.
    static RuleTypeFilter parse(std::string_view spec);
    std::string to_string() const;
};

struct InferenceParams {
    std::size_t top_h = 5;
    double decay = 0.9;
};

// One rule firing for one candidate.
struct RuleHit {
    std::uint32_t rule_id = 0;  // position in the RuleSet
    double confidence = 0.0;
    double f = 0.0;  // recency component (xy, c)
    double g = 0.0;  // frequency component (xy, c)
    Timestamp min_delta = 0;
    std::int64_t window_count = 0;
};

// candidate -> hits sorted by confidence descending (ties: rule id), at most
// top_h entries each.
using CandidateScores = std::map<EntityId, std::vector<RuleHit>>;

struct ScoredCandidate {
    EntityId entity = 0;
    double score = 0.0;
};

// Rules of one RuleSet grouped for lookup by query relation.
class RuleIndex {
public:
    RuleIndex(const RuleSet& rules, RuleTypeFilter filter = RuleTypeFilter::all());

    const RuleSet& rules() const { return *rules_; }
    Timestamp window() const { return rules_->info.window; }

    std::span<const std::uint32_t> fitted_rules(RelationId head) const;
    std::span<const std::uint32_t> z_rules(RelationId head) const;
    std::span<const std::uint32_t> f_rules(RelationId head, EntityId subject) const;

private:
    const RuleSet* rules_;
    std::vector<std::vector<std::uint32_t>> fitted_;
    std::vector<std::vector<std::uint32_t>> z_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> f_;
};

// Fires every admitted rule with head == query relation against facts
// strictly before query.time.
CandidateScores fire_rules(const TemporalIndex& index, const RuleIndex& rules, const Query& query,
                           const InferenceParams& params);

// 1 - prod_{i < min(n, top_h)} (1 - s_i * decay^i) over confidences sorted
// descending; i is zero-based so the best confidence is undamped.
double aggregate(std::span<const double> sorted_confidences, std::size_t top_h, double decay);
double aggregate(std::span<const RuleHit> hits, std::size_t top_h, double decay);

// Candidates by aggregated score descending, ties by ascending entity id.
std::vector<ScoredCandidate> rank(const CandidateScores& scores, const InferenceParams& params);

struct ExplanationRow {
    std::uint32_t rule_id = 0;
    RuleKind kind = RuleKind::Xy;
    std::string rule;
    double confidence = 0.0;
    bool has_components = false;  // f/g split only exists for xy and c rules
    double f = 0.0;
    double g = 0.0;
    Timestamp min_delta = 0;
    std::int64_t window_count = 0;
    Timestamp window = 0;
};

struct Explanation {
    Query query;
    EntityId candidate = 0;
    double score = 0.0;
    std::vector<ExplanationRow> rows;
};

// Throws std::out_of_range if the candidate was not predicted.
Explanation explain(const Query& query, EntityId candidate, const CandidateScores& scores, const RuleSet& rules,
                    const InferenceParams& params, const Vocabulary* vocab = nullptr);

// JSON rendering of an explanation (one object, no trailing newline).
std::string explanation_to_json(const Explanation& explanation, const Vocabulary* vocab = nullptr);

}  // namespace tkgr
