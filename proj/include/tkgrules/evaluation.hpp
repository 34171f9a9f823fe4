#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tkgrules/inference.hpp"
#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr {

class Vocabulary;

enum class TiePolicy { Best, Worst, Average };

std::string_view to_string(TiePolicy policy);
TiePolicy tie_policy_from_string(std::string_view name);

// Rank of `gold` among all num_entities entities after removing every entity
// in `filtered` other than gold. Entities absent from `scored` score 0. With
// h entities strictly above gold and e tied with it:
//   best = 1 + h, worst = 1 + h + e, average = 1 + h + e / 2.
// A gold id >= num_entities is ranked among num_entities + 1 with score 0.
double time_aware_filtered_rank(std::span<const ScoredCandidate> scored, EntityId gold,
                                std::span<const EntityId> filtered, std::size_t num_entities, TiePolicy policy);

struct Metrics {
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    std::size_t count = 0;

    void add(double rank);
    // Turns accumulated sums into means.
    Metrics finalized() const;
};

struct QueryResult {
    Query query;
    EntityId gold = 0;
    double rank = 0.0;
};

struct EvalReport {
    Metrics overall;
    std::map<RelationId, Metrics> per_relation;
    std::map<Timestamp, Metrics> per_timestamp;
    std::vector<QueryResult> ranks;  // filled when EvalOptions::keep_ranks
    std::vector<std::pair<std::string, std::string>> config;
};

struct EvalOptions {
    InferenceParams inference;
    TiePolicy tie_policy = TiePolicy::Average;
    RuleTypeFilter filter = RuleTypeFilter::all();
    unsigned threads = 0;
    bool keep_ranks = false;
};

// Called once per query, in split order, with the query's ranking.
using QueryCallback = std::function<void(const QueryResult&, const std::vector<ScoredCandidate>&)>;

// Single-step evaluation. `index` must hold everything before the split and
// nothing from it. For each timestamp of `split` (original quadruples sorted by
// time) every quadruple yields an object query and an inverse-relation query;
// all of them are answered, then the timestamp's facts are added to the index.
// Throws std::invalid_argument if the split is not sorted by time.
EvalReport run_single_step(TemporalIndex& index, const RuleSet& rules, std::span<const Quadruple> split,
                           const EvalOptions& options, const QueryCallback& on_query = {});

std::string report_to_json(const EvalReport& report, const Vocabulary* vocab = nullptr);
void print_report(std::ostream& out, const EvalReport& report, const Vocabulary* vocab = nullptr);

}  // namespace tkgr
