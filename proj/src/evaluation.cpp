#include "tkgrules/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

#include "tkgrules/dataset.hpp"
#include "tkgrules/parallel.hpp"

namespace tkgr {

std::string_view to_string(TiePolicy policy) {
    switch (policy) {
        case TiePolicy::Best: return "best";
        case TiePolicy::Worst: return "worst";
        case TiePolicy::Average: return "average";
    }
    return "?";
}

TiePolicy tie_policy_from_string(std::string_view name) {
    if (name == "best") return TiePolicy::Best;
    if (name == "worst") return TiePolicy::Worst;
    if (name == "average") return TiePolicy::Average;
    throw std::invalid_argument("unknown tie policy '" + std::string(name) + "'");
}

double time_aware_filtered_rank(std::span<const ScoredCandidate> scored, EntityId gold,
                                std::span<const EntityId> filtered, std::size_t num_entities, TiePolicy policy) {
    std::unordered_set<EntityId> removed;
    for (EntityId e : filtered) {
        if (e != gold && e < num_entities) removed.insert(e);
    }
    double gold_score = 0.0;
    for (const auto& c : scored) {
        if (c.entity == gold) {
            gold_score = c.score;
            break;
        }
    }
    std::size_t higher = 0;
    std::size_t equal = 0;
    std::size_t scored_kept = 0;  // scored entities other than gold that survive the filter
    for (const auto& c : scored) {
        if (c.entity == gold || c.entity >= num_entities || removed.count(c.entity)) continue;
        ++scored_kept;
        if (c.score > gold_score) {
            ++higher;
        } else if (c.score == gold_score) {
            ++equal;
        }
    }
    if (gold_score == 0.0) {
        // Unscored entities tie with gold at score 0.
        const std::size_t others = num_entities - (gold < num_entities ? 1 : 0) - removed.size();
        equal += others - scored_kept;
    }
    switch (policy) {
        case TiePolicy::Best: return 1.0 + static_cast<double>(higher);
        case TiePolicy::Worst: return 1.0 + static_cast<double>(higher + equal);
        case TiePolicy::Average: return 1.0 + static_cast<double>(higher) + static_cast<double>(equal) / 2.0;
    }
    return 0.0;
}

void Metrics::add(double rank) {
    mrr += 1.0 / rank;
    hits1 += rank <= 1.0 ? 1.0 : 0.0;
    hits3 += rank <= 3.0 ? 1.0 : 0.0;
    hits10 += rank <= 10.0 ? 1.0 : 0.0;
    ++count;
}

Metrics Metrics::finalized() const {
    if (count == 0) return *this;
    const double n = static_cast<double>(count);
    return {mrr / n, hits1 / n, hits3 / n, hits10 / n, count};
}

EvalReport run_single_step(TemporalIndex& index, const RuleSet& rules, std::span<const Quadruple> split,
                           const EvalOptions& options, const QueryCallback& on_query) {
    for (std::size_t i = 1; i < split.size(); ++i) {
        if (split[i].timestamp < split[i - 1].timestamp) {
            throw std::invalid_argument("evaluation split is not sorted by timestamp");
        }
    }
    const std::size_t num_relations = rules.info.num_relations != 0 ? rules.info.num_relations
                                                                     : index.num_relations() / 2;
    const RuleIndex rule_index(rules, options.filter);

    EvalReport report;
    std::size_t begin = 0;
    while (begin < split.size()) {
        const Timestamp t = split[begin].timestamp;
        std::size_t end = begin;
        while (end < split.size() && split[end].timestamp == t) ++end;

        std::vector<Quadruple> facts;
        facts.reserve(2 * (end - begin));
        for (std::size_t i = begin; i < end; ++i) facts.push_back(split[i]);
        for (std::size_t i = begin; i < end; ++i) facts.push_back(inverse_of(split[i], num_relations));

        // Queries in split order: object query, then its inverse.
        std::map<std::pair<EntityId, RelationId>, std::vector<EntityId>> answers;
        for (const auto& q : facts) answers[{q.subject, q.relation}].push_back(q.object);
        std::vector<QueryResult> queries;
        queries.reserve(facts.size());
        for (std::size_t i = begin; i < end; ++i) {
            const auto inv = inverse_of(split[i], num_relations);
            queries.push_back({{split[i].subject, split[i].relation, t}, split[i].object, 0.0});
            queries.push_back({{inv.subject, inv.relation, t}, inv.object, 0.0});
        }

        if (index.probe()) index.probe()->on_query_time(t);
        std::vector<std::vector<ScoredCandidate>> rankings(on_query ? queries.size() : 0);
        parallel_for(queries.size(), options.threads, [&](std::size_t i) {
            auto& qr = queries[i];
            const auto scores = fire_rules(index, rule_index, qr.query, options.inference);
            auto ranking = rank(scores, options.inference);
            qr.rank = time_aware_filtered_rank(ranking, qr.gold, answers.at({qr.query.subject, qr.query.relation}),
                                               index.num_entities(), options.tie_policy);
            if (on_query) rankings[i] = std::move(ranking);
        });

        for (std::size_t i = 0; i < queries.size(); ++i) {
            const auto& qr = queries[i];
            report.overall.add(qr.rank);
            report.per_relation[qr.query.relation].add(qr.rank);
            report.per_timestamp[t].add(qr.rank);
            if (options.keep_ranks) report.ranks.push_back(qr);
            if (on_query) on_query(qr, rankings[i]);
        }
        index.extend(facts);
        begin = end;
    }
    report.overall = report.overall.finalized();
    for (auto& [_, m] : report.per_relation) m = m.finalized();
    for (auto& [_, m] : report.per_timestamp) m = m.finalized();
    return report;
}

namespace {

nlohmann::json metrics_json(const Metrics& m) {
    return {{"mrr", m.mrr}, {"hits@1", m.hits1}, {"hits@3", m.hits3}, {"hits@10", m.hits10}, {"queries", m.count}};
}

}  // namespace

std::string report_to_json(const EvalReport& report, const Vocabulary* vocab) {
    using nlohmann::json;
    json j;
    j["version"] = 1;
    j["metrics"] = metrics_json(report.overall);
    json config = json::object();
    for (const auto& [k, v] : report.config) config[k] = v;
    j["config"] = std::move(config);
    json per_relation = json::object();
    for (const auto& [p, m] : report.per_relation) {
        per_relation[vocab ? vocab->relation_name(p) : std::to_string(p)] = metrics_json(m);
    }
    j["per_relation"] = std::move(per_relation);
    json per_timestamp = json::object();
    for (const auto& [t, m] : report.per_timestamp) per_timestamp[std::to_string(t)] = metrics_json(m);
    j["per_timestamp"] = std::move(per_timestamp);
    return j.dump(2);
}

void print_report(std::ostream& out, const EvalReport& report, const Vocabulary* vocab) {
    (void)vocab;
    const auto& m = report.overall;
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(4);
    out << "queries  " << m.count << '\n'
        << "MRR      " << m.mrr << '\n'
        << "Hits@1   " << m.hits1 << '\n'
        << "Hits@3   " << m.hits3 << '\n'
        << "Hits@10  " << m.hits10 << '\n';
    if (!report.config.empty()) {
        out << "config  ";
        for (const auto& [k, v] : report.config) out << ' ' << k << '=' << v;
        out << '\n';
    }
    out.flags(flags);
}

}  // namespace tkgr
