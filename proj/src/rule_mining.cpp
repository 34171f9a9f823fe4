#include "tkgrules/rule_mining.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "tkgrules/parallel.hpp"

namespace tkgr {

std::vector<Rule> enumerate_xy_rules(const TemporalIndex& index, std::size_t min_support, unsigned threads) {
    const std::size_t num_relations = index.num_relations();
    std::vector<std::vector<Rule>> per_head(num_relations);
    parallel_for(num_relations, threads, [&](std::size_t h) {
        std::vector<std::uint64_t> positives(num_relations, 0);
        for (const auto& fact : index.facts(static_cast<RelationId>(h))) {
            for (RelationId b : index.relations_between(fact.subject, fact.object)) {
                auto times = index.timestamps(b, fact.subject, fact.object);
                if (!times.empty() && times.front() < fact.timestamp) ++positives[b];
            }
        }
        for (std::size_t b = 0; b < num_relations; ++b) {
            if (positives[b] == 0 || positives[b] < min_support) continue;
            Rule rule = Rule::xy(static_cast<RelationId>(h), static_cast<RelationId>(b));
            rule.positives = positives[b];
            per_head[h].push_back(rule);
        }
    });
    std::vector<Rule> rules;
    for (auto& rs : per_head) rules.insert(rules.end(), rs.begin(), rs.end());
    return rules;
}

std::vector<EntityId> frequent_constants(const TemporalIndex& index, std::size_t k) {
    std::vector<EntityId> ids(index.num_entities());
    std::iota(ids.begin(), ids.end(), EntityId{0});
    std::stable_sort(ids.begin(), ids.end(),
                     [&](EntityId a, EntityId b) { return index.occurrences(a) > index.occurrences(b); });
    if (ids.size() > k) ids.resize(k);
    return ids;
}

std::vector<Rule> enumerate_c_rules(const TemporalIndex& index, std::span<const EntityId> constants,
                                    std::size_t min_support, Timestamp window, unsigned threads) {
    if (constants.empty()) return {};
    std::vector<std::int32_t> rank(index.num_entities(), -1);
    for (std::size_t i = 0; i < constants.size(); ++i) {
        if (constants[i] < rank.size() && rank[constants[i]] < 0) rank[constants[i]] = static_cast<std::int32_t>(i);
    }
    // Body keys (b, d') per subject, restricted to frequent d'.
    std::vector<std::vector<std::pair<RelationId, EntityId>>> body_keys(index.num_entities());
    for (std::size_t x = 0; x < index.num_entities(); ++x) {
        for (const auto& [b, o] : index.outgoing(static_cast<EntityId>(x))) {
            if (rank[o] >= 0) body_keys[x].emplace_back(b, o);
        }
    }

    const std::size_t num_relations = index.num_relations();
    std::vector<std::vector<Rule>> per_head(num_relations);
    parallel_for(num_relations, threads, [&](std::size_t h) {
        // (head constant, body relation, body constant) -> support
        std::map<std::tuple<EntityId, RelationId, EntityId>, std::uint64_t> counts;
        for (const auto& fact : index.facts(static_cast<RelationId>(h))) {
            if (rank[fact.object] < 0) continue;
            for (const auto& [b, d_body] : body_keys[fact.subject]) {
                auto feats = index.features(b, fact.subject, d_body, fact.timestamp, window);
                if (feats && feats->window_count > 0) ++counts[{fact.object, b, d_body}];
            }
        }
        for (const auto& [key, count] : counts) {
            if (count < min_support) continue;
            const auto& [d, b, d_body] = key;
            Rule rule = Rule::c(static_cast<RelationId>(h), d, b, d_body);
            rule.positives = count;
            per_head[h].push_back(rule);
        }
    });
    std::vector<Rule> rules;
    for (auto& rs : per_head) rules.insert(rules.end(), rs.begin(), rs.end());
    std::sort(rules.begin(), rules.end(), rule_key_less);
    return rules;
}

std::vector<Rule> compute_z_confidences(const TemporalIndex& index, double smoothing) {
    std::vector<Rule> rules;
    for (std::size_t p = 0; p < index.num_relations(); ++p) {
        auto facts = index.facts(static_cast<RelationId>(p));
        if (facts.empty()) continue;
        // Facts are ordered by (t, s, o), so distinct (s, t) pairs are runs.
        std::uint64_t body = 0;
        std::map<EntityId, std::uint64_t> per_object;
        for (std::size_t i = 0; i < facts.size(); ++i) {
            if (i == 0 || facts[i].timestamp != facts[i - 1].timestamp || facts[i].subject != facts[i - 1].subject) {
                ++body;
            }
            ++per_object[facts[i].object];
        }
        for (const auto& [d, count] : per_object) {
            Rule rule = Rule::z(static_cast<RelationId>(p), d);
            rule.support = body;
            rule.positives = count;
            rule.static_confidence = static_cast<double>(count) / (static_cast<double>(body) + smoothing);
            rules.push_back(rule);
        }
    }
    return rules;
}

std::vector<Rule> compute_f_confidences(const TemporalIndex& index, double smoothing) {
    std::vector<Rule> rules;
    for (std::size_t p = 0; p < index.num_relations(); ++p) {
        auto facts = index.facts(static_cast<RelationId>(p));
        if (facts.empty()) continue;
        std::unordered_map<EntityId, std::uint64_t> body;
        std::map<std::pair<EntityId, EntityId>, std::uint64_t> heads;
        for (std::size_t i = 0; i < facts.size(); ++i) {
            if (i == 0 || facts[i].timestamp != facts[i - 1].timestamp || facts[i].subject != facts[i - 1].subject) {
                ++body[facts[i].subject];
            }
            ++heads[{facts[i].subject, facts[i].object}];
        }
        for (const auto& [key, count] : heads) {
            const auto [c, d] = key;
            const auto denom = body.at(c);
            Rule rule = Rule::f(static_cast<RelationId>(p), c, d);
            rule.support = denom;
            rule.positives = count;
            rule.static_confidence = static_cast<double>(count) / (static_cast<double>(denom) + smoothing);
            rules.push_back(rule);
        }
    }
    return rules;
}

}  // namespace tkgr
