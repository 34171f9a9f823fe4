#pragma once

// Test-only generators and brute-force oracles. Everything here works on the
// raw quadruple list and never touches TemporalIndex, so it stays independent
// of the code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "tkgrules/dataset.hpp"
#include "tkgrules/examples.hpp"
#include "tkgrules/inference.hpp"
#include "tkgrules/rule.hpp"
#include "tkgrules/temporal_index.hpp"

namespace tkgr::testing {

struct RandomGraphSpec {
    std::size_t entities = 12;
    std::size_t relations = 2;  // original R
    Timestamp timestamps = 15;
    std::size_t facts = 100;    // original quadruples, before augmentation
};

// Random original quadruples with a recurrence bias so that rules have support.
inline std::vector<Quadruple> random_quads(std::mt19937_64& rng, const RandomGraphSpec& spec) {
    std::uniform_int_distribution<EntityId> ent(0, static_cast<EntityId>(spec.entities - 1));
    std::uniform_int_distribution<RelationId> rel(0, static_cast<RelationId>(spec.relations - 1));
    std::uniform_int_distribution<Timestamp> time(0, spec.timestamps - 1);
    std::bernoulli_distribution repeat(0.5);
    std::vector<Quadruple> quads;
    while (quads.size() < spec.facts) {
        if (!quads.empty() && repeat(rng)) {
            std::uniform_int_distribution<std::size_t> pick(0, quads.size() - 1);
            Quadruple q = quads[pick(rng)];
            if (repeat(rng)) q.relation = rel(rng);
            q.timestamp = time(rng);
            quads.push_back(q);
        } else {
            quads.push_back({ent(rng), rel(rng), ent(rng), time(rng)});
        }
    }
    return quads;
}

inline std::vector<Quadruple> sorted_by_time(std::vector<Quadruple> quads) {
    std::stable_sort(quads.begin(), quads.end(),
                     [](const Quadruple& a, const Quadruple& b) { return a.timestamp < b.timestamp; });
    return quads;
}

// Graph held as a plain set of augmented facts.
struct BruteGraph {
    std::set<std::tuple<RelationId, EntityId, EntityId, Timestamp>> facts;
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;  // augmented

    BruteGraph(std::span<const Quadruple> augmented, std::size_t entities, std::size_t relations)
        : num_entities(entities), num_relations(relations) {
        for (const auto& q : augmented) facts.emplace(q.relation, q.subject, q.object, q.timestamp);
    }

    bool has(RelationId p, EntityId s, EntityId o, Timestamp t) const { return facts.count({p, s, o, t}) > 0; }

    bool has_subject_at(RelationId p, EntityId s, Timestamp t) const {
        for (const auto& [fp, fs, fo, ft] : facts) {
            if (fp == p && fs == s && ft == t) return true;
        }
        return false;
    }

    std::vector<Timestamp> times() const {
        std::set<Timestamp> ts;
        for (const auto& f : facts) ts.insert(std::get<3>(f));
        return {ts.begin(), ts.end()};
    }

    // {t* - t' : p(s, o, t'), t' < t*} sorted ascending.
    std::vector<Timestamp> deltas(RelationId p, EntityId s, EntityId o, Timestamp t_star) const {
        std::vector<Timestamp> out;
        for (const auto& [fp, fs, fo, ft] : facts) {
            if (fp == p && fs == s && fo == o && ft < t_star) out.push_back(t_star - ft);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline std::int64_t count_within(const std::vector<Timestamp>& deltas, Timestamp window) {
    return std::count_if(deltas.begin(), deltas.end(), [window](Timestamp d) { return d <= window; });
}

// The example-collection loop written out literally: every timestamp, every
// (c, d) pair of constants, head-existence gate, distances against G^t.
inline ExampleSet brute_examples(const BruteGraph& g, const Rule& rule, Timestamp window) {
    ExampleSet out;
    for (Timestamp t : g.times()) {
        for (EntityId c = 0; c < g.num_entities; ++c) {
            if (!g.has_subject_at(rule.head, c, t)) continue;
            if (rule.kind == RuleKind::Xy) {
                for (EntityId d = 0; d < g.num_entities; ++d) {
                    const auto delta = g.deltas(rule.body, c, d, t);
                    if (delta.empty()) continue;
                    out.add(delta.front(), count_within(delta, window), g.has(rule.head, c, d, t));
                }
            } else {
                const auto delta = g.deltas(rule.body, c, rule.body_constant, t);
                if (delta.empty()) continue;
                out.add(delta.front(), count_within(delta, window), g.has(rule.head, c, rule.head_constant, t));
            }
        }
    }
    return out;
}

inline std::map<std::pair<RelationId, EntityId>, double> brute_z(const BruteGraph& g, double smoothing) {
    std::map<std::pair<RelationId, EntityId>, double> out;
    for (RelationId p = 0; p < g.num_relations; ++p) {
        std::set<std::pair<EntityId, Timestamp>> body;
        for (const auto& [fp, fs, fo, ft] : g.facts) {
            if (fp == p) body.emplace(fs, ft);
        }
        for (EntityId d = 0; d < g.num_entities; ++d) {
            std::set<std::pair<EntityId, Timestamp>> head;
            for (const auto& [fp, fs, fo, ft] : g.facts) {
                if (fp == p && fo == d) head.emplace(fs, ft);
            }
            if (!head.empty()) out[{p, d}] = static_cast<double>(head.size()) / (static_cast<double>(body.size()) + smoothing);
        }
    }
    return out;
}

inline std::map<std::tuple<RelationId, EntityId, EntityId>, double> brute_f(const BruteGraph& g, double smoothing) {
    std::map<std::tuple<RelationId, EntityId, EntityId>, double> out;
    for (RelationId p = 0; p < g.num_relations; ++p) {
        for (EntityId c = 0; c < g.num_entities; ++c) {
            std::set<Timestamp> body;
            for (const auto& [fp, fs, fo, ft] : g.facts) {
                if (fp == p && fs == c) body.insert(ft);
            }
            for (EntityId d = 0; d < g.num_entities; ++d) {
                std::set<Timestamp> head;
                for (const auto& [fp, fs, fo, ft] : g.facts) {
                    if (fp == p && fs == c && fo == d) head.insert(ft);
                }
                if (!head.empty()) {
                    out[{p, c, d}] = static_cast<double>(head.size()) / (static_cast<double>(body.size()) + smoothing);
                }
            }
        }
    }
    return out;
}

// Applies every rule definition directly: candidate -> all confidences.
inline std::map<EntityId, std::vector<double>> brute_fire(const BruteGraph& g, const RuleSet& rules,
                                                          const Query& query, RuleTypeFilter filter = {}) {
    std::map<EntityId, std::vector<double>> out;
    const Timestamp window = rules.info.window;
    for (const auto& rule : rules.rules) {
        if (rule.head != query.relation || !filter.admits(rule)) continue;
        switch (rule.kind) {
            case RuleKind::Xy:
                for (EntityId d = 0; d < g.num_entities; ++d) {
                    const auto delta = g.deltas(rule.body, query.subject, d, query.time);
                    if (delta.empty()) continue;
                    out[d].push_back(rule.model.confidence(DeltaFeatures{delta.front(), count_within(delta, window)}));
                }
                break;
            case RuleKind::C: {
                const auto delta = g.deltas(rule.body, query.subject, rule.body_constant, query.time);
                if (delta.empty()) break;
                out[rule.head_constant].push_back(
                    rule.model.confidence(DeltaFeatures{delta.front(), count_within(delta, window)}));
                break;
            }
            case RuleKind::Z:
                out[rule.head_constant].push_back(rule.static_confidence);
                break;
            case RuleKind::F:
                if (rule.subject_constant == query.subject) out[rule.head_constant].push_back(rule.static_confidence);
                break;
        }
    }
    for (auto& [_, confs] : out) std::sort(confs.begin(), confs.end(), std::greater<>());
    return out;
}

// Direct noisy-or with decay over a descending list.
inline double brute_aggregate(const std::vector<double>& sorted, std::size_t top_h, double decay) {
    double miss = 1.0;
    for (std::size_t i = 0; i < sorted.size() && i < top_h; ++i) {
        miss *= 1.0 - sorted[i] * std::pow(decay, static_cast<double>(i));
    }
    return 1.0 - miss;
}

// Average-tie filtered rank from a dense score vector.
inline double brute_rank(const std::vector<double>& scores, EntityId gold, const std::set<EntityId>& filtered) {
    double higher = 0, equal = 0;
    for (EntityId e = 0; e < scores.size(); ++e) {
        if (e == gold || filtered.count(e)) continue;
        if (scores[e] > scores[gold]) higher += 1;
        if (scores[e] == scores[gold]) equal += 1;
    }
    return 1.0 + higher + equal / 2.0;
}

}  // namespace tkgr::testing
