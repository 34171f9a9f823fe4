#include "tkgrules/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "tkgrules/dataset.hpp"

namespace tkgr {

namespace {

std::uint64_t relation_subject_key(RelationId p, EntityId s) { return (std::uint64_t{p} << 32) | s; }

bool hit_before(const RuleHit& a, const RuleHit& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.rule_id < b.rule_id;
}

// Keeps hits sorted and capped at top_h.
void push_hit(std::vector<RuleHit>& hits, const RuleHit& hit, std::size_t top_h) {
    if (hits.size() >= top_h && !hit_before(hit, hits.back())) return;
    hits.insert(std::upper_bound(hits.begin(), hits.end(), hit, hit_before), hit);
    if (hits.size() > top_h) hits.pop_back();
}

}  // namespace

bool RuleTypeFilter::admits(const Rule& rule) const {
    switch (rule.kind) {
        case RuleKind::Xy: return rule.recurrent() ? recurrent : xy;
        case RuleKind::C: return c;
        case RuleKind::Z: return z;
        case RuleKind::F: return f;
    }
    return false;
}

RuleTypeFilter RuleTypeFilter::parse(std::string_view spec) {
    RuleTypeFilter out = none();
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto end = spec.find(',', start);
        if (end == std::string_view::npos) end = spec.size();
        auto token = spec.substr(start, end - start);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (token == "all") {
            out = all();
        } else if (token == "rec") {
            out.recurrent = true;
        } else if (token == "xy") {
            out.recurrent = out.xy = true;
        } else if (token == "c") {
            out.c = true;
        } else if (token == "z") {
            out.z = true;
        } else if (token == "f") {
            out.f = true;
        } else if (!token.empty() && token != "none") {
            throw std::invalid_argument("unknown rule type '" + std::string(token) + "'");
        }
        start = end + 1;
    }
    return out;
}

std::string RuleTypeFilter::to_string() const {
    std::string out;
    auto add = [&out](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    if (recurrent && xy) {
        add(true, "xy");
    } else {
        add(recurrent, "rec");
        add(xy, "xy-nonrec");
    }
    add(c, "c");
    add(z, "z");
    add(f, "f");
    return out.empty() ? "none" : out;
}

RuleIndex::RuleIndex(const RuleSet& rules, RuleTypeFilter filter) : rules_(&rules) {
    RelationId max_rel = 0;
    for (const auto& r : rules.rules) max_rel = std::max(max_rel, r.head + 1);
    fitted_.resize(max_rel);
    z_.resize(max_rel);
    for (std::size_t i = 0; i < rules.rules.size(); ++i) {
        const Rule& r = rules.rules[i];
        if (!filter.admits(r)) continue;
        const auto id = static_cast<std::uint32_t>(i);
        switch (r.kind) {
            case RuleKind::Xy:
            case RuleKind::C: fitted_[r.head].push_back(id); break;
            case RuleKind::Z: z_[r.head].push_back(id); break;
            case RuleKind::F: f_[relation_subject_key(r.head, r.subject_constant)].push_back(id); break;
        }
    }
}

std::span<const std::uint32_t> RuleIndex::fitted_rules(RelationId head) const {
    if (head >= fitted_.size()) return {};
    return fitted_[head];
}

std::span<const std::uint32_t> RuleIndex::z_rules(RelationId head) const {
    if (head >= z_.size()) return {};
    return z_[head];
}

std::span<const std::uint32_t> RuleIndex::f_rules(RelationId head, EntityId subject) const {
    auto it = f_.find(relation_subject_key(head, subject));
    if (it == f_.end()) return {};
    return it->second;
}

CandidateScores fire_rules(const TemporalIndex& index, const RuleIndex& rules, const Query& query,
                           const InferenceParams& params) {
    CandidateScores out;
    if (params.top_h == 0) return out;
    const auto& all = rules.rules().rules;
    const Timestamp window = rules.window();

    auto fire_fitted = [&](std::uint32_t id, EntityId candidate, const DeltaFeatures& feats) {
        const Rule& rule = all[id];
        RuleHit hit;
        hit.rule_id = id;
        hit.f = rule.model.recency(feats.min_delta);
        hit.g = rule.model.frequency(feats.min_delta, feats.window_count);
        hit.confidence = rule.model.confidence(feats);
        hit.min_delta = feats.min_delta;
        hit.window_count = feats.window_count;
        push_hit(out[candidate], hit, params.top_h);
    };

    for (std::uint32_t id : rules.fitted_rules(query.relation)) {
        const Rule& rule = all[id];
        if (rule.kind == RuleKind::Xy) {
            for (EntityId d : index.objects(rule.body, query.subject)) {
                if (auto feats = index.features(rule.body, query.subject, d, query.time, window)) {
                    fire_fitted(id, d, *feats);
                }
            }
        } else if (auto feats = index.features(rule.body, query.subject, rule.body_constant, query.time, window)) {
            fire_fitted(id, rule.head_constant, *feats);
        }
    }
    auto fire_static = [&](std::uint32_t id) {
        const Rule& rule = all[id];
        RuleHit hit;
        hit.rule_id = id;
        hit.confidence = std::clamp(rule.static_confidence, 0.0, 1.0);
        push_hit(out[rule.head_constant], hit, params.top_h);
    };
    for (std::uint32_t id : rules.z_rules(query.relation)) fire_static(id);
    for (std::uint32_t id : rules.f_rules(query.relation, query.subject)) fire_static(id);
    return out;
}

double aggregate(std::span<const double> sorted_confidences, std::size_t top_h, double decay) {
    const std::size_t n = std::min(sorted_confidences.size(), top_h);
    double miss = 1.0;
    double damp = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        miss *= 1.0 - sorted_confidences[i] * damp;
        damp *= decay;
    }
    return 1.0 - miss;
}

double aggregate(std::span<const RuleHit> hits, std::size_t top_h, double decay) {
    const std::size_t n = std::min(hits.size(), top_h);
    double miss = 1.0;
    double damp = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        miss *= 1.0 - hits[i].confidence * damp;
        damp *= decay;
    }
    return 1.0 - miss;
}

std::vector<ScoredCandidate> rank(const CandidateScores& scores, const InferenceParams& params) {
    std::vector<ScoredCandidate> out;
    out.reserve(scores.size());
    for (const auto& [entity, hits] : scores) out.push_back({entity, aggregate(hits, params.top_h, params.decay)});
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; });
    return out;
}

Explanation explain(const Query& query, EntityId candidate, const CandidateScores& scores, const RuleSet& rules,
                    const InferenceParams& params, const Vocabulary* vocab) {
    auto it = scores.find(candidate);
    if (it == scores.end()) throw std::out_of_range("candidate " + std::to_string(candidate) + " was not predicted");
    Explanation out;
    out.query = query;
    out.candidate = candidate;
    out.score = aggregate(it->second, params.top_h, params.decay);
    for (const auto& hit : it->second) {
        const Rule& rule = rules.rules.at(hit.rule_id);
        ExplanationRow row;
        row.rule_id = hit.rule_id;
        row.kind = rule.kind;
        row.rule = render(rule, vocab);
        row.confidence = hit.confidence;
        row.has_components = rule.fitted();
        row.f = hit.f;
        row.g = hit.g;
        row.min_delta = hit.min_delta;
        row.window_count = hit.window_count;
        row.window = rules.info.window;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string explanation_to_json(const Explanation& e, const Vocabulary* vocab) {
    using nlohmann::json;
    auto entity = [vocab](EntityId id) -> json {
        if (vocab && id < vocab->num_entities()) return vocab->entity_name(id);
        return id;
    };
    json j;
    j["version"] = 1;
    j["query"] = {{"subject", entity(e.query.subject)},
                  {"relation", vocab ? json(vocab->relation_name(e.query.relation)) : json(e.query.relation)},
                  {"time", e.query.time}};
    j["candidate"] = entity(e.candidate);
    j["candidate_id"] = e.candidate;
    j["score"] = e.score;
    json rows = json::array();
    for (const auto& r : e.rows) {
        json row = {{"conf", r.confidence}, {"type", to_string(r.kind)}, {"rule", r.rule}, {"rule_id", r.rule_id}};
        if (r.has_components) {
            row["f"] = r.f;
            row["g"] = r.g;
            row["min_delta"] = r.min_delta;
            row["window_count"] = r.window_count;
            row["window"] = r.window;
        }
        rows.push_back(std::move(row));
    }
    j["rules"] = std::move(rows);
    return j.dump();
}

}  // namespace tkgr
