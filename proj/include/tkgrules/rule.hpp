#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tkgrules/confidence.hpp"
#include "tkgrules/types.hpp"

namespace tkgr {

class Vocabulary;

// xy:  h(x, y, t*) <- b(x, y, t), t* > t
// c:   h(x, d, t*) <- b(x, d', t), t* > t
// z:   p(x, d, t)  <- exists z p(x, z, t)
// f:   p(c, d, t)  <- exists z p(c, z, t)
enum class RuleKind : std::uint8_t { Xy = 0, C = 1, Z = 2, F = 3 };

std::string_view to_string(RuleKind kind);
RuleKind rule_kind_from_string(std::string_view name);

// Tagged union over the four rule forms. Fields that a kind does not use hold
// kNoRelation / kNoEntity.
struct Rule {
    RuleKind kind = RuleKind::Xy;
    RelationId head = kNoRelation;
    RelationId body = kNoRelation;         // xy, c
    EntityId head_constant = kNoEntity;    // c: d, z/f: object constant
    EntityId body_constant = kNoEntity;    // c: d'
    EntityId subject_constant = kNoEntity; // f: c

    ConfidenceModel model;           // xy, c
    double static_confidence = 0.0;  // all kinds; the confidence of z/f rules
    std::uint64_t support = 0;       // examples (xy, c) or body groundings (z, f)
    std::uint64_t positives = 0;
    bool fit_fallback = false;

    bool fitted() const { return kind == RuleKind::Xy || kind == RuleKind::C; }
    bool recurrent() const { return kind == RuleKind::Xy && head == body; }

    auto key() const { return std::tuple(kind, head, body, head_constant, body_constant, subject_constant); }

    static Rule xy(RelationId head, RelationId body);
    static Rule c(RelationId head, EntityId head_constant, RelationId body, EntityId body_constant);
    static Rule z(RelationId relation, EntityId object);
    static Rule f(RelationId relation, EntityId subject, EntityId object);

    friend bool operator==(const Rule&, const Rule&) = default;
};

// Orders by key(); the canonical order of a rule file.
bool rule_key_less(const Rule& a, const Rule& b);

// Human-readable form, e.g. "consult(x,y,t*) <- express^-1(x,y,t)". Without a
// vocabulary, ids are printed.
std::string render(const Rule& rule, const Vocabulary* vocab = nullptr);

struct RuleSetInfo {
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;  // original R
    std::uint64_t vocab_fingerprint = 0;
    Timestamp window = 50;
    double smoothing = 10.0;
    std::string conf_variant = "f+g";

    friend bool operator==(const RuleSetInfo&, const RuleSetInfo&) = default;
};

struct RuleSet {
    RuleSetInfo info;
    std::vector<Rule> rules;

    friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

}  // namespace tkgr
