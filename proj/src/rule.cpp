#include "tkgrules/rule.hpp"

#include <stdexcept>

#include "tkgrules/dataset.hpp"

namespace tkgr {

std::string_view to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::Xy: return "xy";
        case RuleKind::C: return "c";
        case RuleKind::Z: return "z";
        case RuleKind::F: return "f";
    }
    return "?";
}

RuleKind rule_kind_from_string(std::string_view name) {
    if (name == "xy") return RuleKind::Xy;
    if (name == "c") return RuleKind::C;
    if (name == "z") return RuleKind::Z;
    if (name == "f") return RuleKind::F;
    throw std::invalid_argument("unknown rule type '" + std::string(name) + "'");
}

Rule Rule::xy(RelationId head, RelationId body) {
    Rule r;
    r.kind = RuleKind::Xy;
    r.head = head;
    r.body = body;
    return r;
}

Rule Rule::c(RelationId head, EntityId head_constant, RelationId body, EntityId body_constant) {
    Rule r;
    r.kind = RuleKind::C;
    r.head = head;
    r.body = body;
    r.head_constant = head_constant;
    r.body_constant = body_constant;
    return r;
}

Rule Rule::z(RelationId relation, EntityId object) {
    Rule r;
    r.kind = RuleKind::Z;
    r.head = relation;
    r.head_constant = object;
    return r;
}

Rule Rule::f(RelationId relation, EntityId subject, EntityId object) {
    Rule r;
    r.kind = RuleKind::F;
    r.head = relation;
    r.subject_constant = subject;
    r.head_constant = object;
    return r;
}

bool rule_key_less(const Rule& a, const Rule& b) { return a.key() < b.key(); }

std::string render(const Rule& rule, const Vocabulary* vocab) {
    auto rel = [vocab](RelationId p) { return vocab ? vocab->relation_name(p) : "r" + std::to_string(p); };
    auto ent = [vocab](EntityId e) { return vocab ? vocab->entity_name(e) : "e" + std::to_string(e); };
    switch (rule.kind) {
        case RuleKind::Xy:
            return rel(rule.head) + "(x,y,t*) <- " + rel(rule.body) + "(x,y,t)";
        case RuleKind::C:
            return rel(rule.head) + "(x," + ent(rule.head_constant) + ",t*) <- " + rel(rule.body) + "(x," +
                   ent(rule.body_constant) + ",t)";
        case RuleKind::Z:
            return rel(rule.head) + "(x," + ent(rule.head_constant) + ",t) <- exists z " + rel(rule.head) + "(x,z,t)";
        case RuleKind::F:
            return rel(rule.head) + "(" + ent(rule.subject_constant) + "," + ent(rule.head_constant) +
                   ",t) <- exists z " + rel(rule.head) + "(" + ent(rule.subject_constant) + ",z,t)";
    }
    return {};
}

}  // namespace tkgr
