#include "tkgrules/rule_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "tkgrules/dataset.hpp"

namespace tkgr {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "tkgrules";

json rule_to_json(const Rule& rule, const Vocabulary* vocab) {
    json j;
    j["type"] = to_string(rule.kind);
    j["head_relation"] = rule.head;
    switch (rule.kind) {
        case RuleKind::Xy:
            j["body_relation"] = rule.body;
            break;
        case RuleKind::C:
            j["body_relation"] = rule.body;
            j["constants"] = {{"head", rule.head_constant}, {"body", rule.body_constant}};
            break;
        case RuleKind::Z:
            j["constants"] = {{"object", rule.head_constant}};
            break;
        case RuleKind::F:
            j["constants"] = {{"subject", rule.subject_constant}, {"object", rule.head_constant}};
            break;
    }
    if (rule.fitted()) {
        const auto& m = rule.model;
        j["params"] = {{"alpha", m.alpha}, {"lambda", m.lambda}, {"phi", m.phi},
                       {"rho", m.rho},     {"kappa", m.kappa},   {"gamma", m.gamma}};
        if (rule.fit_fallback) j["fallback"] = true;
    }
    j["static_conf"] = rule.static_confidence;
    j["support"] = rule.support;
    j["positives"] = rule.positives;
    j["rule"] = render(rule, vocab);
    return j;
}

Rule rule_from_json(const json& j, Timestamp window) {
    Rule rule;
    rule.kind = rule_kind_from_string(j.at("type").get<std::string>());
    rule.head = j.at("head_relation").get<RelationId>();
    switch (rule.kind) {
        case RuleKind::Xy:
            rule.body = j.at("body_relation").get<RelationId>();
            break;
        case RuleKind::C:
            rule.body = j.at("body_relation").get<RelationId>();
            rule.head_constant = j.at("constants").at("head").get<EntityId>();
            rule.body_constant = j.at("constants").at("body").get<EntityId>();
            break;
        case RuleKind::Z:
            rule.head_constant = j.at("constants").at("object").get<EntityId>();
            break;
        case RuleKind::F:
            rule.subject_constant = j.at("constants").at("subject").get<EntityId>();
            rule.head_constant = j.at("constants").at("object").get<EntityId>();
            break;
    }
    if (rule.fitted()) {
        const auto& p = j.at("params");
        rule.model.alpha = p.at("alpha").get<double>();
        rule.model.lambda = p.at("lambda").get<double>();
        rule.model.phi = p.at("phi").get<double>();
        rule.model.rho = p.at("rho").get<double>();
        rule.model.kappa = p.at("kappa").get<double>();
        rule.model.gamma = p.at("gamma").get<double>();
        rule.fit_fallback = j.value("fallback", false);
    }
    rule.model.window = window;
    rule.static_confidence = j.at("static_conf").get<double>();
    rule.support = j.at("support").get<std::uint64_t>();
    rule.positives = j.at("positives").get<std::uint64_t>();
    return rule;
}

}  // namespace

void write_rules(std::ostream& out, const RuleSet& rules, const Vocabulary* vocab) {
    json header = {{"format", kFormatName},
                   {"version", kRuleFormatVersion},
                   {"num_rules", rules.rules.size()},
                   {"num_entities", rules.info.num_entities},
                   {"num_relations", rules.info.num_relations},
                   {"vocab_fingerprint", rules.info.vocab_fingerprint},
                   {"window", rules.info.window},
                   {"smoothing", rules.info.smoothing},
                   {"conf_variant", rules.info.conf_variant}};
    out << header.dump() << '\n';
    for (const auto& rule : rules.rules) out << rule_to_json(rule, vocab).dump() << '\n';
}

void save_rules(const std::filesystem::path& path, const RuleSet& rules, const Vocabulary* vocab) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_rules(out, rules, vocab);
    if (!out) throw std::runtime_error("error writing " + path.string());
}

RuleSet read_rules(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&line_no](const std::string& what) {
        throw DataError("rules:" + std::to_string(line_no) + ": " + what);
    };

    RuleSet out;
    std::size_t expected = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(std::string("malformed record: ") + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("format", "") != kFormatName) fail("missing rule-file header");
                const int version = j.at("version").get<int>();
                if (version != kRuleFormatVersion) {
                    fail("unsupported version " + std::to_string(version) + " (expected " +
                         std::to_string(kRuleFormatVersion) + ")");
                }
                expected = j.at("num_rules").get<std::size_t>();
                out.info.num_entities = j.at("num_entities").get<std::size_t>();
                out.info.num_relations = j.at("num_relations").get<std::size_t>();
                out.info.vocab_fingerprint = j.at("vocab_fingerprint").get<std::uint64_t>();
                out.info.window = j.at("window").get<Timestamp>();
                out.info.smoothing = j.at("smoothing").get<double>();
                out.info.conf_variant = j.at("conf_variant").get<std::string>();
                out.rules.reserve(expected);
                have_header = true;
                continue;
            }
            out.rules.push_back(rule_from_json(j, out.info.window));
        } catch (const json::exception& e) {
            fail(std::string("malformed record: ") + e.what());
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (!have_header) throw DataError("rules: empty file, missing header");
    if (out.rules.size() != expected) {
        ++line_no;
        fail("truncated: header announces " + std::to_string(expected) + " rules, found " +
             std::to_string(out.rules.size()));
    }
    return out;
}

RuleSet load_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return read_rules(in);
}

}  // namespace tkgr
