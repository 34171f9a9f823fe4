#include "cli.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tkgrules/dataset.hpp"
#include "tkgrules/evaluation.hpp"
#include "tkgrules/inference.hpp"
#include "tkgrules/learner.hpp"
#include "tkgrules/rule_io.hpp"

namespace tkgr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Config {
    std::string train;
    std::string valid;
    std::string test;
    std::string rules;
    std::string out;
    std::string id_mode = "auto";
    Timestamp window = 50;
    double psmooth = 10.0;
    std::size_t top_h = 5;
    double decay = 0.9;
    std::size_t top_constants = 100;
    std::size_t min_support = 5;
    double floor = 0.001;
    std::string tie_policy = "average";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string split = "test";
    std::string rule_types = "all";
    std::string conf_variant = "f+g";
    bool train_only = false;
    std::string diagnostics;
    std::string ranks;
    std::string query;
    std::string candidate;
    std::size_t top_k = 10;
    std::size_t explain_k = 3;
    std::string config;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
std::string str(const T& v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

IdMode id_mode(const Config& c) {
    if (c.id_mode == "ids") return IdMode::Ids;
    if (c.id_mode == "names") return IdMode::Names;
    return IdMode::Auto;
}

Dataset load(const Config& c) {
    auto opt = [](const std::string& p) { return p.empty() ? std::nullopt : std::optional<fs::path>(p); };
    ParseOptions options;
    options.mode = id_mode(c);
    Dataset ds = load_dataset(c.train, opt(c.valid), opt(c.test), options);
    auto by_time = [](const Quadruple& a, const Quadruple& b) { return a.timestamp < b.timestamp; };
    for (auto* split : {&ds.train, &ds.valid, &ds.test}) std::stable_sort(split->begin(), split->end(), by_time);
    return ds;
}

TemporalIndex build_index(const Dataset& ds, std::initializer_list<const std::vector<Quadruple>*> splits) {
    std::vector<Quadruple> all;
    for (const auto* s : splits) all.insert(all.end(), s->begin(), s->end());
    return TemporalIndex::build(augment_with_inverses(all, ds.vocab.num_relations()), ds.vocab.num_entities(),
                                ds.vocab.num_augmented_relations());
}

// The dataset vocabulary must extend the one the rules were learned on. Inverse
// relation ids are shifted when the evaluation splits introduce new relations.
void align_rules(RuleSet& rules, const Vocabulary& vocab) {
    const auto& info = rules.info;
    if (vocab.num_entities() < info.num_entities || vocab.num_relations() < info.num_relations ||
        vocab.fingerprint(info.num_entities, info.num_relations) != info.vocab_fingerprint) {
        throw DataError("vocabulary mismatch: the rule file was learned on a different dataset");
    }
    const std::size_t old_r = info.num_relations;
    const std::size_t new_r = vocab.num_relations();
    if (old_r == new_r) return;
    auto shift = [&](RelationId& p) {
        if (p != kNoRelation && p >= old_r) p = static_cast<RelationId>(p - old_r + new_r);
    };
    for (auto& r : rules.rules) {
        shift(r.head);
        shift(r.body);
    }
    std::sort(rules.rules.begin(), rules.rules.end(), rule_key_less);
    rules.info.num_relations = new_r;
}

LearnOptions learn_options(const Config& c) {
    LearnOptions o;
    o.window = c.window;
    o.smoothing = c.psmooth;
    o.top_constants = c.top_constants;
    o.min_support = c.min_support;
    o.floor = c.floor;
    o.variant = conf_variant_from_string(c.conf_variant);
    o.threads = c.threads;
    return o;
}

EvalOptions eval_options(const Config& c) {
    EvalOptions o;
    o.inference.top_h = c.top_h;
    o.inference.decay = c.decay;
    o.tie_policy = tie_policy_from_string(c.tie_policy);
    o.filter = RuleTypeFilter::parse(c.rule_types);
    o.threads = c.threads;
    return o;
}

// Everything that can change a result. The thread count is left out on
// purpose: reports must not differ between thread counts.
std::vector<std::pair<std::string, std::string>> echo(const Config& c, const std::string& command,
                                                      const RuleSetInfo* info) {
    std::vector<std::pair<std::string, std::string>> e{
        {"command", command},
        {"train", c.train},
        {"valid", c.valid},
        {"test", c.test},
        {"id_mode", c.id_mode},
        {"window", str(info ? info->window : c.window)},
        {"psmooth", str(info ? info->smoothing : c.psmooth)},
        {"conf_variant", info ? info->conf_variant : c.conf_variant},
        {"top_constants", str(c.top_constants)},
        {"min_support", str(c.min_support)},
        {"floor", str(c.floor)},
        {"top_h", str(c.top_h)},
        {"decay", str(c.decay)},
        {"tie_policy", c.tie_policy},
        {"rule_types", RuleTypeFilter::parse(c.rule_types).to_string()},
        {"split", c.split},
        {"train_only", c.train_only ? "true" : "false"},
        {"seed", str(c.seed)},
    };
    if (!c.rules.empty()) e.emplace_back("rules", c.rules);
    return e;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    return f;
}

void require_data(const Config& c) {
    if (c.train.empty()) throw UsageError("--train is required");
}

// Index before the evaluated split plus the split itself.
struct EvalSetup {
    TemporalIndex index;
    const std::vector<Quadruple>* split;
};

EvalSetup eval_setup(const Dataset& ds, const Config& c) {
    if (c.split == "valid") {
        if (ds.valid.empty()) throw DataError("validation split is empty");
        return {build_index(ds, {&ds.train}), &ds.valid};
    }
    if (ds.test.empty()) throw DataError("test split is empty");
    if (c.train_only) return {build_index(ds, {&ds.train}), &ds.test};
    return {build_index(ds, {&ds.train, &ds.valid}), &ds.test};
}

RuleSet learn_from(const Dataset& ds, const Config& c, LearnStats* stats) {
    if (ds.train.empty()) throw DataError("training split is empty");
    const auto index = build_index(ds, {&ds.train});
    RuleSet rules = learn_rules(index, learn_options(c), stats);
    rules.info.vocab_fingerprint = ds.vocab.fingerprint();
    return rules;
}

RuleSet rules_for(const Dataset& ds, const Config& c) {
    if (c.rules.empty()) throw UsageError("--rules is required");
    RuleSet rules = load_rules(c.rules);
    align_rules(rules, ds.vocab);
    return rules;
}

std::string entity_label(const Vocabulary& v, EntityId e) {
    return e < v.num_entities() ? v.entity_name(e) : std::to_string(e);
}

int cmd_learn(const Config& c, std::ostream& out) {
    require_data(c);
    if (c.out.empty()) throw UsageError("--out is required");
    const Dataset ds = load(c);
    LearnStats stats;
    const RuleSet rules = learn_from(ds, c, &stats);
    save_rules(c.out, rules, &ds.vocab);
    if (ds.name_mode) {
        const auto dir = fs::path(c.out).parent_path();
        ds.vocab.write_mappings(dir.empty() ? fs::path(".") : dir);
    }
    if (!c.diagnostics.empty()) {
        auto f = open_out(c.diagnostics);
        write_fit_diagnostics(f, build_index(ds, {&ds.train}), rules, &ds.vocab);
    }
    out << "xy  " << stats.xy << '\n'
        << "c   " << stats.c << '\n'
        << "z   " << stats.z << '\n'
        << "f   " << stats.f << '\n'
        << "candidates " << stats.candidates << ", dropped " << stats.dropped << ", fit fallbacks "
        << stats.fallbacks << '\n';
    return kExitOk;
}

int cmd_eval(const Config& c, std::ostream& out) {
    require_data(c);
    const Dataset ds = load(c);
    const RuleSet rules = rules_for(ds, c);
    auto setup = eval_setup(ds, c);
    EvalOptions options = eval_options(c);
    options.keep_ranks = !c.ranks.empty();
    EvalReport report = run_single_step(setup.index, rules, *setup.split, options);
    report.config = echo(c, "eval", &rules.info);
    print_report(out, report, &ds.vocab);
    if (!c.out.empty()) open_out(c.out) << report_to_json(report, &ds.vocab) << '\n';
    if (!c.ranks.empty()) {
        auto f = open_out(c.ranks);
        f << "subject\trelation\tobject\ttime\trank\n";
        for (const auto& r : report.ranks) {
            f << entity_label(ds.vocab, r.query.subject) << '\t' << ds.vocab.relation_name(r.query.relation) << '\t'
              << entity_label(ds.vocab, r.gold) << '\t' << ds.time.to_raw(r.query.time) << '\t' << r.rank << '\n';
        }
    }
    return kExitOk;
}

int cmd_predict(const Config& c, std::ostream& out) {
    require_data(c);
    const Dataset ds = load(c);
    const RuleSet rules = rules_for(ds, c);
    auto setup = eval_setup(ds, c);
    std::ofstream file;
    if (!c.out.empty()) file = open_out(c.out);
    std::ostream& sink = c.out.empty() ? out : file;
    run_single_step(setup.index, rules, *setup.split, eval_options(c),
                    [&](const QueryResult& q, const std::vector<ScoredCandidate>& ranking) {
                        json candidates = json::array();
                        for (std::size_t i = 0; i < ranking.size() && i < c.top_k; ++i) {
                            candidates.push_back(
                                {{"entity", entity_label(ds.vocab, ranking[i].entity)}, {"score", ranking[i].score}});
                        }
                        json rec = {{"version", 1},
                                    {"query",
                                     {{"subject", entity_label(ds.vocab, q.query.subject)},
                                      {"relation", ds.vocab.relation_name(q.query.relation)},
                                      {"time", ds.time.to_raw(q.query.time)}}},
                                    {"gold", entity_label(ds.vocab, q.gold)},
                                    {"rank", q.rank},
                                    {"candidates", std::move(candidates)}};
                        sink << rec.dump() << '\n';
                    });
    return kExitOk;
}

Query parse_query(const Dataset& ds, const std::string& spec) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(spec);
    while (std::getline(in, part, ',')) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("--query expects subject,relation,time");
    Query q;
    auto s = ds.vocab.find_entity(parts[0]);
    if (!s) throw DataError("unknown entity '" + parts[0] + "'");
    auto p = ds.vocab.find_relation(parts[1]);
    if (!p) throw DataError("unknown relation '" + parts[1] + "'");
    auto t = ds.time.to_tick(parts[2]);
    if (!t) throw DataError("timestamp '" + parts[2] + "' does not map onto the dataset's time grid");
    q.subject = *s;
    q.relation = *p;
    q.time = *t;
    return q;
}

int cmd_explain(const Config& c, std::ostream& out) {
    require_data(c);
    if (c.query.empty()) throw UsageError("--query is required");
    const Dataset ds = load(c);
    const RuleSet rules = rules_for(ds, c);
    const Query query = parse_query(ds, c.query);
    // Retrieval only sees facts strictly before the query time.
    const auto index = build_index(ds, {&ds.train, &ds.valid, &ds.test});
    const EvalOptions options = eval_options(c);
    const auto scores = fire_rules(index, RuleIndex(rules, options.filter), query, options.inference);
    std::vector<EntityId> candidates;
    if (!c.candidate.empty()) {
        auto e = ds.vocab.find_entity(c.candidate);
        if (!e || !scores.count(*e)) throw DataError("candidate '" + c.candidate + "' was not predicted");
        candidates.push_back(*e);
    } else {
        for (const auto& sc : rank(scores, options.inference)) {
            if (candidates.size() >= c.explain_k) break;
            candidates.push_back(sc.entity);
        }
    }
    std::ofstream file;
    if (!c.out.empty()) file = open_out(c.out);
    std::ostream& sink = c.out.empty() ? out : file;
    for (EntityId e : candidates) {
        auto explanation = explain(query, e, scores, rules, options.inference, &ds.vocab);
        auto j = json::parse(explanation_to_json(explanation, &ds.vocab));
        j["query"]["time"] = ds.time.to_raw(query.time);
        sink << j.dump() << '\n';
    }
    return kExitOk;
}

int cmd_ablate(const Config& c, std::ostream& out) {
    require_data(c);
    const Dataset ds = load(c);
    struct Row {
        std::string group;
        std::string name;
        Metrics metrics;
    };
    std::vector<Row> rows;

    auto evaluate = [&](const RuleSet& rules, RuleTypeFilter filter) {
        auto setup = eval_setup(ds, c);
        EvalOptions options = eval_options(c);
        options.filter = filter;
        return run_single_step(setup.index, rules, *setup.split, options).overall;
    };

    RuleSet base;
    if (!c.rules.empty()) {
        base = rules_for(ds, c);
    } else {
        base = learn_from(ds, c, nullptr);
    }
    const auto all = RuleTypeFilter::all();
    const std::vector<std::pair<std::string, RuleTypeFilter>> subsets{
        {"rec", RuleTypeFilter::parse("rec")},
        {"xy", RuleTypeFilter::parse("xy")},
        {"c", RuleTypeFilter::parse("c")},
        {"z", RuleTypeFilter::parse("z")},
        {"f", RuleTypeFilter::parse("f")},
        {"all-rec", [&] { auto f = all; f.recurrent = false; return f; }()},
        {"all-xy", [&] { auto f = all; f.recurrent = f.xy = false; return f; }()},
        {"all-c", [&] { auto f = all; f.c = false; return f; }()},
        {"all-z", [&] { auto f = all; f.z = false; return f; }()},
        {"all-f", [&] { auto f = all; f.f = false; return f; }()},
        {"all", all},
    };
    for (const auto& [name, filter] : subsets) rows.push_back({"rule types", name, evaluate(base, filter)});
    for (const char* variant : {"static", "g", "f", "f+g"}) {
        Config v = c;
        v.conf_variant = variant;
        const RuleSet rules = learn_from(ds, v, nullptr);
        rows.push_back({"confidence", variant, evaluate(rules, RuleTypeFilter::parse(c.rule_types))});
    }

    const auto flags = out.flags();
    out << std::left << std::setw(12) << "group" << std::setw(10) << "setting" << std::right << std::setw(8) << "MRR"
        << std::setw(8) << "H@1" << std::setw(8) << "H@3" << std::setw(8) << "H@10" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        out << std::left << std::setw(12) << r.group << std::setw(10) << r.name << std::right << std::setw(8)
            << r.metrics.mrr << std::setw(8) << r.metrics.hits1 << std::setw(8) << r.metrics.hits3 << std::setw(8)
            << r.metrics.hits10 << '\n';
    }
    out.flags(flags);
    if (!c.out.empty()) {
        json j;
        j["version"] = 1;
        json config = json::object();
        for (const auto& [k, v] : echo(c, "ablate", nullptr)) config[k] = v;
        j["config"] = std::move(config);
        json table = json::array();
        for (const auto& r : rows) {
            table.push_back({{"group", r.group},
                             {"setting", r.name},
                             {"mrr", r.metrics.mrr},
                             {"hits@1", r.metrics.hits1},
                             {"hits@3", r.metrics.hits3},
                             {"hits@10", r.metrics.hits10},
                             {"queries", r.metrics.count}});
        }
        j["rows"] = std::move(table);
        open_out(c.out) << j.dump(2) << '\n';
    }
    return kExitOk;
}

// Reads key=value lines; '#' starts a comment.
std::vector<std::string> config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") continue;
        args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
    return args;
}

// Config-file values go right after the subcommand so that later command-line
// flags override them. Keys another subcommand understands are skipped, so one
// file can serve every command.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!path || rest.size() < 2) return rest;
    CLI::App* sub = app.get_subcommand_no_throw(rest[1]);
    if (!sub) return rest;
    std::vector<std::string> extra;
    for (const auto& arg : config_args(*path)) {
        const std::string flag = arg.substr(0, arg.find('='));
        if (!sub->get_option_no_throw(flag)) {
            bool elsewhere = false;
            for (const auto* other : app.get_subcommands({})) elsewhere |= other->get_option_no_throw(flag) != nullptr;
            if (elsewhere) continue;
        }
        extra.push_back(arg);
    }
    rest.insert(rest.begin() + 2, extra.begin(), extra.end());
    return rest;
}

void add_data_options(CLI::App* sub, Config& c) {
    sub->add_option("--train", c.train, "training split")->check(CLI::ExistingFile);
    sub->add_option("--valid", c.valid, "validation split")->check(CLI::ExistingFile);
    sub->add_option("--test", c.test, "test split")->check(CLI::ExistingFile);
    sub->add_option("--id-mode", c.id_mode, "auto, ids or names")->check(CLI::IsMember({"auto", "ids", "names"}));
    sub->add_option("--threads", c.threads, "worker threads, 0 = all cores");
    sub->add_option("--seed", c.seed, "recorded in reports; learning is deterministic");
    sub->add_option("--config", c.config, "key=value file, flags win");
}

void add_learn_options(CLI::App* sub, Config& c) {
    sub->add_option("--window", c.window, "window W")->check(CLI::Range(Timestamp{1}, Timestamp{LLONG_MAX}));
    sub->add_option("--psmooth", c.psmooth, "smoothing constant")->check(CLI::NonNegativeNumber);
    sub->add_option("--top-constants", c.top_constants, "frequent constants for c-rules");
    sub->add_option("--min-support", c.min_support, "examples needed to admit an xy/c rule");
    sub->add_option("--floor", c.floor, "drop rules whose peak confidence is lower")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--conf-variant", c.conf_variant, "static, f, g or f+g")
        ->check(CLI::IsMember({"static", "f", "g", "f+g", "f-only", "g-only"}));
}

void add_inference_options(CLI::App* sub, Config& c) {
    sub->add_option("--rules", c.rules, "rule file")->check(CLI::ExistingFile);
    sub->add_option("--top-h", c.top_h, "confidences aggregated per candidate")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    sub->add_option("--decay", c.decay, "decay of lower-ranked confidences")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--rule-types", c.rule_types, "subset of rec,xy,c,z,f or all");
    sub->add_option("--tie-policy", c.tie_policy, "best, worst or average")
        ->check(CLI::IsMember({"best", "worst", "average"}));
}

void add_split_options(CLI::App* sub, Config& c) {
    sub->add_option("--split", c.split, "valid or test")->check(CLI::IsMember({"valid", "test"}));
    sub->add_flag("--train-only", c.train_only, "leave validation facts out of the test-time index");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Config c;
    CLI::App app{"Temporal rule learning and forecasting over temporal knowledge graphs", "tkgrules"};
    app.option_defaults()->take_last();
    app.require_subcommand(1);

    auto* learn = app.add_subcommand("learn", "learn a rule file from a training split");
    add_data_options(learn, c);
    add_learn_options(learn, c);
    learn->add_option("--out", c.out, "rule file to write");
    learn->add_option("--diagnostics", c.diagnostics, "write per-rule fit tables");

    auto* eval = app.add_subcommand("eval", "single-step evaluation with time-aware filtered metrics");
    add_data_options(eval, c);
    add_inference_options(eval, c);
    add_split_options(eval, c);
    eval->add_option("--out", c.out, "JSON report");
    eval->add_option("--ranks", c.ranks, "per-query rank dump (TSV)");

    auto* predict = app.add_subcommand("predict", "write ranked candidates for every evaluation query");
    add_data_options(predict, c);
    add_inference_options(predict, c);
    add_split_options(predict, c);
    predict->add_option("--out", c.out, "JSONL output, default stdout");
    predict->add_option("--top-k", c.top_k, "candidates per query");

    auto* explain_cmd = app.add_subcommand("explain", "show the rules behind the top candidates of a query");
    add_data_options(explain_cmd, c);
    add_inference_options(explain_cmd, c);
    explain_cmd->add_option("--query", c.query, "subject,relation,time (names or ids; relation may end in ^-1)");
    explain_cmd->add_option("--candidate", c.candidate, "explain only this candidate");
    explain_cmd->add_option("--top-k", c.explain_k, "candidates to explain");
    explain_cmd->add_option("--out", c.out, "JSONL output, default stdout");

    auto* ablate = app.add_subcommand("ablate", "metrics per rule-type subset and confidence variant");
    add_data_options(ablate, c);
    add_learn_options(ablate, c);
    add_inference_options(ablate, c);
    add_split_options(ablate, c);
    ablate->add_option("--out", c.out, "JSON table");

    try {
        const auto args = expand_config(raw_args, app);
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        RuleTypeFilter::parse(c.rule_types);
        if (learn->parsed()) return cmd_learn(c, out);
        if (eval->parsed()) return cmd_eval(c, out);
        if (predict->parsed()) return cmd_predict(c, out);
        if (explain_cmd->parsed()) return cmd_explain(c, out);
        if (ablate->parsed()) return cmd_ablate(c, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace tkgr::cli
