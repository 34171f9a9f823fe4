#include <algorithm>
#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tkgrules/confidence.hpp"
#include "tkgrules/dataset.hpp"
#include "tkgrules/evaluation.hpp"
#include "tkgrules/inference.hpp"
#include "tkgrules/learner.hpp"
#include "tkgrules/rule_io.hpp"

namespace py = pybind11;
using namespace tkgr;

namespace {

IdMode id_mode_from_string(const std::string& name) {
    if (name == "auto") return IdMode::Auto;
    if (name == "ids") return IdMode::Ids;
    if (name == "names") return IdMode::Names;
    throw std::invalid_argument("unknown id mode '" + name + "'");
}

Dataset load(const std::string& train, const std::optional<std::string>& valid,
             const std::optional<std::string>& test, const std::string& id_mode) {
    ParseOptions opts;
    opts.mode = id_mode_from_string(id_mode);
    std::optional<std::filesystem::path> v, t;
    if (valid) v = *valid;
    if (test) t = *test;
    Dataset ds = load_dataset(train, v, t, opts);
    for (auto* s : {&ds.train, &ds.valid, &ds.test}) {
        std::stable_sort(s->begin(), s->end(),
                         [](const Quadruple& a, const Quadruple& b) { return a.timestamp < b.timestamp; });
    }
    return ds;
}

TemporalIndex index_over(const Dataset& ds, bool valid, bool test) {
    std::vector<Quadruple> all = ds.train;
    if (valid) all.insert(all.end(), ds.valid.begin(), ds.valid.end());
    if (test) all.insert(all.end(), ds.test.begin(), ds.test.end());
    return TemporalIndex::build(augment_with_inverses(all, ds.vocab.num_relations()), ds.vocab.num_entities(),
                                ds.vocab.num_augmented_relations());
}

std::vector<std::tuple<EntityId, RelationId, EntityId, Timestamp>> as_tuples(const std::vector<Quadruple>& split) {
    std::vector<std::tuple<EntityId, RelationId, EntityId, Timestamp>> out;
    out.reserve(split.size());
    for (const auto& q : split) out.emplace_back(q.subject, q.relation, q.object, q.timestamp);
    return out;
}

Query make_query(const Dataset& ds, const std::string& subject, const std::string& relation,
                 const std::string& time) {
    auto s = ds.vocab.find_entity(subject);
    if (!s) throw DataError("unknown entity '" + subject + "'");
    auto p = ds.vocab.find_relation(relation);
    if (!p) throw DataError("unknown relation '" + relation + "'");
    auto t = ds.time.to_tick(time);
    if (!t) throw DataError("unknown timestamp '" + time + "'");
    return {*s, *p, *t};
}

RuleSet learn(const Dataset& ds, Timestamp window, double smoothing, std::size_t min_support,
              std::size_t top_constants, double floor, const std::string& variant, unsigned threads,
              const std::string& rule_types) {
    if (ds.train.empty()) throw DataError("training split is empty");
    LearnOptions opts;
    opts.window = window;
    opts.smoothing = smoothing;
    opts.min_support = min_support;
    opts.top_constants = top_constants;
    opts.floor = floor;
    opts.variant = conf_variant_from_string(variant);
    opts.threads = threads;
    const auto filter = RuleTypeFilter::parse(rule_types);
    opts.xy_rules = filter.xy || filter.recurrent;
    opts.c_rules = filter.c;
    opts.z_rules = filter.z;
    opts.f_rules = filter.f;
    py::gil_scoped_release release;
    RuleSet rules = learn_rules(index_over(ds, false, false), opts);
    rules.info.vocab_fingerprint = ds.vocab.fingerprint();
    return rules;
}

EvalOptions eval_options(std::size_t top_h, double decay, const std::string& tie_policy,
                         const std::string& rule_types, unsigned threads) {
    EvalOptions opts;
    opts.inference.top_h = top_h;
    opts.inference.decay = decay;
    opts.tie_policy = tie_policy_from_string(tie_policy);
    opts.filter = RuleTypeFilter::parse(rule_types);
    opts.threads = threads;
    return opts;
}

void check_vocabulary(const Dataset& ds, const RuleSet& rules) {
    if (ds.vocab.num_entities() != rules.info.num_entities || ds.vocab.num_relations() != rules.info.num_relations ||
        ds.vocab.fingerprint() != rules.info.vocab_fingerprint) {
        throw DataError("vocabulary mismatch between the dataset and the rules");
    }
}

std::string evaluate(const Dataset& ds, const RuleSet& rules, const std::string& split, bool train_only,
                     std::size_t top_h, double decay, const std::string& tie_policy, const std::string& rule_types,
                     unsigned threads) {
    check_vocabulary(ds, rules);
    const auto opts = eval_options(top_h, decay, tie_policy, rule_types, threads);
    if (split != "valid" && split != "test") throw std::invalid_argument("split must be 'valid' or 'test'");
    const bool test = split == "test";
    const auto& queries = test ? ds.test : ds.valid;
    if (queries.empty()) throw DataError(split + " split is empty");
    py::gil_scoped_release release;
    auto index = index_over(ds, test && !train_only, false);
    return report_to_json(run_single_step(index, rules, queries, opts), &ds.vocab);
}

std::vector<std::pair<std::string, double>> predict(const Dataset& ds, const RuleSet& rules,
                                                    const std::string& subject, const std::string& relation,
                                                    const std::string& time, std::size_t top_k, std::size_t top_h,
                                                    double decay, const std::string& rule_types) {
    check_vocabulary(ds, rules);
    const Query query = make_query(ds, subject, relation, time);
    const auto opts = eval_options(top_h, decay, "average", rule_types, 1);
    const auto index = index_over(ds, true, true);
    const auto scores = fire_rules(index, RuleIndex(rules, opts.filter), query, opts.inference);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& sc : rank(scores, opts.inference)) {
        if (out.size() >= top_k) break;
        out.emplace_back(ds.vocab.entity_name(sc.entity), sc.score);
    }
    return out;
}

std::string explain_query(const Dataset& ds, const RuleSet& rules, const std::string& subject,
                          const std::string& relation, const std::string& time, const std::string& candidate,
                          std::size_t top_h, double decay, const std::string& rule_types) {
    check_vocabulary(ds, rules);
    const Query query = make_query(ds, subject, relation, time);
    const auto opts = eval_options(top_h, decay, "average", rule_types, 1);
    const auto index = index_over(ds, true, true);
    const auto scores = fire_rules(index, RuleIndex(rules, opts.filter), query, opts.inference);
    auto e = ds.vocab.find_entity(candidate);
    if (!e || !scores.count(*e)) throw DataError("candidate '" + candidate + "' was not predicted");
    return explanation_to_json(explain(query, *e, scores, rules, opts.inference, &ds.vocab), &ds.vocab);
}

}  // namespace

PYBIND11_MODULE(_tkgrules, m) {
    m.doc() = "Temporal rule learning and forecasting on temporal knowledge graphs";
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    py::class_<Dataset>(m, "Dataset")
        .def_static("load", &load, py::arg("train"), py::arg("valid") = py::none(), py::arg("test") = py::none(),
                    py::arg("id_mode") = "auto")
        .def_property_readonly("num_entities", [](const Dataset& d) { return d.vocab.num_entities(); })
        .def_property_readonly("num_relations", [](const Dataset& d) { return d.vocab.num_relations(); })
        .def("entity_name", [](const Dataset& d, EntityId id) { return d.vocab.entity_name(id); })
        .def("relation_name", [](const Dataset& d, RelationId id) { return d.vocab.relation_name(id); })
        .def("time_label", [](const Dataset& d, Timestamp tick) { return d.time.to_raw(tick); })
        .def_property_readonly("train", [](const Dataset& d) { return as_tuples(d.train); })
        .def_property_readonly("valid", [](const Dataset& d) { return as_tuples(d.valid); })
        .def_property_readonly("test", [](const Dataset& d) { return as_tuples(d.test); });

    py::class_<RuleSet>(m, "RuleSet")
        .def_static("load", [](const std::filesystem::path& p) { return load_rules(p); })
        .def("save", [](const RuleSet& r, const std::filesystem::path& p,
                        const Dataset* ds) { save_rules(p, r, ds ? &ds->vocab : nullptr); },
             py::arg("path"), py::arg("dataset") = nullptr)
        .def("__len__", [](const RuleSet& r) { return r.rules.size(); })
        .def_property_readonly("window", [](const RuleSet& r) { return r.info.window; })
        .def("render",
             [](const RuleSet& r, const Dataset* ds) {
                 std::vector<std::string> out;
                 for (const auto& rule : r.rules) out.push_back(render(rule, ds ? &ds->vocab : nullptr));
                 return out;
             },
             py::arg("dataset") = nullptr)
        .def("kinds", [](const RuleSet& r) {
            std::vector<std::string> out;
            for (const auto& rule : r.rules) out.emplace_back(to_string(rule.kind));
            return out;
        });

    py::class_<ConfidenceModel>(m, "ConfidenceModel")
        .def(py::init([](double alpha, double lambda, double phi, double rho, double kappa, double gamma,
                         Timestamp window) {
                 return ConfidenceModel{alpha, lambda, phi, rho, kappa, gamma, window};
             }),
             py::arg("alpha") = 0.0, py::arg("lam") = 0.0, py::arg("phi") = 0.0, py::arg("rho") = 0.0,
             py::arg("kappa") = 0.0, py::arg("gamma") = 0.0, py::arg("window") = 50)
        .def_readwrite("alpha", &ConfidenceModel::alpha)
        .def_readwrite("lam", &ConfidenceModel::lambda)
        .def_readwrite("phi", &ConfidenceModel::phi)
        .def_readwrite("rho", &ConfidenceModel::rho)
        .def_readwrite("kappa", &ConfidenceModel::kappa)
        .def_readwrite("gamma", &ConfidenceModel::gamma)
        .def_readwrite("window", &ConfidenceModel::window)
        .def("recency", &ConfidenceModel::recency, py::arg("min_delta"))
        .def("frequency", &ConfidenceModel::frequency, py::arg("min_delta"), py::arg("window_count"))
        .def("confidence",
             [](const ConfidenceModel& m, Timestamp min_delta, std::int64_t window_count) {
                 return m.confidence(DeltaFeatures{min_delta, window_count});
             },
             py::arg("min_delta"), py::arg("window_count"));

    m.def("aggregate",
          [](std::vector<double> confidences, std::size_t top_h, double decay) {
              std::sort(confidences.begin(), confidences.end(), std::greater<>());
              return aggregate(confidences, top_h, decay);
          },
          py::arg("confidences"), py::arg("top_h") = 5, py::arg("decay") = 0.9);

    m.def("learn", &learn, py::arg("dataset"), py::arg("window") = 50, py::arg("smoothing") = 10.0,
          py::arg("min_support") = 5, py::arg("top_constants") = 100, py::arg("floor") = 0.001,
          py::arg("variant") = "f+g", py::arg("threads") = 0, py::arg("rule_types") = "all");
    m.def("_evaluate", &evaluate, py::arg("dataset"), py::arg("rules"), py::arg("split") = "test",
          py::arg("train_only") = false, py::arg("top_h") = 5, py::arg("decay") = 0.9,
          py::arg("tie_policy") = "average", py::arg("rule_types") = "all", py::arg("threads") = 0);
    m.def("_predict", &predict, py::arg("dataset"), py::arg("rules"), py::arg("subject"), py::arg("relation"),
          py::arg("time"), py::arg("top_k") = 10, py::arg("top_h") = 5, py::arg("decay") = 0.9,
          py::arg("rule_types") = "all");
    m.def("_explain", &explain_query, py::arg("dataset"), py::arg("rules"), py::arg("subject"),
          py::arg("relation"), py::arg("time"), py::arg("candidate"), py::arg("top_h") = 5, py::arg("decay") = 0.9,
          py::arg("rule_types") = "all");
}
