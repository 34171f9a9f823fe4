#include "tkgrules/learner.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tkgrules/dataset.hpp"
#include "tkgrules/fitting.hpp"
#include "tkgrules/parallel.hpp"
#include "tkgrules/rule_mining.hpp"

namespace tkgr {

std::string_view to_string(ConfVariant variant) {
    switch (variant) {
        case ConfVariant::Static: return "static";
        case ConfVariant::FOnly: return "f";
        case ConfVariant::GOnly: return "g";
        case ConfVariant::FPlusG: return "f+g";
    }
    return "?";
}

ConfVariant conf_variant_from_string(std::string_view name) {
    if (name == "static") return ConfVariant::Static;
    if (name == "f" || name == "f-only") return ConfVariant::FOnly;
    if (name == "g" || name == "g-only") return ConfVariant::GOnly;
    if (name == "f+g") return ConfVariant::FPlusG;
    throw std::invalid_argument("unknown confidence variant '" + std::string(name) + "'");
}

ConfidenceModel fit_confidence(const ExampleSet& examples, const LearnOptions& options, bool* fallback) {
    const FitTargets targets = transform_observed(examples, options.smoothing);
    ConfidenceModel model;
    model.window = options.window;
    bool failed = false;
    switch (options.variant) {
        case ConfVariant::Static:
            model.alpha = targets.overall;
            break;
        case ConfVariant::FOnly:
        case ConfVariant::FPlusG: {
            const RecencyFit f = fit_recency(targets.recency, targets.overall);
            model.alpha = f.alpha;
            model.lambda = f.lambda;
            model.phi = f.phi;
            failed = f.fallback;
            if (options.variant == ConfVariant::FPlusG) {
                const FrequencyFit g = fit_frequency(targets.frequency, model);
                model.rho = g.rho;
                model.kappa = g.kappa;
                model.gamma = g.gamma;
            }
            break;
        }
        case ConfVariant::GOnly: {
            const FrequencyFit g = fit_frequency(targets.frequency, model);
            model.rho = g.rho;
            model.kappa = g.kappa;
            model.gamma = g.gamma;
            failed = g.fallback;
            break;
        }
    }
    if (fallback) *fallback = failed;
    return model;
}

RuleSet learn_rules(const TemporalIndex& train, const LearnOptions& options, LearnStats* stats) {
    if (options.window < 1) throw std::invalid_argument("window must be >= 1");
    if (options.smoothing < 0.0) throw std::invalid_argument("smoothing must be >= 0");

    std::vector<Rule> candidates;
    if (options.xy_rules) {
        auto xy = enumerate_xy_rules(train, options.min_support, options.threads);
        candidates.insert(candidates.end(), xy.begin(), xy.end());
    }
    if (options.c_rules) {
        const auto constants = frequent_constants(train, options.top_constants);
        auto c = enumerate_c_rules(train, constants, options.min_support, options.window, options.threads);
        candidates.insert(candidates.end(), c.begin(), c.end());
    }

    std::vector<char> keep(candidates.size(), 0);
    std::vector<char> fell_back(candidates.size(), 0);
    parallel_for(candidates.size(), options.threads, [&](std::size_t i) {
        Rule& rule = candidates[i];
        const ExampleSet examples = collect_examples(train, rule, options.window);
        rule.support = examples.size();
        rule.positives = examples.positives();
        if (examples.empty()) return;
        rule.static_confidence = static_cast<double>(examples.positives()) /
                                 (static_cast<double>(examples.size()) + options.smoothing);
        bool fallback = false;
        rule.model = fit_confidence(examples, options, &fallback);
        rule.fit_fallback = fallback;
        fell_back[i] = fallback ? 1 : 0;
        keep[i] = rule.model.peak() >= options.floor ? 1 : 0;
    });

    RuleSet out;
    out.info.window = options.window;
    out.info.smoothing = options.smoothing;
    out.info.conf_variant = std::string(to_string(options.variant));
    out.info.num_relations = train.num_relations() / 2;
    out.info.num_entities = train.num_entities();

    LearnStats local;
    local.candidates = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        local.fallbacks += fell_back[i];
        if (!keep[i]) {
            ++local.dropped;
            continue;
        }
        (candidates[i].kind == RuleKind::Xy ? local.xy : local.c) += 1;
        out.rules.push_back(std::move(candidates[i]));
    }
    if (options.z_rules) {
        auto z = compute_z_confidences(train, options.smoothing);
        local.z = z.size();
        out.rules.insert(out.rules.end(), z.begin(), z.end());
    }
    if (options.f_rules) {
        auto f = compute_f_confidences(train, options.smoothing);
        local.f = f.size();
        out.rules.insert(out.rules.end(), f.begin(), f.end());
    }
    for (auto& rule : out.rules) rule.model.window = options.window;
    std::sort(out.rules.begin(), out.rules.end(), rule_key_less);
    if (stats) *stats = local;
    return out;
}

void write_fit_diagnostics(std::ostream& out, const TemporalIndex& train, const RuleSet& rules,
                           const Vocabulary* vocab) {
    const Timestamp window = rules.info.window;
    for (std::size_t id = 0; id < rules.rules.size(); ++id) {
        const Rule& rule = rules.rules[id];
        if (!rule.fitted()) continue;
        const FitTargets targets = transform_observed(collect_examples(train, rule, window), rules.info.smoothing);
        out << "# rule " << id << '\t' << render(rule, vocab) << '\n';
        out << "recency\tmin_delta\ttarget\tfitted\tcount\n";
        for (const auto& t : targets.recency) {
            out << "recency\t" << t.min_delta << '\t' << t.target << '\t' << rule.model.recency(t.min_delta) << '\t'
                << t.weight << '\n';
        }
        out << "frequency\tmin_delta\tfreq_ratio\tresidual\tfitted_g\tcount\n";
        for (const auto& t : targets.frequency) {
            out << "frequency\t" << t.min_delta << '\t'
                << static_cast<double>(t.window_count) / static_cast<double>(window) << '\t'
                << t.target - rule.model.recency(t.min_delta) << '\t'
                << rule.model.frequency(t.min_delta, t.window_count) << '\t' << t.weight << '\n';
        }
    }
}

}  // namespace tkgr
