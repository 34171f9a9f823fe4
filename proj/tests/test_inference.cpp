#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "tkgrules/dataset.hpp"
#include "tkgrules/inference.hpp"
#include "tkgrules/learner.hpp"

using namespace tkgr;

namespace {

struct Fixture {
    std::vector<Quadruple> aug;
    TemporalIndex index;
    RuleSet rules;
};

Fixture random_fixture(std::uint64_t seed, testing::RandomGraphSpec spec) {
    std::mt19937_64 rng(seed);
    auto aug = augment_with_inverses(testing::random_quads(rng, spec), spec.relations);
    auto index = TemporalIndex::build(aug, spec.entities, 2 * spec.relations);
    LearnOptions opts;
    opts.min_support = 1;
    opts.top_constants = 5;
    opts.threads = 1;
    auto rules = learn_rules(index, opts);
    return {std::move(aug), std::move(index), std::move(rules)};
}

// Five xy rules from distinct body relations that all fire for (0, 0, ?, 351)
// on candidate 1 with the given flat confidences.
RuleSet table_rules(const std::vector<double>& confs) {
    RuleSet rs;
    rs.info.num_relations = 6;
    rs.info.num_entities = 3;
    for (std::size_t i = 0; i < confs.size(); ++i) {
        Rule r = Rule::xy(0, static_cast<RelationId>(i + 1));
        r.model.alpha = confs[i];
        rs.rules.push_back(r);
    }
    return rs;
}

}  // namespace

TEST_CASE("aggregate: arithmetic examples") {
    const std::vector<double> single{0.7};
    CHECK(aggregate(single, 5, 0.3) == doctest::Approx(0.7));
    const std::vector<double> two{0.5, 0.4};
    CHECK(aggregate(two, 5, 1.0) == doctest::Approx(0.70));
    CHECK(aggregate(two, 5, 0.5) == doctest::Approx(0.60));
    CHECK(aggregate(two, 1, 1.0) == doctest::Approx(0.5));
    CHECK(aggregate(two, 5, 0.0) == doctest::Approx(0.5));
    CHECK(aggregate(std::vector<double>{}, 5, 0.9) == 0.0);
}

TEST_CASE("property: aggregate bounds and monotone insertion") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        std::vector<double> s(1 + rng() % 8);
        for (auto& v : s) v = unit(rng);
        std::sort(s.begin(), s.end(), std::greater<>());
        const std::size_t h = 1 + rng() % 6;
        const double d = unit(rng);
        const double base = aggregate(s, h, d);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
        CHECK(base == doctest::Approx(testing::brute_aggregate(s, h, d)));
        CHECK(aggregate(s, 1, d) == doctest::Approx(s.front()).epsilon(1e-12));
        auto more = s;
        more.push_back(unit(rng));
        std::sort(more.begin(), more.end(), std::greater<>());
        CHECK(aggregate(more, h, d) >= base - 1e-15);
    }
}

TEST_CASE("fire_rules: table-style query") {
    const std::vector<double> confs{0.41, 0.40, 0.17, 0.13, 0.13};
    auto rules = table_rules(confs);
    std::vector<Quadruple> quads;
    for (RelationId b = 1; b <= 5; ++b) quads.push_back({0, b, 1, 350});
    quads.push_back({0, 1, 2, 200});
    auto index = TemporalIndex::build(augment_with_inverses(quads, 6), 3, 12);
    RuleIndex ri(rules);
    InferenceParams params;
    auto scores = fire_rules(index, ri, {0, 0, 351}, params);
    REQUIRE(scores.count(1));
    std::vector<double> got;
    for (const auto& h : scores.at(1)) got.push_back(h.confidence);
    CHECK(got == confs);
    auto ranking = rank(scores, params);
    CHECK(ranking.front().entity == 1);

    auto e = explain({0, 0, 351}, 1, scores, rules, params);
    CHECK(e.rows.size() == 5);
    std::vector<double> row_confs;
    for (const auto& r : e.rows) {
        row_confs.push_back(r.confidence);
        CHECK(r.has_components);
        CHECK(r.min_delta == 1);
        CHECK(r.confidence == doctest::Approx(r.f + r.g));
    }
    CHECK(aggregate(row_confs, params.top_h, params.decay) == e.score);
    CHECK(e.score == ranking.front().score);

    auto j = nlohmann::json::parse(explanation_to_json(e));
    CHECK(j["rules"].size() == 5);
    CHECK(j["rules"][0]["window"] == 50);
    CHECK_THROWS_AS(explain({0, 0, 351}, 0, scores, rules, params), std::out_of_range);
}

TEST_CASE("fire_rules: top-H truncation keeps the best hits") {
    auto rules = table_rules({0.1, 0.5, 0.3, 0.9, 0.2});
    std::vector<Quadruple> quads;
    for (RelationId b = 1; b <= 5; ++b) quads.push_back({0, b, 1, 10});
    auto index = TemporalIndex::build(augment_with_inverses(quads, 6), 3, 12);
    InferenceParams params{2, 0.9};
    auto scores = fire_rules(index, RuleIndex(rules), {0, 0, 11}, params);
    REQUIRE(scores.at(1).size() == 2);
    CHECK(scores.at(1)[0].confidence == 0.9);
    CHECK(scores.at(1)[1].confidence == 0.5);
}

TEST_CASE("fire_rules: static rules and explanations without components") {
    RuleSet rs;
    rs.info.num_relations = 1;
    Rule z = Rule::z(0, 2);
    z.static_confidence = 0.25;
    Rule f = Rule::f(0, 1, 3);
    f.static_confidence = 0.5;
    rs.rules = {z, f};
    auto index = TemporalIndex::build({}, 4, 2);
    InferenceParams params;
    auto scores = fire_rules(index, RuleIndex(rs), {0, 0, 5}, params);
    CHECK(scores.size() == 1);
    auto e = explain({0, 0, 5}, 2, scores, rs, params);
    REQUIRE(e.rows.size() == 1);
    CHECK_FALSE(e.rows[0].has_components);
    CHECK(e.score == 0.25);
    auto j = nlohmann::json::parse(explanation_to_json(e));
    CHECK_FALSE(j["rules"][0].contains("f"));
    CHECK(fire_rules(index, RuleIndex(rs), {1, 0, 5}, params).size() == 2);
}

TEST_CASE("fire_rules: empty rule set and filters") {
    auto fx = random_fixture(1, {10, 2, 12, 150});
    RuleSet empty;
    CHECK(fire_rules(fx.index, RuleIndex(empty), {0, 0, 12}, {}).empty());
    CHECK(fire_rules(fx.index, RuleIndex(fx.rules, RuleTypeFilter::none()), {0, 0, 12}, {}).empty());
    CHECK(rank({}, {}).empty());
}

TEST_CASE("rule type filter parsing") {
    auto f = RuleTypeFilter::parse("rec,z");
    CHECK(f.recurrent);
    CHECK_FALSE(f.xy);
    CHECK(f.z);
    CHECK(f.to_string() == "rec,z");
    CHECK(RuleTypeFilter::parse("xy").recurrent);
    CHECK(RuleTypeFilter::parse("all").to_string() == "xy,c,z,f");
    CHECK(RuleTypeFilter::parse("none").to_string() == "none");
    CHECK_THROWS(RuleTypeFilter::parse("rec,q"));
}

TEST_CASE("rank: ties by ascending id") {
    CandidateScores scores;
    RuleHit h;
    h.confidence = 0.5;
    scores[7] = {h};
    scores[3] = {h};
    h.confidence = 0.6;
    scores[9] = {h};
    auto r = rank(scores, {});
    REQUIRE(r.size() == 3);
    CHECK(r[0].entity == 9);
    CHECK(r[1].entity == 3);
    CHECK(r[2].entity == 7);
}

TEST_CASE("property: fired candidates match every rule applied directly") {
    for (std::uint64_t seed : {2u, 3u, 4u}) {
        testing::RandomGraphSpec spec{10, 2, 14, 200};
        auto fx = random_fixture(seed, spec);
        testing::BruteGraph g(fx.aug, spec.entities, 2 * spec.relations);
        RuleIndex ri(fx.rules);
        InferenceParams params;
        for (RelationId p = 0; p < 4; ++p) {
            for (EntityId s = 0; s < spec.entities; ++s) {
                for (Timestamp t : {Timestamp{5}, Timestamp{14}}) {
                    const Query q{s, p, t};
                    auto got = fire_rules(fx.index, ri, q, params);
                    auto expect = testing::brute_fire(g, fx.rules, q);
                    REQUIRE(got.size() == expect.size());
                    for (const auto& [cand, confs] : expect) {
                        REQUIRE(got.count(cand));
                        const auto& hits = got.at(cand);
                        CHECK(hits.size() == std::min(confs.size(), params.top_h));
                        for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].confidence == confs[i]);
                        CHECK(aggregate(hits, params.top_h, params.decay) ==
                              doctest::Approx(testing::brute_aggregate(confs, params.top_h, params.decay)));
                    }
                }
            }
        }
    }
}

TEST_CASE("property: ranking is invariant under entity relabelling") {
    testing::RandomGraphSpec spec{10, 2, 14, 200};
    std::mt19937_64 rng(8);
    auto quads = testing::random_quads(rng, spec);
    std::vector<EntityId> perm(spec.entities);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto permuted = quads;
    for (auto& q : permuted) {
        q.subject = perm[q.subject];
        q.object = perm[q.object];
    }
    LearnOptions opts;
    opts.min_support = 1;
    opts.c_rules = false;
    opts.threads = 1;
    auto ia = TemporalIndex::build(augment_with_inverses(quads, 2), spec.entities, 4);
    auto ib = TemporalIndex::build(augment_with_inverses(permuted, 2), spec.entities, 4);
    auto ra = learn_rules(ia, opts);
    auto rb = learn_rules(ib, opts);
    RuleIndex xa(ra), xb(rb);
    for (EntityId s = 0; s < spec.entities; ++s) {
        auto sa = rank(fire_rules(ia, xa, {s, 0, 14}, {}), {});
        auto sb = rank(fire_rules(ib, xb, {perm[s], 0, 14}, {}), {});
        REQUIRE(sa.size() == sb.size());
        std::map<EntityId, double> mb;
        for (const auto& c : sb) mb[c.entity] = c.score;
        for (const auto& c : sa) CHECK(mb.at(perm[c.entity]) == doctest::Approx(c.score).epsilon(1e-12));
        if (!sa.empty()) CHECK(mb.at(perm[sa.front().entity]) == sb.front().score);
    }
}
