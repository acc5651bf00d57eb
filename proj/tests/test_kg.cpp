#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "lokg/error.hpp"
#include "lokg/kg.hpp"
#include "lokg/synth.hpp"
#include "lokg/text.hpp"

using namespace lokg;
using fixtures::lo;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

SimilarityVerdict passed(std::string a, std::string b, double score, Level level = Level::Topic, bool intra = false) {
    SimilarityVerdict v;
    v.id_a = std::move(a);
    v.id_b = std::move(b);
    v.level_a = v.level_b = level;
    v.title_score = v.combined = score;
    v.threshold_used = 0.88;
    v.passed = true;
    v.intra_journey = intra;
    return v;
}

// J1 -> C1 -> T1 -sem- T2 <- C2 <- J2 (plus package/content leaves)
TaxonomyForest two_journeys() {
    std::vector<LearningObject> objs;
    fixtures::append(objs, fixtures::chain("1", "Course one", "Topic one"));
    fixtures::append(objs, fixtures::chain("2", "Course two", "Topic two"));
    return TaxonomyForest::from_objects(objs);
}

std::multiset<std::pair<std::string, std::string>> hierarchy_multiset(const KnowledgeGraph& kg) {
    std::multiset<std::pair<std::string, std::string>> out;
    for (const auto& e : kg.edges()) {
        if (e.kind == EdgeKind::Hierarchical) out.emplace(e.src, e.dst);
    }
    return out;
}

}  // namespace

TEST_CASE("edge kinds parse") {
    CHECK(parse_edge_kind("semantic") == EdgeKind::Semantic);
    CHECK(parse_edge_kind(kSemanticRelation) == EdgeKind::Semantic);
    CHECK(parse_edge_kind("hierarchical") == EdgeKind::Hierarchical);
    CHECK_FALSE(parse_edge_kind("friend").has_value());
}

TEST_CASE("forest only: graph mirrors the hierarchy") {
    const auto f = two_journeys();
    const auto kg = build_kg(f, {});
    CHECK(kg.nodes().size() == f.size());
    CHECK(kg.semantic_edge_count() == 0);
    CHECK(kg.hierarchical_edge_count() == f.hierarchy_edges().size());
    std::multiset<std::pair<std::string, std::string>> want(f.hierarchy_edges().begin(), f.hierarchy_edges().end());
    CHECK(hierarchy_multiset(kg) == want);
    for (const auto& n : kg.nodes()) {
        CHECK(n.level == f.at(n.id).level);
        CHECK(n.label == clean_text(f.at(n.id).title));
    }
}

TEST_CASE("one passed verdict adds exactly one semantic edge") {
    const auto f = two_journeys();
    const auto base = build_kg(f, {});
    const auto kg = build_kg(f, {passed("1-t", "2-t", 0.93)});
    CHECK(kg.semantic_edge_count() == 1);
    CHECK(kg.edges().size() == base.edges().size() + 1);
    CHECK(hierarchy_multiset(kg) == hierarchy_multiset(base));
    const auto& e = kg.edges().back();
    CHECK(e.kind == EdgeKind::Semantic);
    CHECK(e.src == "1-t");
    CHECK(e.dst == "2-t");
    CHECK(e.weight == 0.93);
    CHECK(kg.hierarchy_only().edges() == base.edges());
}

TEST_CASE("build errors") {
    const auto f = two_journeys();
    CHECK(code_of([&] { build_kg(f, {passed("1-t", "nowhere", 0.9)}); }) == ErrorCode::DanglingReference);
    auto failed = passed("1-t", "2-t", 0.5);
    failed.passed = false;
    CHECK(code_of([&] { build_kg(f, {failed}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { build_kg(f, {passed("1-t", "2-t", 0.9), passed("1-t", "2-t", 0.9)}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { KnowledgeGraph({{"a", Level::Topic, "a"}}, {{"a", "a", EdgeKind::Semantic, 1.0}}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] {
              KnowledgeGraph({{"a", Level::Topic, "a"}, {"b", Level::Topic, "b"}}, {{"b", "a", EdgeKind::Semantic, 1.0}});
          }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { KnowledgeGraph({{"a", Level::Topic, "a"}}, {{"a", "z", EdgeKind::Hierarchical, 1.0}}); }) ==
          ErrorCode::DanglingReference);
}

TEST_CASE("intra-journey verdicts are skipped unless enabled") {
    std::vector<LearningObject> objs = fixtures::chain("1", "Course one", "Topic one");
    objs.push_back(lo("1-t2", Level::Topic, "Topic one again", "", {"1-c"}));
    objs.push_back(lo("1-p2", Level::EducationalPackage, "P", "", {"1-t2"}));
    objs.push_back(lo("1-e2", Level::EducationalContent, "E", "", {"1-p2"}));
    const auto f = TaxonomyForest::from_objects(objs);
    const std::vector<SimilarityVerdict> vs = {passed("1-t", "1-t2", 0.95, Level::Topic, true)};
    CHECK(build_kg(f, vs).semantic_edge_count() == 0);
    KgBuildOptions with;
    with.include_intra_journey = true;
    const auto kg = build_kg(f, vs, with);
    CHECK(kg.semantic_edge_count() == 1);
    CHECK(kg.provenance().config_hash != build_kg(f, vs).provenance().config_hash);
}

TEST_CASE("completion is monotone on the synthetic corpus") {
    const auto corpus = generate(GeneratorSpec{});
    const auto f = filter_dataset(corpus.forest).forest;
    // a handful of hand-made cross-journey verdicts between Topics
    std::vector<std::string> topics;
    for (const auto& [id, o] : f.objects()) {
        if (o.level == Level::Topic) topics.push_back(id);
    }
    std::vector<SimilarityVerdict> vs;
    for (std::size_t i = 0; i + 1 < topics.size() && vs.size() < 10; i += 7) {
        if (f.journeys_of(topics[i]) != f.journeys_of(topics[i + 1])) vs.push_back(passed(topics[i], topics[i + 1], 0.9));
    }
    REQUIRE_FALSE(vs.empty());
    const auto kg = build_kg(f, vs);
    CHECK(kg.nodes().size() == f.size());
    CHECK(kg.edges().size() == f.hierarchy_edges().size() + vs.size());
}

TEST_CASE("build twice gives byte-identical serializations") {
    const auto f = two_journeys();
    const std::vector<SimilarityVerdict> vs = {passed("1-t", "2-t", 0.91), passed("1-c", "2-c", 0.9, Level::Course)};
    CHECK(serialize_kg(build_kg(f, vs)) == serialize_kg(build_kg(f, vs)));
    CHECK(fnv1a64(serialize_kg(build_kg(f, vs))) == fnv1a64(serialize_kg(build_kg(f, vs))));
}

TEST_CASE("provenance records dataset hash and config hash") {
    const auto f = two_journeys();
    KgBuildOptions a;
    a.config_hash = "aaa";
    a.provider_tags = {{"embed", "builtin:hash-tf-256:v1"}};
    KgBuildOptions b = a;
    b.config_hash = "bbb";
    const auto ka = build_kg(f, {}, a);
    CHECK(ka.provenance().dataset_hash == dataset_hash(f));
    CHECK(ka.provenance().provider_tags.at("embed") == "builtin:hash-tf-256:v1");
    CHECK(ka.provenance().config_hash != build_kg(f, {}, b).provenance().config_hash);
}

TEST_CASE("journey paths on the six-node fixture") {
    const auto f = two_journeys();
    const auto kg = build_kg(f, {passed("1-t", "2-t", 0.9)});
    const auto paths = journey_paths(kg, "1-j", "2-j", 10);
    REQUIRE(paths.size() == 1);
    const auto& p = paths[0];
    CHECK(p.nodes == std::vector<std::string>{"1-j", "1-c", "1-t", "2-t", "2-c", "2-j"});
    CHECK(p.nodes.size() - 2 == 4);  // learning objects bridged
    CHECK(p.length() == 5);
    CHECK(p.kinds == std::vector<EdgeKind>{EdgeKind::Hierarchical, EdgeKind::Hierarchical, EdgeKind::Semantic,
                                           EdgeKind::Hierarchical, EdgeKind::Hierarchical});
    CHECK(journey_paths(kg, "1-j", "2-j", 0).empty());
    CHECK(journey_paths(kg, "1-j", "2-j", 4).empty());
    CHECK(journey_paths(build_kg(f, {}), "1-j", "2-j", 10).empty());
    CHECK(code_of([&] { journey_paths(kg, "1-j", "1-c", 5); }) == ErrorCode::NotAJourney);
}

TEST_CASE("journey paths with two bridges") {
    // two semantic edges give two distinct routes
    const auto f = two_journeys();
    const auto kg = build_kg(f, {passed("1-t", "2-t", 0.9), passed("1-c", "2-c", 0.9, Level::Course)});
    const auto paths = journey_paths(kg, "1-j", "2-j", 10);
    std::set<std::vector<std::string>> got;
    for (const auto& p : paths) got.insert(p.nodes);
    const std::set<std::vector<std::string>> want = {
        {"1-j", "1-c", "2-c", "2-j"},
        {"1-j", "1-c", "1-t", "2-t", "2-c", "2-j"},
    };
    CHECK(got == want);
}

TEST_CASE("exports") {
    const auto f = two_journeys();
    const auto kg = build_kg(f, {passed("1-t", "2-t", 0.9)});
    const auto gml = to_graphml(kg);
    CHECK(gml.find("<key id=\"level\"") != std::string::npos);
    CHECK(gml.find("<key id=\"kind\"") != std::string::npos);
    CHECK(gml.find("<key id=\"weight\"") != std::string::npos);
    CHECK(gml.find("semantic") != std::string::npos);
    const auto csv = to_edge_list(kg);
    CHECK(csv.rfind("src,dst,kind,weight\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(kg.edges().size() + 1));
}

TEST_CASE("native document round-trips exactly") {
    const auto f = filter_dataset(generate(GeneratorSpec{}).forest).forest;
    KgBuildOptions opts;
    opts.config_hash = "abc";
    opts.provider_tags = {{"embed", "x"}, {"detect", "y"}};
    std::vector<std::string> topics;
    for (const auto& [id, o] : f.objects()) {
        if (o.level == Level::Topic) topics.push_back(id);
    }
    const auto kg = build_kg(f, {passed(topics[0], topics[5], 0.1 + 0.2)}, opts);
    const auto text = serialize_kg(kg);
    const auto back = parse_kg(text);
    CHECK(back == kg);
    CHECK(serialize_kg(back) == text);
    CHECK(code_of([] { parse_kg("{\"format\": \"other\"}"); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { parse_kg("not json"); }) == ErrorCode::SchemaError);
}
