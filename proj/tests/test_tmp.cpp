#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "lokg/error.hpp"
#include "lokg/synth.hpp"
#include "lokg/text.hpp"
#include "lokg/tmp.hpp"
#include "oracles.hpp"

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

SimilarityEngine builtin_engine(TmpConfig config = {}) { return SimilarityEngine(builtin_providers(), config); }

std::set<std::size_t> buckets(const std::string& text) {
    std::set<std::size_t> out;
    for (const auto& f : builtin_features(text)) out.insert(builtin_bucket(f));
    return out;
}

std::set<std::pair<std::string, std::string>> passed_pairs(const std::vector<SimilarityVerdict>& vs) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& v : vs) {
        if (v.passed) out.emplace(v.id_a, v.id_b);
    }
    return out;
}

GeneratorSpec small_spec() {
    GeneratorSpec spec;
    spec.journeys = 8;
    return spec;
}

}  // namespace

TEST_CASE("clean flags empty results and takes declared languages") {
    const auto c = clean("Hello ### World!!");
    CHECK(c.cleaned == "Hello World!");
    CHECK(c.lang.lang == "en");
    const auto e = clean("@@@@");
    CHECK(e.empty());
    CHECK(e.lang.lang.empty());
    const auto d = clean("Anything", nullptr, std::string("de"));
    CHECK(d.lang.lang == "de");
    CHECK(d.lang.confidence == 1.0);
}

TEST_CASE("cosine kernel") {
    const std::vector<double> a{1.0, 1.0}, b{1.0, 0.0}, z{0.0, 0.0}, three{1.0, 2.0, 3.0};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.70710678).epsilon(1e-9));
    CHECK(std::abs(cosine_similarity(a, b) - 1.0 / std::sqrt(2.0)) <= 1e-15);
    CHECK(cosine_similarity(a, z) == 0.0);
    CHECK(code_of([&] { cosine_similarity(a, three); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("candidate phrases strip stopwords at the edges") {
    CHECK(candidate_phrases("care of the elderly") == std::vector<std::string>{"care", "elderly"});
    CHECK(candidate_phrases("wound care. basic hygiene") ==
          std::vector<std::string>{"basic", "basic hygiene", "care", "hygiene", "wound", "wound care"});
}

TEST_CASE("one repeated phrase gives a single topic") {
    BuiltinEmbedder emb;
    const auto t = extract_topics(clean("elderly care"), 5, emb);
    REQUIRE(t.k() == 1);
    CHECK(t.topics[0].phrase == "elderly care");
    const auto rep = extract_topics(clean("Elderly care. Elderly care."), 5, emb);
    REQUIRE(rep.k() == 1);
    CHECK(rep.topics[0].phrase == "elderly care");
}

TEST_CASE("k_max 1 picks the argmax of phrase-to-document cosine") {
    BuiltinEmbedder emb;
    const std::string desc = "Safe lifting techniques protect the back of care workers during transfers.";
    const auto cleaned = clean(desc);
    const auto t = extract_topics(cleaned, 1, emb);
    REQUIRE(t.k() == 1);
    // brute force over every candidate
    const auto doc = BuiltinEmbedder::embed_one(cleaned.cleaned);
    std::string best;
    double best_sim = -2.0;
    for (const auto& p : candidate_phrases(cleaned.cleaned)) {
        const double s = cosine(BuiltinEmbedder::embed_one(p), doc);
        if (s > best_sim || (s == best_sim && p < best)) {
            best = p;
            best_sim = s;
        }
    }
    CHECK(t.topics[0].phrase == best);
}

TEST_CASE("two disjoint subjects give one topic each and MMR picks are argmaxes") {
    BuiltinEmbedder emb;
    const std::string desc = "Tomato seedlings need greenhouse warmth. Invoice ledger bookkeeping quarterly.";
    const auto cleaned = clean(desc);
    const auto t = extract_topics(cleaned, 2, emb);
    REQUIRE(t.k() == 2);
    const std::set<std::string> garden = {"tomato", "seedlings", "need", "greenhouse", "warmth"};
    auto subject_of = [&](const std::string& phrase) {
        return garden.count(tokenize(phrase).front()) ? 0 : 1;
    };
    CHECK(subject_of(t.topics[0].phrase) != subject_of(t.topics[1].phrase));

    // exhaustive evaluation of the selection objective at each step
    const auto phrases = candidate_phrases(cleaned.cleaned);
    const auto doc = BuiltinEmbedder::embed_one(cleaned.cleaned);
    std::vector<double> doc_sim;
    std::vector<EmbeddingVector> vecs;
    for (const auto& p : phrases) {
        vecs.push_back(BuiltinEmbedder::embed_one(p));
        doc_sim.push_back(cosine(vecs.back(), doc));
    }
    std::vector<std::vector<double>> pair(phrases.size(), std::vector<double>(phrases.size()));
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        for (std::size_t j = 0; j < phrases.size(); ++j) pair[i][j] = cosine(vecs[i], vecs[j]);
    }
    std::vector<std::size_t> picks;
    for (const auto& topic : t.topics) {
        picks.push_back(static_cast<std::size_t>(std::find(phrases.begin(), phrases.end(), topic.phrase) - phrases.begin()));
    }
    const auto steps = oracle::mmr_objectives(doc_sim, pair, picks, 0.5);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double best = *std::max_element(steps[s].begin(), steps[s].end());
        CHECK(steps[s][picks[s]] == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("mmr_select: ties go to the smaller label, stops without gain") {
    const std::vector<double> doc = {0.5, 0.5, 0.1};
    const std::vector<std::vector<double>> pair = {{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const std::vector<std::string> labels = {"b", "a", "c"};
    const auto pick = mmr_select(doc, pair, labels, 3, 0.5);
    REQUIRE(pick.size() == 2);
    CHECK(pick[0] == 1);
    CHECK(pick[1] == 2);
}

TEST_CASE("extract_topics rejects empty descriptions") {
    BuiltinEmbedder emb;
    CHECK(code_of([&] { extract_topics(clean(""), 5, emb); }) == ErrorCode::EmptyDescription);
}

TEST_CASE("description similarity: intersection matrix average") {
    CHECK(best_match_average({{1.0, 0.2}, {0.3, 0.8}}) == 0.9);
    CHECK(best_match_average({{0.37}}) == 0.37);

    BuiltinEmbedder emb;
    const auto a = extract_topics(clean("Wound dressing and infection control in home care."), 5, emb);
    CHECK(std::abs(description_similarity(a, a) - 1.0) <= 1e-9);

    TopicSet one{"x", "en", {{"p", {{1.0, 0.0}, "t"}}}};
    TopicSet two{"y", "en", {{"q", {{0.6, 0.8}, "t"}}}};
    CHECK(description_similarity(one, two) == doctest::Approx(0.6).epsilon(1e-12));

    TopicSet empty{"z", "en", {}};
    CHECK(code_of([&] { description_similarity(one, empty); }) == ErrorCode::EmptyTopicSet);
    TopicSet other_tag{"w", "en", {{"q", {{0.6, 0.8}, "u"}}}};
    CHECK(code_of([&] { description_similarity(one, other_tag); }) == ErrorCode::ProviderTagMismatch);
}

TEST_CASE("combiner arithmetic and threshold") {
    TmpConfig cfg;
    const auto both = combine_scores(0.9, 0.9, cfg);
    CHECK(both.combined == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(both.combined >= cfg.threshold);
    const auto title_only = combine_scores(1.0, std::nullopt, cfg);
    CHECK(title_only.combined == 1.0);
    CHECK(title_only.combined >= cfg.threshold);
    const auto mixed = combine_scores(0.92, 0.80, cfg);
    CHECK(mixed.combined == doctest::Approx(0.86).epsilon(1e-12));
    CHECK_FALSE(mixed.combined >= cfg.threshold);
}

TEST_CASE("title similarity: identical titles and disjoint features") {
    auto engine = builtin_engine();
    const auto a = lo("a", Level::Topic, "Wound care basics");
    const auto b = lo("b", Level::Topic, "Wound care basics");
    CHECK(std::abs(engine.title_similarity(a, b) - 1.0) <= 1e-9);

    // find two words whose hashed features land in disjoint buckets
    const std::vector<std::string> words = {"zebra", "quilt", "mango", "fjord", "oxbow", "kiwi", "lymph", "gauze"};
    std::optional<std::pair<std::string, std::string>> disjoint;
    for (std::size_t i = 0; i < words.size() && !disjoint; ++i) {
        for (std::size_t j = i + 1; j < words.size() && !disjoint; ++j) {
            const auto x = buckets(words[i]), y = buckets(words[j]);
            std::vector<std::size_t> common;
            std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
            if (common.empty()) disjoint.emplace(words[i], words[j]);
        }
    }
    REQUIRE(disjoint.has_value());
    const auto x = lo("x", Level::Topic, disjoint->first);
    const auto y = lo("y", Level::Topic, disjoint->second);
    CHECK(std::abs(engine.title_similarity(x, y)) <= 1e-9);

    const auto empty = lo("e", Level::Topic, "###");
    CHECK(code_of([&] { engine.title_similarity(a, empty); }) == ErrorCode::EmptyTitle);
}

TEST_CASE("German titles are translated before comparison") {
    auto engine = builtin_engine();
    const auto de = lo("d", Level::Topic, "Kommunikation in Altenpflege", "", {}, std::string("de"));
    const auto en = lo("e", Level::Topic, "communication in elderly-care", "", {}, std::string("en"));
    CHECK(std::abs(engine.title_similarity(de, en) - 1.0) <= 1e-9);
}

TEST_CASE("decide: errors, symmetry, self-similarity") {
    auto engine = builtin_engine();
    const auto a = lo("a", Level::Topic, "Hand hygiene", "Washing hands prevents infections in hospitals.");
    const auto b = lo("b", Level::Topic, "Hand disinfection", "Disinfecting hands prevents infections on wards.");
    const auto c = lo("c", Level::Course, "Hygiene course");
    CHECK(code_of([&] { engine.decide(a, a); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { engine.decide(a, c); }) == ErrorCode::LevelNotEnabled);
    const auto ab = engine.decide(a, b);
    const auto ba = engine.decide(b, a);
    CHECK(ab == ba);
    CHECK(ab.id_a == "a");
    CHECK(ab.passed == (ab.combined >= ab.threshold_used));
    REQUIRE(ab.desc_score.has_value());
    CHECK(ab.combined == doctest::Approx(0.5 * ab.title_score + 0.5 * *ab.desc_score).epsilon(1e-12));

    const auto twin = lo("a2", Level::Topic, a.title, a.description);
    const auto self = engine.decide(a, twin);
    CHECK(std::abs(self.title_score - 1.0) <= 1e-9);
    CHECK(std::abs(*self.desc_score - 1.0) <= 1e-9);
    CHECK(self.passed);

    TmpConfig cross;
    cross.enabled_levels.insert(make_level_pair(Level::Course, Level::Topic));
    auto wide = builtin_engine(cross);
    CHECK_NOTHROW(wide.decide(a, c));
}

TEST_CASE("title-only fallback when a description is missing") {
    auto engine = builtin_engine();
    const auto a = lo("a", Level::Topic, "Hand hygiene", "Washing hands prevents infections.");
    const auto b = lo("b", Level::Topic, "Hand hygiene");
    const auto v = engine.decide(a, b);
    CHECK_FALSE(v.desc_score.has_value());
    CHECK(v.combined == v.title_score);
    CHECK(v.passed);
}

TEST_CASE("mine: identical titles across journeys give one passed verdict") {
    std::vector<LearningObject> objs;
    fixtures::append(objs, fixtures::chain("a", "Nursing course", "Pressure ulcer prevention"));
    fixtures::append(objs, fixtures::chain("b", "Cooking course", "Pressure ulcer prevention"));
    const auto forest = TaxonomyForest::from_objects(objs);
    auto engine = builtin_engine();
    const auto r = mine_relations(forest, engine);
    CHECK(r.candidate_pairs == 2);
    CHECK(r.evaluated.size() == 2);
    REQUIRE(r.passed.size() == 1);
    CHECK(r.passed[0].id_a == "a-t");
    CHECK(r.passed[0].id_b == "b-t");
    CHECK_FALSE(r.passed[0].intra_journey);

    TmpConfig high;
    high.threshold = std::nextafter(1.0, 2.0) + 1e-9;
    auto strict = builtin_engine(high);
    CHECK(mine_relations(forest, strict).passed.empty());
}

TEST_CASE("mine: equals brute-force decisions over all pairs") {
    const auto corpus = generate(small_spec());
    const auto forest = filter_dataset(corpus.forest).forest;
    auto engine = builtin_engine();
    const auto r = mine_relations(forest, engine);
    CHECK(r.failures.empty());

    auto fresh = builtin_engine();
    std::vector<const LearningObject*> cands;
    for (const auto& [id, o] : forest.objects()) {
        if (o.level == Level::Course || o.level == Level::Topic) cands.push_back(&o);
    }
    std::size_t pairs = 0;
    std::set<std::pair<std::string, std::string>> expected;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        for (std::size_t j = i + 1; j < cands.size(); ++j) {
            if (cands[i]->level != cands[j]->level) continue;
            ++pairs;
            const auto v = fresh.decide(*cands[i], *cands[j]);
            if (v.passed) expected.emplace(v.id_a, v.id_b);
        }
    }
    CHECK(r.candidate_pairs == pairs);
    CHECK(passed_pairs(r.passed) == expected);
    CHECK(std::is_sorted(r.passed.begin(), r.passed.end(), verdict_order));
}

TEST_CASE("mine: threshold monotonicity and deterministic ledgers") {
    const auto forest = filter_dataset(generate(small_spec()).forest).forest;
    std::set<std::pair<std::string, std::string>> previous;
    bool first = true;
    for (int i = 0; i < 20; ++i) {
        TmpConfig cfg;
        cfg.threshold = 0.5 + 0.025 * i;
        auto engine = builtin_engine(cfg);
        const auto now = passed_pairs(mine_relations(forest, engine).passed);
        if (!first) CHECK(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
        previous = now;
        first = false;
    }

    auto e1 = builtin_engine();
    auto e2 = builtin_engine();
    CHECK(format_verdict_ledger(mine_relations(forest, e1).evaluated) ==
          format_verdict_ledger(mine_relations(forest, e2).evaluated));
}

TEST_CASE("mine: jobs do not change the output") {
    const auto forest = filter_dataset(generate(small_spec()).forest).forest;
    TmpConfig one;
    one.jobs = 1;
    TmpConfig four;
    four.jobs = 4;
    auto a = builtin_engine(one);
    auto b = builtin_engine(four);
    CHECK(mine_relations(forest, a).evaluated == mine_relations(forest, b).evaluated);
}

TEST_CASE("mine: blocking only removes candidate pairs") {
    const auto forest = filter_dataset(generate(small_spec()).forest).forest;
    TmpConfig blocked;
    blocked.blocking = true;
    auto full = builtin_engine();
    auto part = builtin_engine(blocked);
    const auto rf = mine_relations(forest, full);
    const auto rp = mine_relations(forest, part);
    CHECK(rp.candidate_pairs <= rf.candidate_pairs);
    const auto pf = passed_pairs(rf.passed), pp = passed_pairs(rp.passed);
    CHECK(std::includes(pf.begin(), pf.end(), pp.begin(), pp.end()));
}

TEST_CASE("mine: reused decisions are returned unchanged") {
    const auto forest = filter_dataset(generate(small_spec()).forest).forest;
    auto engine = builtin_engine();
    const auto first = mine_relations(forest, engine);
    DecisionCache reuse;
    for (const auto& v : first.evaluated) reuse.emplace(std::make_pair(v.id_a, v.id_b), v);
    auto again = builtin_engine();
    const auto second = mine_relations(forest, again, &reuse);
    CHECK(second.reused_decisions == first.evaluated.size());
    CHECK(second.evaluated == first.evaluated);
}

TEST_CASE("verdict ledger and json round trip") {
    SimilarityVerdict v{"a", "b", Level::Topic, Level::Topic, 0.1 + 0.2, std::nullopt, 0.3, false, 0.88, true};
    SimilarityVerdict w{"c", "d", Level::Course, Level::Course, 0.91, 0.87, 0.89, true, 0.88, false};
    const std::vector<SimilarityVerdict> vs = {v, w};
    const auto text = format_verdict_ledger(vs);
    CHECK(text.rfind("id_a,id_b,level_a,level_b,title_score,desc_score,combined,threshold,passed,intra_journey\n", 0) ==
          0);
    CHECK(parse_verdict_ledger(text) == vs);
    CHECK(verdict_from_json(verdict_to_json(w)) == w);
    CHECK(verdict_from_json(verdict_to_json(v)) == v);
}

TEST_CASE("embedding cache persists and reports hits") {
    fixtures::TempDir dir("lokg-cache");
    const auto path = (dir.path / "emb.bin").string();
    EmbeddingCache cache;
    cache.load(path);  // missing file: no-op
    CHECK(cache.size() == 0);
    const auto v = BuiltinEmbedder::embed_one("care");
    cache.put(std::string(kBuiltinEmbedTag), "care", v);
    cache.save(path);

    EmbeddingCache back;
    back.load(path);
    CHECK(back.size() == 1);
    CHECK(back.get(std::string(kBuiltinEmbedTag), "care") == v);
    CHECK_FALSE(back.get("other-tag", "care").has_value());
    CHECK(back.hits() == 1);
    CHECK(back.misses() == 1);

    std::ofstream(path, std::ios::binary) << "garbage";
    EmbeddingCache bad;
    CHECK(code_of([&] { bad.load(path); }) == ErrorCode::IoError);
}

TEST_CASE("engine cache serves repeated embeddings") {
    auto cache = std::make_shared<EmbeddingCache>();
    SimilarityEngine engine(builtin_providers(), {}, cache);
    const std::vector<std::string> texts = {"alpha", "beta", "alpha"};
    const auto first = engine.embed_all(texts);
    CHECK(first[0] == first[2]);
    CHECK(cache->size() == 2);
    cache->reset_counters();
    engine.embed_all(texts);
    CHECK(cache->hits() == 3);
    CHECK(cache->misses() == 0);
}

TEST_CASE("tmp config: validation, level pairs, hash") {
    TmpConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(format_level_pairs(c.enabled_levels) == "Course-Course, Topic-Topic");
    CHECK(parse_level_pairs("Topic-Topic, Course-Course") == c.enabled_levels);
    CHECK(parse_level_pairs("Topic-Course") == std::set<LevelPair>{make_level_pair(Level::Course, Level::Topic)});
    CHECK(code_of([] { parse_level_pairs("Topic-Chapter"); }) == ErrorCode::ConfigError);
    TmpConfig d = c;
    d.threshold = 0.9;
    CHECK(d.hash() != c.hash());
    TmpConfig j = c;
    j.jobs = 3;
    CHECK(j.hash() == c.hash());
    TmpConfig bad = c;
    bad.k_max = 0;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
}
