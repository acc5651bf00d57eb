#include "lokg/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "lokg/error.hpp"
#include "lokg/lexicon.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

namespace {

constexpr double kPerJourney[4] = {432.0 / 122.0, 767.0 / 122.0, 2565.0 / 122.0, 7358.0 / 122.0};

std::size_t scaled(std::size_t journeys, int level) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(journeys) * kPerJourney[level]));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(gen_() % n); }
    bool chance(double p) { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p; }

private:
    std::mt19937_64 gen_;
};

std::string make_id(char prefix, std::size_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
    return buf;
}

// Splits `count` children over `parents`: one each when there are enough,
// the rest uniformly at random.
std::vector<std::size_t> spread(std::size_t count, std::size_t parents, Rng& rng) {
    std::vector<std::size_t> owner;
    if (parents == 0) return owner;
    if (count >= parents) {
        for (std::size_t p = 0; p < parents; ++p) owner.push_back(p);
        for (std::size_t i = parents; i < count; ++i) owner.push_back(rng.below(parents));
    } else {
        std::vector<std::size_t> idx(parents);
        for (std::size_t i = 0; i < parents; ++i) idx[i] = i;
        for (std::size_t i = 0; i < count; ++i) {
            std::swap(idx[i], idx[i + rng.below(parents - i)]);
            owner.push_back(idx[i]);
        }
    }
    std::sort(owner.begin(), owner.end());
    return owner;
}

struct Concept {
    std::vector<std::string> title;                            // English words
    std::vector<std::pair<std::string, std::string>> phrases;  // keyphrase bigrams
};

std::vector<Concept> make_concepts(const std::vector<LexiconEntry>& words, std::size_t count, Rng& rng) {
    std::vector<Concept> out;
    std::set<std::pair<std::size_t, std::size_t>> used_titles;
    while (out.size() < count) {
        const auto a = rng.below(words.size());
        auto b = rng.below(words.size() - 1);
        if (b >= a) ++b;
        if (!used_titles.emplace(a, b).second) continue;
        Concept c;
        c.title = {std::string(words[a].en), std::string(words[b].en)};
        std::set<std::pair<std::size_t, std::size_t>> seen;
        while (c.phrases.size() < 3) {
            const auto x = rng.below(words.size());
            auto y = rng.below(words.size() - 1);
            if (y >= x) ++y;
            if (seen.emplace(x, y).second) c.phrases.emplace_back(words[x].en, words[y].en);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string in_language(const std::string& en_word, bool german) {
    if (!german) return en_word;
    const auto de = lexicon_en_to_de(en_word);
    return de ? std::string(*de) : en_word;
}

}  // namespace

void GeneratorSpec::validate() const {
    if (n_domains < 1 || n_domains > lexicon_domain_count()) {
        throw Error(ErrorCode::ConfigError, "n_domains must be in [1, " + std::to_string(lexicon_domain_count()) + "]");
    }
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw Error(ErrorCode::ConfigError, "overlap must be in [0,1]");
    if (!(bilingual_fraction >= 0.0 && bilingual_fraction <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "bilingual_fraction must be in [0,1]");
    }
    if (course_concepts == 0 || topic_concepts == 0) throw Error(ErrorCode::ConfigError, "concept pools must be non-empty");
}

std::size_t GeneratorSpec::course_count() const { return courses.value_or(scaled(journeys, 0)); }
std::size_t GeneratorSpec::topic_count() const { return topics.value_or(scaled(journeys, 1)); }
std::size_t GeneratorSpec::package_count() const { return packages.value_or(scaled(journeys, 2)); }
std::size_t GeneratorSpec::content_count() const { return contents.value_or(scaled(journeys, 3)); }

json GeneratorSpec::to_json() const {
    return {{"seed", seed},
            {"journeys", journeys},
            {"courses", course_count()},
            {"topics", topic_count()},
            {"packages", package_count()},
            {"contents", content_count()},
            {"n_domains", n_domains},
            {"overlap", overlap},
            {"bilingual_fraction", bilingual_fraction},
            {"course_concepts", course_concepts},
            {"topic_concepts", topic_concepts}};
}

GeneratedCorpus generate(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<std::vector<LexiconEntry>> vocab;
    for (int d = 0; d < spec.n_domains; ++d) vocab.push_back(lexicon_domain(d));
    std::vector<std::vector<Concept>> course_concepts, topic_concepts;
    for (int d = 0; d < spec.n_domains; ++d) {
        course_concepts.push_back(make_concepts(vocab[d], spec.course_concepts, rng));
        topic_concepts.push_back(make_concepts(vocab[d], spec.topic_concepts, rng));
    }

    auto foreign_word = [&](int domain) {
        auto other = static_cast<int>(rng.below(static_cast<std::size_t>(spec.n_domains - 1)));
        if (other >= domain) ++other;
        return std::string(vocab[other][rng.below(vocab[other].size())].en);
    };

    std::vector<LearningObject> objects;
    GeneratedCorpus corpus;
    std::set<std::tuple<Level, std::string, std::string>> seen_text;

    // Course/Topic text: concept title, keyphrase list in shuffled order and a filler word.
    auto instantiate = [&](LearningObject& o, const Concept& c, int domain) {
        const bool german = rng.chance(spec.bilingual_fraction);
        // title words first, then keyphrase words
        std::vector<std::string> w = c.title;
        for (const auto& [x, y] : c.phrases) {
            w.push_back(x);
            w.push_back(y);
        }
        if (spec.n_domains > 1 && rng.chance(spec.overlap)) w[rng.below(w.size())] = foreign_word(domain);
        for (auto& word : w) word = in_language(word, german);
        const std::vector<std::string> title(w.begin(), w.begin() + 2);
        std::vector<std::string> phrases;
        for (std::size_t i = 2; i + 1 < w.size(); i += 2) phrases.push_back(w[i] + " " + w[i + 1]);
        for (int attempt = 0;; ++attempt) {
            auto order = phrases;
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
            std::string desc = order[0] + ", " + order[1] + " " + in_language("and", german) + " " + order[2] + ".";
            const auto fillers = attempt < 8 ? 1 : 2;
            for (int f = 0; f < fillers; ++f) {
                desc += " " + in_language(std::string(vocab[domain][rng.below(vocab[domain].size())].en), german);
            }
            desc += ".";
            std::string t;
            for (const auto& w : title) t += (t.empty() ? "" : " ") + w;
            if (seen_text.emplace(o.level, clean_text(t), clean_text(desc)).second) {
                o.title = t;
                o.description = desc;
                break;
            }
        }
        o.title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(o.title[0])));
        o.declared_language = german ? "de" : "en";
    };

    for (std::size_t j = 0; j < spec.journeys; ++j) {
        const int d = static_cast<int>(j % static_cast<std::size_t>(spec.n_domains));
        LearningObject o;
        o.id = make_id('j', j + 1, 4);
        o.level = Level::Journey;
        o.title = "Journey " + std::to_string(j + 1) + " " + std::string(vocab[d][rng.below(vocab[d].size())].en);
        o.declared_language = "en";
        corpus.labels[o.id] = {d, {}};
        objects.push_back(std::move(o));
    }

    auto add_level = [&](Level level, char prefix, int width, std::size_t count, std::size_t parent_begin,
                         std::size_t parent_count, const std::vector<std::vector<Concept>>* pools) {
        const auto owners = spread(count, parent_count, rng);
        for (std::size_t i = 0; i < owners.size(); ++i) {
            const auto& parent = objects[parent_begin + owners[i]];
            const int d = corpus.labels.at(parent.id).domain;
            LearningObject o;
            o.id = make_id(prefix, i + 1, width);
            o.level = level;
            o.parent_ids = {parent.id};
            ObjectLabel label{d, {}};
            if (pools != nullptr) {
                const auto& pool = (*pools)[d];
                const auto ci = rng.below(pool.size());
                label.concept_id = std::string(to_string(level)) + ":" + std::to_string(d) + ":" + std::to_string(ci);
                instantiate(o, pool[ci], d);
            } else if (level == Level::EducationalPackage) {
                o.title = "Materials unit " + std::to_string(i + 1);
                o.declared_language = "en";
            } else {
                o.title = "Resource " + std::to_string(i + 1);
                o.declared_language = "en";
            }
            corpus.labels[o.id] = label;
            objects.push_back(std::move(o));
        }
        return owners.size();
    };

    std::size_t begin = 0, parents = spec.journeys;
    std::size_t next = objects.size();
    add_level(Level::Course, 'c', 4, spec.course_count(), begin, parents, &course_concepts);
    begin = next;
    parents = objects.size() - next;
    next = objects.size();
    add_level(Level::Topic, 't', 5, spec.topic_count(), begin, parents, &topic_concepts);
    begin = next;
    parents = objects.size() - next;
    next = objects.size();
    add_level(Level::EducationalPackage, 'p', 5, spec.package_count(), begin, parents, nullptr);
    begin = next;
    parents = objects.size() - next;
    add_level(Level::EducationalContent, 'e', 6, spec.content_count(), begin, parents, nullptr);

    corpus.forest = TaxonomyForest::from_objects(std::move(objects));
    return corpus;
}

json labels_to_json(const GeneratedCorpus& corpus, const GeneratorSpec& spec) {
    json labels = json::object();
    for (const auto& [id, l] : corpus.labels) {
        json entry = {{"domain", l.domain}};
        if (!l.concept_id.empty()) entry["concept"] = l.concept_id;
        labels[id] = std::move(entry);
    }
    return {{"generator", spec.to_json()}, {"labels", std::move(labels)}};
}

PrecisionResult label_precision(const std::vector<SimilarityVerdict>& verdicts,
                                const std::map<std::string, ObjectLabel>& labels) {
    PrecisionResult r;
    for (const auto& v : verdicts) {
        if (!v.passed || v.intra_journey) continue;
        const auto a = labels.find(v.id_a);
        const auto b = labels.find(v.id_b);
        if (a == labels.end() || b == labels.end()) continue;
        ++r.relations;
        if (a->second.domain == b->second.domain) ++r.same_domain;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

class WordMaker {
public:
    explicit WordMaker(std::uint64_t seed) : rng_(seed) {}

    std::string fresh() {
        static constexpr std::string_view kOnset = "bdfgklmnprstvz";
        static constexpr std::string_view kNucleus = "aeiou";
        while (true) {
            std::string w;
            for (int s = 0; s < 3; ++s) {
                w += kOnset[rng_.below(kOnset.size())];
                w += kNucleus[rng_.below(kNucleus.size())];
            }
            if (!is_stopword(w) && used_.insert(w).second) return w;
        }
    }

    std::string phrase(std::size_t words) {
        std::string out;
        for (std::size_t i = 0; i < words; ++i) out += (i ? " " : "") + fresh();
        return out;
    }

private:
    Rng rng_;
    std::set<std::string> used_;
};

constexpr std::size_t kPhraseWords = 6;

}  // namespace

AssessmentCorpus generate_assessment_corpus(std::size_t pass_units, std::size_t fail_units, std::uint64_t seed) {
    WordMaker words(seed);
    AssessmentCorpus out;
    std::vector<LearningObject> objects;
    std::size_t journey_no = 0, object_no = 0;

    auto object = [&](Level level, std::string title, const std::string& parent) -> const std::string& {
        LearningObject o;
        o.id = make_id(level == Level::Journey ? 'j' : 'o', level == Level::Journey ? ++journey_no : ++object_no, 5);
        o.level = level;
        o.title = std::move(title);
        o.declared_language = "en";
        if (!parent.empty()) o.parent_ids = {parent};
        objects.push_back(std::move(o));
        return objects.back().id;
    };
    // journey -> course -> topic -> package -> content
    auto journey = [&](const std::string& course_title, const std::string& topic_title) {
        const std::string j = object(Level::Journey, "Journey " + words.fresh(), "");
        const std::string c = object(Level::Course, course_title, j);
        const std::string t = object(Level::Topic, topic_title, c);
        const std::string p = object(Level::EducationalPackage, "Package " + words.fresh(), t);
        object(Level::EducationalContent, "Resource " + words.fresh(), p);
    };

    for (std::size_t u = 0; u < pass_units; ++u) {
        const auto shared = words.phrase(kPhraseWords);
        journey(words.phrase(kPhraseWords), shared);
        journey(words.phrase(kPhraseWords), shared + " " + words.fresh());
        out.expected_rows += 1;
        out.expected_passed += 1;
    }
    for (std::size_t u = 0; u < fail_units; ++u) {
        const auto shared = words.phrase(kPhraseWords);
        const auto near = shared + " " + words.fresh();
        journey(shared, shared);
        journey(near, near);
        out.expected_rows += 2;
    }
    out.forest = TaxonomyForest::from_objects(std::move(objects));
    return out;
}

}  // namespace lokg
