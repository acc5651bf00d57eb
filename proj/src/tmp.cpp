#include "lokg/tmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lokg/error.hpp"
#include "lokg/parallel.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

CleanedText clean(std::string_view text, LanguageDetector* detector, const std::optional<std::string>& declared) {
    CleanedText out{std::string(text), clean_text(text), {}};
    if (declared && !declared->empty()) {
        out.lang = {to_lower(*declared), 1.0};
    } else if (!out.cleaned.empty()) {
        if (detector != nullptr) {
            out.lang = detector->detect(out.cleaned);
        } else {
            out.lang = BuiltinLanguageDetector{}.detect_one(out.cleaned);
        }
    }
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different lengths");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

const std::string& TopicSet::provider_tag() const {
    if (topics.empty()) throw Error(ErrorCode::EmptyTopicSet, "topic set of '" + owner_id + "' is empty");
    return topics.front().embedding.provider_tag;
}

std::vector<std::string> candidate_phrases(std::string_view cleaned) {
    std::set<std::string> out;
    for (const auto& seg : segment_words(cleaned)) {
        for (std::size_t i = 0; i < seg.size(); ++i) {
            const bool stop_i = is_stopword(seg[i]);
            if (!stop_i) out.insert(seg[i]);
            if (i + 1 < seg.size() && !stop_i && !is_stopword(seg[i + 1])) out.insert(seg[i] + " " + seg[i + 1]);
        }
    }
    return {out.begin(), out.end()};
}

namespace {
constexpr double kMmrStopEpsilon = 1e-12;
}  // namespace

std::vector<std::size_t> mmr_select(std::span<const double> doc_sim, const std::vector<std::vector<double>>& pair_sim,
                                    std::span<const std::string> labels, std::size_t k, double lambda) {
    const std::size_t n = doc_sim.size();
    std::vector<std::size_t> selected;
    std::vector<bool> used(n, false);
    while (selected.size() < k && selected.size() < n) {
        std::optional<std::size_t> best;
        double best_obj = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (used[c]) continue;
            double penalty = 0.0;
            for (std::size_t s = 0; s < selected.size(); ++s) {
                const double sim = pair_sim[c][selected[s]];
                penalty = s == 0 ? sim : std::max(penalty, sim);
            }
            const double obj = lambda * doc_sim[c] - (1.0 - lambda) * penalty;
            if (!best || obj > best_obj || (obj == best_obj && labels[c] < labels[*best])) {
                best = c;
                best_obj = obj;
            }
        }
        // nothing left that adds relevance beyond what is already covered
        if (!selected.empty() && best_obj <= kMmrStopEpsilon) break;
        used[*best] = true;
        selected.push_back(*best);
    }
    return selected;
}

namespace {

TopicSet select_topics(const std::vector<std::string>& phrases, const std::vector<EmbeddingVector>& phrase_vecs,
                       const EmbeddingVector& doc_vec, std::size_t k_max, double lambda, std::string owner,
                       std::string lang) {
    std::vector<double> doc_sim(phrases.size());
    std::vector<std::vector<double>> pair_sim(phrases.size(), std::vector<double>(phrases.size(), 0.0));
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        doc_sim[i] = cosine(phrase_vecs[i], doc_vec);
        for (std::size_t j = 0; j < i; ++j) pair_sim[i][j] = pair_sim[j][i] = cosine(phrase_vecs[i], phrase_vecs[j]);
        pair_sim[i][i] = 1.0;
    }
    TopicSet set{std::move(owner), std::move(lang), {}};
    for (auto idx : mmr_select(doc_sim, pair_sim, phrases, k_max, lambda)) {
        set.topics.push_back({phrases[idx], phrase_vecs[idx]});
    }
    return set;
}

std::vector<std::string> topic_candidates(std::string_view cleaned_desc) {
    auto phrases = candidate_phrases(cleaned_desc);
    if (phrases.empty()) {
        // nothing but stopwords: fall back to the raw tokens
        auto toks = tokenize(cleaned_desc);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        phrases = std::move(toks);
    }
    return phrases;
}

}  // namespace

TopicSet extract_topics(const CleanedText& desc, std::size_t k_max, Embedder& embedder, double lambda,
                        std::string owner_id) {
    if (desc.empty()) throw Error(ErrorCode::EmptyDescription, "no description text for '" + owner_id + "'");
    if (k_max == 0) throw Error(ErrorCode::InvalidArgument, "k_max must be at least 1");
    const auto phrases = topic_candidates(desc.cleaned);
    const auto phrase_vecs = embedder.embed_batch(phrases);
    const std::string doc_text = desc.cleaned;
    const auto doc_vec = embedder.embed_batch(std::span<const std::string>(&doc_text, 1)).front();
    return select_topics(phrases, phrase_vecs, doc_vec, k_max, lambda, std::move(owner_id), desc.lang.lang);
}

double best_match_average(const std::vector<std::vector<double>>& matrix) {
    if (matrix.empty() || matrix.front().empty()) throw Error(ErrorCode::EmptyTopicSet, "empty similarity matrix");
    const std::size_t rows = matrix.size();
    const std::size_t cols = matrix.front().size();
    double row_sum = 0.0;
    for (const auto& row : matrix) {
        if (row.size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged similarity matrix");
        row_sum += *std::max_element(row.begin(), row.end());
    }
    double col_sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        double best = matrix[0][j];
        for (std::size_t i = 1; i < rows; ++i) best = std::max(best, matrix[i][j]);
        col_sum += best;
    }
    return (row_sum + col_sum) / static_cast<double>(rows + cols);
}

double description_similarity(const TopicSet& a, const TopicSet& b) {
    const auto& tag_a = a.provider_tag();
    const auto& tag_b = b.provider_tag();
    if (tag_a != tag_b) throw Error(ErrorCode::ProviderTagMismatch, "topic sets from '" + tag_a + "' and '" + tag_b + "'");
    std::vector<std::vector<double>> m(a.k(), std::vector<double>(b.k()));
    for (std::size_t i = 0; i < a.k(); ++i) {
        for (std::size_t j = 0; j < b.k(); ++j) m[i][j] = cosine(a.topics[i].embedding, b.topics[j].embedding);
    }
    return best_match_average(m);
}

// ---------------------------------------------------------------------------
// configuration

LevelPair make_level_pair(Level a, Level b) noexcept { return a <= b ? LevelPair{a, b} : LevelPair{b, a}; }

void TmpConfig::validate() const {
    if (!std::isfinite(threshold)) throw Error(ErrorCode::ConfigError, "threshold must be finite");
    if (!(w_title >= 0.0) || !(w_desc >= 0.0)) throw Error(ErrorCode::ConfigError, "combiner weights must be >= 0");
    if (k_max == 0) throw Error(ErrorCode::ConfigError, "k_max must be at least 1");
    if (!(mmr_lambda >= 0.0 && mmr_lambda <= 1.0)) throw Error(ErrorCode::ConfigError, "mmr_lambda must be in [0,1]");
    if (!(blocking_max_df > 0.0 && blocking_max_df <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "blocking_max_df must be in (0,1]");
    }
}

std::set<Level> TmpConfig::enabled_level_set() const {
    std::set<Level> out;
    for (const auto& [a, b] : enabled_levels) {
        out.insert(a);
        out.insert(b);
    }
    return out;
}

json TmpConfig::to_json() const {
    return {{"threshold", threshold},       {"w_title", w_title},
            {"w_desc", w_desc},             {"k_max", k_max},
            {"mmr_lambda", mmr_lambda},     {"levels", format_level_pairs(enabled_levels)},
            {"blocking", blocking},         {"blocking_max_df", blocking_max_df}};
}

std::string TmpConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

std::string format_level_pairs(const std::set<LevelPair>& pairs) {
    std::string out;
    for (const auto& [a, b] : pairs) {
        if (!out.empty()) out += ", ";
        out += std::string(to_string(a)) + "-" + std::string(to_string(b));
    }
    return out;
}

std::set<LevelPair> parse_level_pairs(std::string_view text) {
    std::set<LevelPair> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        auto item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            const auto dash = item.find('-');
            const auto a = dash == std::string_view::npos ? std::nullopt : parse_level(item.substr(0, dash));
            const auto b = dash == std::string_view::npos ? std::nullopt : parse_level(item.substr(dash + 1));
            if (!a || !b) throw Error(ErrorCode::ConfigError, "bad level pair '" + std::string(item) + "'");
            out.insert(make_level_pair(*a, *b));
        }
        start = end + 1;
    }
    return out;
}

bool verdict_order(const SimilarityVerdict& a, const SimilarityVerdict& b) {
    const auto la = make_level_pair(a.level_a, a.level_b);
    const auto lb = make_level_pair(b.level_a, b.level_b);
    if (la != lb) return la < lb;
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.id_a != b.id_a) return a.id_a < b.id_a;
    return a.id_b < b.id_b;
}

// ---------------------------------------------------------------------------
// embedding cache

std::string EmbeddingCache::key(const std::string& tag, const std::string& text) { return tag + '\x1f' + text; }

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& tag, const std::string& text) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key(tag, text));
    if (it == entries_.end()) {
        misses_.fetch_add(1);
        return std::nullopt;
    }
    hits_.fetch_add(1);
    return it->second;
}

void EmbeddingCache::put(const std::string& tag, const std::string& text, const EmbeddingVector& v) {
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign(key(tag, text), v);
}

std::size_t EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void EmbeddingCache::reset_counters() noexcept {
    hits_ = 0;
    misses_ = 0;
}

namespace {

constexpr char kCacheMagic[8] = {'L', 'O', 'K', 'G', 'E', 'M', 'B', '1'};

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(ErrorCode::IoError, "truncated embedding cache");
    return v;
}

std::string read_bytes(std::istream& in, std::uint64_t n) {
    if (n > (1ULL << 32)) throw Error(ErrorCode::IoError, "corrupt embedding cache");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw Error(ErrorCode::IoError, "truncated embedding cache");
    return s;
}

}  // namespace

void EmbeddingCache::save(const std::string& path) const {
    std::shared_lock lock(mutex_);
    std::vector<const std::pair<const std::string, EmbeddingVector>*> sorted;
    sorted.reserve(entries_.size());
    for (const auto& kv : entries_) sorted.push_back(&kv);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write embedding cache '" + path + "'");
    out.write(kCacheMagic, sizeof kCacheMagic);
    write_u64(out, sorted.size());
    for (const auto* kv : sorted) {
        write_u64(out, kv->first.size());
        out.write(kv->first.data(), static_cast<std::streamsize>(kv->first.size()));
        write_u64(out, kv->second.dim());
        out.write(reinterpret_cast<const char*>(kv->second.values.data()),
                  static_cast<std::streamsize>(kv->second.dim() * sizeof(double)));
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing embedding cache '" + path + "'");
}

void EmbeddingCache::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    char magic[sizeof kCacheMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(magic, magic + sizeof magic, kCacheMagic)) {
        throw Error(ErrorCode::IoError, "'" + path + "' is not an embedding cache");
    }
    const auto count = read_u64(in);
    std::unique_lock lock(mutex_);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto k = read_bytes(in, read_u64(in));
        const auto dim = read_u64(in);
        const auto raw = read_bytes(in, dim * sizeof(double));
        EmbeddingVector v;
        v.values.resize(dim);
        std::memcpy(v.values.data(), raw.data(), raw.size());
        v.provider_tag = k.substr(0, k.find('\x1f'));
        entries_.insert_or_assign(std::move(k), std::move(v));
    }
}

// ---------------------------------------------------------------------------
// engine

SimilarityEngine::SimilarityEngine(Providers providers, TmpConfig config, std::shared_ptr<EmbeddingCache> cache)
    : providers_(std::move(providers)), config_(std::move(config)), cache_(std::move(cache)) {
    config_.validate();
    if (!providers_.detector || !providers_.translator || !providers_.embedder) {
        throw Error(ErrorCode::InvalidArgument, "similarity engine needs all three providers");
    }
    if (!cache_) cache_ = std::make_shared<EmbeddingCache>();
}

std::vector<EmbeddingVector> SimilarityEngine::embed_all(const std::vector<std::string>& texts) {
    const auto tag = providers_.embedder->tag();
    std::vector<std::optional<EmbeddingVector>> found(texts.size());
    std::vector<std::string> missing;
    std::set<std::string> missing_set;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        found[i] = cache_->get(tag, texts[i]);
        if (!found[i] && missing_set.insert(texts[i]).second) missing.push_back(texts[i]);
    }
    if (!missing.empty()) {
        auto vecs = providers_.embedder->embed_batch(missing);
        if (vecs.size() != missing.size()) {
            throw Error(ErrorCode::ProviderError, "embedder returned a wrong number of vectors");
        }
        std::map<std::string, EmbeddingVector> fresh;
        for (std::size_t i = 0; i < missing.size(); ++i) {
            cache_->put(tag, missing[i], vecs[i]);
            fresh.emplace(missing[i], std::move(vecs[i]));
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!found[i]) found[i] = fresh.at(texts[i]);
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& f : found) out.push_back(std::move(*f));
    return out;
}

std::vector<PreparedObject> SimilarityEngine::prepare_all(const std::vector<const LearningObject*>& objects) {
    std::vector<PreparedObject> prepared(objects.size());
    std::vector<std::string> descriptions(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = *objects[i];
        prepared[i].id = o.id;
        prepared[i].level = o.level;
        prepared[i].title = clean_text(o.title);
        descriptions[i] = clean_text(o.description);
    }

    auto fail_all = [&](const Error& e, const std::vector<std::size_t>& which) {
        for (auto i : which) {
            if (!prepared[i].error) prepared[i].error = e.what();
        }
    };
    std::vector<std::size_t> everyone(objects.size());
    for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;

    // language: declared, else detected on title + description
    std::vector<std::size_t> to_detect;
    std::vector<std::string> detect_texts;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& declared = objects[i]->declared_language;
        if (declared && !declared->empty()) {
            prepared[i].lang = to_lower(*declared);
            continue;
        }
        auto text = prepared[i].title;
        if (!descriptions[i].empty()) text += (text.empty() ? "" : ". ") + descriptions[i];
        if (text.empty()) continue;
        to_detect.push_back(i);
        detect_texts.push_back(std::move(text));
    }
    if (!to_detect.empty()) {
        try {
            const auto verdicts = providers_.detector->detect_batch(detect_texts);
            for (std::size_t k = 0; k < to_detect.size(); ++k) prepared[to_detect[k]].lang = verdicts.at(k).lang;
        } catch (const Error& e) {
            fail_all(e, to_detect);
        }
    }

    // native embeddings: titles, descriptions, candidate phrases
    std::vector<std::vector<std::string>> phrases(objects.size());
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (!prepared[i].title.empty()) texts.push_back(prepared[i].title);
        if (!descriptions[i].empty()) {
            phrases[i] = topic_candidates(descriptions[i]);
            texts.push_back(descriptions[i]);
            texts.insert(texts.end(), phrases[i].begin(), phrases[i].end());
        }
    }
    std::map<std::string, const EmbeddingVector*> lookup;
    std::vector<EmbeddingVector> vecs;
    try {
        vecs = embed_all(texts);
    } catch (const Error& e) {
        fail_all(e, everyone);
        return prepared;
    }
    for (std::size_t i = 0; i < texts.size(); ++i) lookup.emplace(texts[i], &vecs[i]);

    for (std::size_t i = 0; i < objects.size(); ++i) {
        auto& p = prepared[i];
        if (!p.title.empty()) p.title_vec = *lookup.at(p.title);
        if (!descriptions[i].empty()) {
            std::vector<EmbeddingVector> pv;
            for (const auto& ph : phrases[i]) pv.push_back(*lookup.at(ph));
            p.topics = select_topics(phrases[i], pv, *lookup.at(descriptions[i]), config_.k_max, config_.mmr_lambda,
                                     p.id, p.lang);
        }
    }

    // English versions of non-English objects, translated per source language
    std::map<std::string, std::vector<std::size_t>> by_lang;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (!prepared[i].error && !prepared[i].lang.empty() && prepared[i].lang != "en") by_lang[prepared[i].lang].push_back(i);
    }
    for (const auto& [lang, members] : by_lang) {
        std::vector<std::string> src;
        for (auto i : members) {
            if (!prepared[i].title.empty()) src.push_back(prepared[i].title);
            if (prepared[i].topics) {
                for (const auto& t : prepared[i].topics->topics) src.push_back(t.phrase);
            }
        }
        std::vector<std::string> translated;
        try {
            translated = providers_.translator->translate_batch(src, lang, "en");
            if (translated.size() != src.size()) throw Error(ErrorCode::ProviderError, "translator changed the batch size");
            for (std::size_t k = 0; k < translated.size(); ++k) {
                auto c = clean_text(translated[k]);
                translated[k] = c.empty() ? src[k] : c;
            }
            const auto en_vecs = embed_all(translated);
            std::size_t k = 0;
            for (auto i : members) {
                auto& p = prepared[i];
                if (!p.title.empty()) p.title_vec_en = en_vecs[k++];
                if (p.topics) {
                    TopicSet en{p.id, "en", {}};
                    std::set<std::string> seen;
                    for (std::size_t t = 0; t < p.topics->k(); ++t, ++k) {
                        if (seen.insert(translated[k]).second) en.topics.push_back({translated[k], en_vecs[k]});
                    }
                    p.topics_en = std::move(en);
                }
            }
        } catch (const Error& e) {
            for (auto i : members) prepared[i].translation_error = e.what();
        }
    }
    return prepared;
}

const PreparedObject& SimilarityEngine::prepare(const LearningObject& object) {
    const auto key = object.id + '\x1f' +
                     hex64(fnv1a64(object.title + '\x1f' + object.description + '\x1f' +
                                   object.declared_language.value_or("")));
    {
        std::lock_guard lock(prepared_mutex_);
        auto it = prepared_.find(key);
        if (it != prepared_.end()) return *it->second;
    }
    auto fresh = prepare_all({&object});
    std::lock_guard lock(prepared_mutex_);
    auto [it, _] = prepared_.emplace(key, std::make_unique<PreparedObject>(std::move(fresh.front())));
    return *it->second;
}

namespace {

// Recorded preparation failures keep their error code in the message prefix.
[[noreturn]] void rethrow_recorded(const std::string& message) {
    for (int c = 0; c <= static_cast<int>(ErrorCode::IoError); ++c) {
        const auto code = static_cast<ErrorCode>(c);
        const auto prefix = std::string(to_string(code)) + ": ";
        if (message.rfind(prefix, 0) == 0) throw Error(code, message.substr(prefix.size()));
    }
    throw Error(ErrorCode::ProviderError, message);
}

}  // namespace

PairScores combine_scores(double title, std::optional<double> desc, const TmpConfig& config) {
    PairScores s{title, desc, title};
    if (desc) s.combined = config.w_title * title + config.w_desc * *desc;
    return s;
}

PairScores SimilarityEngine::score(const PreparedObject& a, const PreparedObject& b) const {
    for (const auto* p : {&a, &b}) {
        if (p->error) rethrow_recorded(*p->error);
        if (p->title.empty()) throw Error(ErrorCode::EmptyTitle, "object '" + p->id + "' has no title text");
    }
    const bool same_lang = a.lang == b.lang;
    auto pick_title = [&](const PreparedObject& p) -> const EmbeddingVector& {
        if (same_lang || p.lang == "en") return *p.title_vec;
        if (p.translation_error) rethrow_recorded(*p.translation_error);
        return *p.title_vec_en;
    };
    auto pick_topics = [&](const PreparedObject& p) -> const TopicSet& {
        if (same_lang || p.lang == "en") return *p.topics;
        if (p.translation_error) rethrow_recorded(*p.translation_error);
        return *p.topics_en;
    };

    const double title = cosine(pick_title(a), pick_title(b));
    std::optional<double> desc;
    if (a.topics && b.topics) desc = description_similarity(pick_topics(a), pick_topics(b));
    return combine_scores(title, desc, config_);
}

PairScores SimilarityEngine::score(const LearningObject& a, const LearningObject& b) {
    return score(prepare(a), prepare(b));
}

double SimilarityEngine::title_similarity(const LearningObject& a, const LearningObject& b) {
    return score(a, b).title;
}

SimilarityVerdict SimilarityEngine::decide(const PreparedObject& a, const PreparedObject& b, bool intra_journey) const {
    if (a.id == b.id) throw Error(ErrorCode::InvalidArgument, "relation of '" + a.id + "' with itself");
    if (!config_.level_enabled(a.level, b.level)) {
        throw Error(ErrorCode::LevelNotEnabled, std::string(to_string(a.level)) + "-" + std::string(to_string(b.level)) +
                                                    " relations are not enabled");
    }
    const bool swap = b.id < a.id;
    const auto& first = swap ? b : a;
    const auto& second = swap ? a : b;
    const auto s = score(first, second);
    SimilarityVerdict v;
    v.id_a = first.id;
    v.id_b = second.id;
    v.level_a = first.level;
    v.level_b = second.level;
    v.title_score = s.title;
    v.desc_score = s.desc;
    v.combined = s.combined;
    v.threshold_used = config_.threshold;
    v.passed = v.combined >= v.threshold_used;
    v.intra_journey = intra_journey;
    return v;
}

SimilarityVerdict SimilarityEngine::decide(const LearningObject& a, const LearningObject& b, bool intra_journey) {
    if (a.id == b.id) throw Error(ErrorCode::InvalidArgument, "relation of '" + a.id + "' with itself");
    if (!config_.level_enabled(a.level, b.level)) {
        throw Error(ErrorCode::LevelNotEnabled, std::string(to_string(a.level)) + "-" + std::string(to_string(b.level)) +
                                                    " relations are not enabled");
    }
    return decide(prepare(a), prepare(b), intra_journey);
}

// ---------------------------------------------------------------------------
// mining

namespace {

std::vector<std::pair<std::size_t, std::size_t>> blocked_pairs(const std::vector<PreparedObject>& prepared,
                                                               double max_df) {
    std::vector<std::set<std::string>> tokens(prepared.size());
    std::map<std::string, std::vector<std::size_t>> postings;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const auto& p = prepared[i];
        const bool en = p.lang == "en" || p.lang.empty() || p.translation_error.has_value();
        std::string text = p.title;
        const auto* topics = en ? (p.topics ? &*p.topics : nullptr) : (p.topics_en ? &*p.topics_en : nullptr);
        if (!en && p.title_vec_en) text.clear();
        for (const auto& w : tokenize(text)) {
            if (!is_stopword(w)) tokens[i].insert(w);
        }
        if (topics) {
            for (const auto& t : topics->topics) {
                for (const auto& w : tokenize(t.phrase)) tokens[i].insert(w);
            }
        }
        for (const auto& w : tokens[i]) postings[w].push_back(i);
    }
    const double limit = std::max(2.0, max_df * static_cast<double>(prepared.size()));
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [w, ids] : postings) {
        if (static_cast<double>(ids.size()) > limit) continue;
        for (std::size_t x = 0; x < ids.size(); ++x) {
            for (std::size_t y = x + 1; y < ids.size(); ++y) pairs.emplace(ids[x], ids[y]);
        }
    }
    return {pairs.begin(), pairs.end()};
}

}  // namespace

MiningResult mine_relations(const TaxonomyForest& forest, SimilarityEngine& engine, const DecisionCache* reuse) {
    const auto& cfg = engine.config();
    const auto levels = cfg.enabled_level_set();
    std::vector<const LearningObject*> candidates;
    for (const auto& [id, o] : forest.objects()) {
        if (levels.count(o.level)) candidates.push_back(&o);
    }
    const auto prepared = engine.prepare_all(candidates);
    std::vector<std::set<std::string>> journeys(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) journeys[i] = forest.journeys_of(candidates[i]->id);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (cfg.blocking) {
        for (const auto& [i, j] : blocked_pairs(prepared, cfg.blocking_max_df)) {
            if (cfg.level_enabled(candidates[i]->level, candidates[j]->level)) pairs.emplace_back(i, j);
        }
    } else {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                if (cfg.level_enabled(candidates[i]->level, candidates[j]->level)) pairs.emplace_back(i, j);
            }
        }
    }

    MiningResult result;
    result.candidate_pairs = pairs.size();
    std::vector<std::optional<SimilarityVerdict>> verdicts(pairs.size());
    std::vector<std::optional<std::string>> errors(pairs.size());
    std::vector<bool> reused(pairs.size(), false);

    parallel_chunks(pairs.size(), 256, cfg.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto [i, j] = pairs[k];
            if (reuse != nullptr) {
                auto it = reuse->find({candidates[i]->id, candidates[j]->id});
                if (it != reuse->end()) {
                    verdicts[k] = it->second;
                    reused[k] = true;
                    continue;
                }
            }
            const auto& ji = journeys[i];
            const bool intra = std::any_of(ji.begin(), ji.end(), [&](const auto& jid) { return journeys[j].count(jid) > 0; });
            try {
                verdicts[k] = engine.decide(prepared[i], prepared[j], intra);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    });

    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (verdicts[k]) {
            result.evaluated.push_back(std::move(*verdicts[k]));
            if (reused[k]) ++result.reused_decisions;
        } else {
            result.failures.push_back({candidates[pairs[k].first]->id, candidates[pairs[k].second]->id, *errors[k]});
        }
    }
    std::sort(result.evaluated.begin(), result.evaluated.end(), verdict_order);
    for (const auto& v : result.evaluated) {
        if (v.passed) result.passed.push_back(v);
    }
    return result;
}

// ---------------------------------------------------------------------------
// ledger

std::string format_verdict_ledger(const std::vector<SimilarityVerdict>& verdicts) {
    std::ostringstream out;
    out << "id_a,id_b,level_a,level_b,title_score,desc_score,combined,threshold,passed,intra_journey\n";
    for (const auto& v : verdicts) {
        out << csv_escape(v.id_a) << ',' << csv_escape(v.id_b) << ',' << to_string(v.level_a) << ','
            << to_string(v.level_b) << ',' << format_double(v.title_score) << ','
            << (v.desc_score ? format_double(*v.desc_score) : std::string()) << ',' << format_double(v.combined) << ','
            << format_double(v.threshold_used) << ',' << (v.passed ? 1 : 0) << ',' << (v.intra_journey ? 1 : 0) << '\n';
    }
    return out.str();
}

std::vector<SimilarityVerdict> parse_verdict_ledger(std::string_view text) {
    std::vector<SimilarityVerdict> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != 10) throw Error(ErrorCode::SchemaError, "ledger line " + std::to_string(lineno) + " has " +
                                                                    std::to_string(f.size()) + " fields");
        SimilarityVerdict v;
        v.id_a = f[0];
        v.id_b = f[1];
        const auto la = parse_level(f[2]);
        const auto lb = parse_level(f[3]);
        if (!la || !lb) throw Error(ErrorCode::SchemaError, "ledger line " + std::to_string(lineno) + ": bad level");
        v.level_a = *la;
        v.level_b = *lb;
        v.title_score = std::strtod(f[4].c_str(), nullptr);
        if (!f[5].empty()) v.desc_score = std::strtod(f[5].c_str(), nullptr);
        v.combined = std::strtod(f[6].c_str(), nullptr);
        v.threshold_used = std::strtod(f[7].c_str(), nullptr);
        v.passed = f[8] == "1";
        v.intra_journey = f[9] == "1";
        out.push_back(std::move(v));
    }
    return out;
}

json verdict_to_json(const SimilarityVerdict& v) {
    json j = {{"id_a", v.id_a},
              {"id_b", v.id_b},
              {"level_a", std::string(to_string(v.level_a))},
              {"level_b", std::string(to_string(v.level_b))},
              {"title_score", v.title_score},
              {"desc_score", v.desc_score ? json(*v.desc_score) : json(nullptr)},
              {"combined", v.combined},
              {"threshold", v.threshold_used},
              {"passed", v.passed},
              {"intra_journey", v.intra_journey}};
    return j;
}

SimilarityVerdict verdict_from_json(const json& j) {
    SimilarityVerdict v;
    v.id_a = j.at("id_a").get<std::string>();
    v.id_b = j.at("id_b").get<std::string>();
    const auto la = parse_level(j.at("level_a").get<std::string>());
    const auto lb = parse_level(j.at("level_b").get<std::string>());
    if (!la || !lb) throw Error(ErrorCode::SchemaError, "verdict with unknown level");
    v.level_a = *la;
    v.level_b = *lb;
    v.title_score = j.at("title_score").get<double>();
    if (!j.at("desc_score").is_null()) v.desc_score = j.at("desc_score").get<double>();
    v.combined = j.at("combined").get<double>();
    v.threshold_used = j.at("threshold").get<double>();
    v.passed = j.at("passed").get<bool>();
    v.intra_journey = j.value("intra_journey", false);
    return v;
}

}  // namespace lokg
