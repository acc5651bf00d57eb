#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lokg/providers.hpp"
#include "lokg/taxonomy.hpp"

namespace lokg {

// Text mining pipeline: cleaning, topic extraction, title and description
// similarity, the relation decision, and all-pairs mining over a forest.

struct CleanedText {
    std::string original;
    std::string cleaned;
    LanguageVerdict lang;  // empty lang when nothing survived cleaning

    bool empty() const noexcept { return cleaned.empty(); }
};

/// Cleans with clean_text(); the language comes from `declared` when given,
/// otherwise from `detector` (built-in when null). Empty results are flagged
/// through CleanedText::empty(), not raised.
CleanedText clean(std::string_view text, LanguageDetector* detector = nullptr,
                  const std::optional<std::string>& declared = std::nullopt);

/// Plain cosine kernel; 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Topic {
    std::string phrase;
    EmbeddingVector embedding;
};

struct TopicSet {
    std::string owner_id;
    std::string lang;
    std::vector<Topic> topics;

    std::size_t k() const noexcept { return topics.size(); }
    const std::string& provider_tag() const;
};

/// Word 1- and 2-grams within punctuation-free segments, with stopwords
/// stripped at phrase edges; distinct and sorted.
std::vector<std::string> candidate_phrases(std::string_view cleaned);

/// Maximal marginal relevance selection. Picks up to k indices; each step
/// maximizes lambda * doc_sim[c] - (1 - lambda) * max_{s selected} pair_sim[c][s]
/// (the penalty is 0 for the first pick). Selection stops early once the best
/// objective is no longer positive. Exact ties go to the lexicographically
/// smaller label.
std::vector<std::size_t> mmr_select(std::span<const double> doc_sim, const std::vector<std::vector<double>>& pair_sim,
                                    std::span<const std::string> labels, std::size_t k, double lambda);

inline constexpr std::size_t kDefaultKMax = 5;
inline constexpr double kDefaultMmrLambda = 0.5;

/// Keyphrases of a description ranked against the whole-description embedding
/// and diversified with MMR. Throws EmptyDescription.
TopicSet extract_topics(const CleanedText& desc, std::size_t k_max, Embedder& embedder,
                        double lambda = kDefaultMmrLambda, std::string owner_id = {});

/// Symmetric best-match average of a similarity matrix:
/// (sum_i max_j M[i][j] + sum_j max_i M[i][j]) / (rows + cols).
double best_match_average(const std::vector<std::vector<double>>& matrix);

/// best_match_average over the topic cosine matrix. Throws EmptyTopicSet and
/// ProviderTagMismatch.
double description_similarity(const TopicSet& a, const TopicSet& b);

using LevelPair = std::pair<Level, Level>;  // stored with first <= second
LevelPair make_level_pair(Level a, Level b) noexcept;

struct TmpConfig {
    double threshold = 0.88;
    double w_title = 0.5;
    double w_desc = 0.5;
    std::size_t k_max = kDefaultKMax;
    double mmr_lambda = kDefaultMmrLambda;
    std::set<LevelPair> enabled_levels = {{Level::Course, Level::Course}, {Level::Topic, Level::Topic}};
    bool blocking = false;
    /// With blocking on, a token is "rare" when it occurs in at most
    /// max(2, blocking_max_df * N) candidate objects.
    double blocking_max_df = 0.05;
    std::size_t jobs = 0;

    void validate() const;
    bool level_enabled(Level a, Level b) const { return enabled_levels.count(make_level_pair(a, b)) > 0; }
    /// Levels that take part in at least one enabled pair.
    std::set<Level> enabled_level_set() const;
    /// Everything that influences decisions (jobs excluded).
    nlohmann::json to_json() const;
    std::string hash() const;
};

std::string format_level_pairs(const std::set<LevelPair>& pairs);
/// Parses "Course-Course, Topic-Topic".
std::set<LevelPair> parse_level_pairs(std::string_view text);

struct SimilarityVerdict {
    std::string id_a;  // id_a < id_b
    std::string id_b;
    Level level_a = Level::Course;
    Level level_b = Level::Course;
    double title_score = 0.0;
    std::optional<double> desc_score;
    double combined = 0.0;
    bool passed = false;
    double threshold_used = 0.0;
    bool intra_journey = false;

    bool operator==(const SimilarityVerdict&) const = default;
};

/// Ordering of mined output: level pair, combined descending, then ids.
bool verdict_order(const SimilarityVerdict& a, const SimilarityVerdict& b);

/// Thread-safe store of embeddings keyed by (provider tag, text).
class EmbeddingCache {
public:
    std::optional<EmbeddingVector> get(const std::string& tag, const std::string& text) const;
    void put(const std::string& tag, const std::string& text, const EmbeddingVector& v);
    std::size_t size() const;
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }
    void reset_counters() noexcept;

    void save(const std::string& path) const;
    /// Missing file leaves the cache empty; a corrupt file raises IoError.
    void load(const std::string& path);

private:
    static std::string key(const std::string& tag, const std::string& text);
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    mutable std::atomic<std::size_t> hits_{0};
    mutable std::atomic<std::size_t> misses_{0};
};

/// Everything the pair comparison needs about one object, computed once.
struct PreparedObject {
    std::string id;
    Level level = Level::Course;
    std::string lang;
    std::string title;  // cleaned
    std::optional<EmbeddingVector> title_vec;
    std::optional<EmbeddingVector> title_vec_en;  // non-English objects only
    std::optional<TopicSet> topics;
    std::optional<TopicSet> topics_en;
    std::optional<std::string> error;  // preparation failure, reported per pair
    std::optional<std::string> translation_error;
};

struct PairScores {
    double title = 0.0;
    std::optional<double> desc;
    double combined = 0.0;
};

/// w_title * title + w_desc * desc, or the title score alone without a description score.
PairScores combine_scores(double title, std::optional<double> desc, const TmpConfig& config);

class SimilarityEngine {
public:
    SimilarityEngine(Providers providers, TmpConfig config, std::shared_ptr<EmbeddingCache> cache = nullptr);

    const TmpConfig& config() const noexcept { return config_; }
    const Providers& providers() const noexcept { return providers_; }
    EmbeddingCache& cache() noexcept { return *cache_; }

    /// Cache-backed embedding in input order; misses go to the provider in one batch.
    std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& texts);

    /// Batch preparation: language, cleaned title, embeddings, topic sets and
    /// their English versions. Failures are stored on the prepared object.
    std::vector<PreparedObject> prepare_all(const std::vector<const LearningObject*>& objects);
    const PreparedObject& prepare(const LearningObject& object);

    /// Raw scores; the non-English side is translated when languages differ.
    PairScores score(const PreparedObject& a, const PreparedObject& b) const;
    PairScores score(const LearningObject& a, const LearningObject& b);

    /// Throws EmptyTitle.
    double title_similarity(const LearningObject& a, const LearningObject& b);

    /// Throws InvalidArgument for a self pair and LevelNotEnabled.
    SimilarityVerdict decide(const LearningObject& a, const LearningObject& b, bool intra_journey = false);
    SimilarityVerdict decide(const PreparedObject& a, const PreparedObject& b, bool intra_journey) const;

private:
    Providers providers_;
    TmpConfig config_;
    std::shared_ptr<EmbeddingCache> cache_;
    std::mutex prepared_mutex_;
    std::map<std::string, std::unique_ptr<PreparedObject>> prepared_;
};

struct PairFailure {
    std::string id_a;
    std::string id_b;
    std::string message;
};

struct MiningResult {
    std::vector<SimilarityVerdict> evaluated;  // every scored pair, verdict_order
    std::vector<SimilarityVerdict> passed;     // subset with passed == true
    std::vector<PairFailure> failures;
    std::size_t candidate_pairs = 0;
    std::size_t reused_decisions = 0;
};

using DecisionCache = std::map<std::pair<std::string, std::string>, SimilarityVerdict>;

/// Evaluates every unordered pair at enabled levels (optionally blocked),
/// reusing `reuse` entries when given. Pair failures are collected, not thrown.
MiningResult mine_relations(const TaxonomyForest& forest, SimilarityEngine& engine,
                            const DecisionCache* reuse = nullptr);

/// Columnar ledger: header
/// `id_a,id_b,level_a,level_b,title_score,desc_score,combined,threshold,passed,intra_journey`.
/// Numbers use round-trip precision; an absent desc_score is an empty field.
std::string format_verdict_ledger(const std::vector<SimilarityVerdict>& verdicts);
std::vector<SimilarityVerdict> parse_verdict_ledger(std::string_view text);

nlohmann::json verdict_to_json(const SimilarityVerdict& v);
SimilarityVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace lokg
