#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lokg/kg.hpp"
#include "lokg/taxonomy.hpp"
#include "lokg/tmp.hpp"

namespace lokg {

/// Raw (unthresholded) combined similarity of two objects.
using PairScorer = std::function<double(const LearningObject&, const LearningObject&)>;

struct LevelBreakdown {
    double mean = 0.0;
    std::size_t pair_count = 0;
};

struct JourneySimilarity {
    std::string journey_id;
    double j_sim = 0.0;
    std::size_t pair_count = 0;
    /// Keyed by "Course-Topic" style level-pair names.
    std::map<std::string, LevelBreakdown> per_level;
};

/// Mean score over all unordered pairs of `levels` objects below the journey.
/// Throws NotAJourney and JourneyTooSmall.
JourneySimilarity journey_similarity(const TaxonomyForest& forest, std::string_view journey_id,
                                     const std::set<Level>& levels, const PairScorer& scorer);

struct JourneySimilarities {
    std::map<std::string, JourneySimilarity> defined;
    std::vector<std::string> too_small;  // journeys with fewer than two objects
};

/// Every journey, scored with the engine's combined score over its enabled levels.
JourneySimilarities all_journey_similarities(const TaxonomyForest& forest, SimilarityEngine& engine);

struct RelationAssessment {
    std::string id_a;
    std::string id_b;
    double sr_sim = 0.0;
    std::string journey_i;
    std::string journey_j;
    double j_i = 0.0;
    double j_j = 0.0;
    double j_avg = 0.0;
    bool passed = false;
};

/// The decision rule: passed exactly when sr_sim >= (j_i + j_j) / 2.
RelationAssessment assess(std::string id_a, std::string id_b, double sr_sim, std::string journey_i, double j_i,
                          std::string journey_j, double j_j);

struct EvaluationReport {
    std::vector<RelationAssessment> assessments;
    double pass_fraction = 0.0;
    std::size_t sample_size = 0;      // rows assessed
    std::size_t population_size = 0;  // candidate rows before sampling
    std::uint64_t seed = 0;
    std::vector<JourneySimilarity> journey_sims;
};

inline constexpr std::size_t kDefaultSampleSize = 240;

/// Population: one row per (semantic edge, unordered pair of distinct
/// journeys it bridges), journeys taken from the graph's hierarchy. A seeded
/// sample of `sample_size` rows is assessed (all rows when the population is
/// smaller). Throws NoSemanticEdges, UndefinedJourneySimilarity and
/// InvalidArgument (sample_size 0).
EvaluationReport assess_relations(const KnowledgeGraph& kg, const std::map<std::string, JourneySimilarity>& journey_sims,
                                  std::size_t sample_size = kDefaultSampleSize, std::uint64_t seed = 42);

nlohmann::json evaluation_to_json(const EvaluationReport& report);
/// `id_a,id_b,sr_sim,j_i,j_j,j_avg,passed`
std::string assessments_csv(const EvaluationReport& report);

}  // namespace lokg
