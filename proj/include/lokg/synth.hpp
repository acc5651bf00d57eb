#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lokg/taxonomy.hpp"
#include "lokg/tmp.hpp"

namespace lokg {

// Deterministic synthetic taxonomies built from per-domain vocabulary
// clusters of the bundled lexicon.

struct GeneratorSpec {
    std::uint64_t seed = 7;
    std::size_t journeys = 20;
    /// Level totals; unset means scaled from 432/767/2565/7358 per 122 journeys.
    std::optional<std::size_t> courses;
    std::optional<std::size_t> topics;
    std::optional<std::size_t> packages;
    std::optional<std::size_t> contents;
    int n_domains = 4;
    double overlap = 0.2;             // chance that an object swaps one concept word for a foreign-domain word
    double bilingual_fraction = 0.2;  // share of Courses and Topics written in German
    std::size_t course_concepts = 6;  // per domain
    std::size_t topic_concepts = 10;  // per domain

    void validate() const;
    std::size_t course_count() const;
    std::size_t topic_count() const;
    std::size_t package_count() const;
    std::size_t content_count() const;
    nlohmann::json to_json() const;
};

struct ObjectLabel {
    int domain = 0;
    std::string concept_id;  // Courses and Topics only

    bool operator==(const ObjectLabel&) const = default;
};

struct GeneratedCorpus {
    TaxonomyForest forest;
    std::map<std::string, ObjectLabel> labels;
};

GeneratedCorpus generate(const GeneratorSpec& spec);

nlohmann::json labels_to_json(const GeneratedCorpus& corpus, const GeneratorSpec& spec);

struct PrecisionResult {
    std::size_t relations = 0;  // passed cross-journey verdicts with labels on both ends
    std::size_t same_domain = 0;
    double precision() const noexcept {
        return relations == 0 ? 1.0 : static_cast<double>(same_domain) / static_cast<double>(relations);
    }
};

/// Share of passed, cross-journey verdicts whose ends carry the same domain label.
PrecisionResult label_precision(const std::vector<SimilarityVerdict>& verdicts,
                                const std::map<std::string, ObjectLabel>& labels);

/// Title-only corpus whose relation assessment outcome is fixed by
/// construction. Each passing unit is two journeys whose Course and Topic
/// titles are unrelated while the two Topics are near copies (one passing
/// row). Each failing unit is two journeys whose Course and Topic share a
/// title, linked by near copies at both levels (two failing rows).
struct AssessmentCorpus {
    TaxonomyForest forest;
    std::size_t expected_rows = 0;
    std::size_t expected_passed = 0;
    double expected_fraction() const noexcept {
        return expected_rows == 0 ? 0.0 : static_cast<double>(expected_passed) / static_cast<double>(expected_rows);
    }
};

AssessmentCorpus generate_assessment_corpus(std::size_t pass_units, std::size_t fail_units, std::uint64_t seed = 11);

}  // namespace lokg
