#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lokg {

/// Taxonomy levels, top to bottom. The numeric value is the depth.
enum class Level : std::uint8_t {
    Journey = 0,
    Course = 1,
    Topic = 2,
    EducationalPackage = 3,
    EducationalContent = 4,
};

inline constexpr std::array<Level, 5> kAllLevels = {
    Level::Journey, Level::Course, Level::Topic, Level::EducationalPackage, Level::EducationalContent};

std::string_view to_string(Level level) noexcept;
/// Accepts the canonical names ("Journey", "EducationalPackage", ...) and
/// their lowercase / snake_case spellings.
std::optional<Level> parse_level(std::string_view name);
inline int depth(Level level) noexcept { return static_cast<int>(level); }

inline constexpr std::size_t kMaxTitleLength = 512;

struct LearningObject {
    std::string id;
    Level level = Level::Journey;
    std::string title;
    std::string description;
    std::optional<std::string> declared_language;
    std::vector<std::string> parent_ids;

    bool operator==(const LearningObject&) const = default;
};

using HierarchyEdge = std::pair<std::string, std::string>;  // (parent, child)
using ObjectMap = std::map<std::string, LearningObject, std::less<>>;

/// Validated five-level hierarchy. Objects are kept id-ordered, parent lists
/// sorted; the edge list is derived from the parent declarations.
class TaxonomyForest {
public:
    TaxonomyForest() = default;

    /// Validates and indexes. Throws SchemaError, LevelViolation or DuplicateId.
    static TaxonomyForest from_objects(std::vector<LearningObject> objects);

    const ObjectMap& objects() const noexcept { return objects_; }
    const std::vector<HierarchyEdge>& hierarchy_edges() const noexcept { return edges_; }
    const LearningObject* find(std::string_view id) const;
    const LearningObject& at(std::string_view id) const;
    std::size_t size() const noexcept { return objects_.size(); }
    bool empty() const noexcept { return objects_.empty(); }

    const std::vector<std::string>& children_of(std::string_view id) const;
    /// Ids of every Journey reachable upwards from `id` (itself if a Journey).
    std::set<std::string> journeys_of(std::string_view id) const;
    /// All object ids below `journey_id`, excluding the journey itself.
    std::set<std::string> subtree_of(std::string_view journey_id) const;
    std::size_t count(Level level) const;

    bool operator==(const TaxonomyForest& other) const { return objects_ == other.objects_; }

private:
    ObjectMap objects_;
    std::vector<HierarchyEdge> edges_;
    std::map<std::string, std::vector<std::string>, std::less<>> children_;
};

/// Reads the dataset document: a JSON array of
/// `{id, level, title, description, language?, parents: [ids]}` (an object
/// wrapping that array under "objects" is also accepted). Errors carry the
/// line/column or record index of the offending input.
TaxonomyForest parse_taxonomy(std::string_view document);
TaxonomyForest parse_taxonomy_file(const std::string& path);

nlohmann::json taxonomy_to_json(const TaxonomyForest& forest);
/// Canonical serialization: id-ordered array, two-space indent, trailing newline.
std::string serialize_taxonomy(const TaxonomyForest& forest);

struct FilterReport {
    std::size_t no_content = 0;
    std::size_t duplicates = 0;
    std::size_t isolated = 0;
    std::vector<std::string> removed_no_content;
    std::vector<std::string> removed_duplicates;
    std::vector<std::string> removed_isolated;

    std::size_t total() const noexcept { return no_content + duplicates + isolated; }
};

nlohmann::json filter_report_to_json(const FilterReport& report);

struct FilterResult {
    TaxonomyForest forest;
    FilterReport report;
};

/// Applies, in order:
///  1. drop every non-content object whose subtree holds no EducationalContent;
///  2. merge exact duplicates (same level, cleaned title and cleaned
///     description): the lowest id survives and inherits the parents and
///     children of the removed copies;
///  3. drop objects with no incident hierarchy edge.
/// Idempotent.
FilterResult filter_dataset(const TaxonomyForest& forest);

}  // namespace lokg
