#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lokg/taxonomy.hpp"
#include "lokg/tmp.hpp"

namespace lokg {

enum class EdgeKind : std::uint8_t { Hierarchical, Semantic };

std::string_view to_string(EdgeKind kind) noexcept;
std::optional<EdgeKind> parse_edge_kind(std::string_view name);

/// Relation name of semantic edges in exports.
inline constexpr std::string_view kSemanticRelation = "has_semantic_relation_to";

struct Node {
    std::string id;
    Level level = Level::Journey;
    std::string label;  // cleaned title

    bool operator==(const Node&) const = default;
};

/// Hierarchical edges point parent -> child with weight 1. Semantic edges are
/// undirected, stored once with src < dst, weighted by the combined score.
struct Edge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::Hierarchical;
    double weight = 1.0;

    bool operator==(const Edge&) const = default;
};

struct Provenance {
    std::string dataset_hash;
    std::string config_hash;
    std::map<std::string, std::string> provider_tags;

    bool operator==(const Provenance&) const = default;
};

/// Immutable graph. Nodes are id-ordered; edges are ordered by kind, src, dst.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    /// Validates endpoints, self-loops, duplicates and semantic orientation.
    /// Throws DanglingReference or InvalidArgument.
    KnowledgeGraph(std::vector<Node> nodes, std::vector<Edge> edges, Provenance provenance = {});

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Provenance& provenance() const noexcept { return provenance_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    const Node* find(std::string_view id) const;
    std::size_t hierarchical_edge_count() const noexcept { return hierarchical_; }
    std::size_t semantic_edge_count() const noexcept { return edges_.size() - hierarchical_; }

    /// Same nodes and provenance, semantic edges dropped.
    KnowledgeGraph hierarchy_only() const;

    bool operator==(const KnowledgeGraph& o) const {
        return nodes_ == o.nodes_ && edges_ == o.edges_ && provenance_ == o.provenance_;
    }

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    Provenance provenance_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::size_t hierarchical_ = 0;
};

struct KgBuildOptions {
    bool include_intra_journey = false;
    std::string config_hash;
    std::map<std::string, std::string> provider_tags;
};

/// Nodes = forest objects, hierarchy copied verbatim, one semantic edge per
/// passed verdict (intra-journey ones only when enabled). Throws
/// DanglingReference for unknown ids and InvalidArgument for verdicts that did
/// not pass or repeat a pair.
KnowledgeGraph build_kg(const TaxonomyForest& forest, const std::vector<SimilarityVerdict>& verdicts,
                        const KgBuildOptions& options = {});

std::string dataset_hash(const TaxonomyForest& forest);

struct GraphPath {
    std::vector<std::string> nodes;  // journey_a ... journey_b
    std::vector<EdgeKind> kinds;     // kinds[i] joins nodes[i] and nodes[i+1]

    std::size_t length() const noexcept { return kinds.size(); }
    bool operator==(const GraphPath&) const = default;
};

/// Simple paths of at most max_len edges between two Journeys on the
/// undirected view, in lexicographic neighbour order. Stops after `limit`
/// paths. Throws NotAJourney.
std::vector<GraphPath> journey_paths(const KnowledgeGraph& kg, std::string_view journey_a, std::string_view journey_b,
                                     std::size_t max_len, std::size_t limit = 100000);

std::string to_graphml(const KnowledgeGraph& kg);
/// `src,dst,kind,weight` with a header line.
std::string to_edge_list(const KnowledgeGraph& kg);

nlohmann::json kg_to_json(const KnowledgeGraph& kg);
KnowledgeGraph kg_from_json(const nlohmann::json& doc);
/// Canonical native document (two-space indent, trailing newline).
std::string serialize_kg(const KnowledgeGraph& kg);
KnowledgeGraph parse_kg(std::string_view document);

}  // namespace lokg
