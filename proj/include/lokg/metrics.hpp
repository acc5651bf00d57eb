#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lokg/kg.hpp"

namespace lokg {

/// Undirected simple view: parallel edges collapsed (smallest weight kept),
/// neighbours sorted. Node i is kg.nodes()[i].
struct SimpleGraph {
    std::vector<std::vector<std::size_t>> adj;
    std::vector<std::vector<double>> weight;  // aligned with adj

    std::size_t size() const noexcept { return adj.size(); }
    std::size_t edge_count() const noexcept;

    static SimpleGraph from_kg(const KnowledgeGraph& kg);
    static SimpleGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

struct NodeDegree {
    std::size_t in = 0;   // hierarchical
    std::size_t out = 0;  // hierarchical
    std::size_t semantic = 0;
    std::size_t total() const noexcept { return in + out + semantic; }
};

struct DegreeResult {
    double adc_directed = 0.0;  // |E| / |V|, semantic edges counted once
    double adc_total = 0.0;     // mean total degree
    std::vector<NodeDegree> per_node;
};

/// Throws EmptyGraph.
DegreeResult degree_centrality(const KnowledgeGraph& kg);

struct ComponentResult {
    std::size_t count = 0;
    std::vector<std::size_t> component;  // numbered by smallest member index
};

ComponentResult weakly_connected_components(const SimpleGraph& g);
ComponentResult weakly_connected_components(const KnowledgeGraph& kg);

struct ClusteringResult {
    double average = 0.0;
    std::vector<double> per_node;
};

ClusteringResult local_clustering(const SimpleGraph& g);
ClusteringResult local_clustering(const KnowledgeGraph& kg);

/// Newman modularity at resolution 1. Q = 0 when there are no edges. Throws
/// PartitionMismatch.
double modularity(const SimpleGraph& g, const std::vector<std::size_t>& partition);
double modularity(const KnowledgeGraph& kg, const std::vector<std::size_t>& partition);
double modularity(const KnowledgeGraph& kg, const std::map<std::string, std::size_t>& partition);

struct CommunityResult {
    std::size_t count = 0;
    std::vector<std::size_t> partition;  // numbered by first occurrence
    double modularity = 0.0;             // Newman Q of `partition`
};

/// Louvain local moving plus aggregation. The node visit order is a seeded
/// shuffle; a move is taken only for a strictly positive gain.
/// Throws EmptyGraph and InvalidArgument (resolution <= 0).
CommunityResult detect_communities(const SimpleGraph& g, double resolution, std::uint64_t seed);
CommunityResult detect_communities(const KnowledgeGraph& kg, double resolution, std::uint64_t seed);

struct BetweennessResult {
    std::vector<double> per_node;  // unnormalized, each unordered pair once
    double mean = 0.0;
};

/// Brandes over all sources. Weighted mode uses edge weights as lengths and
/// throws NonPositiveWeight.
BetweennessResult betweenness_exact(const SimpleGraph& g, bool weighted = false, std::size_t jobs = 0);
BetweennessResult betweenness_exact(const KnowledgeGraph& kg, bool weighted = false, std::size_t jobs = 0);

/// Brandes from k sources drawn without replacement, scaled by |V| / k.
/// Throws BadPivotCount.
BetweennessResult betweenness_pivot(const SimpleGraph& g, std::size_t k, std::uint64_t seed, bool weighted = false,
                                    std::size_t jobs = 0);
BetweennessResult betweenness_pivot(const KnowledgeGraph& kg, std::size_t k, std::uint64_t seed, bool weighted = false,
                                    std::size_t jobs = 0);

/// Sorted sample of k distinct indices from [0, n).
std::vector<std::size_t> sample_pivots(std::size_t n, std::size_t k, std::uint64_t seed);

struct MetricsConfig {
    enum class BcMode { Exact, Pivot };
    BcMode bc_mode = BcMode::Exact;
    std::size_t pivots = 0;
    bool bc_weighted = false;
    double resolution = 1.0;
    std::uint64_t seed = 42;
    std::size_t jobs = 0;

    void validate() const;
    std::string bc_flag() const;  // "exact" or "pivot:k"
};

/// Parses "exact" or "pivot:k" into `config`. Throws ConfigError.
void parse_bc_flag(std::string_view flag, MetricsConfig& config);

struct TrendRow {
    std::string metric;
    std::string preferred;  // "increasing" or "decreasing"
    double reference_hierarchy = 0.0;
    double reference_kg = 0.0;
};

/// Preferred directions and published reference values, one row per headline metric.
const std::vector<TrendRow>& trend_table();

struct MetricsReport {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t semantic_edge_count = 0;
    double adc_directed = 0.0;
    double adc_total = 0.0;
    std::size_t community_count = 0;
    double modularity = 0.0;
    double avg_local_clustering = 0.0;
    std::size_t wcc_count = 0;
    double bc_mean = 0.0;
    std::map<std::string, double> bc_per_node;
    nlohmann::json method_flags;

    // per-node detail in kg.nodes() order
    std::vector<std::string> node_ids;
    std::vector<Level> node_levels;
    std::vector<NodeDegree> degrees;
    std::vector<std::size_t> community;
    std::vector<double> clustering;

    /// Headline value by trend-table metric name.
    double headline(std::string_view metric) const;
};

MetricsReport full_report(const KnowledgeGraph& kg, const MetricsConfig& config);

nlohmann::json metrics_to_json(const MetricsReport& report);
/// `id,level,deg,bc,community,clustering`
std::string node_metrics_csv(const MetricsReport& report);

/// Hierarchy-only and completed reports side by side, with deltas and trend checks.
nlohmann::json compare_reports(const MetricsReport& hierarchy, const MetricsReport& completed);

}  // namespace lokg
