#include "lokg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "lokg/error.hpp"
#include "lokg/parallel.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

std::size_t SimpleGraph::edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& a : adj) twice += a.size();
    return twice / 2;
}

namespace {

SimpleGraph build_simple(std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> edges) {
    for (auto& [a, b, w] : edges) {
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    SimpleGraph g;
    g.adj.assign(n, {});
    g.weight.assign(n, {});
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto [a, b, w] = edges[i];
        if (a == b) continue;
        // sorted, so the first copy of a pair carries the smallest weight
        if (i > 0 && std::get<0>(edges[i - 1]) == a && std::get<1>(edges[i - 1]) == b) continue;
        g.adj[a].push_back(b);
        g.weight[a].push_back(w);
        g.adj[b].push_back(a);
        g.weight[b].push_back(w);
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<std::size_t> order(g.adj[v].size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return g.adj[v][x] < g.adj[v][y]; });
        std::vector<std::size_t> a;
        std::vector<double> w;
        for (auto o : order) {
            a.push_back(g.adj[v][o]);
            w.push_back(g.weight[v][o]);
        }
        g.adj[v] = std::move(a);
        g.weight[v] = std::move(w);
    }
    return g;
}

}  // namespace

SimpleGraph SimpleGraph::from_kg(const KnowledgeGraph& kg) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    edges.reserve(kg.edges().size());
    for (const auto& e : kg.edges()) edges.emplace_back(*kg.index_of(e.src), *kg.index_of(e.dst), e.weight);
    return build_simple(kg.nodes().size(), std::move(edges));
}

SimpleGraph SimpleGraph::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> weighted;
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
        weighted.emplace_back(a, b, 1.0);
    }
    return build_simple(n, std::move(weighted));
}

DegreeResult degree_centrality(const KnowledgeGraph& kg) {
    const auto n = kg.nodes().size();
    if (n == 0) throw Error(ErrorCode::EmptyGraph, "degree centrality of an empty graph");
    DegreeResult r;
    r.per_node.assign(n, {});
    for (const auto& e : kg.edges()) {
        const auto s = *kg.index_of(e.src);
        const auto d = *kg.index_of(e.dst);
        if (e.kind == EdgeKind::Hierarchical) {
            ++r.per_node[s].out;
            ++r.per_node[d].in;
        } else {
            ++r.per_node[s].semantic;
            ++r.per_node[d].semantic;
        }
    }
    const auto m = static_cast<double>(kg.edges().size());
    r.adc_directed = m / static_cast<double>(n);
    r.adc_total = 2.0 * m / static_cast<double>(n);
    return r;
}

ComponentResult weakly_connected_components(const SimpleGraph& g) {
    const auto n = g.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : g.adj[u]) {
            auto a = find(u), b = find(v);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    ComponentResult r;
    r.component.assign(n, 0);
    std::vector<std::size_t> label(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t u = 0; u < n; ++u) {
        const auto root = find(u);
        if (label[root] == std::numeric_limits<std::size_t>::max()) label[root] = r.count++;
        r.component[u] = label[root];
    }
    return r;
}

ComponentResult weakly_connected_components(const KnowledgeGraph& kg) {
    return weakly_connected_components(SimpleGraph::from_kg(kg));
}

ClusteringResult local_clustering(const SimpleGraph& g) {
    ClusteringResult r;
    const auto n = g.size();
    r.per_node.assign(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& nb = g.adj[v];
        const auto deg = nb.size();
        if (deg < 2) continue;
        std::size_t links = 0;
        for (std::size_t i = 0; i < deg; ++i) {
            const auto& ai = g.adj[nb[i]];
            // count neighbours of v that follow nb[i] and are adjacent to it
            auto it = nb.begin() + static_cast<std::ptrdiff_t>(i) + 1;
            for (auto x : ai) {
                it = std::lower_bound(it, nb.end(), x);
                if (it == nb.end()) break;
                if (*it == x) ++links;
            }
        }
        r.per_node[v] = 2.0 * static_cast<double>(links) / (static_cast<double>(deg) * static_cast<double>(deg - 1));
    }
    if (n > 0) r.average = std::accumulate(r.per_node.begin(), r.per_node.end(), 0.0) / static_cast<double>(n);
    return r;
}

ClusteringResult local_clustering(const KnowledgeGraph& kg) { return local_clustering(SimpleGraph::from_kg(kg)); }

double modularity(const SimpleGraph& g, const std::vector<std::size_t>& partition) {
    const auto n = g.size();
    if (partition.size() != n) {
        throw Error(ErrorCode::PartitionMismatch, "partition has " + std::to_string(partition.size()) +
                                                      " entries for " + std::to_string(n) + " nodes");
    }
    const auto m = static_cast<double>(g.edge_count());
    if (m == 0.0) return 0.0;
    std::map<std::size_t, std::pair<double, double>> per;  // community -> (intra edges, degree sum)
    for (std::size_t u = 0; u < n; ++u) {
        auto& [intra, deg] = per[partition[u]];
        deg += static_cast<double>(g.adj[u].size());
        for (auto v : g.adj[u]) {
            if (u < v && partition[u] == partition[v]) intra += 1.0;
        }
    }
    double q = 0.0;
    for (const auto& [c, v] : per) {
        const double frac = v.second / (2.0 * m);
        q += v.first / m - frac * frac;
    }
    return q;
}

double modularity(const KnowledgeGraph& kg, const std::vector<std::size_t>& partition) {
    return modularity(SimpleGraph::from_kg(kg), partition);
}

double modularity(const KnowledgeGraph& kg, const std::map<std::string, std::size_t>& partition) {
    if (partition.size() != kg.nodes().size()) {
        throw Error(ErrorCode::PartitionMismatch, "partition does not cover the node set");
    }
    std::vector<std::size_t> p;
    p.reserve(partition.size());
    for (const auto& n : kg.nodes()) {
        auto it = partition.find(n.id);
        if (it == partition.end()) throw Error(ErrorCode::PartitionMismatch, "node '" + n.id + "' has no community");
        p.push_back(it->second);
    }
    return modularity(kg, p);
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

struct WeightedGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // no self entries
    std::vector<double> self;                                       // self-loop weight, counted once
    std::vector<double> degree;                                     // sum of incident weights, self twice
};

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// One round of local moving; returns whether anything moved.
bool local_moving(const WeightedGraph& g, double m2, double resolution, std::mt19937_64& rng,
                  std::vector<std::size_t>& comm) {
    const auto n = g.adj.size();
    std::vector<double> tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += g.degree[i];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);

    std::vector<double> w_to(n, 0.0);
    std::vector<std::size_t> touched;
    bool any = false;
    constexpr int kMaxSweeps = 1000;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool moved = false;
        for (auto i : order) {
            const auto old = comm[i];
            const double ki = g.degree[i];
            touched.clear();
            for (const auto& [j, w] : g.adj[i]) {
                const auto c = comm[j];
                if (w_to[c] == 0.0) touched.push_back(c);
                w_to[c] += w;
            }
            tot[old] -= ki;
            auto gain = [&](std::size_t c) { return w_to[c] - resolution * tot[c] * ki / m2; };
            std::size_t best = old;
            double best_gain = gain(old);
            std::sort(touched.begin(), touched.end());
            for (auto c : touched) {
                const double gc = gain(c);
                if (gc > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
                    best = c;
                    best_gain = gc;
                }
            }
            tot[best] += ki;
            comm[i] = best;
            for (auto c : touched) w_to[c] = 0.0;
            if (best != old) moved = true;
        }
        if (!moved) break;
        any = true;
    }
    return any;
}

}  // namespace

CommunityResult detect_communities(const SimpleGraph& sg, double resolution, std::uint64_t seed) {
    const auto n = sg.size();
    if (n == 0) throw Error(ErrorCode::EmptyGraph, "community detection on an empty graph");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
    }
    CommunityResult r;
    r.partition.resize(n);
    std::iota(r.partition.begin(), r.partition.end(), 0);
    const double m = static_cast<double>(sg.edge_count());
    if (m > 0.0) {
        WeightedGraph g;
        g.adj.resize(n);
        g.self.assign(n, 0.0);
        g.degree.assign(n, 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            for (auto v : sg.adj[u]) g.adj[u].emplace_back(v, 1.0);
            g.degree[u] = static_cast<double>(sg.adj[u].size());
        }
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> membership(n);  // original node -> current super node
        std::iota(membership.begin(), membership.end(), 0);
        while (true) {
            const auto cur = g.adj.size();
            std::vector<std::size_t> comm(cur);
            std::iota(comm.begin(), comm.end(), 0);
            if (!local_moving(g, 2.0 * m, resolution, rng, comm)) break;

            std::vector<std::size_t> relabel(cur, std::numeric_limits<std::size_t>::max());
            std::size_t next = 0;
            for (std::size_t i = 0; i < cur; ++i) {
                if (relabel[comm[i]] == std::numeric_limits<std::size_t>::max()) relabel[comm[i]] = next++;
            }
            for (auto& c : membership) c = relabel[comm[c]];
            if (next == cur) break;

            WeightedGraph agg;
            agg.adj.resize(next);
            agg.self.assign(next, 0.0);
            agg.degree.assign(next, 0.0);
            std::vector<std::map<std::size_t, double>> links(next);
            for (std::size_t i = 0; i < cur; ++i) {
                const auto ci = relabel[comm[i]];
                agg.self[ci] += g.self[i];
                agg.degree[ci] += g.degree[i];
                for (const auto& [j, w] : g.adj[i]) {
                    const auto cj = relabel[comm[j]];
                    if (ci == cj) {
                        if (i < j) agg.self[ci] += w;
                    } else {
                        links[ci][cj] += w;
                    }
                }
            }
            for (std::size_t c = 0; c < next; ++c) agg.adj[c].assign(links[c].begin(), links[c].end());
            g = std::move(agg);
        }
        r.partition = membership;
    }
    // renumber by first occurrence
    std::map<std::size_t, std::size_t> first;
    for (auto& c : r.partition) {
        auto [it, _] = first.emplace(c, first.size());
        c = it->second;
    }
    r.count = first.size();
    r.modularity = modularity(sg, r.partition);
    return r;
}

CommunityResult detect_communities(const KnowledgeGraph& kg, double resolution, std::uint64_t seed) {
    return detect_communities(SimpleGraph::from_kg(kg), resolution, seed);
}

// ---------------------------------------------------------------------------
// Brandes

namespace {

// Adds the dependencies of `source` into `acc`.
void brandes_source(const SimpleGraph& g, std::size_t source, bool weighted, std::vector<double>& acc) {
    const auto n = g.size();
    std::vector<std::vector<std::size_t>> pred(n);
    std::vector<double> sigma(n, 0.0);
    std::vector<double> dist(n, -1.0);
    std::vector<std::size_t> order;
    order.reserve(n);
    sigma[source] = 1.0;
    dist[source] = 0.0;
    if (!weighted) {
        std::queue<std::size_t> q;
        q.push(source);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            order.push_back(v);
            for (auto w : g.adj[v]) {
                if (dist[w] < 0.0) {
                    dist[w] = dist[v] + 1.0;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1.0) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
    } else {
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        std::vector<bool> done(n, false);
        pq.emplace(0.0, source);
        while (!pq.empty()) {
            const auto [d, v] = pq.top();
            pq.pop();
            if (done[v] || d > dist[v]) continue;
            done[v] = true;
            order.push_back(v);
            for (std::size_t k = 0; k < g.adj[v].size(); ++k) {
                const auto w = g.adj[v][k];
                const double nd = d + g.weight[v][k];
                if (dist[w] < 0.0 || nd < dist[w]) {
                    dist[w] = nd;
                    sigma[w] = sigma[v];
                    pred[w].assign(1, v);
                    pq.emplace(nd, w);
                } else if (nd == dist[w] && !done[w]) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto w = *it;
        for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        if (w != source) acc[w] += delta[w];
    }
}

BetweennessResult brandes(const SimpleGraph& g, const std::vector<std::size_t>& sources, double scale, bool weighted,
                          std::size_t jobs) {
    const auto n = g.size();
    if (weighted) {
        for (const auto& ws : g.weight) {
            for (double w : ws) {
                if (!(w > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "shortest paths need positive weights");
            }
        }
    }
    // fixed chunking keeps the summation order independent of `jobs`
    const std::size_t chunk = std::max<std::size_t>(16, (sources.size() + 127) / 128);
    const std::size_t chunks = (sources.size() + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(chunks);
    parallel_chunks(sources.size(), chunk, jobs, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(n, 0.0);
        for (auto s = begin; s < end; ++s) brandes_source(g, sources[s], weighted, acc);
        partial[begin / chunk] = std::move(acc);
    });
    BetweennessResult r;
    r.per_node.assign(n, 0.0);
    for (const auto& p : partial) {
        for (std::size_t v = 0; v < n; ++v) r.per_node[v] += p[v];
    }
    for (auto& b : r.per_node) b = b * scale / 2.0;
    if (n > 0) r.mean = std::accumulate(r.per_node.begin(), r.per_node.end(), 0.0) / static_cast<double>(n);
    return r;
}

}  // namespace

BetweennessResult betweenness_exact(const SimpleGraph& g, bool weighted, std::size_t jobs) {
    std::vector<std::size_t> sources(g.size());
    std::iota(sources.begin(), sources.end(), 0);
    return brandes(g, sources, 1.0, weighted, jobs);
}

BetweennessResult betweenness_exact(const KnowledgeGraph& kg, bool weighted, std::size_t jobs) {
    return betweenness_exact(SimpleGraph::from_kg(kg), weighted, jobs);
}

std::vector<std::size_t> sample_pivots(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > n) {
        throw Error(ErrorCode::BadPivotCount,
                    "pivot count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

BetweennessResult betweenness_pivot(const SimpleGraph& g, std::size_t k, std::uint64_t seed, bool weighted,
                                    std::size_t jobs) {
    const auto pivots = sample_pivots(g.size(), k, seed);
    return brandes(g, pivots, static_cast<double>(g.size()) / static_cast<double>(k), weighted, jobs);
}

BetweennessResult betweenness_pivot(const KnowledgeGraph& kg, std::size_t k, std::uint64_t seed, bool weighted,
                                    std::size_t jobs) {
    return betweenness_pivot(SimpleGraph::from_kg(kg), k, seed, weighted, jobs);
}

// ---------------------------------------------------------------------------
// report

void MetricsConfig::validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error(ErrorCode::ConfigError, "resolution must be positive");
    if (bc_mode == BcMode::Pivot && pivots == 0) throw Error(ErrorCode::ConfigError, "pivot mode needs k >= 1");
}

std::string MetricsConfig::bc_flag() const {
    return bc_mode == BcMode::Exact ? "exact" : "pivot:" + std::to_string(pivots);
}

void parse_bc_flag(std::string_view flag, MetricsConfig& config) {
    const auto lower = to_lower(flag);
    if (lower == "exact") {
        config.bc_mode = MetricsConfig::BcMode::Exact;
        config.pivots = 0;
        return;
    }
    if (lower.rfind("pivot:", 0) == 0) {
        const auto num = lower.substr(6);
        char* end = nullptr;
        const auto k = std::strtoull(num.c_str(), &end, 10);
        if (!num.empty() && end == num.c_str() + num.size() && k > 0) {
            config.bc_mode = MetricsConfig::BcMode::Pivot;
            config.pivots = static_cast<std::size_t>(k);
            return;
        }
    }
    throw Error(ErrorCode::ConfigError, "bc mode must be 'exact' or 'pivot:k', got '" + std::string(flag) + "'");
}

const std::vector<TrendRow>& trend_table() {
    static const std::vector<TrendRow> rows = {
        {"adc", "increasing", 1.079, 2.262},
        {"communities", "increasing", 253, 541},
        {"modularity", "decreasing", 0.779, 0.636},
        {"wcc", "decreasing", 63, 35},
        {"bc", "increasing", 1.57, 15.1},
    };
    return rows;
}

double MetricsReport::headline(std::string_view metric) const {
    if (metric == "adc") return adc_directed;
    if (metric == "communities") return static_cast<double>(community_count);
    if (metric == "modularity") return modularity;
    if (metric == "wcc") return static_cast<double>(wcc_count);
    if (metric == "bc") return bc_mean;
    if (metric == "adc_total") return adc_total;
    if (metric == "clustering") return avg_local_clustering;
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(metric) + "'");
}

MetricsReport full_report(const KnowledgeGraph& kg, const MetricsConfig& config) {
    config.validate();
    MetricsReport r;
    const auto g = SimpleGraph::from_kg(kg);
    r.node_count = kg.nodes().size();
    r.edge_count = kg.edges().size();
    r.semantic_edge_count = kg.semantic_edge_count();

    auto deg = degree_centrality(kg);
    r.adc_directed = deg.adc_directed;
    r.adc_total = deg.adc_total;
    r.degrees = std::move(deg.per_node);

    auto comm = detect_communities(g, config.resolution, config.seed);
    r.community_count = comm.count;
    r.modularity = comm.modularity;
    r.community = std::move(comm.partition);

    auto cl = local_clustering(g);
    r.avg_local_clustering = cl.average;
    r.clustering = std::move(cl.per_node);

    r.wcc_count = weakly_connected_components(g).count;

    const auto bc = config.bc_mode == MetricsConfig::BcMode::Exact
                        ? betweenness_exact(g, config.bc_weighted, config.jobs)
                        : betweenness_pivot(g, config.pivots, config.seed, config.bc_weighted, config.jobs);
    r.bc_mean = bc.mean;
    for (std::size_t i = 0; i < kg.nodes().size(); ++i) {
        r.node_ids.push_back(kg.nodes()[i].id);
        r.node_levels.push_back(kg.nodes()[i].level);
        r.bc_per_node.emplace(kg.nodes()[i].id, bc.per_node[i]);
    }
    r.method_flags = {{"bc", config.bc_flag()},
                      {"bc_weighted", config.bc_weighted},
                      {"communities", {{"method", "louvain"}, {"seed", config.seed}, {"resolution", config.resolution}}},
                      {"clustering", "local, undirected simple view"},
                      {"wcc", "union-find"}};
    return r;
}

json metrics_to_json(const MetricsReport& r) {
    return {{"node_count", r.node_count},
            {"edge_count", r.edge_count},
            {"semantic_edge_count", r.semantic_edge_count},
            {"adc_directed", r.adc_directed},
            {"adc_total", r.adc_total},
            {"community_count", r.community_count},
            {"modularity", r.modularity},
            {"avg_local_clustering", r.avg_local_clustering},
            {"wcc_count", r.wcc_count},
            {"bc_mean", r.bc_mean},
            {"bc_per_node", r.bc_per_node},
            {"method_flags", r.method_flags}};
}

std::string node_metrics_csv(const MetricsReport& r) {
    std::ostringstream out;
    out << "id,level,deg,bc,community,clustering\n";
    for (std::size_t i = 0; i < r.node_ids.size(); ++i) {
        out << csv_escape(r.node_ids[i]) << ',' << to_string(r.node_levels[i]) << ',' << r.degrees[i].total() << ','
            << format_double(r.bc_per_node.at(r.node_ids[i])) << ',' << r.community[i] << ','
            << format_double(r.clustering[i]) << '\n';
    }
    return out.str();
}

json compare_reports(const MetricsReport& hierarchy, const MetricsReport& completed) {
    json rows = json::array();
    for (const auto& t : trend_table()) {
        const double h = hierarchy.headline(t.metric);
        const double k = completed.headline(t.metric);
        const double delta = k - h;
        const bool ok = t.preferred == "increasing" ? delta > 0.0 : delta < 0.0;
        rows.push_back({{"metric", t.metric},
                        {"hierarchy", h},
                        {"kg", k},
                        {"delta", delta},
                        {"preferred", t.preferred},
                        {"trend_ok", ok},
                        {"reference", {{"hierarchy", t.reference_hierarchy}, {"kg", t.reference_kg}}}});
    }
    for (const auto* extra : {"adc_total", "clustering"}) {
        const double h = hierarchy.headline(extra);
        const double k = completed.headline(extra);
        rows.push_back({{"metric", extra}, {"hierarchy", h}, {"kg", k}, {"delta", k - h}});
    }
    return {{"hierarchy", metrics_to_json(hierarchy)}, {"kg", metrics_to_json(completed)}, {"table", rows}};
}

}  // namespace lokg
