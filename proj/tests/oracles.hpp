#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive: path enumeration instead of dependency accumulation,
// triple loops instead of sorted intersections, the double-sum form of
// modularity instead of the per-community one.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

struct Graph {
    std::size_t n = 0;
    EdgeList edges;  // undirected, u < v, no duplicates

    std::vector<std::vector<bool>> matrix() const {
        std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
        for (auto [u, v] : edges) a[u][v] = a[v][u] = true;
        return a;
    }
};

/// G(n, p) with a fixed seed.
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Graph g;
    g.n = n;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (coin(rng) < p) g.edges.emplace_back(u, v);
        }
    }
    return g;
}

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    void add(std::int64_t n, std::int64_t d) {
        const std::int64_t l = std::lcm(den, d);
        num = num * (l / den) + n * (l / d);
        den = l;
        const std::int64_t g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Betweenness by listing every shortest path of every unordered pair.
inline std::vector<Rational> betweenness_by_enumeration(const Graph& g) {
    const auto a = g.matrix();
    std::vector<Rational> bc(g.n);
    for (std::size_t s = 0; s < g.n; ++s) {
        for (std::size_t t = s + 1; t < g.n; ++t) {
            // all simple s-t paths, keep the shortest ones
            std::vector<std::vector<std::size_t>> shortest;
            std::vector<std::size_t> path{s};
            std::vector<bool> on(g.n, false);
            on[s] = true;
            std::function<void(std::size_t)> walk = [&](std::size_t u) {
                if (u == t) {
                    if (shortest.empty() || path.size() < shortest.front().size()) shortest.clear();
                    if (shortest.empty() || path.size() == shortest.front().size()) shortest.push_back(path);
                    return;
                }
                if (!shortest.empty() && path.size() >= shortest.front().size()) return;
                for (std::size_t v = 0; v < g.n; ++v) {
                    if (a[u][v] && !on[v]) {
                        on[v] = true;
                        path.push_back(v);
                        walk(v);
                        path.pop_back();
                        on[v] = false;
                    }
                }
            };
            walk(s);
            if (shortest.empty()) continue;
            std::vector<std::int64_t> through(g.n, 0);
            for (const auto& p : shortest) {
                for (std::size_t i = 1; i + 1 < p.size(); ++i) ++through[p[i]];
            }
            const auto total = static_cast<std::int64_t>(shortest.size());
            for (std::size_t v = 0; v < g.n; ++v) {
                if (through[v] > 0) bc[v].add(through[v], total);
            }
        }
    }
    return bc;
}

/// Local clustering as (closed triangles, degree) per node.
struct TriangleCount {
    std::int64_t triangles = 0;
    std::int64_t degree = 0;
    double coefficient() const {
        return degree < 2 ? 0.0 : 2.0 * static_cast<double>(triangles) / static_cast<double>(degree * (degree - 1));
    }
};

inline std::vector<TriangleCount> triangles_cubic(const Graph& g) {
    const auto a = g.matrix();
    std::vector<TriangleCount> out(g.n);
    for (std::size_t v = 0; v < g.n; ++v) {
        for (std::size_t u = 0; u < g.n; ++u) out[v].degree += a[v][u] ? 1 : 0;
        for (std::size_t u = 0; u < g.n; ++u) {
            for (std::size_t w = u + 1; w < g.n; ++w) {
                if (a[v][u] && a[v][w] && a[u][w]) ++out[v].triangles;
            }
        }
    }
    return out;
}

/// Component labels by BFS flood fill, numbered in order of the smallest member.
inline std::vector<std::size_t> flood_fill(const Graph& g) {
    const auto a = g.matrix();
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> label(g.n, none);
    std::size_t next = 0;
    for (std::size_t s = 0; s < g.n; ++s) {
        if (label[s] != none) continue;
        std::queue<std::size_t> q;
        q.push(s);
        label[s] = next;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (std::size_t v = 0; v < g.n; ++v) {
                if (a[u][v] && label[v] == none) {
                    label[v] = next;
                    q.push(v);
                }
            }
        }
        ++next;
    }
    return label;
}

/// Q = 1/(2m) * sum_ij [A_ij - k_i k_j / (2m)] delta(c_i, c_j).
inline double modularity_double_sum(const Graph& g, const std::vector<std::size_t>& part) {
    if (g.edges.empty()) return 0.0;
    const auto a = g.matrix();
    std::vector<double> k(g.n, 0.0);
    for (auto [u, v] : g.edges) {
        k[u] += 1.0;
        k[v] += 1.0;
    }
    const double two_m = 2.0 * static_cast<double>(g.edges.size());
    double q = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.n; ++j) {
            if (part[i] != part[j]) continue;
            q += (a[i][j] ? 1.0 : 0.0) - k[i] * k[j] / two_m;
        }
    }
    return q / two_m;
}

/// Every set partition of n nodes as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> rgs(n, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
        if (i == n) {
            fn(rgs);
            return;
        }
        for (std::size_t c = 0; c <= used; ++c) {
            rgs[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    if (n == 0) return;
    rgs[0] = 0;
    rec(1, 1);
}

struct BestPartition {
    std::vector<std::size_t> partition;
    double q = -1.0;
    std::size_t ties = 0;  // partitions within 1e-12 of the best
};

inline BestPartition max_modularity_exhaustive(const Graph& g) {
    BestPartition best;
    for_each_partition(g.n, [&](const std::vector<std::size_t>& p) {
        const double q = modularity_double_sum(g, p);
        if (q > best.q + 1e-12) {
            best = {p, q, 1};
        } else if (q > best.q - 1e-12) {
            ++best.ties;
        }
    });
    return best;
}

/// True when two labelings describe the same partition.
inline bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
        }
    }
    return true;
}

/// Greedy MMR checked step by step: returns the objective value of every
/// candidate at each step so a test can confirm the pick was an argmax.
inline std::vector<std::vector<double>> mmr_objectives(const std::vector<double>& doc_sim,
                                                       const std::vector<std::vector<double>>& pair_sim,
                                                       const std::vector<std::size_t>& picks, double lambda) {
    std::vector<std::vector<double>> steps;
    std::set<std::size_t> chosen;
    for (auto pick : picks) {
        std::vector<double> obj(doc_sim.size(), -1e300);
        for (std::size_t c = 0; c < doc_sim.size(); ++c) {
            if (chosen.count(c)) continue;
            double penalty = 0.0;
            if (!chosen.empty()) {
                penalty = -1e300;
                for (auto s : chosen) penalty = std::max(penalty, pair_sim[c][s]);
            }
            obj[c] = lambda * doc_sim[c] - (1.0 - lambda) * penalty;
        }
        steps.push_back(obj);
        chosen.insert(pick);
    }
    return steps;
}

}  // namespace oracle
