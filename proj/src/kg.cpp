#include "lokg/kg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "lokg/error.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

std::string_view to_string(EdgeKind kind) noexcept {
    return kind == EdgeKind::Hierarchical ? "hierarchical" : "semantic";
}

std::optional<EdgeKind> parse_edge_kind(std::string_view name) {
    const auto lower = to_lower(name);
    if (lower == "hierarchical") return EdgeKind::Hierarchical;
    if (lower == "semantic" || lower == kSemanticRelation) return EdgeKind::Semantic;
    return std::nullopt;
}

namespace {

bool edge_less(const Edge& a, const Edge& b) {
    return std::tie(a.kind, a.src, a.dst) < std::tie(b.kind, b.src, b.dst);
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::vector<Node> nodes, std::vector<Edge> edges, Provenance provenance)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), provenance_(std::move(provenance)) {
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second) {
            throw Error(ErrorCode::DuplicateId, "node '" + nodes_[i].id + "' appears twice");
        }
    }
    for (const auto& e : edges_) {
        for (const auto* end : {&e.src, &e.dst}) {
            if (!index_.count(*end)) throw Error(ErrorCode::DanglingReference, "edge endpoint '" + *end + "' is not a node");
        }
        if (e.src == e.dst) throw Error(ErrorCode::InvalidArgument, "self-loop on '" + e.src + "'");
        if (e.kind == EdgeKind::Semantic && !(e.src < e.dst)) {
            throw Error(ErrorCode::InvalidArgument, "semantic edge " + e.src + "-" + e.dst + " is not canonical");
        }
        if (!std::isfinite(e.weight)) throw Error(ErrorCode::InvalidArgument, "edge weight must be finite");
    }
    std::sort(edges_.begin(), edges_.end(), edge_less);
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        const auto& a = edges_[i - 1];
        const auto& b = edges_[i];
        if (a.kind == b.kind && a.src == b.src && a.dst == b.dst) {
            throw Error(ErrorCode::InvalidArgument, "duplicate " + std::string(to_string(a.kind)) + " edge " + a.src +
                                                        " -> " + a.dst);
        }
    }
    hierarchical_ = static_cast<std::size_t>(std::count_if(
        edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == EdgeKind::Hierarchical; }));
}

std::optional<std::size_t> KnowledgeGraph::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Node* KnowledgeGraph::find(std::string_view id) const {
    auto idx = index_of(id);
    return idx ? &nodes_[*idx] : nullptr;
}

KnowledgeGraph KnowledgeGraph::hierarchy_only() const {
    std::vector<Edge> kept(edges_.begin(), edges_.begin() + static_cast<std::ptrdiff_t>(hierarchical_));
    return KnowledgeGraph(nodes_, std::move(kept), provenance_);
}

std::string dataset_hash(const TaxonomyForest& forest) { return hex64(fnv1a64(serialize_taxonomy(forest))); }

KnowledgeGraph build_kg(const TaxonomyForest& forest, const std::vector<SimilarityVerdict>& verdicts,
                        const KgBuildOptions& options) {
    std::vector<Node> nodes;
    nodes.reserve(forest.size());
    for (const auto& [id, o] : forest.objects()) nodes.push_back({id, o.level, clean_text(o.title)});

    std::vector<Edge> edges;
    for (const auto& [parent, child] : forest.hierarchy_edges()) edges.push_back({parent, child, EdgeKind::Hierarchical, 1.0});

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& v : verdicts) {
        for (const auto* id : {&v.id_a, &v.id_b}) {
            if (!forest.find(*id)) throw Error(ErrorCode::DanglingReference, "verdict refers to unknown object '" + *id + "'");
        }
        if (!v.passed) throw Error(ErrorCode::InvalidArgument, "verdict " + v.id_a + "-" + v.id_b + " did not pass");
        auto key = v.id_a < v.id_b ? std::pair{v.id_a, v.id_b} : std::pair{v.id_b, v.id_a};
        if (key.first == key.second) throw Error(ErrorCode::InvalidArgument, "self relation on '" + key.first + "'");
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::InvalidArgument, "pair " + key.first + "-" + key.second + " given twice");
        }
        if (v.intra_journey && !options.include_intra_journey) continue;
        edges.push_back({key.first, key.second, EdgeKind::Semantic, v.combined});
    }

    Provenance prov;
    prov.dataset_hash = dataset_hash(forest);
    prov.config_hash = options.config_hash.empty()
                           ? hex64(fnv1a64(options.include_intra_journey ? "intra=1" : "intra=0"))
                           : options.config_hash;
    prov.provider_tags = options.provider_tags;
    return KnowledgeGraph(std::move(nodes), std::move(edges), std::move(prov));
}

std::vector<GraphPath> journey_paths(const KnowledgeGraph& kg, std::string_view journey_a, std::string_view journey_b,
                                     std::size_t max_len, std::size_t limit) {
    std::size_t ends[2];
    std::string_view names[2] = {journey_a, journey_b};
    for (int i = 0; i < 2; ++i) {
        const auto idx = kg.index_of(names[i]);
        if (!idx || kg.nodes()[*idx].level != Level::Journey) {
            throw Error(ErrorCode::NotAJourney, "'" + std::string(names[i]) + "' is not a Journey node");
        }
        ends[i] = *idx;
    }
    std::vector<GraphPath> out;
    if (max_len == 0 || ends[0] == ends[1]) return out;

    const auto n = kg.nodes().size();
    std::vector<std::vector<std::pair<std::size_t, EdgeKind>>> adj(n);
    for (const auto& e : kg.edges()) {
        const auto s = *kg.index_of(e.src);
        const auto d = *kg.index_of(e.dst);
        adj[s].emplace_back(d, e.kind);
        adj[d].emplace_back(s, e.kind);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    std::vector<bool> on_path(n, false);
    std::vector<std::size_t> stack_nodes{ends[0]};
    std::vector<EdgeKind> stack_kinds;
    on_path[ends[0]] = true;

    auto dfs = [&](auto&& self, std::size_t u) -> void {
        for (const auto& [v, kind] : adj[u]) {
            if (out.size() >= limit) return;
            if (on_path[v]) continue;
            stack_kinds.push_back(kind);
            stack_nodes.push_back(v);
            if (v == ends[1]) {
                GraphPath p;
                for (auto i : stack_nodes) p.nodes.push_back(kg.nodes()[i].id);
                p.kinds = stack_kinds;
                out.push_back(std::move(p));
            } else if (stack_kinds.size() < max_len) {
                on_path[v] = true;
                self(self, v);
                on_path[v] = false;
            }
            stack_nodes.pop_back();
            stack_kinds.pop_back();
        }
    };
    dfs(dfs, ends[0]);
    return out;
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string to_graphml(const KnowledgeGraph& kg) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"level\" for=\"node\" attr.name=\"level\" attr.type=\"string\"/>\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"kind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <graph id=\"kg\" edgedefault=\"directed\">\n";
    for (const auto& n : kg.nodes()) {
        out << "    <node id=\"" << xml_escape(n.id) << "\">"
            << "<data key=\"level\">" << to_string(n.level) << "</data>"
            << "<data key=\"label\">" << xml_escape(n.label) << "</data></node>\n";
    }
    std::size_t i = 0;
    for (const auto& e : kg.edges()) {
        out << "    <edge id=\"e" << i++ << "\" source=\"" << xml_escape(e.src) << "\" target=\"" << xml_escape(e.dst)
            << "\"" << (e.kind == EdgeKind::Semantic ? " directed=\"false\"" : "") << ">"
            << "<data key=\"kind\">" << (e.kind == EdgeKind::Semantic ? kSemanticRelation : "hierarchical") << "</data>"
            << "<data key=\"weight\">" << format_double(e.weight) << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

std::string to_edge_list(const KnowledgeGraph& kg) {
    std::ostringstream out;
    out << "src,dst,kind,weight\n";
    for (const auto& e : kg.edges()) {
        out << csv_escape(e.src) << ',' << csv_escape(e.dst) << ',' << to_string(e.kind) << ','
            << format_double(e.weight) << '\n';
    }
    return out.str();
}

json kg_to_json(const KnowledgeGraph& kg) {
    json nodes = json::array();
    for (const auto& n : kg.nodes()) {
        nodes.push_back({{"id", n.id}, {"level", std::string(to_string(n.level))}, {"label", n.label}});
    }
    json edges = json::array();
    for (const auto& e : kg.edges()) {
        edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", std::string(to_string(e.kind))}, {"weight", e.weight}});
    }
    const auto& p = kg.provenance();
    return {{"format", "lokg-kg"},
            {"version", 1},
            {"provenance",
             {{"dataset_hash", p.dataset_hash}, {"config_hash", p.config_hash}, {"provider_tags", p.provider_tags}}},
            {"nodes", std::move(nodes)},
            {"edges", std::move(edges)}};
}

KnowledgeGraph kg_from_json(const json& doc) {
    try {
        if (doc.value("format", "") != "lokg-kg") throw Error(ErrorCode::SchemaError, "not a knowledge graph document");
        std::vector<Node> nodes;
        for (const auto& n : doc.at("nodes")) {
            const auto level = parse_level(n.at("level").get<std::string>());
            if (!level) throw Error(ErrorCode::SchemaError, "node with unknown level");
            nodes.push_back({n.at("id").get<std::string>(), *level, n.value("label", "")});
        }
        std::vector<Edge> edges;
        for (const auto& e : doc.at("edges")) {
            const auto kind = parse_edge_kind(e.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::SchemaError, "edge with unknown kind");
            edges.push_back({e.at("src").get<std::string>(), e.at("dst").get<std::string>(), *kind,
                             e.at("weight").get<double>()});
        }
        Provenance prov;
        const auto& p = doc.at("provenance");
        prov.dataset_hash = p.value("dataset_hash", "");
        prov.config_hash = p.value("config_hash", "");
        if (p.contains("provider_tags")) prov.provider_tags = p.at("provider_tags").get<std::map<std::string, std::string>>();
        return KnowledgeGraph(std::move(nodes), std::move(edges), std::move(prov));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed knowledge graph: ") + e.what());
    }
}

std::string serialize_kg(const KnowledgeGraph& kg) { return kg_to_json(kg).dump(2) + "\n"; }

KnowledgeGraph parse_kg(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("knowledge graph is not valid JSON: ") + e.what());
    }
    return kg_from_json(doc);
}

}  // namespace lokg
