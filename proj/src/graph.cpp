#include "cfkg/graph.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfkg/error.hpp"

namespace cfkg {

namespace {

constexpr std::array<std::string_view, 3> kCoreRelations{kRelInput, kRelOutput, kRelDownloadFrom};

bool contains(const std::vector<std::string>& names, std::string_view name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw Error(ErrorKind::Parse, std::string("schema.") + key + " must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& item : j.at(key)) {
        if (!item.is_string()) {
            throw Error(ErrorKind::Parse, std::string("schema.") + key + " must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string string_field(const nlohmann::json& j, const char* key, const char* where, bool required = true) {
    if (!j.contains(key)) {
        if (required) throw Error(ErrorKind::Parse, std::string(where) + " is missing \"" + key + "\"");
        return {};
    }
    if (!j.at(key).is_string()) {
        throw Error(ErrorKind::Parse, std::string(where) + " field \"" + key + "\" must be a string");
    }
    return j.at(key).get<std::string>();
}

} // namespace

SchemaRegistry::SchemaRegistry(std::vector<std::string> entity_types,
                               std::vector<std::string> relation_types,
                               std::string terminal_type)
    : entity_types_(std::move(entity_types)),
      relation_types_(std::move(relation_types)),
      terminal_type_(std::move(terminal_type)) {
    if (entity_types_.size() < 2) {
        throw Error(ErrorKind::Schema, "schema needs more than one entity type");
    }
    if (relation_types_.size() < 2) {
        throw Error(ErrorKind::Schema, "schema needs more than one relation type");
    }
    for (auto core : kCoreRelations) {
        if (!contains(relation_types_, core)) {
            throw Error(ErrorKind::Schema, "schema is missing reserved relation \"" + std::string(core) + "\"");
        }
    }
    if (!contains(entity_types_, terminal_type_)) {
        throw Error(ErrorKind::Schema, "terminal type \"" + terminal_type_ + "\" is not a declared entity type");
    }
}

bool SchemaRegistry::has_entity_type(std::string_view name) const { return contains(entity_types_, name); }

bool SchemaRegistry::has_relation_type(std::string_view name) const { return contains(relation_types_, name); }

std::span<const std::string_view> SchemaRegistry::core_relations() { return kCoreRelations; }

HeteroGraph::HeteroGraph(SchemaRegistry schema, std::vector<Node> nodes, std::vector<Edge> edges)
    : schema_(std::move(schema)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.id.empty()) {
            throw Error(ErrorKind::Schema, "node at position " + std::to_string(i) + " has an empty id");
        }
        if (!schema_.has_entity_type(n.entity_type)) {
            throw Error(ErrorKind::Schema, "node \"" + n.id + "\" has unknown entity type \"" + n.entity_type + "\"");
        }
        if (!node_lookup_.emplace(n.id, i).second) {
            throw Error(ErrorKind::Schema, "duplicate node id \"" + n.id + "\"");
        }
    }
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    endpoints_.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.id.empty()) {
            throw Error(ErrorKind::Schema, "edge at position " + std::to_string(i) + " has an empty id");
        }
        if (!schema_.has_relation_type(e.relation)) {
            throw Error(ErrorKind::Schema, "edge \"" + e.id + "\" has unknown relation \"" + e.relation + "\"");
        }
        if (!edge_lookup_.emplace(e.id, i).second) {
            throw Error(ErrorKind::Schema, "duplicate edge id \"" + e.id + "\"");
        }
        auto src = find_node(e.src);
        if (!src) throw Error(ErrorKind::DanglingEndpoint, "edge \"" + e.id + "\" references missing node \"" + e.src + "\"");
        auto dst = find_node(e.dst);
        if (!dst) throw Error(ErrorKind::DanglingEndpoint, "edge \"" + e.id + "\" references missing node \"" + e.dst + "\"");
        endpoints_.emplace_back(*src, *dst);
        out_[*src].push_back(i);
        in_[*dst].push_back(i);
    }
}

std::optional<std::size_t> HeteroGraph::find_node(std::string_view id) const {
    auto it = node_lookup_.find(std::string(id));
    if (it == node_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> HeteroGraph::find_edge(std::string_view id) const {
    auto it = edge_lookup_.find(std::string(id));
    if (it == edge_lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t HeteroGraph::node_index(std::string_view id) const {
    if (auto i = find_node(id)) return *i;
    throw Error(ErrorKind::UnknownId, "unknown node id \"" + std::string(id) + "\"");
}

std::size_t HeteroGraph::edge_index(std::string_view id) const {
    if (auto i = find_edge(id)) return *i;
    throw Error(ErrorKind::UnknownId, "unknown edge id \"" + std::string(id) + "\"");
}

std::size_t HeteroGraph::count_nodes_of_type(std::string_view entity_type) const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                  [&](const Node& n) { return n.entity_type == entity_type; }));
}

bool HeteroGraph::operator==(const HeteroGraph& other) const {
    return schema_.entity_types() == other.schema_.entity_types() &&
           schema_.relation_types() == other.schema_.relation_types() &&
           schema_.terminal_type() == other.schema_.terminal_type() && nodes_ == other.nodes_ &&
           edges_ == other.edges_;
}

HeteroGraph parse_graph(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed graph file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || !doc.at("schema").is_object()) {
        throw Error(ErrorKind::Parse, "graph file needs a \"schema\" object");
    }
    const auto& js = doc.at("schema");
    std::string terminal = js.contains("terminal_type") ? string_field(js, "terminal_type", "schema")
                                                        : std::string(kDefaultTerminalType);
    SchemaRegistry schema(string_list(js, "entity_types"), string_list(js, "relation_types"), std::move(terminal));

    auto array_of = [&](const char* key) -> const nlohmann::json& {
        if (!doc.contains(key) || !doc.at(key).is_array()) {
            throw Error(ErrorKind::Parse, std::string("graph file needs a \"") + key + "\" array");
        }
        return doc.at(key);
    };

    std::vector<Node> nodes;
    for (const auto& jn : array_of("nodes")) {
        if (!jn.is_object()) throw Error(ErrorKind::Parse, "node entries must be objects");
        nodes.push_back(Node{string_field(jn, "id", "node"), string_field(jn, "type", "node"),
                             string_field(jn, "text", "node", false)});
    }
    std::vector<Edge> edges;
    for (const auto& je : array_of("edges")) {
        if (!je.is_object()) throw Error(ErrorKind::Parse, "edge entries must be objects");
        edges.push_back(Edge{string_field(je, "id", "edge"), string_field(je, "src", "edge"),
                             string_field(je, "dst", "edge"), string_field(je, "relation", "edge"),
                             string_field(je, "text", "edge", false)});
    }
    if (nodes.empty()) {
        throw Error(ErrorKind::Schema, "graph has no nodes; entity types cannot be verified on an empty graph");
    }
    return HeteroGraph(std::move(schema), std::move(nodes), std::move(edges));
}

HeteroGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open graph file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

std::string serialize_graph(const HeteroGraph& graph) {
    nlohmann::ordered_json doc;
    doc["schema"]["entity_types"] = graph.schema().entity_types();
    doc["schema"]["relation_types"] = graph.schema().relation_types();
    doc["schema"]["terminal_type"] = graph.schema().terminal_type();
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const Node& n : graph.nodes()) {
        nlohmann::ordered_json jn;
        jn["id"] = n.id;
        jn["type"] = n.entity_type;
        jn["text"] = n.attributes;
        doc["nodes"].push_back(std::move(jn));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : graph.edges()) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["relation"] = e.relation;
        je["text"] = e.attributes;
        doc["edges"].push_back(std::move(je));
    }
    return doc.dump(2) + "\n";
}

void save_graph(const HeteroGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write graph file " + path.string());
    out << serialize_graph(graph);
}

SubgraphResult subgraph_by_mask(const HeteroGraph& graph, const KeepMask& node_keep, const KeepMask& edge_keep) {
    if (static_cast<std::size_t>(node_keep.size()) != graph.node_count() ||
        static_cast<std::size_t>(edge_keep.size()) != graph.edge_count()) {
        throw Error(ErrorKind::LengthMismatch,
                    "mask lengths (" + std::to_string(node_keep.size()) + ", " + std::to_string(edge_keep.size()) +
                        ") do not match graph (" + std::to_string(graph.node_count()) + ", " +
                        std::to_string(graph.edge_count()) + ")");
    }
    SubgraphResult result;
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (node_keep(i)) nodes.push_back(graph.node(i));
    }
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        if (!edge_keep(e)) continue;
        if (node_keep(graph.edge_source(e)) && node_keep(graph.edge_target(e))) {
            edges.push_back(graph.edge(e));
        } else {
            result.implied_edge_drops.push_back(graph.edge(e).id);
        }
    }
    result.graph = HeteroGraph(graph.schema(), std::move(nodes), std::move(edges));
    return result;
}

} // namespace cfkg
