#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfkg/types.hpp"

namespace cfkg {

inline constexpr std::string_view kRelInput = "rels_input";
inline constexpr std::string_view kRelOutput = "rels_output";
inline constexpr std::string_view kRelDownloadFrom = "rels_download_from";
inline constexpr std::string_view kToolType = "Tool";
inline constexpr std::string_view kDatabaseType = "Database";
inline constexpr std::string_view kDefaultTerminalType = "Evaluation Information";

/// Entity and relation vocabulary of a graph, read from the graph file header.
///
/// The three pipeline relations (input, output, download-from) are reserved
/// names and must be declared by every schema.
class SchemaRegistry {
public:
    SchemaRegistry() = default;
    SchemaRegistry(std::vector<std::string> entity_types,
                   std::vector<std::string> relation_types,
                   std::string terminal_type);

    const std::vector<std::string>& entity_types() const { return entity_types_; }
    const std::vector<std::string>& relation_types() const { return relation_types_; }
    const std::string& terminal_type() const { return terminal_type_; }

    bool has_entity_type(std::string_view name) const;
    bool has_relation_type(std::string_view name) const;

    static std::span<const std::string_view> core_relations();

private:
    std::vector<std::string> entity_types_;
    std::vector<std::string> relation_types_;
    std::string terminal_type_;
};

struct Node {
    std::string id;
    std::string entity_type;
    std::string attributes;

    bool operator==(const Node&) const = default;
};

struct Edge {
    std::string id;
    std::string src;
    std::string dst;
    std::string relation;
    std::string attributes;

    bool operator==(const Edge&) const = default;
};

/// Directed heterogeneous graph with typed nodes and edges.
///
/// Immutable once constructed. Node and edge positions follow insertion
/// order; every mask vector in the library is aligned to these positions.
class HeteroGraph {
public:
    HeteroGraph() = default;

    /// Validates types, id uniqueness and endpoints; throws cfkg::Error.
    HeteroGraph(SchemaRegistry schema, std::vector<Node> nodes, std::vector<Edge> edges);

    const SchemaRegistry& schema() const { return schema_; }
    std::span<const Node> nodes() const { return nodes_; }
    std::span<const Edge> edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    const Edge& edge(std::size_t i) const { return edges_[i]; }

    std::optional<std::size_t> find_node(std::string_view id) const;
    std::optional<std::size_t> find_edge(std::string_view id) const;
    /// Like find_node but throws ErrorKind::UnknownId.
    std::size_t node_index(std::string_view id) const;
    std::size_t edge_index(std::string_view id) const;

    std::size_t edge_source(std::size_t e) const { return endpoints_[e].first; }
    std::size_t edge_target(std::size_t e) const { return endpoints_[e].second; }
    const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_[v]; }
    const std::vector<std::size_t>& in_edges(std::size_t v) const { return in_[v]; }

    std::size_t count_nodes_of_type(std::string_view entity_type) const;

    bool operator==(const HeteroGraph& other) const;

private:
    SchemaRegistry schema_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> node_lookup_;
    std::unordered_map<std::string, std::size_t> edge_lookup_;
    std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

HeteroGraph parse_graph(std::string_view json_text);
HeteroGraph load_graph(const std::filesystem::path& path);

/// Canonical serialization: two-space indented JSON, keys in schema order.
std::string serialize_graph(const HeteroGraph& graph);
void save_graph(const HeteroGraph& graph, const std::filesystem::path& path);

struct SubgraphResult {
    HeteroGraph graph;
    /// Edge ids that were flagged kept but lost an endpoint.
    std::vector<std::string> implied_edge_drops;
};

SubgraphResult subgraph_by_mask(const HeteroGraph& graph,
                                const KeepMask& node_keep,
                                const KeepMask& edge_keep);

} // namespace cfkg
