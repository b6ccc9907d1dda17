#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "cfkg/graph.hpp"
#include "cfkg/types.hpp"

namespace cfkg {

enum class Strategy {
    RandomNode,
    RandomEdge,
    RandomNodeEdge,
    RandomNodeAlign,
    RandomNodeEdgeAlign,
    AttentionHigh,
    AttentionLow,
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::RandomNode,      Strategy::RandomEdge,    Strategy::RandomNodeEdge,
    Strategy::RandomNodeAlign, Strategy::RandomNodeEdgeAlign,
    Strategy::AttentionHigh,   Strategy::AttentionLow,
};

const char* to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

bool removes_nodes(Strategy s);
bool removes_edges(Strategy s);
bool is_type_aligned(Strategy s);
bool uses_attention(Strategy s);

struct PerturbationSpec {
    Strategy strategy = Strategy::RandomNode;
    std::size_t node_budget = 0;
    std::size_t edge_budget = 0;
    /// removed nodes per entity type in the reference counterfactual
    std::map<std::string, std::size_t> type_histogram;
    std::uint64_t seed = 0;
};

/// Keep flags after cascading node removals onto incident edges.
struct BinaryGraphMask {
    KeepMask node_keep;
    KeepMask edge_keep;
    /// edges removed only because an endpoint was removed
    std::vector<std::size_t> cascaded_edges;

    std::size_t removed_nodes() const;
    std::size_t removed_edges() const;
    std::size_t budgeted_edge_removals() const { return removed_edges() - cascaded_edges.size(); }

    static BinaryGraphMask identity(const HeteroGraph& graph);
};

/// Applies node removal cascade in place and records the cascaded edges.
void cascade_node_removals(const HeteroGraph& graph, BinaryGraphMask& mask);

/// Budgets taken from a reference counterfactual's binary masks: removed
/// nodes, removed edges (as flagged, before any cascade) and removed nodes
/// per entity type. The strategy and seed are left for the caller.
PerturbationSpec derive_budgets(const HeteroGraph& graph, const KeepMask& reference_node_keep,
                                const KeepMask& reference_edge_keep);

/// Uniform sampling without replacement of the removal sets. Throws
/// ErrorKind::InfeasibleBudget.
BinaryGraphMask random_mask(const HeteroGraph& graph, const PerturbationSpec& spec);

/// Removes the top (AttentionHigh) or bottom (AttentionLow) scored nodes,
/// per entity type when the histogram is non-empty, ties by lower index
/// first. Throws ErrorKind::MissingScore or ErrorKind::InfeasibleBudget.
BinaryGraphMask attention_mask(const HeteroGraph& graph, const PerturbationSpec& spec,
                               const std::unordered_map<std::string, double>& attention);

/// Dispatches on spec.strategy.
BinaryGraphMask perturb(const HeteroGraph& graph, const PerturbationSpec& spec,
                        const std::unordered_map<std::string, double>* attention);

/// Adjacency view of a mask: diagonal cells carry node retention, off-diagonal
/// (i, j) carries retention of the directed edge i -> j, and -1 marks "no
/// edge". Parallel edges count as kept if any of them is kept.
Eigen::MatrixXi adjacency_heatmap(const HeteroGraph& graph, const BinaryGraphMask& mask);

std::string heatmap_csv(const HeteroGraph& graph, const Eigen::MatrixXi& heatmap);
std::string heatmap_svg(const HeteroGraph& graph, const Eigen::MatrixXi& heatmap);

} // namespace cfkg
