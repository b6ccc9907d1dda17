#include "cfkg/losses.hpp"

#include "cfkg/error.hpp"

namespace cfkg {

namespace {

double lookup_or_one(const std::map<std::string, double>& table, const std::string& key) {
    auto it = table.find(key);
    return it == table.end() ? 1.0 : it->second;
}

void check_lengths(const HeteroGraph& graph, const MaskVector& node_masks, const MaskVector& edge_masks) {
    if (static_cast<std::size_t>(node_masks.size()) != graph.node_count() ||
        static_cast<std::size_t>(edge_masks.size()) != graph.edge_count()) {
        throw Error(ErrorKind::LengthMismatch, "mask lengths do not match graph");
    }
}

} // namespace

double LossWeights::node_lambda(const std::string& entity_type) const {
    return lookup_or_one(per_node_lambda, entity_type);
}

double LossWeights::relation_lambda(const std::string& relation) const {
    return lookup_or_one(per_relation_lambda, relation);
}

double LossWeights::type_weight(const std::string& entity_type) const {
    return lookup_or_one(node_type_weights, entity_type);
}

void LossWeights::validate() const {
    const std::pair<const char*, double> scalars[] = {
        {"alpha_semantic", alpha_semantic}, {"beta_entropy", beta_entropy}, {"gamma_preserve", gamma_preserve},
        {"delta_hard", delta_hard},         {"epsilon_smooth", epsilon_smooth}, {"lambda_node", lambda_node},
        {"lambda_edge", lambda_edge},
    };
    for (const auto& [name, value] : scalars) {
        if (!(value >= 0.0)) throw Error(ErrorKind::Schema, std::string(name) + " must be nonnegative");
    }
    for (const auto* table : {&per_node_lambda, &per_relation_lambda, &node_type_weights}) {
        for (const auto& [key, value] : *table) {
            if (!(value >= 0.0)) throw Error(ErrorKind::Schema, "weight for \"" + key + "\" must be nonnegative");
        }
    }
}

LossCoefficients LossCoefficients::compile(const HeteroGraph& graph, const LossWeights& weights,
                                           const HardSets& hard, const std::string& tool_type) {
    weights.validate();
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    const auto m = static_cast<Eigen::Index>(graph.edge_count());
    LossCoefficients c;
    c.node_lambda.resize(n);
    c.node_type_weight.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& type = graph.node(static_cast<std::size_t>(i)).entity_type;
        c.node_lambda(i) = weights.lambda_node * weights.node_lambda(type);
        c.node_type_weight(i) = weights.type_weight(type);
    }
    c.edge_lambda.resize(m);
    c.edge_src.resize(m);
    c.edge_dst.resize(m);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        c.edge_lambda(e) = weights.lambda_edge * weights.relation_lambda(graph.edge(ue).relation);
        c.edge_src(e) = static_cast<int>(graph.edge_source(ue));
        c.edge_dst(e) = static_cast<int>(graph.edge_target(ue));
        if (c.node_type_weight(c.edge_src(e)) + c.node_type_weight(c.edge_dst(e)) <= 0.0) {
            throw Error(ErrorKind::DivisionGuard,
                        "edge \"" + graph.edge(ue).id + "\" has zero type weight on both endpoints");
        }
    }
    c.hard_nodes.resize(static_cast<Eigen::Index>(hard.nodes.size()));
    Eigen::Index k = 0;
    for (const auto& id : hard.nodes) c.hard_nodes(k++) = static_cast<int>(graph.node_index(id));
    c.hard_edges.resize(static_cast<Eigen::Index>(hard.edges.size()));
    k = 0;
    for (const auto& id : hard.edges) c.hard_edges(k++) = static_cast<int>(graph.edge_index(id));
    c.tool_count = static_cast<double>(graph.count_nodes_of_type(tool_type));
    return c;
}

double structure_loss(const HeteroGraph& graph, const LossWeights& weights, const MaskVector& node_masks,
                      const MaskVector& edge_masks) {
    check_lengths(graph, node_masks, edge_masks);
    return structure_loss(LossCoefficients::compile(graph, weights, {}), node_masks, edge_masks);
}

double preserve_loss(const HeteroGraph& graph, const MaskVector& edge_masks, const std::string& tool_type) {
    if (static_cast<std::size_t>(edge_masks.size()) != graph.edge_count()) {
        throw Error(ErrorKind::LengthMismatch, "edge mask length does not match graph");
    }
    return preserve_loss(static_cast<double>(graph.count_nodes_of_type(tool_type)), edge_masks);
}

double hard_loss(const HeteroGraph& graph, const HardSets& hard, const MaskVector& node_masks,
                 const MaskVector& edge_masks) {
    check_lengths(graph, node_masks, edge_masks);
    return hard_loss(LossCoefficients::compile(graph, LossWeights{}, hard), node_masks, edge_masks);
}

double smooth_loss(const HeteroGraph& graph, const LossWeights& weights, const MaskVector& node_masks,
                   const MaskVector& edge_masks) {
    check_lengths(graph, node_masks, edge_masks);
    return smooth_loss(LossCoefficients::compile(graph, weights, {}), node_masks, edge_masks);
}

} // namespace cfkg
