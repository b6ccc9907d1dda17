#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfkg/graph.hpp"
#include "cfkg/types.hpp"

namespace cfkg {

inline constexpr double kLogClamp = 1e-10;
inline constexpr double kMaskThreshold = 0.5;

/// Coefficients of the counterfactual objective. Missing per-type entries
/// default to 1.0. Defaults reproduce the transcript-assembly case study.
struct LossWeights {
    double alpha_semantic = 400.0;
    double beta_entropy = 0.05;
    double gamma_preserve = 10.0;
    double delta_hard = 10.0;
    double epsilon_smooth = 5.0;
    double lambda_node = 0.1;
    double lambda_edge = 0.5;
    std::map<std::string, double> per_node_lambda;
    std::map<std::string, double> per_relation_lambda{
        {"rels_input", 4.0}, {"rels_output", 4.0}, {"rels_download_from", 0.5}, {"END", 1.0}};
    std::map<std::string, double> node_type_weights;

    double node_lambda(const std::string& entity_type) const;
    double relation_lambda(const std::string& relation) const;
    double type_weight(const std::string& entity_type) const;

    /// Throws ErrorKind::Schema on a negative coefficient.
    void validate() const;
};

struct HardSets {
    std::set<std::string> nodes;
    std::set<std::string> edges;
};

/// Per-element coefficient vectors resolved against one graph, so each loss
/// term is a plain vector expression over the masks.
struct LossCoefficients {
    MaskVector node_lambda;       // lambda_V * lambda_type(v)
    MaskVector edge_lambda;       // lambda_E * lambda_relation(e)
    MaskVector node_type_weight;  // w_type(v)
    Eigen::VectorXi edge_src;
    Eigen::VectorXi edge_dst;
    Eigen::VectorXi hard_nodes;
    Eigen::VectorXi hard_edges;
    double tool_count = 0.0;

    /// Throws ErrorKind::UnknownId for hard ids absent from the graph and
    /// ErrorKind::DivisionGuard when an edge has two zero-weight endpoints.
    static LossCoefficients compile(const HeteroGraph& graph, const LossWeights& weights,
                                    const HardSets& hard, const std::string& tool_type = "Tool");
};

// ---------------------------------------------------------------------------
// Structure sparsity

template <typename DN, typename DE>
double structure_loss(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                      const Eigen::MatrixBase<DE>& edge_masks) {
    return c.node_lambda.dot(node_masks) + c.edge_lambda.dot(edge_masks);
}

// ---------------------------------------------------------------------------
// Entropy

template <typename Derived>
double entropy_loss(const Eigen::MatrixBase<Derived>& masks) {
    const auto m = masks.array().max(kLogClamp).min(1.0 - kLogClamp).eval();
    return -(m * m.log() + (1.0 - m) * (1.0 - m).log()).sum();
}

template <typename DN, typename DE>
double entropy_loss(const Eigen::MatrixBase<DN>& node_masks, const Eigen::MatrixBase<DE>& edge_masks) {
    return entropy_loss(node_masks) + entropy_loss(edge_masks);
}

/// d/dm of the clamped binary entropy; zero where the clamp is active.
template <typename Derived>
MaskVector entropy_gradient(const Eigen::MatrixBase<Derived>& masks) {
    MaskVector g(masks.size());
    for (Eigen::Index i = 0; i < masks.size(); ++i) {
        const double m = masks(i);
        g(i) = (m <= kLogClamp || m >= 1.0 - kLogClamp) ? 0.0 : std::log((1.0 - m) / m);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Minimum structure preservation: ReLU(T - 1 - #{e : m_e >= 0.5})

template <typename Derived>
double preserve_loss(double tool_count, const Eigen::MatrixBase<Derived>& edge_masks) {
    const double kept = static_cast<double>((edge_masks.array() >= kMaskThreshold).count());
    return std::max(0.0, tool_count - 1.0 - kept);
}

/// Gradient of the preserve term with the kept count replaced by
/// sum_e sigmoid((m_e - 0.5) / kappa). Gated by the hard-count forward value.
template <typename Derived>
MaskVector preserve_surrogate_gradient(double tool_count, const Eigen::MatrixBase<Derived>& edge_masks,
                                       double kappa) {
    MaskVector g = MaskVector::Zero(edge_masks.size());
    if (preserve_loss(tool_count, edge_masks) <= 0.0) {
        return g;
    }
    for (Eigen::Index i = 0; i < edge_masks.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-(edge_masks(i) - kMaskThreshold) / kappa));
        g(i) = -s * (1.0 - s) / kappa;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Hard retention: sum over hard elements of ReLU(0.5 - m)

template <typename DN, typename DE>
double hard_loss(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                 const Eigen::MatrixBase<DE>& edge_masks) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < c.hard_nodes.size(); ++k) {
        total += std::max(0.0, kMaskThreshold - node_masks(c.hard_nodes(k)));
    }
    for (Eigen::Index k = 0; k < c.hard_edges.size(); ++k) {
        total += std::max(0.0, kMaskThreshold - edge_masks(c.hard_edges(k)));
    }
    return total;
}

template <typename DN, typename DE>
void hard_gradient(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                   const Eigen::MatrixBase<DE>& edge_masks, double scale, MaskVector& node_grad,
                   MaskVector& edge_grad) {
    for (Eigen::Index k = 0; k < c.hard_nodes.size(); ++k) {
        if (node_masks(c.hard_nodes(k)) < kMaskThreshold) node_grad(c.hard_nodes(k)) -= scale;
    }
    for (Eigen::Index k = 0; k < c.hard_edges.size(); ++k) {
        if (edge_masks(c.hard_edges(k)) < kMaskThreshold) edge_grad(c.hard_edges(k)) -= scale;
    }
}

// ---------------------------------------------------------------------------
// Edge smoothness: mean over edges of (m_e - weighted endpoint mean)^2

template <typename DN, typename DE>
MaskVector smooth_residuals(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                            const Eigen::MatrixBase<DE>& edge_masks) {
    MaskVector r(edge_masks.size());
    for (Eigen::Index e = 0; e < edge_masks.size(); ++e) {
        const double wu = c.node_type_weight(c.edge_src(e));
        const double wv = c.node_type_weight(c.edge_dst(e));
        r(e) = edge_masks(e) - (wu * node_masks(c.edge_src(e)) + wv * node_masks(c.edge_dst(e))) / (wu + wv);
    }
    return r;
}

template <typename DN, typename DE>
double smooth_loss(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                   const Eigen::MatrixBase<DE>& edge_masks) {
    if (edge_masks.size() == 0) return 0.0;
    return smooth_residuals(c, node_masks, edge_masks).squaredNorm() / static_cast<double>(edge_masks.size());
}

template <typename DN, typename DE>
void smooth_gradient(const LossCoefficients& c, const Eigen::MatrixBase<DN>& node_masks,
                     const Eigen::MatrixBase<DE>& edge_masks, double scale, MaskVector& node_grad,
                     MaskVector& edge_grad) {
    if (edge_masks.size() == 0) return;
    const MaskVector r = smooth_residuals(c, node_masks, edge_masks);
    const double k = 2.0 * scale / static_cast<double>(edge_masks.size());
    for (Eigen::Index e = 0; e < r.size(); ++e) {
        const double wu = c.node_type_weight(c.edge_src(e));
        const double wv = c.node_type_weight(c.edge_dst(e));
        edge_grad(e) += k * r(e);
        node_grad(c.edge_src(e)) -= k * r(e) * wu / (wu + wv);
        node_grad(c.edge_dst(e)) -= k * r(e) * wv / (wu + wv);
    }
}

// Graph-level conveniences; each resolves coefficients and forwards to the
// vector form above.
double structure_loss(const HeteroGraph& graph, const LossWeights& weights,
                      const MaskVector& node_masks, const MaskVector& edge_masks);
double preserve_loss(const HeteroGraph& graph, const MaskVector& edge_masks,
                     const std::string& tool_type = "Tool");
double hard_loss(const HeteroGraph& graph, const HardSets& hard,
                 const MaskVector& node_masks, const MaskVector& edge_masks);
double smooth_loss(const HeteroGraph& graph, const LossWeights& weights,
                   const MaskVector& node_masks, const MaskVector& edge_masks);

} // namespace cfkg
