#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cfkg/graph.hpp"
#include "cfkg/losses.hpp"
#include "cfkg/semantics.hpp"
#include "cfkg/types.hpp"

namespace cfkg {

inline constexpr double kGumbelClamp = 1e-10;
inline constexpr double kEmaDecay = 0.9;

/// Gumbel noise g = -ln(-ln(u + eps) + eps).
double gumbel_noise(double u);

/// sigmoid((logit + g(u)) / temperature)
double gumbel_sample(double logit, double temperature, double u);

template <typename DL, typename DU>
MaskVector gumbel_sample(const Eigen::MatrixBase<DL>& logits, double temperature,
                         const Eigen::MatrixBase<DU>& uniforms) {
    MaskVector out(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        out(i) = gumbel_sample(logits(i), temperature, uniforms(i));
    }
    return out;
}

/// Trainable state: one logit per node and per edge plus the temperature.
struct MaskState {
    MaskVector node_logits;
    MaskVector edge_logits;
    double temperature = 0.15;

    static MaskState uniform(const HeteroGraph& graph, double logit, double temperature);
};

/// Uniform draws fixed for one reparameterized evaluation.
struct GumbelNoise {
    MaskVector node_uniforms;
    MaskVector edge_uniforms;

    static GumbelNoise draw(std::mt19937_64& rng, Eigen::Index nodes, Eigen::Index edges);
};

struct LossBreakdown {
    // unweighted terms
    double structure = 0.0;
    double semantic = 0.0;
    double prompt_weight = 1.0;
    double entropy = 0.0;
    double preserve = 0.0;
    double hard = 0.0;
    double smooth = 0.0;
    // weighted contributions; their sum is `total`
    double weighted_structure = 0.0;
    double weighted_semantic = 0.0;
    double weighted_entropy = 0.0;
    double weighted_preserve = 0.0;
    double weighted_hard = 0.0;
    double weighted_smooth = 0.0;
    double total = 0.0;
};

enum class PreserveGradient {
    /// sharp-sigmoid surrogate for the kept-edge count (used for training)
    Surrogate,
    /// true derivative of the forward value: zero away from the threshold
    Exact,
};

/// Everything that stays fixed during one optimization: the graph, the
/// frozen TF-IDF model fitted on its element documents, the resolved
/// coefficients and the optional prompt.
class CounterfactualProblem {
public:
    CounterfactualProblem(const HeteroGraph& graph, LossWeights weights, HardSets hard,
                          std::optional<std::string> prompt = std::nullopt,
                          std::string tool_type = "Tool");

    const HeteroGraph& graph() const { return *graph_; }
    const TfidfModel& model() const { return model_; }
    const LossWeights& weights() const { return weights_; }
    const LossCoefficients& coefficients() const { return coeffs_; }
    const SemanticObjective& semantic() const { return semantic_; }
    bool uses_prompt() const { return use_prompt_; }

    LossBreakdown evaluate(const MaskVector& node_masks, const MaskVector& edge_masks) const;

    /// d(total)/d(mask) at the given masks.
    std::pair<MaskVector, MaskVector> mask_gradient(const MaskVector& node_masks,
                                                    const MaskVector& edge_masks,
                                                    PreserveGradient mode = PreserveGradient::Surrogate,
                                                    double kappa = 0.05) const;

private:
    const HeteroGraph* graph_;
    TfidfModel model_;
    LossWeights weights_;
    LossCoefficients coeffs_;
    SemanticObjective semantic_;
    bool use_prompt_;
};

LossBreakdown total_loss(const HeteroGraph& graph, const LossWeights& weights, const HardSets& hard,
                         const MaskVector& node_masks, const MaskVector& edge_masks,
                         std::optional<std::string> prompt = std::nullopt);

struct LogitGradient {
    MaskVector node;
    MaskVector edge;
    MaskVector node_masks;
    MaskVector edge_masks;
    LossBreakdown loss;
};

/// Chain rule through the Gumbel-Sigmoid with the noise held fixed:
/// dm/dlogit = m (1 - m) / temperature.
LogitGradient gradient(const CounterfactualProblem& problem, const MaskState& state,
                       const GumbelNoise& noise, PreserveGradient mode = PreserveGradient::Surrogate,
                       double kappa = 0.05);

struct TrainConfig {
    int steps = 500;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    double temperature = 0.15;
    int snapshot_interval = 50;
    double initial_logit = 2.0;
    std::string tool_type = "Tool";
    bool use_prompt_weight = false;
    double threshold = kMaskThreshold;
    double kappa = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

struct MaskSnapshot {
    int step;
    MaskVector node_masks;
    MaskVector edge_masks;
};

struct TrainTrace {
    std::vector<int> steps;
    std::vector<LossBreakdown> raw;
    /// EMA with decay 0.9, seeded with the first raw value.
    std::vector<LossBreakdown> ema;
    std::vector<MaskSnapshot> snapshots;
};

/// ema_t = decay * ema_{t-1} + (1 - decay) * x_t, with ema_1 = x_1.
std::vector<double> exponential_moving_average(const std::vector<double>& series, double decay = kEmaDecay);

struct Extraction {
    KeepMask node_keep;
    KeepMask edge_keep;
    SubgraphResult subgraph;
};

/// Keep an element iff its soft mask is >= threshold.
Extraction extract_counterfactual(const HeteroGraph& graph, const MaskVector& node_soft,
                                  const MaskVector& edge_soft, double threshold = kMaskThreshold);

struct CounterfactualResult {
    MaskState state;
    /// Noise-free masks sigmoid(logit / temperature).
    MaskVector node_soft;
    MaskVector edge_soft;
    KeepMask node_keep;
    KeepMask edge_keep;
    HeteroGraph counterfactual;
    std::vector<std::string> implied_edge_drops;
    LossBreakdown final_soft;
    LossBreakdown final_binary;
    TrainTrace trace;
};

/// Adam on the logits with fresh Gumbel noise each step drawn from a
/// mt19937_64 seeded with config.seed. Throws ErrorKind::Divergence when the
/// total loss stops being finite.
CounterfactualResult train(const CounterfactualProblem& problem, const TrainConfig& config);

} // namespace cfkg
