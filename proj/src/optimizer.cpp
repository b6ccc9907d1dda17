#include "cfkg/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "cfkg/error.hpp"

namespace cfkg {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

MaskVector sigmoid(const MaskVector& x) {
    MaskVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = sigmoid(x(i));
    return out;
}

MaskVector to_mask(const KeepMask& keep) { return keep.cast<double>().matrix(); }

// Fields that get an EMA series in the trace.
constexpr double LossBreakdown::*kTracedFields[] = {
    &LossBreakdown::structure,          &LossBreakdown::semantic,          &LossBreakdown::prompt_weight,
    &LossBreakdown::entropy,            &LossBreakdown::preserve,          &LossBreakdown::hard,
    &LossBreakdown::smooth,             &LossBreakdown::weighted_structure, &LossBreakdown::weighted_semantic,
    &LossBreakdown::weighted_entropy,   &LossBreakdown::weighted_preserve, &LossBreakdown::weighted_hard,
    &LossBreakdown::weighted_smooth,    &LossBreakdown::total,
};

std::vector<LossBreakdown> ema_breakdowns(const std::vector<LossBreakdown>& raw) {
    std::vector<LossBreakdown> ema(raw.size());
    for (auto field : kTracedFields) {
        std::vector<double> series;
        series.reserve(raw.size());
        for (const auto& b : raw) series.push_back(b.*field);
        const auto smoothed = exponential_moving_average(series);
        for (std::size_t i = 0; i < raw.size(); ++i) ema[i].*field = smoothed[i];
    }
    return ema;
}

} // namespace

double gumbel_noise(double u) {
    // u = 1 would put a negative rounding residue inside the outer log
    u = std::min(u, 1.0 - kGumbelClamp);
    return -std::log(-std::log(u + kGumbelClamp) + kGumbelClamp);
}

double gumbel_sample(double logit, double temperature, double u) {
    return sigmoid((logit + gumbel_noise(u)) / temperature);
}

MaskState MaskState::uniform(const HeteroGraph& graph, double logit, double temperature) {
    if (!(temperature > 0.0)) {
        throw Error(ErrorKind::Schema, "temperature must be positive");
    }
    MaskState s;
    s.node_logits = MaskVector::Constant(static_cast<Eigen::Index>(graph.node_count()), logit);
    s.edge_logits = MaskVector::Constant(static_cast<Eigen::Index>(graph.edge_count()), logit);
    s.temperature = temperature;
    return s;
}

GumbelNoise GumbelNoise::draw(std::mt19937_64& rng, Eigen::Index nodes, Eigen::Index edges) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    GumbelNoise noise;
    noise.node_uniforms.resize(nodes);
    noise.edge_uniforms.resize(edges);
    for (Eigen::Index i = 0; i < nodes; ++i) noise.node_uniforms(i) = uniform(rng);
    for (Eigen::Index i = 0; i < edges; ++i) noise.edge_uniforms(i) = uniform(rng);
    return noise;
}

CounterfactualProblem::CounterfactualProblem(const HeteroGraph& graph, LossWeights weights, HardSets hard,
                                             std::optional<std::string> prompt, std::string tool_type)
    : graph_(&graph),
      model_(fit_tfidf(element_documents(graph))),
      weights_(std::move(weights)),
      coeffs_(LossCoefficients::compile(graph, weights_, hard, tool_type)),
      semantic_(graph, model_, prompt),
      use_prompt_(prompt.has_value()) {}

LossBreakdown CounterfactualProblem::evaluate(const MaskVector& node_masks, const MaskVector& edge_masks) const {
    LossBreakdown b;
    b.semantic = semantic_.loss(node_masks, edge_masks);  // also checks lengths
    b.structure = structure_loss(coeffs_, node_masks, edge_masks);
    b.prompt_weight = use_prompt_ ? semantic_.prompt_weight(node_masks) : 1.0;
    b.entropy = entropy_loss(node_masks, edge_masks);
    b.preserve = preserve_loss(coeffs_.tool_count, edge_masks);
    b.hard = hard_loss(coeffs_, node_masks, edge_masks);
    b.smooth = smooth_loss(coeffs_, node_masks, edge_masks);

    b.weighted_structure = b.structure;
    b.weighted_semantic = weights_.alpha_semantic * b.prompt_weight * b.semantic;
    b.weighted_entropy = weights_.beta_entropy * b.entropy;
    b.weighted_preserve = weights_.gamma_preserve * b.preserve;
    b.weighted_hard = weights_.delta_hard * b.hard;
    b.weighted_smooth = weights_.epsilon_smooth * b.smooth;
    b.total = b.weighted_structure + b.weighted_semantic + b.weighted_entropy + b.weighted_preserve +
              b.weighted_hard + b.weighted_smooth;
    return b;
}

std::pair<MaskVector, MaskVector> CounterfactualProblem::mask_gradient(const MaskVector& node_masks,
                                                                       const MaskVector& edge_masks,
                                                                       PreserveGradient mode, double kappa) const {
    MaskVector gn = coeffs_.node_lambda;
    MaskVector ge = coeffs_.edge_lambda;

    if (weights_.alpha_semantic != 0.0) {
        const double pw = use_prompt_ ? semantic_.prompt_weight(node_masks) : 1.0;
        const double sem =
            semantic_.accumulate_gradient(node_masks, edge_masks, weights_.alpha_semantic * pw, gn, ge);
        if (use_prompt_) {
            // d(prompt_weight)/dm_v = -sim_v
            gn.noalias() -= weights_.alpha_semantic * sem * semantic_.prompt_similarity();
        }
    }
    if (weights_.beta_entropy != 0.0) {
        gn += weights_.beta_entropy * entropy_gradient(node_masks);
        ge += weights_.beta_entropy * entropy_gradient(edge_masks);
    }
    if (weights_.gamma_preserve != 0.0 && mode == PreserveGradient::Surrogate) {
        ge += weights_.gamma_preserve * preserve_surrogate_gradient(coeffs_.tool_count, edge_masks, kappa);
    }
    if (weights_.delta_hard != 0.0) {
        hard_gradient(coeffs_, node_masks, edge_masks, weights_.delta_hard, gn, ge);
    }
    if (weights_.epsilon_smooth != 0.0) {
        smooth_gradient(coeffs_, node_masks, edge_masks, weights_.epsilon_smooth, gn, ge);
    }
    return {std::move(gn), std::move(ge)};
}

LossBreakdown total_loss(const HeteroGraph& graph, const LossWeights& weights, const HardSets& hard,
                         const MaskVector& node_masks, const MaskVector& edge_masks,
                         std::optional<std::string> prompt) {
    return CounterfactualProblem(graph, weights, hard, std::move(prompt)).evaluate(node_masks, edge_masks);
}

LogitGradient gradient(const CounterfactualProblem& problem, const MaskState& state, const GumbelNoise& noise,
                       PreserveGradient mode, double kappa) {
    LogitGradient out;
    out.node_masks = gumbel_sample(state.node_logits, state.temperature, noise.node_uniforms);
    out.edge_masks = gumbel_sample(state.edge_logits, state.temperature, noise.edge_uniforms);
    out.loss = problem.evaluate(out.node_masks, out.edge_masks);
    auto [gn, ge] = problem.mask_gradient(out.node_masks, out.edge_masks, mode, kappa);
    const double inv_t = 1.0 / state.temperature;
    out.node = gn.cwiseProduct((out.node_masks.array() * (1.0 - out.node_masks.array())).matrix()) * inv_t;
    out.edge = ge.cwiseProduct((out.edge_masks.array() * (1.0 - out.edge_masks.array())).matrix()) * inv_t;
    return out;
}

std::vector<double> exponential_moving_average(const std::vector<double>& series, double decay) {
    std::vector<double> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.push_back(i == 0 ? series[0] : decay * out.back() + (1.0 - decay) * series[i]);
    }
    return out;
}

Extraction extract_counterfactual(const HeteroGraph& graph, const MaskVector& node_soft, const MaskVector& edge_soft,
                                  double threshold) {
    Extraction ex;
    ex.node_keep = node_soft.array() >= threshold;
    ex.edge_keep = edge_soft.array() >= threshold;
    ex.subgraph = subgraph_by_mask(graph, ex.node_keep, ex.edge_keep);
    return ex;
}

CounterfactualResult train(const CounterfactualProblem& problem, const TrainConfig& config) {
    if (config.steps < 1) throw Error(ErrorKind::Schema, "training needs at least one step");
    if (!(config.learning_rate > 0.0)) throw Error(ErrorKind::Schema, "learning rate must be positive");
    const HeteroGraph& graph = problem.graph();
    if (graph.node_count() == 0) throw Error(ErrorKind::Schema, "cannot train on an empty graph");

    std::mt19937_64 rng(config.seed);
    CounterfactualResult result;
    MaskState& state = result.state;
    state = MaskState::uniform(graph, config.initial_logit, config.temperature);

    const auto n = state.node_logits.size();
    const auto m = state.edge_logits.size();
    MaskVector m1n = MaskVector::Zero(n), m2n = MaskVector::Zero(n);
    MaskVector m1e = MaskVector::Zero(m), m2e = MaskVector::Zero(m);
    double b1t = 1.0, b2t = 1.0;

    auto adam = [&](MaskVector& param, MaskVector& mom1, MaskVector& mom2, const MaskVector& g) {
        mom1 = config.adam_beta1 * mom1 + (1.0 - config.adam_beta1) * g;
        mom2 = config.adam_beta2 * mom2 + (1.0 - config.adam_beta2) * g.cwiseAbs2();
        const MaskVector mhat = mom1 / (1.0 - b1t);
        const MaskVector vhat = mom2 / (1.0 - b2t);
        param.array() -= config.learning_rate * mhat.array() / (vhat.array().sqrt() + config.adam_epsilon);
    };

    for (int step = 1; step <= config.steps; ++step) {
        const auto noise = GumbelNoise::draw(rng, n, m);
        const auto g = gradient(problem, state, noise, PreserveGradient::Surrogate, config.kappa);
        if (!std::isfinite(g.loss.total) || !g.node.allFinite() || !g.edge.allFinite()) {
            throw Error(ErrorKind::Divergence, "total loss became non-finite at step " + std::to_string(step));
        }
        result.trace.steps.push_back(step);
        result.trace.raw.push_back(g.loss);
        if (config.snapshot_interval > 0 && (step % config.snapshot_interval == 0 || step == config.steps)) {
            result.trace.snapshots.push_back({step, g.node_masks, g.edge_masks});
        }
        b1t *= config.adam_beta1;
        b2t *= config.adam_beta2;
        adam(state.node_logits, m1n, m2n, g.node);
        adam(state.edge_logits, m1e, m2e, g.edge);
    }
    result.trace.ema = ema_breakdowns(result.trace.raw);

    result.node_soft = sigmoid(state.node_logits / state.temperature);
    result.edge_soft = sigmoid(state.edge_logits / state.temperature);
    auto ex = extract_counterfactual(graph, result.node_soft, result.edge_soft, config.threshold);
    result.node_keep = std::move(ex.node_keep);
    result.edge_keep = std::move(ex.edge_keep);
    result.counterfactual = std::move(ex.subgraph.graph);
    result.implied_edge_drops = std::move(ex.subgraph.implied_edge_drops);
    result.final_soft = problem.evaluate(result.node_soft, result.edge_soft);
    result.final_binary = problem.evaluate(to_mask(result.node_keep), to_mask(result.edge_keep));
    return result;
}

} // namespace cfkg
