#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cfkg/error.hpp"

namespace cfkg {

/// Exported low-rank adapter pair for one module. The adapted weight would be
/// W0 + scaling * (up * down); only the pair is ever held here.
struct AdapterWeights {
    std::string module_name;
    double scaling = 1.0;
    Eigen::MatrixXd down;  // rank x input_dim
    Eigen::MatrixXd up;    // output_dim x rank

    Eigen::Index rank() const { return down.rows(); }
    Eigen::Index input_dim() const { return down.cols(); }
    Eigen::Index output_dim() const { return up.rows(); }

    /// Throws ErrorKind::DimensionMismatch.
    void validate() const;
};

/// {"module", "scaling", "rank", "down", "up"}, matrices row-major.
AdapterWeights parse_adapter_json(std::string_view json_text);

struct TokenEmbedding {
    std::string token;
    Eigen::VectorXd vector;
};

/// "token,v_0,...,v_{d-1}" rows.
std::vector<TokenEmbedding> parse_embeddings_csv(std::string_view csv);

struct AdapterShift {
    Eigen::VectorXd delta;
    double norm = 0.0;
};

/// delta = scaling * up * (down * e). Throws ErrorKind::DimensionMismatch.
template <typename Derived>
AdapterShift adapter_shift(const AdapterWeights& adapter, const Eigen::MatrixBase<Derived>& embedding) {
    if (embedding.size() != adapter.input_dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "embedding dimension mismatch: expected " + std::to_string(adapter.input_dim()) +
                        ", actual " + std::to_string(embedding.size()));
    }
    AdapterShift out;
    out.delta = adapter.scaling * (adapter.up * (adapter.down * embedding));
    out.norm = out.delta.norm();
    return out;
}

AdapterShift adapter_shift(const AdapterWeights& adapter, const TokenEmbedding& embedding);

struct AttentionRecord {
    std::string token;
    double mean_attention = 0.0;
};

std::vector<AttentionRecord> parse_attention_csv(std::string_view csv);

struct NodeAttention {
    std::map<std::string, double> scores;
    /// nodes with at least one token absent from the records
    std::map<std::string, std::vector<std::string>> missing_tokens;
};

/// Per-node mean over the node's tokens. A node whose tokens are all missing
/// gets no score (absent, not zero).
NodeAttention attention_table(const std::vector<AttentionRecord>& records,
                              const std::map<std::string, std::vector<std::string>>& node_tokens);

struct AlignmentRow {
    std::string node_id;
    std::optional<double> mask_score;
    std::optional<double> attention;
    std::optional<double> shift_norm;
    std::optional<int> rank_mask;
    std::optional<int> rank_attention;
    std::optional<int> rank_shift;
    bool discrepancy = false;
};

/// Joins the three signals. Ranks are 1 = largest, ties share the better
/// rank. A node is flagged when its attention is in the bottom tercile and its
/// shift norm in the top tercile (linear-interpolated 1/3 and 2/3 quantiles);
/// flags need at least three nodes carrying both signals.
std::vector<AlignmentRow> alignment_table(const std::map<std::string, double>& mask_scores,
                                          const std::map<std::string, double>& attention_scores,
                                          const std::map<std::string, double>& shift_norms);

std::string alignment_csv(const std::vector<AlignmentRow>& rows);

} // namespace cfkg
