#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cfkg/graph.hpp"
#include "cfkg/types.hpp"

namespace cfkg {

/// Sparse TF-IDF weights indexed by vocabulary position.
using TermVector = Eigen::SparseVector<double>;

enum class ElementKind { Node, Edge };

struct ElementRef {
    ElementKind kind;
    std::size_t index;
};

struct ElementDocument {
    ElementRef element;
    std::string text;
};

/// Lowercased alphanumeric runs. Bytes >= 0x80 are kept inside tokens so
/// UTF-8 words are not split apart; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// "<type> <id>: <attributes>"
std::string render_node(const Node& node);
/// "<src> --<relation>--> <dst>: <attributes>"
std::string render_edge(const Edge& edge);

/// One document per node, then one per edge, in index order.
std::vector<ElementDocument> element_documents(const HeteroGraph& graph);

/// Frozen vocabulary and smoothed IDF weights,
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
class TfidfModel {
public:
    /// Throws ErrorKind::EmptyCorpus.
    static TfidfModel fit(std::span<const std::string> corpus);

    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    const Eigen::VectorXd& idf() const { return idf_; }
    /// FNV-1a digest of the fitting corpus, hex encoded.
    const std::string& fingerprint() const { return fingerprint_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(vocabulary_.size()); }

    std::optional<Eigen::Index> term_index(std::string_view term) const;

    /// Raw term counts times idf; out-of-vocabulary terms are dropped.
    TermVector embed(std::string_view text) const;
    /// Same weights as embed(), dense.
    Eigen::VectorXd embed_dense(std::string_view text) const;

    /// "term,index,idf" rows for debugging.
    std::string vocabulary_csv() const;

private:
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, Eigen::Index> lookup_;
    Eigen::VectorXd idf_;
    std::string fingerprint_;
};

TfidfModel fit_tfidf(const std::vector<ElementDocument>& corpus);
TermVector embed(const TfidfModel& model, std::string_view text);

/// Cosine similarity with the convention that a zero vector scores 0.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double cosine(const TermVector& a, const TermVector& b);

/// Mask-weighted sum of element document vectors, precomputed for one graph
/// and one model. At binary masks this equals the TF-IDF vector of the
/// textualized subgraph, since term counts add across documents.
class SemanticObjective {
public:
    SemanticObjective(const HeteroGraph& graph, const TfidfModel& model,
                      std::optional<std::string> prompt = std::nullopt);

    /// vocabulary x nodes
    const Eigen::MatrixXd& node_documents() const { return node_docs_; }
    /// vocabulary x edges
    const Eigen::MatrixXd& edge_documents() const { return edge_docs_; }
    const Eigen::VectorXd& full_vector() const { return full_; }
    /// Cosine between each node document and the prompt; zero without a prompt.
    const Eigen::VectorXd& prompt_similarity() const { return prompt_sim_; }

    Eigen::VectorXd soft_vector(const MaskVector& node_masks, const MaskVector& edge_masks) const;

    /// 1 - cos(full, soft)
    double loss(const MaskVector& node_masks, const MaskVector& edge_masks) const;

    /// Adds scale * d(loss)/d(mask) into the gradient buffers and returns the loss.
    double accumulate_gradient(const MaskVector& node_masks, const MaskVector& edge_masks,
                               double scale, MaskVector& node_grad, MaskVector& edge_grad) const;

    /// 1 + sum_v (1 - m_v) * sim(node_v, prompt)
    double prompt_weight(const MaskVector& node_masks) const;

private:
    void check_lengths(const MaskVector& node_masks, const MaskVector& edge_masks) const;

    Eigen::MatrixXd node_docs_;
    Eigen::MatrixXd edge_docs_;
    Eigen::VectorXd full_;
    Eigen::VectorXd prompt_sim_;
};

TermVector soft_graph_vector(const HeteroGraph& graph, const TfidfModel& model,
                             const MaskVector& node_masks, const MaskVector& edge_masks);

double semantic_loss(const HeteroGraph& graph, const TfidfModel& model,
                     const MaskVector& node_masks, const MaskVector& edge_masks);

double prompt_weight(const HeteroGraph& graph, const TfidfModel& model,
                     const MaskVector& node_masks, std::string_view prompt);

} // namespace cfkg
