#include "cfkg/semantics.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>

#include "cfkg/error.hpp"

namespace cfkg {

namespace {

bool is_token_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_byte(c)) {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string render_node(const Node& node) {
    std::string out = node.entity_type + " " + node.id + ":";
    if (!node.attributes.empty()) out += " " + node.attributes;
    return out;
}

std::string render_edge(const Edge& edge) {
    std::string out = edge.src + " --" + edge.relation + "--> " + edge.dst + ":";
    if (!edge.attributes.empty()) out += " " + edge.attributes;
    return out;
}

std::vector<ElementDocument> element_documents(const HeteroGraph& graph) {
    std::vector<ElementDocument> docs;
    docs.reserve(graph.node_count() + graph.edge_count());
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        docs.push_back({{ElementKind::Node, i}, render_node(graph.node(i))});
    }
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        docs.push_back({{ElementKind::Edge, i}, render_edge(graph.edge(i))});
    }
    return docs;
}

TfidfModel TfidfModel::fit(std::span<const std::string> corpus) {
    if (corpus.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "cannot fit TF-IDF on an empty corpus");
    }
    std::map<std::string, std::size_t> document_frequency;
    std::uint64_t hash = 1469598103934665603ULL;
    for (const auto& doc : corpus) {
        for (unsigned char c : doc) {
            hash = (hash ^ c) * 1099511628211ULL;
        }
        hash = (hash ^ 0x1FU) * 1099511628211ULL;  // document separator
        auto tokens = tokenize(doc);
        std::set<std::string> unique(tokens.begin(), tokens.end());
        for (const auto& t : unique) ++document_frequency[t];
    }

    TfidfModel model;
    const double n = static_cast<double>(corpus.size());
    model.vocabulary_.reserve(document_frequency.size());
    model.idf_.resize(static_cast<Eigen::Index>(document_frequency.size()));
    Eigen::Index i = 0;
    for (const auto& [term, df] : document_frequency) {
        model.vocabulary_.push_back(term);
        model.lookup_.emplace(term, i);
        model.idf_(i) = std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0;
        ++i;
    }
    model.fingerprint_ = hex64(hash);
    return model;
}

std::optional<Eigen::Index> TfidfModel::term_index(std::string_view term) const {
    auto it = lookup_.find(std::string(term));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Eigen::VectorXd TfidfModel::embed_dense(std::string_view text) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
    for (const auto& token : tokenize(text)) {
        if (auto k = term_index(token)) v(*k) += 1.0;
    }
    return v.cwiseProduct(idf_);
}

TermVector TfidfModel::embed(std::string_view text) const {
    return embed_dense(text).sparseView();
}

std::string TfidfModel::vocabulary_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "term,index,idf\n";
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
        out << vocabulary_[i] << ',' << i << ',' << idf_(static_cast<Eigen::Index>(i)) << '\n';
    }
    return out.str();
}

TfidfModel fit_tfidf(const std::vector<ElementDocument>& corpus) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& d : corpus) texts.push_back(d.text);
    return TfidfModel::fit(texts);
}

TermVector embed(const TfidfModel& model, std::string_view text) { return model.embed(text); }

double cosine(const TermVector& a, const TermVector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

SemanticObjective::SemanticObjective(const HeteroGraph& graph, const TfidfModel& model,
                                     std::optional<std::string> prompt) {
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    const auto m = static_cast<Eigen::Index>(graph.edge_count());
    node_docs_.resize(model.size(), n);
    edge_docs_.resize(model.size(), m);
    for (Eigen::Index i = 0; i < n; ++i) {
        node_docs_.col(i) = model.embed_dense(render_node(graph.node(static_cast<std::size_t>(i))));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        edge_docs_.col(i) = model.embed_dense(render_edge(graph.edge(static_cast<std::size_t>(i))));
    }
    full_ = node_docs_.rowwise().sum() + edge_docs_.rowwise().sum();

    prompt_sim_ = Eigen::VectorXd::Zero(n);
    if (prompt) {
        const Eigen::VectorXd p = model.embed_dense(*prompt);
        for (Eigen::Index i = 0; i < n; ++i) prompt_sim_(i) = cosine(node_docs_.col(i), p);
    }
}

void SemanticObjective::check_lengths(const MaskVector& node_masks, const MaskVector& edge_masks) const {
    if (node_masks.size() != node_docs_.cols() || edge_masks.size() != edge_docs_.cols()) {
        throw Error(ErrorKind::LengthMismatch,
                    "mask lengths (" + std::to_string(node_masks.size()) + ", " + std::to_string(edge_masks.size()) +
                        ") do not match graph (" + std::to_string(node_docs_.cols()) + ", " +
                        std::to_string(edge_docs_.cols()) + ")");
    }
}

Eigen::VectorXd SemanticObjective::soft_vector(const MaskVector& node_masks, const MaskVector& edge_masks) const {
    check_lengths(node_masks, edge_masks);
    return node_docs_ * node_masks + edge_docs_ * edge_masks;
}

double SemanticObjective::loss(const MaskVector& node_masks, const MaskVector& edge_masks) const {
    return 1.0 - cosine(full_, soft_vector(node_masks, edge_masks));
}

double SemanticObjective::accumulate_gradient(const MaskVector& node_masks, const MaskVector& edge_masks,
                                              double scale, MaskVector& node_grad, MaskVector& edge_grad) const {
    const Eigen::VectorXd s = soft_vector(node_masks, edge_masks);
    const double nf = full_.norm();
    const double ns = s.norm();
    if (nf == 0.0 || ns == 0.0) {
        // cosine is pinned to 0 at the zero vector; no useful direction there
        return 1.0;
    }
    const double c = full_.dot(s) / (nf * ns);
    // d(1 - cos)/ds = -(f / (|f||s|) - cos * s / |s|^2)
    const Eigen::VectorXd ds = -(full_ / (nf * ns) - c * s / (ns * ns));
    node_grad.noalias() += scale * (node_docs_.transpose() * ds);
    edge_grad.noalias() += scale * (edge_docs_.transpose() * ds);
    return 1.0 - c;
}

double SemanticObjective::prompt_weight(const MaskVector& node_masks) const {
    if (node_masks.size() != prompt_sim_.size()) {
        throw Error(ErrorKind::LengthMismatch, "node mask length " + std::to_string(node_masks.size()) +
                                                   " does not match graph (" + std::to_string(prompt_sim_.size()) + ")");
    }
    return 1.0 + (1.0 - node_masks.array()).matrix().dot(prompt_sim_);
}

TermVector soft_graph_vector(const HeteroGraph& graph, const TfidfModel& model, const MaskVector& node_masks,
                             const MaskVector& edge_masks) {
    return SemanticObjective(graph, model).soft_vector(node_masks, edge_masks).sparseView();
}

double semantic_loss(const HeteroGraph& graph, const TfidfModel& model, const MaskVector& node_masks,
                     const MaskVector& edge_masks) {
    return SemanticObjective(graph, model).loss(node_masks, edge_masks);
}

double prompt_weight(const HeteroGraph& graph, const TfidfModel& model, const MaskVector& node_masks,
                     std::string_view prompt) {
    return SemanticObjective(graph, model, std::string(prompt)).prompt_weight(node_masks);
}

} // namespace cfkg
