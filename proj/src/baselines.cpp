#include "cfkg/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "cfkg/csv.hpp"
#include "cfkg/error.hpp"

namespace cfkg {

namespace {

struct StrategyName {
    Strategy strategy;
    std::string_view name;
};

constexpr StrategyName kNames[] = {
    {Strategy::RandomNode, "random-node"},
    {Strategy::RandomEdge, "random-edge"},
    {Strategy::RandomNodeEdge, "random-node-edge"},
    {Strategy::RandomNodeAlign, "random-node-align"},
    {Strategy::RandomNodeEdgeAlign, "random-node-edge-align"},
    {Strategy::AttentionHigh, "attention-high"},
    {Strategy::AttentionLow, "attention-low"},
};

// First k entries of a seeded partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k,
                                                    std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    return pool;
}

std::vector<std::size_t> nodes_of_type(const HeteroGraph& graph, std::string_view type) {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
        if (graph.node(v).entity_type == type) out.push_back(v);
    }
    return out;
}

void check_histogram(const HeteroGraph& graph, const PerturbationSpec& spec) {
    std::size_t total = 0;
    for (const auto& [type, count] : spec.type_histogram) {
        const std::size_t available = graph.count_nodes_of_type(type);
        if (count > available) {
            throw Error(ErrorKind::InfeasibleBudget, "histogram asks for " + std::to_string(count) + " " + type +
                                                         " nodes, graph has " + std::to_string(available));
        }
        total += count;
    }
    if (total != spec.node_budget) {
        throw Error(ErrorKind::InfeasibleBudget, "type histogram sums to " + std::to_string(total) +
                                                     ", node budget is " + std::to_string(spec.node_budget));
    }
}

void check_budgets(const HeteroGraph& graph, const PerturbationSpec& spec) {
    if (removes_nodes(spec.strategy) && spec.node_budget > graph.node_count()) {
        throw Error(ErrorKind::InfeasibleBudget, "node budget " + std::to_string(spec.node_budget) + " exceeds " +
                                                     std::to_string(graph.node_count()) + " nodes");
    }
    if (removes_edges(spec.strategy) && spec.edge_budget > graph.edge_count()) {
        throw Error(ErrorKind::InfeasibleBudget, "edge budget " + std::to_string(spec.edge_budget) + " exceeds " +
                                                     std::to_string(graph.edge_count()) + " edges");
    }
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

const char* to_string(Strategy s) {
    for (const auto& n : kNames) {
        if (n.strategy == s) return n.name.data();
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (const auto& n : kNames) {
        if (n.name == name) return n.strategy;
    }
    return std::nullopt;
}

bool removes_nodes(Strategy s) { return s != Strategy::RandomEdge; }

bool removes_edges(Strategy s) {
    return s == Strategy::RandomEdge || s == Strategy::RandomNodeEdge || s == Strategy::RandomNodeEdgeAlign;
}

bool is_type_aligned(Strategy s) { return s == Strategy::RandomNodeAlign || s == Strategy::RandomNodeEdgeAlign; }

bool uses_attention(Strategy s) { return s == Strategy::AttentionHigh || s == Strategy::AttentionLow; }

std::size_t BinaryGraphMask::removed_nodes() const { return static_cast<std::size_t>((!node_keep).count()); }

std::size_t BinaryGraphMask::removed_edges() const { return static_cast<std::size_t>((!edge_keep).count()); }

BinaryGraphMask BinaryGraphMask::identity(const HeteroGraph& graph) {
    BinaryGraphMask m;
    m.node_keep = KeepMask::Constant(static_cast<Eigen::Index>(graph.node_count()), true);
    m.edge_keep = KeepMask::Constant(static_cast<Eigen::Index>(graph.edge_count()), true);
    return m;
}

void cascade_node_removals(const HeteroGraph& graph, BinaryGraphMask& mask) {
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto i = static_cast<Eigen::Index>(e);
        if (!mask.edge_keep(i)) continue;
        const auto s = static_cast<Eigen::Index>(graph.edge_source(e));
        const auto t = static_cast<Eigen::Index>(graph.edge_target(e));
        if (!mask.node_keep(s) || !mask.node_keep(t)) {
            mask.edge_keep(i) = false;
            mask.cascaded_edges.push_back(e);
        }
    }
}

PerturbationSpec derive_budgets(const HeteroGraph& graph, const KeepMask& reference_node_keep,
                                const KeepMask& reference_edge_keep) {
    if (reference_node_keep.size() != static_cast<Eigen::Index>(graph.node_count()) ||
        reference_edge_keep.size() != static_cast<Eigen::Index>(graph.edge_count())) {
        throw Error(ErrorKind::LengthMismatch, "reference masks do not match the graph");
    }
    PerturbationSpec spec;
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
        if (!reference_node_keep(static_cast<Eigen::Index>(v))) {
            ++spec.node_budget;
            ++spec.type_histogram[graph.node(v).entity_type];
        }
    }
    spec.edge_budget = static_cast<std::size_t>((!reference_edge_keep).count());
    return spec;
}

BinaryGraphMask random_mask(const HeteroGraph& graph, const PerturbationSpec& spec) {
    if (uses_attention(spec.strategy)) {
        throw Error(ErrorKind::Schema, std::string(to_string(spec.strategy)) + " is not a random strategy");
    }
    check_budgets(graph, spec);
    if (is_type_aligned(spec.strategy)) check_histogram(graph, spec);

    std::mt19937_64 rng(spec.seed);
    auto mask = BinaryGraphMask::identity(graph);

    if (removes_nodes(spec.strategy)) {
        std::vector<std::size_t> removed;
        if (is_type_aligned(spec.strategy)) {
            for (const auto& [type, count] : spec.type_histogram) {
                auto picked = sample_without_replacement(nodes_of_type(graph, type), count, rng);
                removed.insert(removed.end(), picked.begin(), picked.end());
            }
        } else {
            std::vector<std::size_t> all(graph.node_count());
            std::iota(all.begin(), all.end(), 0);
            removed = sample_without_replacement(std::move(all), spec.node_budget, rng);
        }
        for (std::size_t v : removed) mask.node_keep(static_cast<Eigen::Index>(v)) = false;
    }
    if (removes_edges(spec.strategy)) {
        std::vector<std::size_t> all(graph.edge_count());
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t e : sample_without_replacement(std::move(all), spec.edge_budget, rng)) {
            mask.edge_keep(static_cast<Eigen::Index>(e)) = false;
        }
    }
    cascade_node_removals(graph, mask);
    return mask;
}

BinaryGraphMask attention_mask(const HeteroGraph& graph, const PerturbationSpec& spec,
                               const std::unordered_map<std::string, double>& attention) {
    if (!uses_attention(spec.strategy)) {
        throw Error(ErrorKind::Schema, std::string(to_string(spec.strategy)) + " is not an attention strategy");
    }
    check_budgets(graph, spec);
    const bool high = spec.strategy == Strategy::AttentionHigh;

    auto score_of = [&](std::size_t v) -> std::optional<double> {
        auto it = attention.find(graph.node(v).id);
        if (it == attention.end()) return std::nullopt;
        return it->second;
    };
    // Candidates arrive in index order; stable_sort keeps lower indices first on ties.
    auto take = [&](std::vector<std::size_t> candidates, std::size_t k) {
        std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            return high ? *score_of(a) > *score_of(b) : *score_of(a) < *score_of(b);
        });
        candidates.resize(k);
        return candidates;
    };

    std::vector<std::size_t> removed;
    if (!spec.type_histogram.empty()) {
        check_histogram(graph, spec);
        for (const auto& [type, count] : spec.type_histogram) {
            if (count == 0) continue;
            auto candidates = nodes_of_type(graph, type);
            for (std::size_t v : candidates) {
                if (!score_of(v)) {
                    throw Error(ErrorKind::MissingScore, "no attention score for " + graph.node(v).id);
                }
            }
            auto picked = take(std::move(candidates), count);
            removed.insert(removed.end(), picked.begin(), picked.end());
        }
    } else if (spec.node_budget > 0) {
        std::vector<std::size_t> scored;
        for (std::size_t v = 0; v < graph.node_count(); ++v) {
            if (score_of(v)) scored.push_back(v);
        }
        if (scored.size() < spec.node_budget) {
            throw Error(ErrorKind::MissingScore, "only " + std::to_string(scored.size()) +
                                                     " nodes have attention scores, budget is " +
                                                     std::to_string(spec.node_budget));
        }
        removed = take(std::move(scored), spec.node_budget);
    }

    auto mask = BinaryGraphMask::identity(graph);
    for (std::size_t v : removed) mask.node_keep(static_cast<Eigen::Index>(v)) = false;
    cascade_node_removals(graph, mask);
    return mask;
}

BinaryGraphMask perturb(const HeteroGraph& graph, const PerturbationSpec& spec,
                        const std::unordered_map<std::string, double>* attention) {
    if (uses_attention(spec.strategy)) {
        if (attention == nullptr) {
            throw Error(ErrorKind::MissingScore,
                        std::string(to_string(spec.strategy)) + " needs attention scores");
        }
        return attention_mask(graph, spec, *attention);
    }
    return random_mask(graph, spec);
}

Eigen::MatrixXi adjacency_heatmap(const HeteroGraph& graph, const BinaryGraphMask& mask) {
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    Eigen::MatrixXi h = Eigen::MatrixXi::Constant(n, n, -1);
    for (Eigen::Index v = 0; v < n; ++v) h(v, v) = mask.node_keep(v) ? 1 : 0;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto s = static_cast<Eigen::Index>(graph.edge_source(e));
        const auto t = static_cast<Eigen::Index>(graph.edge_target(e));
        if (s == t) continue;  // the diagonal belongs to the node
        h(s, t) = std::max(h(s, t), mask.edge_keep(static_cast<Eigen::Index>(e)) ? 1 : 0);
    }
    return h;
}

std::string heatmap_csv(const HeteroGraph& graph, const Eigen::MatrixXi& heatmap) {
    std::string out = "node_id";
    for (const auto& node : graph.nodes()) out += "," + csv_field(node.id);
    out += "\n";
    for (Eigen::Index i = 0; i < heatmap.rows(); ++i) {
        out += csv_field(graph.node(static_cast<std::size_t>(i)).id);
        for (Eigen::Index j = 0; j < heatmap.cols(); ++j) {
            out += ',';
            if (heatmap(i, j) >= 0) out += std::to_string(heatmap(i, j));
        }
        out += "\n";
    }
    return out;
}

std::string heatmap_svg(const HeteroGraph& graph, const Eigen::MatrixXi& heatmap) {
    constexpr int cell = 24;
    constexpr int margin = 170;
    const int n = static_cast<int>(heatmap.rows());
    const int size = margin + n * cell;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 20 << "\" height=\"" << size + 60
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i < n; ++i) {
        const auto label = xml_escape(graph.node(static_cast<std::size_t>(i)).id);
        const int mid = margin + i * cell + cell / 2 + 4;
        svg << "<text x=\"" << margin - 6 << "\" y=\"" << mid << "\" text-anchor=\"end\">" << label << "</text>\n";
        svg << "<text transform=\"translate(" << mid - 4 << "," << margin - 6
            << ") rotate(-60)\">" << label << "</text>\n";
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int v = heatmap(i, j);
            const char* fill = "#f2f2f2";
            if (i == j) {
                fill = v == 1 ? "#d62728" : "#1f77b4";
            } else if (v == 1) {
                fill = "#ffd92f";
            } else if (v == 0) {
                fill = "#ffffff";
            }
            svg << "<rect x=\"" << margin + j * cell << "\" y=\"" << margin + i * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << fill << "\" stroke=\"#999999\"/>\n";
        }
    }
    const int ly = size + 20;
    svg << "<rect x=\"10\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"#d62728\"/>"
        << "<text x=\"26\" y=\"" << ly + 10 << "\">node kept</text>\n"
        << "<rect x=\"110\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"#1f77b4\"/>"
        << "<text x=\"126\" y=\"" << ly + 10 << "\">node removed</text>\n"
        << "<rect x=\"230\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"#ffd92f\"/>"
        << "<text x=\"246\" y=\"" << ly + 10 << "\">edge kept</text>\n"
        << "<rect x=\"330\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"#ffffff\" stroke=\"#999999\"/>"
        << "<text x=\"346\" y=\"" << ly + 10 << "\">edge removed</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace cfkg
