#include "cfkg/io.hpp"

#include <json.hpp>

#include "cfkg/error.hpp"

namespace cfkg {

namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_map(const json& j, const char* key, std::map<std::string, double>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& [k, v] : j.at(key).items()) out[k] = v.get<double>();
}

struct TraceColumn {
    const char* name;
    double LossBreakdown::*field;
};

constexpr TraceColumn kTraceColumns[] = {
    {"L_structure", &LossBreakdown::structure}, {"L_semantic", &LossBreakdown::semantic},
    {"L_entropy", &LossBreakdown::entropy},     {"L_preserve", &LossBreakdown::preserve},
    {"L_hard", &LossBreakdown::hard},           {"L_smooth", &LossBreakdown::smooth},
    {"L_total", &LossBreakdown::total},
};

constexpr TraceColumn kCurveColumns[] = {
    {"L_semantic", &LossBreakdown::semantic},
    {"L_structure", &LossBreakdown::structure},
    {"L_total", &LossBreakdown::total},
};

template <std::size_t N>
std::string series_csv(const TrainTrace& trace, const TraceColumn (&columns)[N]) {
    std::string out = "step";
    for (const auto& c : columns) out += std::string(",") + c.name;
    for (const auto& c : columns) out += std::string(",") + c.name + "_ema";
    out += "\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        out += std::to_string(trace.steps[i]);
        for (const auto& c : columns) out += "," + format_number(trace.raw[i].*c.field);
        for (const auto& c : columns) out += "," + format_number(trace.ema[i].*c.field);
        out += "\n";
    }
    return out;
}

bool parse_flag(const std::string& s, std::size_t row) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ": expected 0 or 1, got \"" + s + "\"");
}

} // namespace

ExplainConfig parse_config_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Schema, "config must be a JSON object");

    ExplainConfig cfg;
    try {
        auto& w = cfg.weights;
        read_if(doc, "alpha_semantic", w.alpha_semantic);
        read_if(doc, "beta_entropy", w.beta_entropy);
        read_if(doc, "gamma_preserve", w.gamma_preserve);
        read_if(doc, "delta_hard", w.delta_hard);
        read_if(doc, "epsilon_smooth", w.epsilon_smooth);
        read_if(doc, "lambda_node", w.lambda_node);
        read_if(doc, "lambda_edge", w.lambda_edge);
        read_map(doc, "per_node_lambda", w.per_node_lambda);
        read_map(doc, "per_relation_lambda", w.per_relation_lambda);
        read_map(doc, "node_type_weights", w.node_type_weights);
        if (doc.contains("hard_nodes")) cfg.hard.nodes = doc.at("hard_nodes").get<std::set<std::string>>();
        if (doc.contains("hard_edges")) cfg.hard.edges = doc.at("hard_edges").get<std::set<std::string>>();

        if (doc.contains("training")) {
            const auto& t = doc.at("training");
            auto& tc = cfg.training;
            read_if(t, "steps", tc.steps);
            read_if(t, "learning_rate", tc.learning_rate);
            read_if(t, "seed", tc.seed);
            read_if(t, "temperature", tc.temperature);
            read_if(t, "snapshot_interval", tc.snapshot_interval);
            read_if(t, "initial_logit", tc.initial_logit);
            read_if(t, "tool_type", tc.tool_type);
            read_if(t, "use_prompt_weight", tc.use_prompt_weight);
            read_if(t, "threshold", tc.threshold);
            read_if(t, "kappa", tc.kappa);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("config: ") + e.what());
    }
    cfg.weights.validate();
    if (cfg.training.steps < 1) throw Error(ErrorKind::Schema, "training.steps must be at least 1");
    if (!(cfg.training.temperature > 0.0)) throw Error(ErrorKind::Schema, "training.temperature must be positive");
    return cfg;
}

ExplainConfig load_config(const std::filesystem::path& path) { return parse_config_json(read_text_file(path)); }

std::string trace_csv(const TrainTrace& trace) { return series_csv(trace, kTraceColumns); }

std::string loss_curves_csv(const TrainTrace& trace) { return series_csv(trace, kCurveColumns); }

std::string snapshots_csv(const HeteroGraph& graph, const TrainTrace& trace) {
    std::string out = "step,element_id,kind,mask\n";
    for (const auto& s : trace.snapshots) {
        const std::string step = std::to_string(s.step);
        for (std::size_t i = 0; i < graph.node_count(); ++i) {
            out += step + "," + csv_field(graph.node(i).id) + ",node," +
                   format_number(s.node_masks(static_cast<Eigen::Index>(i))) + "\n";
        }
        for (std::size_t i = 0; i < graph.edge_count(); ++i) {
            out += step + "," + csv_field(graph.edge(i).id) + ",edge," +
                   format_number(s.edge_masks(static_cast<Eigen::Index>(i))) + "\n";
        }
    }
    return out;
}

std::string masks_csv(const HeteroGraph& graph, const MaskVector& node_soft, const MaskVector& edge_soft,
                      const KeepMask& node_keep, const KeepMask& edge_keep) {
    std::string out = "element_id,kind,soft_mask,binary_mask\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += csv_field(graph.node(i).id) + ",node," + format_number(node_soft(k)) + "," +
               (node_keep(k) ? "1" : "0") + "\n";
    }
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += csv_field(graph.edge(i).id) + ",edge," + format_number(edge_soft(k)) + "," +
               (edge_keep(k) ? "1" : "0") + "\n";
    }
    return out;
}

MaskTable parse_masks_csv(std::string_view csv) {
    const auto rows = parse_csv(csv);
    if (rows.empty() || rows.front() != std::vector<std::string>{"element_id", "kind", "soft_mask", "binary_mask"}) {
        throw Error(ErrorKind::Parse, "mask CSV must start with element_id,kind,soft_mask,binary_mask");
    }
    MaskTable t;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw Error(ErrorKind::Parse, "mask CSV row " + std::to_string(i + 1) + " needs 4 fields");
        const double soft = parse_number(r[2]);
        const bool keep = parse_flag(r[3], i + 1);
        if (r[1] == "node") {
            t.node_soft[r[0]] = soft;
            t.node_binary[r[0]] = keep;
        } else if (r[1] == "edge") {
            t.edge_soft[r[0]] = soft;
            t.edge_binary[r[0]] = keep;
        } else {
            throw Error(ErrorKind::Parse, "mask CSV row " + std::to_string(i + 1) + ": unknown kind " + r[1]);
        }
    }
    return t;
}

std::pair<KeepMask, KeepMask> keep_masks_from_table(const HeteroGraph& graph, const MaskTable& table) {
    KeepMask nodes(static_cast<Eigen::Index>(graph.node_count()));
    KeepMask edges(static_cast<Eigen::Index>(graph.edge_count()));
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        auto it = table.node_binary.find(graph.node(i).id);
        if (it == table.node_binary.end()) {
            throw Error(ErrorKind::UnknownId, "mask table has no entry for node " + graph.node(i).id);
        }
        nodes(static_cast<Eigen::Index>(i)) = it->second;
    }
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        auto it = table.edge_binary.find(graph.edge(i).id);
        if (it == table.edge_binary.end()) {
            throw Error(ErrorKind::UnknownId, "mask table has no entry for edge " + graph.edge(i).id);
        }
        edges(static_cast<Eigen::Index>(i)) = it->second;
    }
    return {nodes, edges};
}

std::string node_heatmap_csv(const HeteroGraph& graph, const MaskVector& node_soft, const KeepMask& node_keep) {
    std::string out = "node_id,entity_type,soft_mask,keep\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += csv_field(graph.node(i).id) + "," + csv_field(graph.node(i).entity_type) + "," +
               format_number(node_soft(k)) + "," + (node_keep(k) ? "1" : "0") + "\n";
    }
    return out;
}

std::string edge_heatmap_csv(const HeteroGraph& graph, const MaskVector& edge_soft, const KeepMask& edge_keep) {
    std::string out = "edge_id,src,dst,relation,soft_mask,keep\n";
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const auto& e = graph.edge(i);
        out += csv_field(e.id) + "," + csv_field(e.src) + "," + csv_field(e.dst) + "," + csv_field(e.relation) + "," +
               format_number(edge_soft(k)) + "," + (edge_keep(k) ? "1" : "0") + "\n";
    }
    return out;
}

std::string binary_mask_csv(const HeteroGraph& graph, const BinaryGraphMask& mask) {
    std::vector<bool> cascaded(graph.edge_count(), false);
    for (std::size_t e : mask.cascaded_edges) cascaded[e] = true;
    std::string out = "element_id,kind,keep,cascaded\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        out += csv_field(graph.node(i).id) + ",node," + (mask.node_keep(static_cast<Eigen::Index>(i)) ? "1" : "0") +
               ",0\n";
    }
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        out += csv_field(graph.edge(i).id) + ",edge," + (mask.edge_keep(static_cast<Eigen::Index>(i)) ? "1" : "0") +
               "," + (cascaded[i] ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace cfkg
