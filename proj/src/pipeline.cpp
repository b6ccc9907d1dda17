#include "cfkg/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "cfkg/error.hpp"

namespace cfkg {

const char* to_string(PipelineConstraint c) {
    switch (c) {
        case PipelineConstraint::StartsAtDatabase: return "starts at a database node";
        case PipelineConstraint::ToolsConsumeInput: return "every tool consumes a preceding file";
        case PipelineConstraint::ToolsProduceOutput: return "every tool produces an output file";
        case PipelineConstraint::FileHandoff: return "each tool output feeds the next tool";
        case PipelineConstraint::ReachesTerminal: return "terminates at the evaluation terminal";
    }
    return "?";
}

const char* short_label(PipelineConstraint c) {
    static constexpr const char* labels[] = {"C1", "C2", "C3", "C4", "C5"};
    return labels[static_cast<std::size_t>(c)];
}

bool ValidationReport::valid() const {
    return std::all_of(results.begin(), results.end(), [](const ConstraintResult& r) { return r.passed; });
}

std::vector<PipelineConstraint> ValidationReport::failed() const {
    std::vector<PipelineConstraint> out;
    for (const auto& r : results) {
        if (!r.passed) out.push_back(r.constraint);
    }
    return out;
}

std::string ValidationReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["valid"] = valid();
    doc["constraints"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json jr;
        jr["id"] = short_label(r.constraint);
        jr["name"] = to_string(r.constraint);
        jr["passed"] = r.passed;
        jr["offenders"] = r.offenders;
        jr["detail"] = r.detail;
        doc["constraints"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

namespace {

bool has_edge(const HeteroGraph& g, std::size_t from, std::size_t to, std::string_view relation) {
    for (std::size_t e : g.out_edges(from)) {
        if (g.edge_target(e) == to && g.edge(e).relation == relation) return true;
    }
    return false;
}

bool adjacent(const HeteroGraph& g, std::size_t a, std::size_t b) {
    for (std::size_t e : g.out_edges(a)) {
        if (g.edge_target(e) == b) return true;
    }
    for (std::size_t e : g.in_edges(a)) {
        if (g.edge_source(e) == b) return true;
    }
    return false;
}

void fail(ConstraintResult& r, const std::string& offender, const std::string& why) {
    r.passed = false;
    r.offenders.push_back(offender);
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += why;
}

} // namespace

ValidationReport validate_pipeline(const HeteroGraph& graph, const std::vector<std::string>& path,
                                   const PipelineOptions& options) {
    if (path.empty()) {
        throw Error(ErrorKind::EmptyPath, "pipeline path is empty");
    }
    std::vector<std::size_t> idx;
    idx.reserve(path.size());
    for (const auto& id : path) idx.push_back(graph.node_index(id));

    ValidationReport report;
    for (std::size_t k = 0; k < kPipelineConstraintCount; ++k) {
        report.results[k].constraint = static_cast<PipelineConstraint>(k);
    }
    auto& c1 = report.results[0];
    auto& c2 = report.results[1];
    auto& c3 = report.results[2];
    auto& c4 = report.results[3];
    auto& c5 = report.results[4];

    const auto type_of = [&](std::size_t v) -> const std::string& { return graph.node(v).entity_type; };

    if (type_of(idx.front()) != options.database_type) {
        fail(c1, path.front(), path.front() + " is of type " + type_of(idx.front()) + ", not " + options.database_type);
    }

    std::vector<std::size_t> tool_positions;
    for (std::size_t p = 0; p < idx.size(); ++p) {
        if (type_of(idx[p]) == options.tool_type) tool_positions.push_back(p);
    }

    for (std::size_t p : tool_positions) {
        const std::size_t tool = idx[p];
        bool consumes = false;
        for (std::size_t q = 0; q < p && !consumes; ++q) {
            consumes = has_edge(graph, idx[q], tool, kRelInput);
        }
        if (!consumes) fail(c2, path[p], path[p] + " has no rels_input edge from a preceding path node");

        bool produces = false;
        for (std::size_t e : graph.out_edges(tool)) {
            produces = produces || graph.edge(e).relation == kRelOutput;
        }
        if (!produces) fail(c3, path[p], path[p] + " has no rels_output edge");
    }

    for (std::size_t k = 0; k + 1 < tool_positions.size(); ++k) {
        const std::size_t from = idx[tool_positions[k]];
        const std::size_t to = idx[tool_positions[k + 1]];
        bool handoff = false;
        for (std::size_t e : graph.out_edges(from)) {
            if (graph.edge(e).relation == kRelOutput && has_edge(graph, graph.edge_target(e), to, kRelInput)) {
                handoff = true;
                break;
            }
        }
        if (!handoff) {
            const auto& next = path[tool_positions[k + 1]];
            fail(c4, next, "no output of " + path[tool_positions[k]] + " is consumed by " + next);
        }
    }

    const std::string& terminal = graph.schema().terminal_type();
    const std::size_t last = idx.back();
    bool reaches = false;
    if (type_of(last) == terminal) {
        reaches = idx.size() >= 2 && adjacent(graph, idx[idx.size() - 2], last);
    } else {
        for (std::size_t v = 0; v < graph.node_count() && !reaches; ++v) {
            reaches = type_of(v) == terminal && adjacent(graph, last, v);
        }
    }
    if (!reaches) fail(c5, path.back(), "path does not end at a node connected to a " + terminal + " node");

    return report;
}

} // namespace cfkg
