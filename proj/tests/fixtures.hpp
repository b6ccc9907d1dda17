#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cfkg/csv.hpp"
#include "cfkg/graph.hpp"

namespace fixture {

inline std::string data(const std::string& rel) { return std::string(CFKG_DATA_DIR) + "/" + rel; }

inline std::string transcript_path() { return data("graphs/transcript_assembly.json"); }
inline std::string tiny_path() { return data("graphs/tiny_pipeline.json"); }

inline cfkg::HeteroGraph transcript() { return cfkg::load_graph(transcript_path()); }
inline cfkg::HeteroGraph tiny() { return cfkg::load_graph(tiny_path()); }

inline std::vector<std::string> pipeline() {
    return {"NCBI",    "reads_fastq", "Hisat2",     "sam_file",         "Samtools",
            "bam_file", "Scallop",    "gtf_file",   "Gffcompare",       "gffcompare_stats",
            "Evaluation Information"};
}

inline nlohmann::json transcript_json() { return nlohmann::json::parse(cfkg::read_text_file(transcript_path())); }

inline void drop_edge(nlohmann::json& g, const std::string& id) {
    auto& edges = g["edges"];
    for (auto it = edges.begin(); it != edges.end(); ++it) {
        if ((*it)["id"] == id) {
            edges.erase(it);
            return;
        }
    }
}

inline void drop_node(nlohmann::json& g, const std::string& id) {
    auto& nodes = g["nodes"];
    for (auto it = nodes.begin(); it != nodes.end(); ++it) {
        if ((*it)["id"] == id) {
            nodes.erase(it);
            break;
        }
    }
    nlohmann::json kept = nlohmann::json::array();
    for (const auto& e : g["edges"]) {
        if (e["src"] != id && e["dst"] != id) kept.push_back(e);
    }
    g["edges"] = kept;
}

inline void set_edge_source(nlohmann::json& g, const std::string& id, const std::string& src) {
    for (auto& e : g["edges"]) {
        if (e["id"] == id) e["src"] = src;
    }
}

inline cfkg::HeteroGraph from_json(const nlohmann::json& g) { return cfkg::parse_graph(g.dump()); }

struct Corruption {
    const char* name;
    std::size_t target;  // index of the constraint expected to fail
    cfkg::HeteroGraph graph;
    std::vector<std::string> path;
};

// Five single mutations of the transcript-assembly pipeline, one per constraint.
inline std::vector<Corruption> corruptions() {
    std::vector<Corruption> out;
    const auto base = transcript_json();
    const auto path = pipeline();
    {
        auto g = base;
        drop_edge(g, "e_hisat2_in");
        out.push_back({"drop input edge", 1, from_json(g), path});
    }
    {
        auto g = base;
        drop_edge(g, "e_gffcompare_out");
        out.push_back({"drop output edge", 2, from_json(g), path});
    }
    {
        auto p = path;
        p.erase(p.begin());
        out.push_back({"non-database start", 0, from_json(base), p});
    }
    {
        auto g = base;
        set_edge_source(g, "e_samtools_in", "reads_fastq");
        out.push_back({"broken file handoff", 3, from_json(g), path});
    }
    {
        auto g = base;
        drop_node(g, "Evaluation Information");
        auto p = path;
        p.pop_back();
        out.push_back({"missing terminal", 4, from_json(g), p});
    }
    return out;
}

} // namespace fixture
