#include "commands.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "cfkg/baselines.hpp"
#include "cfkg/csv.hpp"
#include "cfkg/graph.hpp"
#include "cfkg/io.hpp"
#include "cfkg/metrics.hpp"
#include "cfkg/optimizer.hpp"
#include "cfkg/pipeline.hpp"
#include "cfkg/probes.hpp"

namespace cfkg::cli {

namespace fs = std::filesystem;

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error [io]: " << e.what() << "\n";
        return kInputError;
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void emit(const fs::path& file, const std::string& content, std::ostream& log) {
    write_text_file(file, content);
    log << "wrote " << file.string() << "\n";
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::vector<std::string> parse_path_spec(const std::string& spec) {
    std::error_code ec;
    if (fs::is_regular_file(spec, ec)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(spec));
            if (doc.is_object()) doc = doc.at("path");
            return doc.get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, "path file " + spec + ": " + e.what());
        }
    }
    std::vector<std::string> ids;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const auto comma = std::min(spec.find(',', start), spec.size());
        auto id = trim(spec.substr(start, comma - start));
        if (!id.empty()) ids.push_back(std::move(id));
        start = comma + 1;
    }
    return ids;
}

std::unordered_map<std::string, double> load_attention_map(const fs::path& path) {
    std::unordered_map<std::string, double> out;
    for (const auto& r : parse_attention_csv(read_text_file(path))) out[r.token] = r.mean_attention;
    return out;
}

nlohmann::ordered_json breakdown_json(const LossBreakdown& b) {
    nlohmann::ordered_json j;
    j["structure"] = b.structure;
    j["semantic"] = b.semantic;
    j["prompt_weight"] = b.prompt_weight;
    j["entropy"] = b.entropy;
    j["preserve"] = b.preserve;
    j["hard"] = b.hard;
    j["smooth"] = b.smooth;
    j["total"] = b.total;
    return j;
}

} // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Divergence: return kDivergence;
        case ErrorKind::InfeasibleBudget: return kInfeasible;
        default: return kInputError;
    }
}

int cmd_validate(const ValidateArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto graph = load_graph(args.graph);
        const auto path = parse_path_spec(args.path);
        const auto report = validate_pipeline(graph, path);
        ensure_dir(args.out);
        emit(args.out / "validation_report.json", report.to_json(), log);
        for (const auto& r : report.results) {
            log << short_label(r.constraint) << ' ' << (r.passed ? "pass" : "FAIL") << "  " << to_string(r.constraint);
            if (!r.passed) log << "  (" << r.detail << ")";
            log << "\n";
        }
        return report.valid() ? kOk : kInvalid;
    });
}

int cmd_explain(const ExplainArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto graph = load_graph(args.graph);
        ExplainConfig cfg = args.config ? load_config(*args.config) : ExplainConfig{};
        if (args.seed) cfg.training.seed = *args.seed;
        if (args.steps) {
            if (*args.steps < 1) throw Error(ErrorKind::Schema, "--steps must be at least 1");
            cfg.training.steps = *args.steps;
        }

        std::optional<std::string> prompt;
        if (args.prompt) {
            std::error_code ec;
            const std::string text =
                fs::is_regular_file(*args.prompt, ec) ? read_text_file(*args.prompt) : *args.prompt;
            if (cfg.training.use_prompt_weight) {
                prompt = text;
            } else {
                err << "note: prompt ignored; set training.use_prompt_weight to enable prompt weighting\n";
            }
        }

        const CounterfactualProblem problem(graph, cfg.weights, cfg.hard, prompt, cfg.training.tool_type);
        const auto result = train(problem, cfg.training);

        ensure_dir(args.out);
        emit(args.out / "trace.csv", trace_csv(result.trace), log);
        emit(args.out / "loss_curves.csv", loss_curves_csv(result.trace), log);
        emit(args.out / "snapshots.csv", snapshots_csv(graph, result.trace), log);
        emit(args.out / "masks.csv",
             masks_csv(graph, result.node_soft, result.edge_soft, result.node_keep, result.edge_keep), log);
        emit(args.out / "node_heatmap.csv", node_heatmap_csv(graph, result.node_soft, result.node_keep), log);
        emit(args.out / "edge_heatmap.csv", edge_heatmap_csv(graph, result.edge_soft, result.edge_keep), log);
        emit(args.out / "counterfactual.json", serialize_graph(result.counterfactual), log);

        nlohmann::ordered_json summary;
        summary["seed"] = cfg.training.seed;
        summary["steps"] = cfg.training.steps;
        summary["tfidf_fingerprint"] = problem.model().fingerprint();
        summary["nodes_kept"] = result.counterfactual.node_count();
        summary["nodes_total"] = graph.node_count();
        summary["edges_kept"] = result.counterfactual.edge_count();
        summary["edges_total"] = graph.edge_count();
        summary["implied_edge_drops"] = result.implied_edge_drops;
        summary["final_soft"] = breakdown_json(result.final_soft);
        summary["final_binary"] = breakdown_json(result.final_binary);
        emit(args.out / "summary.json", summary.dump(2) + "\n", log);

        log << "kept " << result.counterfactual.node_count() << "/" << graph.node_count() << " nodes, "
            << result.counterfactual.edge_count() << "/" << graph.edge_count() << " edges\n";
        return kOk;
    });
}

int cmd_perturb(const PerturbArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto graph = load_graph(args.graph);
        const auto table = parse_masks_csv(read_text_file(args.reference));
        const auto [ref_nodes, ref_edges] = keep_masks_from_table(graph, table);
        const PerturbationSpec budgets = derive_budgets(graph, ref_nodes, ref_edges);

        std::vector<Strategy> strategies;
        if (args.strategy == "all") {
            strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
        } else if (auto s = parse_strategy(args.strategy)) {
            strategies.push_back(*s);
        } else {
            throw Error(ErrorKind::Schema, "unknown strategy \"" + args.strategy + "\"");
        }
        if (args.repetitions < 1) throw Error(ErrorKind::Schema, "--repetitions must be at least 1");

        std::optional<std::unordered_map<std::string, double>> attention;
        if (args.attention) attention = load_attention_map(*args.attention);
        for (Strategy s : strategies) {
            if (uses_attention(s) && !attention) {
                throw Error(ErrorKind::MissingScore,
                            std::string("missing input: ") + to_string(s) + " needs --attention");
            }
        }

        ensure_dir(args.out);
        std::string summary =
            "strategy,repetition,seed,node_budget,removed_nodes,edge_budget,budgeted_edge_removals,"
            "cascaded_edge_removals,removed_edges_total\n";
        for (Strategy s : strategies) {
            // attention strategies are deterministic; one repetition is enough
            const int reps = uses_attention(s) ? 1 : args.repetitions;
            for (int rep = 1; rep <= reps; ++rep) {
                PerturbationSpec spec = budgets;
                spec.strategy = s;
                spec.seed = args.seed + static_cast<std::uint64_t>(rep - 1);
                if (!is_type_aligned(s) && !uses_attention(s)) spec.type_histogram.clear();
                const auto mask = perturb(graph, spec, attention ? &*attention : nullptr);

                const std::string stem = std::string(to_string(s)) + "_rep" + std::to_string(rep);
                const auto heat = adjacency_heatmap(graph, mask);
                emit(args.out / (stem + "_mask.csv"), binary_mask_csv(graph, mask), log);
                emit(args.out / (stem + "_heatmap.csv"), heatmap_csv(graph, heat), log);
                emit(args.out / (stem + "_heatmap.svg"), heatmap_svg(graph, heat), log);
                summary += std::string(to_string(s)) + "," + std::to_string(rep) + "," + std::to_string(spec.seed) +
                           "," + std::to_string(removes_nodes(s) ? spec.node_budget : 0) + "," +
                           std::to_string(mask.removed_nodes()) + "," +
                           std::to_string(removes_edges(s) ? spec.edge_budget : 0) + "," +
                           std::to_string(mask.budgeted_edge_removals()) + "," +
                           std::to_string(mask.cascaded_edges.size()) + "," + std::to_string(mask.removed_edges()) +
                           "\n";
            }
        }
        emit(args.out / "perturb_summary.csv", summary, log);
        return kOk;
    });
}

int cmd_metrics(const MetricsArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto lexicon = parse_lexicon_csv(read_text_file(args.lexicon));
        if (!fs::is_directory(args.outputs)) {
            throw Error(ErrorKind::Io, "outputs directory " + args.outputs.string() + " does not exist");
        }

        // <graph>_<model>.txt
        std::set<std::string> graphs, models, present;
        for (const auto& entry : fs::directory_iterator(args.outputs)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
            const std::string stem = entry.path().stem().string();
            const auto cut = stem.rfind('_');
            if (cut == std::string::npos || cut == 0 || cut + 1 == stem.size()) {
                err << "warning: skipping " << entry.path().filename().string() << " (expected <graph>_<model>.txt)\n";
                continue;
            }
            graphs.insert(stem.substr(0, cut));
            models.insert(stem.substr(cut + 1));
            present.insert(stem);
        }
        if (present.empty()) throw Error(ErrorKind::Io, "no <graph>_<model>.txt files in " + args.outputs.string());

        // counterfactual row first, then the baselines
        std::vector<std::string> order;
        if (graphs.count("Gc")) order.push_back("Gc");
        for (const auto& g : graphs) {
            if (g != "G" && g != "Gc") order.push_back(g);
        }

        std::string csv =
            "graph,model,reference,missing,jaccard,edit_distance,edit_normalized,path_overlap,cosine_similarity,"
            "cosine_dissimilarity\n";
        std::string heat = "graph";
        for (const auto& m : models) heat += ",jaccard_" + m + ",edit_norm_" + m + ",overlap_" + m;
        heat += "\n";

        for (const auto& g : order) {
            heat += csv_field(g);
            for (const auto& m : models) {
                const std::string ref = "G_" + m;
                const std::string target = g + "_" + m;
                csv += csv_field(g) + "," + csv_field(m) + "," + csv_field(ref) + ",";
                if (!present.count(ref) || !present.count(target)) {
                    err << "warning: missing " << (present.count(ref) ? target : ref) << ".txt\n";
                    csv += "1,,,,,,\n";
                    heat += ",,,";
                    continue;
                }
                const auto r = compare_outputs(read_text_file(args.outputs / (ref + ".txt")),
                                               read_text_file(args.outputs / (target + ".txt")), lexicon);
                csv += "0," + format_number(r.jaccard) + "," + std::to_string(r.edit_distance) + "," +
                       format_number(r.edit_normalized) + "," + format_number(r.path_overlap) + "," +
                       format_number(r.cosine.similarity) + "," + format_number(r.cosine.dissimilarity) + "\n";
                heat += "," + format_number(r.jaccard) + "," + format_number(r.edit_normalized) + "," +
                        format_number(r.path_overlap);
            }
            heat += "\n";
        }

        ensure_dir(args.out);
        emit(args.out / "metrics.csv", csv, log);
        emit(args.out / "baseline_heatmap.csv", heat, log);
        return kOk;
    });
}

int cmd_probe(const ProbeArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto adapter = parse_adapter_json(read_text_file(args.adapter));
        const auto embeddings = parse_embeddings_csv(read_text_file(args.embeddings));

        std::map<std::string, double> shifts;
        std::string shift_csv = "token,shift_norm\n";
        for (const auto& e : embeddings) {
            const auto s = adapter_shift(adapter, e);
            shifts[e.token] = s.norm;
            shift_csv += csv_field(e.token) + "," + format_number(s.norm) + "\n";
        }

        std::map<std::string, double> mask_scores;
        if (args.masks) mask_scores = parse_masks_csv(read_text_file(*args.masks)).node_soft;

        std::map<std::string, double> attention;
        if (args.attention) {
            std::map<std::string, std::vector<std::string>> node_tokens;
            for (const auto& kv : shifts) node_tokens[kv.first] = {kv.first};
            for (const auto& kv : mask_scores) node_tokens[kv.first] = {kv.first};
            const auto records = parse_attention_csv(read_text_file(*args.attention));
            for (const auto& r : records) node_tokens[r.token] = {r.token};
            auto table = attention_table(records, node_tokens);
            for (const auto& [node, missing] : table.missing_tokens) {
                if (shifts.count(node)) err << "note: no attention score for " << node << "\n";
            }
            attention = std::move(table.scores);
        }

        const auto rows = alignment_table(mask_scores, attention, shifts);
        ensure_dir(args.out);
        emit(args.out / "shifts.csv", shift_csv, log);
        emit(args.out / "alignment.csv", alignment_csv(rows), log);
        return kOk;
    });
}

int cmd_report(const ReportArgs& args, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto lexicon = parse_lexicon_csv(read_text_file(args.lexicon));
        const auto text = [&](const std::string& stem) { return read_text_file(args.outputs / (stem + ".txt")); };
        const auto summary = drift_report(text("G_base"), text("G_" + args.model), text("Gc_" + args.model), lexicon);
        ensure_dir(args.out);
        emit(args.out / "drift_report.json", summary.to_json(), log);
        emit(args.out / "table1.csv", table_row_csv(summary.counterfactual), log);
        log << "jaccard " << format_number(summary.counterfactual.jaccard) << ", edit distance "
            << summary.counterfactual.edit_distance << ", path overlap "
            << format_number(summary.counterfactual.path_overlap) << ", fidelity "
            << (summary.fidelity_preserved ? "preserved" : "changed") << "\n";
        return kOk;
    });
}

} // namespace cfkg::cli
