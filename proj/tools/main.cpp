#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = cfkg::cli;

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual subgraphs and drift metrics for workflow knowledge graphs"};
    app.require_subcommand(1);

    cli::ValidateArgs validate;
    auto* v = app.add_subcommand("validate", "Check a tool path against the pipeline constraints");
    v->add_option("--graph", validate.graph, "Graph JSON")->required();
    v->add_option("--path", validate.path, "Comma-separated node ids or a JSON file with the path")->required();
    v->add_option("--out", validate.out, "Output directory");

    cli::ExplainArgs explain;
    auto* e = app.add_subcommand("explain", "Train soft masks and extract the counterfactual subgraph");
    e->add_option("--graph", explain.graph, "Graph JSON")->required();
    e->add_option("--config", explain.config, "Loss weights and training settings (JSON)");
    e->add_option("--prompt", explain.prompt, "Prompt text or a file holding it");
    e->add_option("--seed", explain.seed, "Override the configured seed");
    e->add_option("--steps", explain.steps, "Override the configured number of steps");
    e->add_option("--out", explain.out, "Output directory");

    cli::PerturbArgs perturb;
    auto* p = app.add_subcommand("perturb", "Budget-matched baseline masks and adjacency heatmaps");
    p->add_option("--graph", perturb.graph, "Graph JSON")->required();
    p->add_option("--reference", perturb.reference, "masks.csv from explain")->required();
    p->add_option("--strategy", perturb.strategy, "Strategy name or 'all'");
    p->add_option("--attention", perturb.attention, "node_id,mean_attention CSV");
    p->add_option("--seed", perturb.seed, "Seed of the first repetition");
    p->add_option("--repetitions", perturb.repetitions, "Repetitions per random strategy");
    p->add_option("--out", perturb.out, "Output directory");

    cli::MetricsArgs metrics;
    auto* m = app.add_subcommand("metrics", "Drift metrics over <graph>_<model>.txt outputs");
    m->add_option("--outputs", metrics.outputs, "Directory of model outputs")->required();
    m->add_option("--lexicon", metrics.lexicon, "canonical_name,alias CSV")->required();
    m->add_option("--out", metrics.out, "Output directory");

    cli::ProbeArgs probe;
    auto* pr = app.add_subcommand("probe", "Adapter shift norms and the alignment table");
    pr->add_option("--adapter", probe.adapter, "Adapter JSON")->required();
    pr->add_option("--embeddings", probe.embeddings, "token,v_0,... CSV")->required();
    pr->add_option("--attention", probe.attention, "node_id,mean_attention CSV");
    pr->add_option("--masks", probe.masks, "masks.csv from explain");
    pr->add_option("--out", probe.out, "Output directory");

    cli::ReportArgs report;
    auto* r = app.add_subcommand("report", "Counterfactual and fidelity drift for one model");
    r->add_option("--outputs", report.outputs, "Directory of model outputs")->required();
    r->add_option("--lexicon", report.lexicon, "canonical_name,alias CSV")->required();
    r->add_option("--model", report.model, "Fine-tuned model label");
    r->add_option("--out", report.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? cli::kOk : cli::kInputError;
    }

    if (*v) return cli::cmd_validate(validate, std::cout, std::cerr);
    if (*e) return cli::cmd_explain(explain, std::cout, std::cerr);
    if (*p) return cli::cmd_perturb(perturb, std::cout, std::cerr);
    if (*m) return cli::cmd_metrics(metrics, std::cout, std::cerr);
    if (*pr) return cli::cmd_probe(probe, std::cout, std::cerr);
    return cli::cmd_report(report, std::cout, std::cerr);
}
