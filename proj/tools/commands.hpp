#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cfkg/error.hpp"

namespace cfkg::cli {

enum ExitCode : int {
    kOk = 0,
    kInvalid = 1,
    kInputError = 2,
    kDivergence = 3,
    kInfeasible = 4,
};

int exit_code_for(ErrorKind kind);

struct ValidateArgs {
    std::filesystem::path graph;
    /// comma-separated node ids, or a JSON file holding an array of ids
    std::string path;
    std::filesystem::path out = ".";
};

struct ExplainArgs {
    std::filesystem::path graph;
    std::optional<std::filesystem::path> config;
    /// prompt text, or a path to a file holding it
    std::optional<std::string> prompt;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::filesystem::path out = ".";
};

struct PerturbArgs {
    std::filesystem::path graph;
    /// masks.csv written by explain
    std::filesystem::path reference;
    /// strategy name or "all"
    std::string strategy = "all";
    std::optional<std::filesystem::path> attention;
    std::uint64_t seed = 0;
    int repetitions = 2;
    std::filesystem::path out = ".";
};

struct MetricsArgs {
    std::filesystem::path outputs;
    std::filesystem::path lexicon;
    std::filesystem::path out = ".";
};

struct ProbeArgs {
    std::filesystem::path adapter;
    std::filesystem::path embeddings;
    std::optional<std::filesystem::path> attention;
    std::optional<std::filesystem::path> masks;
    std::filesystem::path out = ".";
};

struct ReportArgs {
    std::filesystem::path outputs;
    std::filesystem::path lexicon;
    std::string model = "adapter";
    std::filesystem::path out = ".";
};

// Each command writes its artifacts under `out`, prints a short summary to
// `log` and diagnostics to `err`, and returns an ExitCode.
int cmd_validate(const ValidateArgs& args, std::ostream& log, std::ostream& err);
int cmd_explain(const ExplainArgs& args, std::ostream& log, std::ostream& err);
int cmd_perturb(const PerturbArgs& args, std::ostream& log, std::ostream& err);
int cmd_metrics(const MetricsArgs& args, std::ostream& log, std::ostream& err);
int cmd_probe(const ProbeArgs& args, std::ostream& log, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& log, std::ostream& err);

} // namespace cfkg::cli
