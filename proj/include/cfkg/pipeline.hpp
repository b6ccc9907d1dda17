#pragma once

#include <array>
#include <string>
#include <vector>

#include "cfkg/graph.hpp"

namespace cfkg {

// Constraints of a valid tool execution pipeline:
//   StartsAtDatabase   first node is a database
//   ToolsConsumeInput  every tool has a rels_input edge from an earlier path node
//   ToolsProduceOutput every tool has at least one rels_output edge
//   FileHandoff        some output of each tool is a rels_input of the next tool
//   ReachesTerminal    the path ends at (or next to) the terminal node
enum class PipelineConstraint {
    StartsAtDatabase = 0,
    ToolsConsumeInput,
    ToolsProduceOutput,
    FileHandoff,
    ReachesTerminal,
};

inline constexpr std::size_t kPipelineConstraintCount = 5;

const char* to_string(PipelineConstraint c);
/// Short label "C1" .. "C5".
const char* short_label(PipelineConstraint c);

struct ConstraintResult {
    PipelineConstraint constraint;
    bool passed = true;
    /// Node ids responsible for the failure.
    std::vector<std::string> offenders;
    std::string detail;
};

struct ValidationReport {
    std::array<ConstraintResult, kPipelineConstraintCount> results;

    bool valid() const;
    const ConstraintResult& operator[](PipelineConstraint c) const {
        return results[static_cast<std::size_t>(c)];
    }
    std::vector<PipelineConstraint> failed() const;
    std::string to_json() const;
};

struct PipelineOptions {
    std::string tool_type{kToolType};
    std::string database_type{kDatabaseType};
};

/// Checks `path` (node ids in execution order) against the pipeline
/// constraints. Lookups are by id, so the result does not depend on the
/// order of nodes or edges in the graph file.
ValidationReport validate_pipeline(const HeteroGraph& graph,
                                   const std::vector<std::string>& path,
                                   const PipelineOptions& options = {});

} // namespace cfkg
