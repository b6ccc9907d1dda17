#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cfkg/baselines.hpp"
#include "cfkg/csv.hpp"
#include "cfkg/graph.hpp"
#include "cfkg/losses.hpp"
#include "cfkg/optimizer.hpp"

namespace cfkg {

/// Loss weights, hard sets and training settings from one JSON document.
/// Absent keys keep the case-study defaults.
struct ExplainConfig {
    LossWeights weights;
    HardSets hard;
    TrainConfig training;
};

ExplainConfig parse_config_json(std::string_view json_text);
ExplainConfig load_config(const std::filesystem::path& path);

/// step, L_structure, ..., L_total, then the same columns with an _ema suffix.
std::string trace_csv(const TrainTrace& trace);
/// step, L_semantic, L_structure, L_total and their EMA counterparts.
std::string loss_curves_csv(const TrainTrace& trace);
std::string snapshots_csv(const HeteroGraph& graph, const TrainTrace& trace);

/// element_id, kind, soft_mask, binary_mask
std::string masks_csv(const HeteroGraph& graph, const MaskVector& node_soft, const MaskVector& edge_soft,
                      const KeepMask& node_keep, const KeepMask& edge_keep);

struct MaskTable {
    std::map<std::string, double> node_soft;
    std::map<std::string, double> edge_soft;
    std::map<std::string, bool> node_binary;
    std::map<std::string, bool> edge_binary;
};

MaskTable parse_masks_csv(std::string_view csv);

/// Binary masks of `table` aligned to `graph`; elements absent from the table
/// raise ErrorKind::UnknownId.
std::pair<KeepMask, KeepMask> keep_masks_from_table(const HeteroGraph& graph, const MaskTable& table);

std::string node_heatmap_csv(const HeteroGraph& graph, const MaskVector& node_soft, const KeepMask& node_keep);
std::string edge_heatmap_csv(const HeteroGraph& graph, const MaskVector& edge_soft, const KeepMask& edge_keep);

/// element_id, kind, keep, cascaded
std::string binary_mask_csv(const HeteroGraph& graph, const BinaryGraphMask& mask);

} // namespace cfkg
