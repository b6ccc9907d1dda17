#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cfkg {

/// Case-insensitive alias table mapping surface forms onto canonical tool names.
class ToolLexicon {
public:
    void add(std::string canonical, std::string alias);
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    struct Entry {
        std::string canonical;
        std::string alias_lower;
    };
    /// Sorted longest alias first.
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

/// Reads "canonical_name,alias" rows (header required).
ToolLexicon parse_lexicon_csv(std::string_view csv);

using Toolchain = std::vector<std::string>;

/// Tools in order of first mention, adjacent repeats collapsed. Matches are
/// case-insensitive, longest alias first, and must sit on word boundaries.
Toolchain extract_toolchain(std::string_view text, const ToolLexicon& lexicon);

/// |A n B| / |A u B|; 1.0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
double jaccard(const Toolchain& a, const Toolchain& b);

/// Token-level Levenshtein distance with unit costs.
std::size_t edit_distance(const Toolchain& a, const Toolchain& b);

/// Longest common prefix over the shorter length; 0 if either is empty.
double path_overlap(const Toolchain& a, const Toolchain& b);

struct OutputCosine {
    double similarity = 0.0;
    double dissimilarity = 1.0;
};

/// TF-IDF cosine between two texts under a model fitted on exactly the pair.
OutputCosine output_cosine(std::string_view text_a, std::string_view text_b);

struct DriftReport {
    Toolchain chain_a;
    Toolchain chain_b;
    double jaccard = 1.0;
    std::size_t edit_distance = 0;
    double edit_normalized = 0.0;
    double path_overlap = 0.0;
    OutputCosine cosine;
};

DriftReport compare_outputs(std::string_view text_a, std::string_view text_b, const ToolLexicon& lexicon);

struct DriftSummary {
    /// fine-tuned model on G versus fine-tuned model on G_c
    DriftReport counterfactual;
    /// base model on G versus fine-tuned model on G
    DriftReport fidelity;
    bool fidelity_preserved = false;

    std::string to_json() const;
};

DriftSummary drift_report(std::string_view base_on_graph, std::string_view tuned_on_graph,
                          std::string_view tuned_on_counterfactual, const ToolLexicon& lexicon);

/// "Jaccard,Edit Distance,Path Overlap,Cosine Similarity,Cosine Dissimilarity" header plus one row.
std::string table_row_csv(const DriftReport& report);

} // namespace cfkg
