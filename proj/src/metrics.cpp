#include "cfkg/metrics.hpp"

#include <algorithm>

#include <json.hpp>

#include "cfkg/csv.hpp"
#include "cfkg/error.hpp"
#include "cfkg/semantics.hpp"

namespace cfkg {

namespace {

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

bool is_word_byte(char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
}

nlohmann::ordered_json report_json(const DriftReport& r) {
    nlohmann::ordered_json j;
    j["toolchain_a"] = r.chain_a;
    j["toolchain_b"] = r.chain_b;
    j["jaccard"] = r.jaccard;
    j["edit_distance"] = r.edit_distance;
    j["edit_distance_normalized"] = r.edit_normalized;
    j["path_overlap"] = r.path_overlap;
    j["cosine_similarity"] = r.cosine.similarity;
    j["cosine_dissimilarity"] = r.cosine.dissimilarity;
    return j;
}

} // namespace

void ToolLexicon::add(std::string canonical, std::string alias) {
    Entry entry{std::move(canonical), lowercase(alias)};
    if (entry.alias_lower.empty()) return;
    for (const auto& e : entries_) {
        if (e.alias_lower == entry.alias_lower) return;
    }
    // Longest alias first; equal lengths keep insertion order.
    auto pos = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return e.alias_lower.size() < entry.alias_lower.size();
    });
    entries_.insert(pos, std::move(entry));
}

ToolLexicon parse_lexicon_csv(std::string_view csv) {
    const auto rows = parse_csv(csv);
    if (rows.empty() || rows.front().size() < 2 || trim(rows.front()[0]) != "canonical_name" ||
        trim(rows.front()[1]) != "alias") {
        throw Error(ErrorKind::Parse, "lexicon CSV must start with a canonical_name,alias header");
    }
    ToolLexicon lex;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) {
            throw Error(ErrorKind::Parse, "lexicon row " + std::to_string(i + 1) + " needs two fields");
        }
        auto canonical = trim(rows[i][0]);
        lex.add(canonical, canonical);
        lex.add(canonical, trim(rows[i][1]));
    }
    return lex;
}

Toolchain extract_toolchain(std::string_view text, const ToolLexicon& lexicon) {
    const std::string lower = lowercase(text);
    Toolchain chain;
    std::size_t i = 0;
    while (i < lower.size()) {
        if (i > 0 && is_word_byte(lower[i - 1])) {
            ++i;
            continue;
        }
        const ToolLexicon::Entry* hit = nullptr;
        for (const auto& e : lexicon.entries()) {
            const std::size_t end = i + e.alias_lower.size();
            if (lower.compare(i, e.alias_lower.size(), e.alias_lower) == 0 &&
                (end == lower.size() || !is_word_byte(lower[end]))) {
                hit = &e;
                break;
            }
        }
        if (hit == nullptr) {
            ++i;
            continue;
        }
        if (std::find(chain.begin(), chain.end(), hit->canonical) == chain.end()) chain.push_back(hit->canonical);
        i += hit->alias_lower.size();
    }
    return chain;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double jaccard(const Toolchain& a, const Toolchain& b) {
    return jaccard(std::set<std::string>(a.begin(), a.end()), std::set<std::string>(b.begin(), b.end()));
}

std::size_t edit_distance(const Toolchain& a, const Toolchain& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double path_overlap(const Toolchain& a, const Toolchain& b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) return 0.0;
    std::size_t k = 0;
    while (k < n && a[k] == b[k]) ++k;
    return static_cast<double>(k) / static_cast<double>(n);
}

OutputCosine output_cosine(std::string_view text_a, std::string_view text_b) {
    const std::string corpus[] = {std::string(text_a), std::string(text_b)};
    const auto model = TfidfModel::fit(corpus);
    OutputCosine out;
    out.similarity = cosine(model.embed_dense(text_a), model.embed_dense(text_b));
    out.dissimilarity = 1.0 - out.similarity;
    return out;
}

DriftReport compare_outputs(std::string_view text_a, std::string_view text_b, const ToolLexicon& lexicon) {
    DriftReport r;
    r.chain_a = extract_toolchain(text_a, lexicon);
    r.chain_b = extract_toolchain(text_b, lexicon);
    r.jaccard = jaccard(r.chain_a, r.chain_b);
    r.edit_distance = edit_distance(r.chain_a, r.chain_b);
    const std::size_t longest = std::max(r.chain_a.size(), r.chain_b.size());
    r.edit_normalized = longest == 0 ? 0.0 : static_cast<double>(r.edit_distance) / static_cast<double>(longest);
    r.path_overlap = path_overlap(r.chain_a, r.chain_b);
    r.cosine = output_cosine(text_a, text_b);
    return r;
}

std::string DriftSummary::to_json() const {
    nlohmann::ordered_json j;
    j["counterfactual"] = report_json(counterfactual);
    j["fidelity"] = report_json(fidelity);
    j["fidelity_preserved"] = fidelity_preserved;
    return j.dump(2) + "\n";
}

DriftSummary drift_report(std::string_view base_on_graph, std::string_view tuned_on_graph,
                          std::string_view tuned_on_counterfactual, const ToolLexicon& lexicon) {
    DriftSummary s;
    s.counterfactual = compare_outputs(tuned_on_graph, tuned_on_counterfactual, lexicon);
    s.fidelity = compare_outputs(base_on_graph, tuned_on_graph, lexicon);
    s.fidelity_preserved = s.fidelity.chain_a == s.fidelity.chain_b;
    return s;
}

std::string table_row_csv(const DriftReport& report) {
    return "Jaccard,Edit Distance,Path Overlap,Cosine Similarity,Cosine Dissimilarity\n" +
           format_number(report.jaccard) + "," + std::to_string(report.edit_distance) + "," +
           format_number(report.path_overlap) + "," + format_number(report.cosine.similarity) + "," +
           format_number(report.cosine.dissimilarity) + "\n";
}

} // namespace cfkg
