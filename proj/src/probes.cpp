#include "cfkg/probes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "cfkg/csv.hpp"

namespace cfkg {

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const char* name) {
    if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
        throw Error(ErrorKind::Schema, std::string("adapter field \"") + name + "\" must be a nonempty 2-D array");
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
            throw Error(ErrorKind::DimensionMismatch, std::string("ragged rows in \"") + name + "\"");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

// Linear interpolation between order statistics, as numpy's default.
double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// Descending competition ranks: 1 + number of strictly larger values.
std::map<std::string, int> ranks(const std::map<std::string, double>& scores) {
    std::map<std::string, int> out;
    for (const auto& [id, v] : scores) {
        int r = 1;
        for (const auto& [other, w] : scores) r += w > v ? 1 : 0;
        out[id] = r;
    }
    return out;
}

template <typename T>
std::optional<T> lookup(const std::map<std::string, T>& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string optional_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

} // namespace

void AdapterWeights::validate() const {
    if (rank() < 1) throw Error(ErrorKind::DimensionMismatch, "adapter rank must be at least 1");
    if (up.cols() != rank()) {
        throw Error(ErrorKind::DimensionMismatch, "up has " + std::to_string(up.cols()) +
                                                      " columns, expected rank " + std::to_string(rank()));
    }
    if (rank() > std::min(input_dim(), output_dim())) {
        throw Error(ErrorKind::DimensionMismatch, "rank " + std::to_string(rank()) + " exceeds min(" +
                                                      std::to_string(input_dim()) + ", " +
                                                      std::to_string(output_dim()) + ")");
    }
    if (!down.allFinite() || !up.allFinite() || !std::isfinite(scaling)) {
        throw Error(ErrorKind::Schema, "adapter weights must be finite");
    }
}

AdapterWeights parse_adapter_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    try {
        AdapterWeights a;
        a.module_name = doc.value("module", std::string());
        a.scaling = doc.value("scaling", 1.0);
        a.down = matrix_from_json(doc.at("down"), "down");
        a.up = matrix_from_json(doc.at("up"), "up");
        if (doc.contains("rank") && doc.at("rank").get<Eigen::Index>() != a.rank()) {
            throw Error(ErrorKind::DimensionMismatch, "declared rank " + doc.at("rank").dump() +
                                                          " does not match down rows " + std::to_string(a.rank()));
        }
        a.validate();
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("adapter: ") + e.what());
    }
}

std::vector<TokenEmbedding> parse_embeddings_csv(std::string_view csv) {
    auto rows = parse_csv(csv);
    std::vector<TokenEmbedding> out;
    std::size_t first = (!rows.empty() && rows.front().size() > 0 && rows.front()[0] == "token") ? 1 : 0;
    for (std::size_t i = first; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 2) throw Error(ErrorKind::Parse, "embedding row " + std::to_string(i + 1) + " is empty");
        TokenEmbedding t;
        t.token = row[0];
        t.vector.resize(static_cast<Eigen::Index>(row.size() - 1));
        for (std::size_t j = 1; j < row.size(); ++j) t.vector(static_cast<Eigen::Index>(j - 1)) = parse_number(row[j]);
        if (!t.vector.allFinite()) throw Error(ErrorKind::Schema, "non-finite embedding for " + t.token);
        if (!out.empty() && out.front().vector.size() != t.vector.size()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "embedding for " + t.token + ": expected " + std::to_string(out.front().vector.size()) +
                            " values, actual " + std::to_string(t.vector.size()));
        }
        out.push_back(std::move(t));
    }
    return out;
}

AdapterShift adapter_shift(const AdapterWeights& adapter, const TokenEmbedding& embedding) {
    return adapter_shift(adapter, embedding.vector);
}

std::vector<AttentionRecord> parse_attention_csv(std::string_view csv) {
    auto rows = parse_csv(csv);
    std::vector<AttentionRecord> out;
    std::size_t first = 0;
    if (!rows.empty() && !rows.front().empty() && (rows.front()[0] == "node_id" || rows.front()[0] == "token")) {
        first = 1;
    }
    for (std::size_t i = first; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw Error(ErrorKind::Parse, "attention row " + std::to_string(i + 1) + " needs two fields");
        AttentionRecord r{rows[i][0], parse_number(rows[i][1])};
        if (!(r.mean_attention >= 0.0)) {
            throw Error(ErrorKind::Schema, "attention for " + r.token + " must be nonnegative");
        }
        out.push_back(std::move(r));
    }
    return out;
}

NodeAttention attention_table(const std::vector<AttentionRecord>& records,
                              const std::map<std::string, std::vector<std::string>>& node_tokens) {
    std::map<std::string, double> by_token;
    for (const auto& r : records) by_token[r.token] = r.mean_attention;

    NodeAttention out;
    for (const auto& [node, tokens] : node_tokens) {
        double sum = 0.0;
        std::size_t found = 0;
        for (const auto& t : tokens) {
            if (auto v = lookup(by_token, t)) {
                sum += *v;
                ++found;
            } else {
                out.missing_tokens[node].push_back(t);
            }
        }
        if (tokens.empty()) out.missing_tokens[node];
        if (found > 0) out.scores[node] = sum / static_cast<double>(found);
    }
    return out;
}

std::vector<AlignmentRow> alignment_table(const std::map<std::string, double>& mask_scores,
                                          const std::map<std::string, double>& attention_scores,
                                          const std::map<std::string, double>& shift_norms) {
    std::set<std::string> ids;
    for (const auto* m : {&mask_scores, &attention_scores, &shift_norms}) {
        for (const auto& kv : *m) ids.insert(kv.first);
    }
    const auto rm = ranks(mask_scores);
    const auto ra = ranks(attention_scores);
    const auto rs = ranks(shift_norms);

    std::vector<double> att_both, shift_both;
    for (const auto& id : ids) {
        if (attention_scores.count(id) && shift_norms.count(id)) {
            att_both.push_back(attention_scores.at(id));
            shift_both.push_back(shift_norms.at(id));
        }
    }
    const bool can_flag = att_both.size() >= 3;
    const double low_attention = can_flag ? quantile(att_both, 1.0 / 3.0) : 0.0;
    const double high_shift = can_flag ? quantile(shift_both, 2.0 / 3.0) : 0.0;

    std::vector<AlignmentRow> rows;
    for (const auto& id : ids) {
        AlignmentRow row;
        row.node_id = id;
        row.mask_score = lookup(mask_scores, id);
        row.attention = lookup(attention_scores, id);
        row.shift_norm = lookup(shift_norms, id);
        row.rank_mask = lookup(rm, id);
        row.rank_attention = lookup(ra, id);
        row.rank_shift = lookup(rs, id);
        row.discrepancy = can_flag && row.attention && row.shift_norm && *row.attention <= low_attention &&
                          *row.shift_norm >= high_shift;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string alignment_csv(const std::vector<AlignmentRow>& rows) {
    std::string out = "node_id,mask_score,attention,shift_norm,rank_mask,rank_attn,rank_shift,discrepancy_flag\n";
    for (const auto& r : rows) {
        out += csv_field(r.node_id) + "," + optional_number(r.mask_score) + "," + optional_number(r.attention) + "," +
               optional_number(r.shift_norm) + "," + optional_int(r.rank_mask) + "," +
               optional_int(r.rank_attention) + "," + optional_int(r.rank_shift) + "," +
               (r.discrepancy ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace cfkg
