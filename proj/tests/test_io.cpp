#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cfkg/error.hpp"
#include "cfkg/io.hpp"
#include "fixtures.hpp"

using namespace cfkg;

TEST(Numbers, FormatRoundTrips) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(k % 40) - 20);
        EXPECT_EQ(parse_number(format_number(x)), x);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(6.0), "6");
    EXPECT_EQ(parse_number(" 2.5 "), 2.5);
    EXPECT_THROW(parse_number("2.5x"), Error);
    EXPECT_THROW(parse_number(""), Error);
}

TEST(Csv, QuotingRoundTrips) {
    const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv_field(fields[i]);
    const auto rows = parse_csv(line + "\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], fields);
    EXPECT_EQ(csv_field("plain"), "plain");
}

TEST(Csv, LineEndingsAndBlankLines) {
    const auto rows = parse_csv("a,b\r\n\r\nc,d\n\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"c", "d"}));
    EXPECT_THROW(parse_csv("a,\"open\n"), Error);
}

TEST(Files, MissingFileIsAnIoError) {
    try {
        read_text_file("/nonexistent/file.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Config, DefaultsWhenEmpty) {
    const auto c = parse_config_json("{}");
    const LossWeights w;
    const TrainConfig t;
    EXPECT_EQ(c.weights.alpha_semantic, w.alpha_semantic);
    EXPECT_EQ(c.weights.beta_entropy, 0.05);
    EXPECT_EQ(c.weights.per_relation_lambda, w.per_relation_lambda);
    EXPECT_EQ(c.training.steps, 500);
    EXPECT_EQ(c.training.learning_rate, 0.01);
    EXPECT_EQ(c.training.temperature, 0.15);
    EXPECT_EQ(c.training.initial_logit, 2.0);
    EXPECT_EQ(c.training.seed, t.seed);
    EXPECT_TRUE(c.hard.nodes.empty());
}

TEST(Config, CaseStudyFile) {
    const auto c = load_config(fixture::data("config/case_study.json"));
    EXPECT_EQ(c.weights.alpha_semantic, 400.0);
    EXPECT_EQ(c.weights.gamma_preserve, 10.0);
    EXPECT_EQ(c.weights.delta_hard, 10.0);
    EXPECT_EQ(c.weights.epsilon_smooth, 5.0);
    EXPECT_EQ(c.weights.relation_lambda("rels_input"), 4.0);
    EXPECT_EQ(c.training.seed, 7u);
    EXPECT_EQ(c.training.snapshot_interval, 50);
}

TEST(Config, Overrides) {
    const auto c = parse_config_json(R"({"alpha_semantic": 0, "hard_nodes": ["NCBI"], "hard_edges": ["e_end"],
        "per_node_lambda": {"Tool": 3}, "training": {"steps": 7, "tool_type": "Program", "kappa": 0.1}})");
    EXPECT_EQ(c.weights.alpha_semantic, 0.0);
    EXPECT_EQ(c.hard.nodes, std::set<std::string>{"NCBI"});
    EXPECT_EQ(c.hard.edges, std::set<std::string>{"e_end"});
    EXPECT_EQ(c.weights.node_lambda("Tool"), 3.0);
    EXPECT_EQ(c.training.steps, 7);
    EXPECT_EQ(c.training.tool_type, "Program");
    EXPECT_EQ(c.training.kappa, 0.1);
}

TEST(Config, Rejections) {
    auto kind = [](const char* text) {
        try {
            parse_config_json(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind(R"({"alpha_semantic": "big"})"), ErrorKind::Schema);
    EXPECT_EQ(kind(R"({"beta_entropy": -1})"), ErrorKind::Schema);
    EXPECT_EQ(kind(R"({"training": {"steps": 0}})"), ErrorKind::Schema);
    EXPECT_EQ(kind(R"({"training": {"temperature": 0}})"), ErrorKind::Schema);
    EXPECT_EQ(kind("[1, 2]"), ErrorKind::Schema);
    EXPECT_EQ(kind("{oops"), ErrorKind::Parse);
}

TEST(Masks, CsvRoundTrip) {
    const auto g = fixture::transcript();
    const auto n = static_cast<Eigen::Index>(g.node_count()), m = static_cast<Eigen::Index>(g.edge_count());
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaskVector ns(n), es(m);
    for (auto& x : ns) x = u(rng);
    for (auto& x : es) x = u(rng);
    const KeepMask nk = ns.array() >= 0.5, ek = es.array() >= 0.5;
    const auto table = parse_masks_csv(masks_csv(g, ns, es, nk, ek));
    for (Eigen::Index i = 0; i < n; ++i) {
        EXPECT_EQ(table.node_soft.at(g.node(static_cast<std::size_t>(i)).id), ns(i));
    }
    const auto [nk2, ek2] = keep_masks_from_table(g, table);
    EXPECT_TRUE((nk2 == nk).all());
    EXPECT_TRUE((ek2 == ek).all());
}

TEST(Masks, UnknownAndMalformed) {
    const auto g = fixture::transcript();
    const auto table = parse_masks_csv("element_id,kind,soft_mask,binary_mask\nNCBI,node,0.9,1\n");
    try {
        keep_masks_from_table(g, table);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownId);
    }
    EXPECT_THROW(parse_masks_csv("id,kind,soft,binary\n"), Error);
    EXPECT_THROW(parse_masks_csv("element_id,kind,soft_mask,binary_mask\nNCBI,vertex,0.9,1\n"), Error);
    EXPECT_THROW(parse_masks_csv("element_id,kind,soft_mask,binary_mask\nNCBI,node,0.9,2\n"), Error);
}

TEST(Trace, HeaderAndRows) {
    TrainTrace t;
    t.steps = {1, 2};
    t.raw.resize(2);
    t.raw[0].total = 3.0;
    t.raw[1].total = 1.0;
    t.ema = t.raw;
    t.ema[1].total = 2.8;
    const auto rows = parse_csv(trace_csv(t));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].front(), "step");
    EXPECT_EQ(rows[0][7], "L_total");
    EXPECT_EQ(rows[0].back(), "L_total_ema");
    EXPECT_EQ(rows[0].size(), 15u);
    EXPECT_EQ(rows[2][0], "2");
    EXPECT_EQ(rows[2][7], "1");
    EXPECT_EQ(rows[2][14], "2.8");

    const auto curves = parse_csv(loss_curves_csv(t));
    EXPECT_EQ(curves[0], (std::vector<std::string>{"step", "L_semantic", "L_structure", "L_total", "L_semantic_ema",
                                                   "L_structure_ema", "L_total_ema"}));
}

TEST(Heatmaps, NodeAndEdgeTables) {
    const auto g = fixture::tiny();
    const auto n = static_cast<Eigen::Index>(g.node_count()), m = static_cast<Eigen::Index>(g.edge_count());
    const auto nodes = parse_csv(node_heatmap_csv(g, MaskVector::Constant(n, 0.25), KeepMask::Zero(n)));
    EXPECT_EQ(nodes[0], (std::vector<std::string>{"node_id", "entity_type", "soft_mask", "keep"}));
    EXPECT_EQ(nodes.size(), g.node_count() + 1);
    EXPECT_EQ(nodes[1][2], "0.25");
    EXPECT_EQ(nodes[1][3], "0");
    const auto edges = parse_csv(edge_heatmap_csv(g, MaskVector::Constant(m, 0.75), KeepMask::Ones(m)));
    EXPECT_EQ(edges[0], (std::vector<std::string>{"edge_id", "src", "dst", "relation", "soft_mask", "keep"}));
    EXPECT_EQ(edges[1][1], g.edge(0).src);
    EXPECT_EQ(edges[1][5], "1");
}
