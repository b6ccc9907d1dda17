#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cfkg/error.hpp"
#include "cfkg/losses.hpp"
#include "cfkg/optimizer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cfkg;

namespace {

MaskVector ones(std::size_t n) { return MaskVector::Ones(static_cast<Eigen::Index>(n)); }
MaskVector zeros(std::size_t n) { return MaskVector::Zero(static_cast<Eigen::Index>(n)); }

std::vector<double> to_std(const MaskVector& v) { return {v.data(), v.data() + v.size()}; }

MaskVector random_masks(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaskVector m(static_cast<Eigen::Index>(n));
    for (auto& x : m) x = u(rng);
    return m;
}

HeteroGraph single_tool_graph() {
    const SchemaRegistry schema({"Tool", "File"}, {"rels_input", "rels_output", "rels_download_from"}, "File");
    return HeteroGraph(schema, {{"t", "Tool", ""}}, {});
}

HeteroGraph single_edge_graph() {
    const SchemaRegistry schema({"Tool", "File"}, {"rels_input", "rels_output", "rels_download_from"}, "File");
    return HeteroGraph(schema, {{"u", "Tool", ""}, {"v", "File", ""}}, {{"e", "u", "v", "rels_output", ""}});
}

} // namespace

TEST(StructureLoss, ZeroMasks) {
    const auto g = fixture::transcript();
    EXPECT_EQ(structure_loss(g, LossWeights{}, zeros(g.node_count()), zeros(g.edge_count())), 0.0);
}

TEST(StructureLoss, SingleToolNode) {
    const auto g = single_tool_graph();
    EXPECT_DOUBLE_EQ(structure_loss(g, LossWeights{}, ones(1), zeros(0)), 0.1);
}

TEST(StructureLoss, FixtureHandSum) {
    const auto g = fixture::transcript();
    // 11 nodes at 0.1; 8 input/output edges at 0.5*4; one download edge at 0.5*0.5; one END edge at 0.5*1
    const double expected = 11 * 0.1 + 8 * 2.0 + 0.25 + 0.5;
    EXPECT_NEAR(structure_loss(g, LossWeights{}, ones(g.node_count()), ones(g.edge_count())), expected, 1e-12);
}

TEST(StructureLoss, PerTypeLambda) {
    const auto g = fixture::transcript();
    LossWeights w;
    w.per_node_lambda["Tool"] = 3.0;
    const double expected = 7 * 0.1 + 4 * 0.3 + 8 * 2.0 + 0.25 + 0.5;
    EXPECT_NEAR(structure_loss(g, w, ones(g.node_count()), ones(g.edge_count())), expected, 1e-12);
}

TEST(EntropyLoss, ClosedForms) {
    MaskVector half(1);
    half << 0.5;
    EXPECT_NEAR(entropy_loss(half), std::log(2.0), 1e-15);
    EXPECT_NEAR(entropy_loss(half), 0.6931471805599453, 1e-15);

    MaskVector pair(2);
    pair << 0.25, 0.75;
    EXPECT_NEAR(entropy_loss(pair), 1.1246702892376166, 1e-14);
    EXPECT_NEAR(entropy_loss(pair), oracle::binary_entropy(0.25) + oracle::binary_entropy(0.75), 1e-14);

    MaskVector edges(3);
    edges << 0.0, 1.0, 1e-12;
    EXPECT_LT(entropy_loss(edges), 1e-8);
    EXPECT_NEAR(entropy_loss(half, pair), std::log(2.0) + 1.1246702892376166, 1e-14);
}

TEST(EntropyLoss, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(2);
    const auto m = random_masks(50, rng);
    const auto g = entropy_gradient(m);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double fd = oracle::central_difference([](double x) { return oracle::binary_entropy(x); }, m(i), 1e-6);
        EXPECT_NEAR(g(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
    MaskVector clamped(2);
    clamped << 0.0, 1.0;
    EXPECT_EQ(entropy_gradient(clamped), zeros(2));
}

TEST(PreserveLoss, Formula) {
    MaskVector three_kept(4);
    three_kept << 0.9, 0.5, 0.7, 0.1;
    EXPECT_EQ(preserve_loss(4.0, three_kept), 0.0);
    MaskVector one_kept(4);
    one_kept << 0.9, 0.49, 0.2, 0.1;
    EXPECT_EQ(preserve_loss(4.0, one_kept), 2.0);
}

TEST(PreserveLoss, FixtureAllEdgesBelowThreshold) {
    const auto g = fixture::transcript();
    EXPECT_EQ(preserve_loss(g, MaskVector::Constant(static_cast<Eigen::Index>(g.edge_count()), 0.3)),
              static_cast<double>(g.count_nodes_of_type("Tool") - 1));
    EXPECT_EQ(preserve_loss(g, MaskVector::Constant(static_cast<Eigen::Index>(g.edge_count()), 0.3)), 3.0);
}

TEST(PreserveLoss, SurrogateGradientMatchesSmoothedCount) {
    std::mt19937_64 rng(8);
    const double kappa = 0.05;
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_masks(6, rng) * 0.5;  // mostly below threshold so the term is active
        ASSERT_GT(preserve_loss(6.0, m), 0.0);
        const auto g = preserve_surrogate_gradient(6.0, m, kappa);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double fd = oracle::central_difference(
                [&](double x) {
                    // -K~ restricted to coordinate i
                    return -1.0 / (1.0 + std::exp(-(x - 0.5) / kappa));
                },
                m(i), 1e-6);
            EXPECT_NEAR(g(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
    EXPECT_EQ(preserve_surrogate_gradient(1.0, ones(3), kappa), zeros(3));
}

TEST(HardLoss, Examples) {
    const auto g = fixture::transcript();
    HardSets hard{{"Hisat2"}, {"e_end"}};
    EXPECT_EQ(hard_loss(g, hard, ones(g.node_count()), ones(g.edge_count())), 0.0);

    auto nm = ones(g.node_count());
    nm(static_cast<Eigen::Index>(g.node_index("Hisat2"))) = 0.2;
    EXPECT_NEAR(hard_loss(g, hard, nm, ones(g.edge_count())), 0.3, 1e-15);

    EXPECT_EQ(hard_loss(g, HardSets{}, zeros(g.node_count()), zeros(g.edge_count())), 0.0);
}

TEST(HardLoss, UnknownId) {
    const auto g = fixture::transcript();
    try {
        hard_loss(g, HardSets{{"Bowtie"}, {}}, ones(g.node_count()), ones(g.edge_count()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownId);
    }
}

TEST(SmoothLoss, ConsistentMasksGiveZero) {
    const auto g = fixture::transcript();
    std::mt19937_64 rng(4);
    const auto nm = random_masks(g.node_count(), rng);
    MaskVector em(static_cast<Eigen::Index>(g.edge_count()));
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        em(static_cast<Eigen::Index>(e)) =
            0.5 * (nm(static_cast<Eigen::Index>(g.edge_source(e))) + nm(static_cast<Eigen::Index>(g.edge_target(e))));
    }
    EXPECT_NEAR(smooth_loss(g, LossWeights{}, nm, em), 0.0, 1e-30);
}

TEST(SmoothLoss, SingleEdge) {
    const auto g = single_edge_graph();
    MaskVector nm(2), em(1);
    nm << 1.0, 0.0;
    em << 1.0;
    EXPECT_DOUBLE_EQ(smooth_loss(g, LossWeights{}, nm, em), 0.25);
}

TEST(SmoothLoss, MatchesReferenceOnRandomMasks) {
    const auto g = fixture::transcript();
    std::mt19937_64 rng(12);
    LossWeights weighted;
    weighted.node_type_weights = {{"Tool", 3.0}, {"File", 0.5}};
    for (const auto& w : {LossWeights{}, weighted}) {
        for (int t = 0; t < 10; ++t) {
            const auto nm = random_masks(g.node_count(), rng);
            const auto em = random_masks(g.edge_count(), rng);
            const auto ref = oracle::loss_terms(g, w, {}, to_std(nm), to_std(em));
            EXPECT_NEAR(smooth_loss(g, w, nm, em), ref.smooth, 1e-12);
        }
    }
}

TEST(SmoothLoss, DivisionGuard) {
    const auto g = single_edge_graph();
    LossWeights w;
    w.node_type_weights = {{"Tool", 0.0}, {"File", 0.0}};
    try {
        smooth_loss(g, w, ones(2), ones(1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DivisionGuard);
    }
}

TEST(LossWeights, NegativeCoefficientRejected) {
    LossWeights w;
    w.beta_entropy = -1.0;
    EXPECT_THROW(w.validate(), Error);
}

TEST(TotalLoss, FullMasksReduceToStructure) {
    const auto g = fixture::transcript();
    const auto b = total_loss(g, LossWeights{}, HardSets{}, ones(g.node_count()), ones(g.edge_count()));
    EXPECT_NEAR(b.semantic, 0.0, 1e-15);
    EXPECT_LT(b.entropy, 1e-7);
    EXPECT_EQ(b.preserve, 0.0);
    EXPECT_EQ(b.hard, 0.0);
    EXPECT_EQ(b.smooth, 0.0);
    EXPECT_NEAR(b.total, b.structure, 1e-7);
    EXPECT_NEAR(b.structure, 17.85, 1e-12);
}

TEST(TotalLoss, OnlyLambdasEqualsStructure) {
    const auto g = fixture::transcript();
    LossWeights w;
    w.alpha_semantic = w.beta_entropy = w.gamma_preserve = w.delta_hard = w.epsilon_smooth = 0.0;
    std::mt19937_64 rng(1);
    const auto nm = random_masks(g.node_count(), rng);
    const auto em = random_masks(g.edge_count(), rng);
    EXPECT_EQ(total_loss(g, w, HardSets{{"NCBI"}, {}}, nm, em).total, structure_loss(g, w, nm, em));
}

TEST(TotalLoss, SumOfIndependentTerms) {
    const auto g = fixture::transcript();
    const LossWeights w;  // case-study coefficients
    const HardSets hard{{"NCBI", "Evaluation Information"}, {"e_end"}};
    std::mt19937_64 rng(77);
    for (int t = 0; t < 10; ++t) {
        const auto nm = random_masks(g.node_count(), rng);
        const auto em = random_masks(g.edge_count(), rng);
        const auto b = total_loss(g, w, hard, nm, em);
        const auto ref = oracle::loss_terms(g, w, hard, to_std(nm), to_std(em));
        EXPECT_NEAR(b.structure, ref.structure, 1e-10);
        EXPECT_NEAR(b.semantic, ref.semantic, 1e-10);
        EXPECT_NEAR(b.entropy, ref.entropy, 1e-10);
        EXPECT_NEAR(b.preserve, ref.preserve, 1e-10);
        EXPECT_NEAR(b.hard, ref.hard, 1e-10);
        EXPECT_NEAR(b.smooth, ref.smooth, 1e-10);
        EXPECT_NEAR(b.total, ref.total(w), 1e-10);
        EXPECT_NEAR(b.weighted_structure + b.weighted_semantic + b.weighted_entropy + b.weighted_preserve +
                        b.weighted_hard + b.weighted_smooth,
                    b.total, 1e-12);
    }
}

TEST(TotalLoss, BreakdownAgreesWithStandaloneTerms) {
    const auto g = fixture::transcript();
    const LossWeights w;
    const HardSets hard{{"Hisat2"}, {"e_download"}};
    std::mt19937_64 rng(31);
    const auto nm = random_masks(g.node_count(), rng);
    const auto em = random_masks(g.edge_count(), rng);
    const auto b = total_loss(g, w, hard, nm, em);
    const auto model = fit_tfidf(element_documents(g));
    EXPECT_NEAR(b.structure, structure_loss(g, w, nm, em), 1e-10);
    EXPECT_NEAR(b.semantic, semantic_loss(g, model, nm, em), 1e-10);
    EXPECT_NEAR(b.entropy, entropy_loss(nm, em), 1e-10);
    EXPECT_NEAR(b.preserve, preserve_loss(g, em), 1e-10);
    EXPECT_NEAR(b.hard, hard_loss(g, hard, nm, em), 1e-10);
    EXPECT_NEAR(b.smooth, smooth_loss(g, w, nm, em), 1e-10);
}

TEST(TotalLoss, PromptWeightScalesTheSemanticTerm) {
    const auto g = fixture::transcript();
    std::mt19937_64 rng(6);
    const auto nm = random_masks(g.node_count(), rng);
    const auto em = random_masks(g.edge_count(), rng);
    const std::string prompt = "assemble transcripts from aligned reads";
    const auto plain = total_loss(g, LossWeights{}, HardSets{}, nm, em);
    const auto weighted = total_loss(g, LossWeights{}, HardSets{}, nm, em, prompt);
    const auto model = fit_tfidf(element_documents(g));
    const double w = prompt_weight(g, model, nm, prompt);
    EXPECT_GT(w, 1.0);
    EXPECT_NEAR(weighted.prompt_weight, w, 1e-15);
    EXPECT_NEAR(weighted.weighted_semantic, 400.0 * w * plain.semantic, 1e-9);
}
