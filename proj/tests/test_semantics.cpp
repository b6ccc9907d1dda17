#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cfkg/error.hpp"
#include "cfkg/semantics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cfkg;

namespace {

MaskVector ones(std::size_t n) { return MaskVector::Ones(static_cast<Eigen::Index>(n)); }
MaskVector zeros(std::size_t n) { return MaskVector::Zero(static_cast<Eigen::Index>(n)); }

std::vector<std::string> texts(const HeteroGraph& g) {
    std::vector<std::string> out;
    for (const auto& d : element_documents(g)) out.push_back(d.text);
    return out;
}

} // namespace

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
    EXPECT_EQ(tokenize("Hisat2 --rels_input--> sam_file: Spliced"),
              (std::vector<std::string>{"hisat2", "rels", "input", "sam", "file", "spliced"}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize(" -- ,;").empty());
}

TEST(Tokenize, KeepsUtf8InsideWords) {
    EXPECT_EQ(tokenize("na\xc3\xafve read"), (std::vector<std::string>{"na\xc3\xafve", "read"}));
}

TEST(Render, NodeAndEdgeTemplates) {
    EXPECT_EQ(render_node({"Hisat2", "Tool", "spliced aligner"}), "Tool Hisat2: spliced aligner");
    EXPECT_EQ(render_edge({"e", "Hisat2", "sam_file", "rels_output", ""}), "Hisat2 --rels_output--> sam_file:");
    EXPECT_EQ(render_node({"Hisat2", "Tool", "spliced aligner"}), render_node({"Hisat2", "Tool", "spliced aligner"}));
}

TEST(ElementDocuments, OnePerElementInIndexOrder) {
    const auto g = fixture::transcript();
    const auto docs = element_documents(g);
    ASSERT_EQ(docs.size(), g.node_count() + g.edge_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        EXPECT_EQ(docs[i].element.kind, ElementKind::Node);
        EXPECT_EQ(docs[i].element.index, i);
    }
    EXPECT_EQ(docs[g.node_count()].element.kind, ElementKind::Edge);
    EXPECT_EQ(docs.back().element.index, g.edge_count() - 1);
}

TEST(Tfidf, SingleDocumentIdfIsOne) {
    const std::string corpus[] = {"alpha beta beta"};
    const auto m = TfidfModel::fit(corpus);
    ASSERT_EQ(m.size(), 2);
    EXPECT_DOUBLE_EQ(m.idf()(0), 1.0);
    EXPECT_DOUBLE_EQ(m.idf()(1), 1.0);
}

TEST(Tfidf, TermInEveryDocumentHasIdfOne) {
    const std::string corpus[] = {"x a", "x b", "x c", "x"};
    const auto m = TfidfModel::fit(corpus);
    EXPECT_DOUBLE_EQ(m.idf()(*m.term_index("x")), 1.0);
}

TEST(Tfidf, TermInOneOfThreeDocuments) {
    const std::string corpus[] = {"rare common", "common", "common"};
    const auto m = TfidfModel::fit(corpus);
    EXPECT_NEAR(m.idf()(*m.term_index("rare")), 1.6931471805599454, 1e-15);
    EXPECT_NEAR(m.idf()(*m.term_index("rare")), std::log(4.0 / 2.0) + 1.0, 1e-15);
}

TEST(Tfidf, EmptyCorpus) {
    try {
        TfidfModel::fit(std::span<const std::string>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
    }
}

TEST(Tfidf, VocabularySortedAndIdfPositive) {
    const auto m = fit_tfidf(element_documents(fixture::transcript()));
    EXPECT_TRUE(std::is_sorted(m.vocabulary().begin(), m.vocabulary().end()));
    EXPECT_EQ(m.idf().size(), m.size());
    EXPECT_GT(m.idf().minCoeff(), 0.0);
    EXPECT_EQ(m.fingerprint().size(), 16u);
    EXPECT_EQ(m.vocabulary_csv().substr(0, 15), "term,index,idf\n");
}

TEST(Embed, EmptyTextIsZero) {
    const std::string corpus[] = {"a b"};
    EXPECT_EQ(TfidfModel::fit(corpus).embed("").nonZeros(), 0);
}

TEST(Embed, AllIdfOneGivesRawCounts) {
    const std::string corpus[] = {"b a b c"};
    const auto m = TfidfModel::fit(corpus);
    const auto v = m.embed_dense("b a b c");
    EXPECT_DOUBLE_EQ(v(*m.term_index("a")), 1.0);
    EXPECT_DOUBLE_EQ(v(*m.term_index("b")), 2.0);
    EXPECT_DOUBLE_EQ(v(*m.term_index("c")), 1.0);
}

TEST(Embed, MatchesReferenceTfidf) {
    const std::vector<std::string> corpus = {"The aligner maps reads; reads map fast.",
                                             "An assembler builds transcripts from mapped reads"};
    const auto m = TfidfModel::fit(corpus);
    const oracle::Tfidf ref(corpus);
    const std::string query = "reads reads assembler maps unknownword";
    const auto v = m.embed_dense(query);
    const auto expected = ref.embed(query);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        const auto& term = m.vocabulary()[static_cast<std::size_t>(k)];
        const double want = expected.count(term) ? expected.at(term) : 0.0;
        EXPECT_NEAR(v(k), want, 1e-12) << term;
        EXPECT_NEAR(m.idf()(k), ref.idf.at(term), 1e-12) << term;
    }
    EXPECT_NEAR(cosine(m.embed(corpus[0]), m.embed(corpus[1])),
                oracle::cosine(ref.embed(corpus[0]), ref.embed(corpus[1])), 1e-12);
}

TEST(Cosine, Conventions) {
    Eigen::VectorXd v(3), w(3), z = Eigen::VectorXd::Zero(3);
    v << 1, 2, 0;
    w << 0, 0, 5;
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
    EXPECT_EQ(cosine(v, w), 0.0);
    EXPECT_EQ(cosine(z, v), 0.0);
    EXPECT_EQ(cosine(TermVector(3), v.sparseView().eval()), 0.0);
}

TEST(SoftVector, AllOnesEqualsEmbeddingOfFullTextualization) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    std::string all;
    for (const auto& t : texts(g)) all += t + "\n";
    const Eigen::VectorXd expected = model.embed_dense(all);
    const Eigen::VectorXd soft = soft_graph_vector(g, model, ones(g.node_count()), ones(g.edge_count()));
    EXPECT_LT((soft - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SoftVector, ZeroAndHalfMasks) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    EXPECT_EQ(soft_graph_vector(g, model, zeros(g.node_count()), zeros(g.edge_count())).nonZeros(), 0);

    auto nm = zeros(g.node_count());
    nm(3) = 0.5;
    const Eigen::VectorXd soft = soft_graph_vector(g, model, nm, zeros(g.edge_count()));
    const Eigen::VectorXd expected = 0.5 * model.embed_dense(render_node(g.node(3)));
    EXPECT_LT((soft - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SoftVector, LengthMismatch) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    try {
        soft_graph_vector(g, model, ones(2), ones(g.edge_count()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
    }
}

TEST(SoftVector, LinearInEachMask) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    const SemanticObjective obj(g, model);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaskVector nm(static_cast<Eigen::Index>(g.node_count())), em(static_cast<Eigen::Index>(g.edge_count()));
    for (auto& x : nm) x = u(rng);
    for (auto& x : em) x = u(rng);
    const double h = 1e-3;
    for (Eigen::Index i = 0; i < nm.size(); ++i) {
        MaskVector up = nm, dn = nm;
        up(i) += h;
        dn(i) -= h;
        const Eigen::VectorXd slope = (obj.soft_vector(up, em) - obj.soft_vector(dn, em)) / (2 * h);
        EXPECT_LT((slope - obj.node_documents().col(i)).cwiseAbs().maxCoeff(), 1e-9);
    }
    for (Eigen::Index i = 0; i < em.size(); ++i) {
        MaskVector up = em, dn = em;
        up(i) += h;
        dn(i) -= h;
        const Eigen::VectorXd slope = (obj.soft_vector(nm, up) - obj.soft_vector(nm, dn)) / (2 * h);
        EXPECT_LT((slope - obj.edge_documents().col(i)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(SemanticLoss, Endpoints) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    EXPECT_NEAR(semantic_loss(g, model, ones(g.node_count()), ones(g.edge_count())), 0.0, 1e-15);
    EXPECT_EQ(semantic_loss(g, model, zeros(g.node_count()), zeros(g.edge_count())), 1.0);
}

TEST(SemanticLoss, ScallopRemovedMatchesReference) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    auto nm = ones(g.node_count());
    const auto scallop = g.node_index("Scallop");
    nm(static_cast<Eigen::Index>(scallop)) = 0.0;

    const auto docs = texts(g);
    const oracle::Tfidf ref(docs);
    oracle::Sparse full, masked;
    for (std::size_t k = 0; k < docs.size(); ++k) {
        oracle::axpy(1.0, ref.embed(docs[k]), full);
        if (k != scallop) oracle::axpy(1.0, ref.embed(docs[k]), masked);
    }
    const double expected = 1.0 - oracle::cosine(full, masked);
    EXPECT_GT(expected, 0.0);
    EXPECT_NEAR(semantic_loss(g, model, nm, ones(g.edge_count())), expected, 1e-12);
}

TEST(SemanticLoss, MonotoneWhenDroppingOneMaskFromFull) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    const SemanticObjective obj(g, model);
    const auto n = g.node_count(), m = g.edge_count();
    for (std::size_t k = 0; k < n + m; ++k) {
        double previous = 0.0;
        for (int step = 10; step >= 0; --step) {
            MaskVector nm = ones(n), em = ones(m);
            (k < n ? nm(static_cast<Eigen::Index>(k)) : em(static_cast<Eigen::Index>(k - n))) = step / 10.0;
            const double loss = obj.loss(nm, em);
            EXPECT_GE(loss, previous - 1e-15) << "element " << k << " at " << step / 10.0;
            previous = loss;
        }
    }
}

TEST(SemanticLoss, StaysInUnitInterval) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    const SemanticObjective obj(g, model);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        MaskVector nm(static_cast<Eigen::Index>(g.node_count())), em(static_cast<Eigen::Index>(g.edge_count()));
        for (auto& x : nm) x = u(rng) < 0.2 ? 0.0 : u(rng);
        for (auto& x : em) x = u(rng) < 0.2 ? 0.0 : u(rng);
        const double loss = obj.loss(nm, em);
        EXPECT_GE(loss, 0.0);
        EXPECT_LE(loss, 1.0);
    }
}

TEST(SemanticLoss, GradientMatchesFiniteDifferences) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    const SemanticObjective obj(g, model);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double h = 1e-5;
    for (int point = 0; point < 20; ++point) {
        MaskVector nm(static_cast<Eigen::Index>(g.node_count())), em(static_cast<Eigen::Index>(g.edge_count()));
        for (auto& x : nm) x = u(rng);
        for (auto& x : em) x = u(rng);
        MaskVector gn = MaskVector::Zero(nm.size()), ge = MaskVector::Zero(em.size());
        obj.accumulate_gradient(nm, em, 1.0, gn, ge);
        auto check = [&](MaskVector& target, Eigen::Index i, double analytic) {
            const double saved = target(i);
            const double fd = oracle::central_difference(
                [&](double x) {
                    target(i) = x;
                    return obj.loss(nm, em);
                },
                saved, h);
            target(i) = saved;
            const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
            EXPECT_LT(std::abs(analytic - fd) / denom, 1e-4) << "point " << point << " index " << i;
        };
        for (Eigen::Index i = 0; i < nm.size(); ++i) check(nm, i, gn(i));
        for (Eigen::Index i = 0; i < em.size(); ++i) check(em, i, ge(i));
    }
}

TEST(PromptWeight, FullMasksGiveOne) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    EXPECT_EQ(prompt_weight(g, model, ones(g.node_count()), "assemble transcripts with Scallop"), 1.0);
}

TEST(PromptWeight, DisjointPromptGivesOne) {
    const auto g = fixture::transcript();
    const auto model = fit_tfidf(element_documents(g));
    EXPECT_EQ(prompt_weight(g, model, zeros(g.node_count()), "zzz qqq"), 1.0);
}

TEST(PromptWeight, DroppedNodeAddsItsSimilarity) {
    // two-term vocabulary: node docs "Tool A: x" style kept tiny by hand
    const SchemaRegistry schema({"Tool", "File"}, {"rels_input", "rels_output", "rels_download_from"}, "File");
    const HeteroGraph g(schema, {{"a", "Tool", ""}, {"b", "File", ""}}, {});
    const auto model = fit_tfidf(element_documents(g));
    // node a: "tool a", node b: "file b"; four terms, each in one of two documents
    const double idf = std::log(3.0 / 2.0) + 1.0;
    // prompt "tool tool" -> (2 idf) on "tool"; node a -> (idf, idf) on ("a", "tool")
    const double s = (2 * idf * idf) / (2 * idf * std::sqrt(2.0) * idf);
    MaskVector nm(2);
    nm << 0.0, 1.0;
    EXPECT_NEAR(prompt_weight(g, model, nm, "tool tool"), 1.0 + s, 1e-15);
    EXPECT_NEAR(s, 1.0 / std::sqrt(2.0), 1e-15);
}
