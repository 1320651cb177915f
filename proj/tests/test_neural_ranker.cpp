#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "varietyir/error.hpp"
#include "varietyir/neural_ranker.hpp"

using namespace varietyir;

namespace {

EncoderParams small_params(std::uint64_t seed = 3) {
    EncoderConfig cfg;
    cfg.dim = 8;
    cfg.hasher.bucket_count = 256;
    return init_encoder(cfg, seed);
}

EncodedText manual(std::size_t dim, std::vector<std::vector<double>> tokens) {
    EncodedText e;
    e.dim = dim;
    e.pooled.assign(dim, 0.0);
    for (auto& t : tokens) {
        double n = 0.0;
        for (double x : t) n += x * x;
        n = std::sqrt(n);
        for (std::size_t i = 0; i < dim; ++i) {
            e.token_vectors.push_back(t[i] / n);
            e.pooled[i] += t[i];
        }
    }
    double n = 0.0;
    for (double x : e.pooled) n += x * x;
    for (double& x : e.pooled) x /= std::sqrt(n);
    return e;
}

}  // namespace

TEST(Subwords, CatHasSixNgrams) {
    SubwordHasherConfig cfg;
    const auto grams = subword_ngrams("cat", cfg);
    EXPECT_EQ(grams, (std::vector<std::string>{"<ca", "cat", "at>", "<cat", "cat>", "<cat>"}));
    EXPECT_EQ(hash_subwords("cat", cfg).size(), 6u);
}

TEST(Subwords, SingleLetterHasOneNgram) {
    SubwordHasherConfig cfg;
    EXPECT_EQ(subword_ngrams("a", cfg), (std::vector<std::string>{"<a>"}));
    EXPECT_EQ(hash_subwords("a", cfg).size(), 1u);
}

TEST(Subwords, DeterministicAndCodepointBased) {
    SubwordHasherConfig cfg;
    EXPECT_EQ(hash_subwords("çat", cfg), hash_subwords("çat", cfg));
    EXPECT_EQ(subword_ngrams("çà", cfg), (std::vector<std::string>{"<çà", "çà>", "<çà>"}));
    EXPECT_THROW((void)hash_subwords("", cfg), Error);
}

TEST(Subwords, Fnv1aKnownVector) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Encode, Basics) {
    const auto p = small_params();
    EXPECT_EQ(encode("river stone", p), encode("river stone", p));
    EXPECT_THROW((void)encode("", p), Error);
    const auto one = encode("river", p);
    ASSERT_EQ(one.token_count(), 1u);
    for (std::size_t i = 0; i < p.dim; ++i) EXPECT_NEAR(one.pooled[i], one.token(0)[i], 1e-12);
}

TEST(Scores, SingleVector) {
    const auto p = small_params();
    const auto q = encode("river stone", p);
    EXPECT_NEAR(score_single(q, q), 1.0, 1e-12);
    const auto a = manual(2, {{1, 0}});
    const auto b = manual(2, {{0, 1}});
    EXPECT_EQ(score_single(a, b), 0.0);
    const auto d = encode("stone bridge", p);
    double want = 0.0;
    for (std::size_t i = 0; i < p.dim; ++i) want += q.pooled[i] * d.pooled[i];
    EXPECT_NEAR(score_single(q, d), want, 1e-9);
}

TEST(Scores, MaxSim) {
    const auto p = small_params();
    const auto q = encode("one two three", p);
    EXPECT_NEAR(score_maxsim(q, q), 3.0, 1e-12);
    const auto a = manual(2, {{1, 0}});
    const auto b = manual(2, {{1, 1}});
    EXPECT_NEAR(score_maxsim(a, b), std::sqrt(0.5), 1e-12);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> qt(3, std::vector<double>(5)), dt(4, std::vector<double>(5));
    for (auto& t : qt) for (auto& x : t) x = g(rng);
    for (auto& t : dt) for (auto& x : t) x = g(rng);
    const auto qe = manual(5, qt), de = manual(5, dt);
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double best = -1e9;
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < 5; ++c) s += qe.token(i)[c] * de.token(j)[c];
            best = std::max(best, s);
        }
        want += best;
    }
    EXPECT_NEAR(score_maxsim(qe, de), want, 1e-9);
}

TEST(Scores, DimensionMismatch) {
    EXPECT_THROW((void)score_single(manual(2, {{1, 0}}), manual(3, {{1, 0, 0}})), Error);
}

namespace {

DocumentCollection toy_docs() {
    return DocumentCollection({{"d1", "river stone bridge", ""},
                               {"d2", "mountain lake", ""},
                               {"d3", "stone wall", ""},
                               {"d4", "", ""},
                               {"d5", "bridge over river", ""}});
}

}  // namespace

TEST(DenseSearch, FullRankingAndSelfMatch) {
    const auto p = small_params();
    const auto docs = toy_docs();
    const auto store = DenseStore::build(docs, p);
    const auto r = search_dense("mountain lake", p, store, ScoringMode::SingleVector, 100);
    EXPECT_EQ(r.ranking.size(), docs.size());
    EXPECT_EQ(r.ranking[0].doc_id, "d2");
    EXPECT_NEAR(r.ranking[0].score, 1.0, 1e-12);
    EXPECT_EQ(r.ranking, search_dense("mountain lake", p, store, ScoringMode::SingleVector, 100).ranking);
}

TEST(DenseSearch, StoreMatchesDirectScoring) {
    const auto p = small_params();
    const auto docs = toy_docs();
    const auto store = DenseStore::build(docs, p);
    const auto q = encode("stone river", p);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (docs[d].text.empty()) continue;
        const auto e = encode(docs[d].text, p);
        EXPECT_EQ(store.score(q, d, ScoringMode::SingleVector), score_single(q, e));
        EXPECT_EQ(store.score(q, d, ScoringMode::MultiVectorMaxSim), score_maxsim(q, e));
    }
}

TEST(DenseSearch, StaleStoreRejected) {
    const auto p = small_params(3);
    const auto store = DenseStore::build(toy_docs(), p);
    try {
        (void)search_dense("lake", small_params(4), store, ScoringMode::SingleVector, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StaleEncodings);
    }
}

TEST(Rerank, IdentityAndPermutation) {
    const auto p = small_params();
    const auto docs = toy_docs();
    const auto store = DenseStore::build(docs, p);
    const auto base = search_dense("river bridge", p, store, ScoringMode::SingleVector, 5).ranking;
    EXPECT_EQ(rerank(base, "river bridge", p, store, 0), base);

    const auto full = rerank(base, "river bridge", p, store, base.size());
    const auto maxsim = search_dense("river bridge", p, store, ScoringMode::MultiVectorMaxSim, 5).ranking;
    EXPECT_EQ(full, maxsim);

    for (std::size_t k = 0; k <= base.size(); ++k) {
        auto a = base, b = rerank(base, "river bridge", p, store, k);
        auto by_id = [](const ScoredDoc& x, const ScoredDoc& y) { return x.doc_id < y.doc_id; };
        std::sort(a.begin(), a.end(), by_id);
        std::sort(b.begin(), b.end(), by_id);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].doc_id, b[i].doc_id);
    }
    EXPECT_THROW((void)rerank(base, "river", p, store, base.size() + 1), Error);
    EXPECT_THROW((void)rerank({{"nope", 1.0}}, "river", p, store, 1), Error);
}

TEST(Checkpoint, RoundTripAndFingerprint) {
    auto p = small_params();
    const auto path = std::filesystem::temp_directory_path() / "varietyir_test_params.bin";
    save_params(p, path);
    EXPECT_EQ(load_params(path), p);
    const auto before = p.version;
    p.embedding[0] += 1.0;
    refresh_version(p);
    EXPECT_NE(p.version, before);
}
