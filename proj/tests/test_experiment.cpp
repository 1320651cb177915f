#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "varietyir/analyzer.hpp"
#include "varietyir/error.hpp"
#include "varietyir/experiment.hpp"

using namespace varietyir;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.corpus.doc_count = 150;
    cfg.corpus.vocab_size = 400;
    cfg.corpus.train_queries = 30;
    cfg.corpus.eval_queries = 15;
    cfg.varieties_per_family = 2;
    cfg.rules_per_family = 8;
    cfg.encoder.dim = 16;
    cfg.encoder.hasher.bucket_count = 4096;
    cfg.train.epochs = 1;
    cfg.seeds = {1, 2};
    cfg.retrieval_depth = 100;
    cfg.rerank_depth = 20;
    cfg.run_file_depth = 20;
    return cfg;
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
    return out;
}

}  // namespace

TEST(Synthetic, PositivesExist) {
    CorpusSpec spec;
    spec.doc_count = 10;
    spec.vocab_size = 50;
    spec.train_queries = 1;
    spec.eval_queries = 1;
    const auto d = synthesize_corpus(spec, 4);
    EXPECT_EQ(d.docs.size(), 10u);
    for (const auto& [q, judged] : d.qrels) {
        for (const auto& [doc, g] : judged) EXPECT_TRUE(d.docs.find(doc).has_value());
    }
    EXPECT_EQ(d.qrels.size(), 2u);
}

TEST(Synthetic, Deterministic) {
    CorpusSpec spec;
    spec.doc_count = 50;
    spec.train_queries = 5;
    spec.eval_queries = 5;
    const auto a = synthesize_corpus(spec, 9), b = synthesize_corpus(spec, 9);
    EXPECT_EQ(a.docs, b.docs);
    EXPECT_EQ(a.train_queries, b.train_queries);
    EXPECT_EQ(a.eval_queries, b.eval_queries);
    EXPECT_EQ(a.qrels, b.qrels);
}

TEST(Synthetic, QueriesOverlapTheirPositive) {
    CorpusSpec spec;
    spec.doc_count = 400;
    spec.train_queries = 100;
    spec.eval_queries = 1;
    const auto d = synthesize_corpus(spec, 1);
    auto overlap = [](const std::string& a, const std::string& b) {
        const auto ta = analyze(a), tb = analyze(b);
        const std::set<std::string> sb(tb.begin(), tb.end());
        std::size_t n = 0;
        for (const auto& t : ta) n += sb.count(t);
        return static_cast<double>(n);
    };
    double pos = 0.0, rnd = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto& q = d.train_queries[i];
        const auto& doc = d.qrels.at(q.query_id).begin()->first;
        pos += overlap(q.text, d.docs[*d.docs.find(doc)].text);
        rnd += overlap(q.text, d.docs[(i * 37 + 11) % d.docs.size()].text);
    }
    EXPECT_GT(pos / 100.0, rnd / 100.0);
}

TEST(Config, ParseAndCanonical) {
    const auto cfg = parse_experiment_config("# comment\nseeds = 3, 4\nrankers = bm25, rerank\nmetrics = mrr@10\n");
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
    EXPECT_EQ(cfg.rankers, (std::vector<std::string>{"bm25", "rerank"}));
    EXPECT_EQ(parse_experiment_config(cfg.canonical()).canonical(), cfg.canonical());
    EXPECT_EQ(cfg.hash(), parse_experiment_config(cfg.canonical()).hash());
    EXPECT_NE(cfg.hash(), ExperimentConfig{}.hash());
}

TEST(Config, UnknownKeyReportsLine) {
    try {
        (void)parse_experiment_config("seeds = 1\nbogus = 2\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
        EXPECT_EQ(e.record(), 2u);
    }
}

TEST(Config, EveryKeyIsAccepted) {
    const auto cfg = ExperimentConfig{};
    const auto canon = cfg.canonical();
    for (const auto& key : experiment_config_keys()) {
        if (key == "out" || key == "family_rule_files" || key == "train_pair") continue;
        EXPECT_NE(canon.find(key + " = "), std::string::npos) << key;
    }
}

TEST(Config, InvalidValues) {
    EXPECT_EQ(code_of([] { (void)parse_experiment_config("rankers = tfidf\n"); }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(code_of([] { (void)parse_experiment_config("families = 1\n"); }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(code_of([] { (void)parse_experiment_config("seeds =\n"); }), ErrorCode::ConfigInvalid);
}

class ExperimentTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        exp_ = new Experiment(tiny_config());
        rq1_ = new ResultTable(exp_->run_rq1());
    }
    static void TearDownTestSuite() {
        delete rq1_;
        delete exp_;
    }
    static Experiment* exp_;
    static ResultTable* rq1_;
};
Experiment* ExperimentTest::exp_ = nullptr;
ResultTable* ExperimentTest::rq1_ = nullptr;

TEST_F(ExperimentTest, Rq1RowCount) {
    const auto& cfg = exp_->config();
    const std::size_t pairs = exp_->pair_ids().size() + 1;
    EXPECT_EQ(rq1_->summary().size(), cfg.rankers.size() * pairs * 2 * cfg.metrics.size());
    EXPECT_EQ(rq1_->rows.size(), rq1_->summary().size() * (cfg.seeds.size() + 1));
}

TEST_F(ExperimentTest, ControlHasNoGap) {
    for (const auto& c : exp_->identity_checks()) EXPECT_TRUE(c.identical) << c.ranker;
    for (const auto& r : rq1_->summary()) {
        if (r.pair != "control" || r.query_language != "low") continue;
        bool found = false;
        for (const auto& h : rq1_->summary()) {
            if (h.pair == "control" && h.query_language == "high" && h.ranker == r.ranker && h.metric == r.metric) {
                EXPECT_EQ(h.value, r.value);
                found = true;
            }
        }
        EXPECT_TRUE(found);
    }
}

TEST_F(ExperimentTest, RerankConservesRecall) {
    ASSERT_FALSE(exp_->conservation_checks().empty());
    for (const auto& c : exp_->conservation_checks()) EXPECT_TRUE(c.holds()) << c.rerank_run << " " << c.metric;
}

TEST_F(ExperimentTest, Preconditions) {
    const auto a = exp_->default_train_pair();
    EXPECT_EQ(code_of([&] { (void)exp_->run_rq3(a, exp_->same_family_pairs(a)); }), ErrorCode::MissingTrainedParams);
    (void)exp_->run_rq2(a);
    EXPECT_EQ(code_of([&] { (void)exp_->run_rq3(a, {a}); }), ErrorCode::PairNotUnseen);
    EXPECT_EQ(code_of([&] { (void)exp_->run_rq4(a, exp_->same_family_pairs(a)); }), ErrorCode::FamilyOverlap);
    const auto rq3 = exp_->run_rq3(a, exp_->same_family_pairs(a));
    for (const auto& p : exp_->same_family_pairs(a)) {
        for (const char* lang : {"high", "low"}) EXPECT_NE(rq3.find("single_vector", p, lang, "mrr@10"), nullptr);
    }
    const auto rq4 = exp_->run_rq4(a, exp_->cross_family_pairs(a));
    for (const auto& r : rq4.rows) EXPECT_TRUE(std::isfinite(r.value));
}

TEST_F(ExperimentTest, ProvenanceIsEmbedded) {
    const auto csv = format_table_csv(*rq1_);
    for (const char* key : {"config_hash", "seeds", "bm25", "train", "rulesets"}) {
        EXPECT_NE(csv.find(std::string("# ") + key), std::string::npos) << key;
    }
}

TEST(ExperimentOps, ZeroLearningRateMakesOursEqualOrig) {
    auto cfg = tiny_config();
    cfg.train.learning_rate = 0.0;
    cfg.seeds = {3};
    Experiment e(cfg);
    const auto t = e.run_rq2(e.default_train_pair());
    for (const auto& r : t.rows) {
        if (r.condition != "ours") continue;
        for (const auto& o : t.rows) {
            if (o.condition == "orig" && o.ranker == r.ranker && o.pair == r.pair && o.query_language == r.query_language &&
                o.metric == r.metric && o.seed == r.seed) {
                EXPECT_EQ(o.value, r.value);
            }
        }
    }
}

TEST(ExperimentOps, NeuralRankerRequiredForTransfer) {
    auto cfg = tiny_config();
    cfg.rankers = {"bm25"};
    Experiment e(cfg);
    EXPECT_EQ(code_of([&] { (void)e.run_rq2(e.default_train_pair()); }), ErrorCode::InvalidArgument);
}

TEST(ExperimentOps, PlotData) {
    ResultTable empty;
    empty.name = "empty";
    EXPECT_EQ(format_plot_csv(empty), "ranker,pair,query_language,condition,metric,value,seed\n");
    const auto dir = fs::temp_directory_path() / "varietyir_plot";
    fs::remove_all(dir);
    emit_plot_data({empty}, dir);
    const auto first = read_file(dir / "plot_empty.csv");
    emit_plot_data({empty}, dir);
    EXPECT_EQ(read_file(dir / "plot_empty.csv"), first);
}

TEST(ExperimentOps, OutputTreeIsReproducible) {
    auto cfg = tiny_config();
    cfg.seeds = {5};
    cfg.rankers = {"bm25", "rerank"};
    const auto root = fs::temp_directory_path() / "varietyir_repro";
    fs::remove_all(root);
    for (const char* sub : {"a", "b"}) {
        Experiment e(cfg);
        const auto a = e.default_train_pair();
        std::vector<ResultTable> tables{e.run_rq1(), e.run_rq2(a), e.run_rq3(a, e.same_family_pairs(a)),
                                        e.run_rq4(a, e.cross_family_pairs(a))};
        e.write_outputs(tables, root / sub);
    }
    const auto a = tree(root / "a"), b = tree(root / "b");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_TRUE(a.count("REPORT.md"));
}
