#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "varietyir/error.hpp"
#include "varietyir/evaluator.hpp"

using namespace varietyir;

namespace {

Ranking ranking_of(std::initializer_list<const char*> ids) {
    Ranking r;
    double s = 100.0;
    for (const char* id : ids) r.push_back({id, s--});
    return r;
}

}  // namespace

TEST(Mrr, Cases) {
    const Qrels q{{"q", {{"rel", 1}}}};
    EXPECT_EQ(mrr_at_k({{"q", ranking_of({"rel", "a"})}}, q, 10).mean, 1.0);
    Ranking late;
    for (int i = 0; i < 10; ++i) late.push_back({"x" + std::to_string(i), 50.0 - i});
    late.push_back({"rel", 1.0});
    EXPECT_EQ(mrr_at_k({{"q", late}}, q, 10).mean, 0.0);
    EXPECT_NEAR(mrr_at_k({{"q", ranking_of({"a", "b", "rel"})}}, q, 10).mean, 1.0 / 3.0, 1e-12);
}

TEST(Recall, Cases) {
    EXPECT_EQ(recall_at_k({{"q", ranking_of({"r1", "x", "r2"})}}, {{"q", {{"r1", 1}, {"r2", 1}}}}, 10).mean, 1.0);
    EXPECT_EQ(recall_at_k({{"q", {}}}, {{"q", {{"r1", 1}}}}, 10).mean, 0.0);
    EXPECT_NEAR(recall_at_k({{"q", ranking_of({"r1"})}}, {{"q", {{"r1", 1}, {"r2", 1}, {"r3", 1}}}}, 10).mean, 1.0 / 3.0,
                1e-12);
}

TEST(Ndcg, Cases) {
    const Qrels q{{"q", {{"a", 3}, {"b", 1}}}};
    EXPECT_NEAR(ndcg_at_k({{"q", ranking_of({"a", "b"})}}, q, 20).mean, 1.0, 1e-12);
    const Qrels two{{"q", {{"r1", 1}, {"r2", 1}}}};
    const double v = ndcg_at_k({{"q", ranking_of({"r1", "x", "r2"})}}, two, 3).mean;
    EXPECT_NEAR(v, 1.5 / (1.0 + 1.0 / std::log2(3.0)), 1e-12);
    EXPECT_NEAR(v, 0.919721, 1e-6);
    EXPECT_EQ(ndcg_at_k({{"q", {}}}, q, 20).mean, 0.0);
}

TEST(Metrics, QueriesWithoutRelevantAreExcluded) {
    const Qrels q{{"q1", {{"a", 1}}}, {"q2", {{"b", 0}}}};
    const auto r = mrr_at_k({{"q1", ranking_of({"a"})}}, q, 10);
    EXPECT_EQ(r.per_query.size(), 1u);
    EXPECT_EQ(r.excluded_queries, 1u);
    EXPECT_EQ(r.mean, 1.0);
}

TEST(Metrics, ParseNames) {
    EXPECT_EQ(parse_metric("mrr@10").name(), "mrr@10");
    EXPECT_EQ(parse_metric("recall@1000").cutoff, 1000u);
    EXPECT_EQ(parse_metric("ndcg@20").kind, MetricKind::Ndcg);
    EXPECT_THROW((void)parse_metric("map@10"), Error);
    EXPECT_THROW((void)parse_metric("mrr@0"), Error);
}

TEST(Report, CompositionAndMeans) {
    const Qrels q{{"q1", {{"a", 1}}}, {"q2", {{"b", 2}}}};
    const varietyir::Run run{{"q1", ranking_of({"x", "a"})}, {"q2", ranking_of({"b"})}};
    const auto spec = parse_metric("mrr@10");
    const auto report = evaluate_run(run, q, {spec});
    EXPECT_EQ(report.means.at("mrr@10"), mrr_at_k(run, q, 10).mean);
    EXPECT_EQ(report, evaluate_run(varietyir::Run(run), q, {spec}));
    double sum = 0.0;
    for (const auto& [_, m] : report.per_query) sum += m.at("mrr@10");
    EXPECT_DOUBLE_EQ(report.means.at("mrr@10"), sum / 2.0);
}

TEST(SignTest, Cases) {
    const Qrels q{{"q", {{"a", 1}}}};
    const auto a = evaluate_run({{"q", ranking_of({"a"})}}, q, {parse_metric("mrr@10")});
    const auto same = compare_runs(a, a, "mrr@10");
    EXPECT_EQ(same.p_value, 1.0);
    EXPECT_EQ(same.mean_delta, 0.0);
    EXPECT_NEAR(sign_test_p_value(10, 0), 2.0 * std::pow(0.5, 10), 1e-15);
    EXPECT_NEAR(sign_test_p_value(10, 0), 0.001953, 1e-6);
    for (std::size_t p = 0; p < 30; ++p) {
        for (std::size_t n = 0; n < 30; ++n) EXPECT_NEAR(sign_test_p_value(p, n), oracle::sign_test(p, n), 1e-12);
    }
}

TEST(SignTest, QuerySetMismatch) {
    const auto a = evaluate_run({}, {{"q1", {{"a", 1}}}}, {parse_metric("mrr@10")});
    const auto b = evaluate_run({}, {{"q2", {{"a", 1}}}}, {parse_metric("mrr@10")});
    try {
        (void)compare_runs(a, b, "mrr@10");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::QuerySetMismatch);
    }
}

TEST(Metrics, PropertyMatchOracle) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Qrels qrels;
        varietyir::Run run;
        for (int q = 0; q < 3; ++q) {
            const auto qid = "q" + std::to_string(q);
            auto& judged = qrels[qid];
            for (int d = static_cast<int>(rng() % 6); d > 0; --d) judged["d" + std::to_string(rng() % 30)] = static_cast<int>(rng() % 4);
            auto& r = run[qid];
            for (int d = 0; d < 30; ++d) {
                if (rng() % 2) r.push_back({"d" + std::to_string(d), static_cast<double>(rng() % 1000) / 7.0});
            }
            sort_ranking(r);
        }
        for (std::size_t k : {1u, 5u, 10u, 20u}) {
            const auto m = mrr_at_k(run, qrels, k), rc = recall_at_k(run, qrels, k), n = ndcg_at_k(run, qrels, k);
            for (const auto& [qid, judged] : qrels) {
                const double want_r = oracle::recall(run[qid], judged, k), want_n = oracle::ndcg(run[qid], judged, k);
                if (std::isnan(want_r)) {
                    EXPECT_EQ(rc.per_query.count(qid), 0u);
                    EXPECT_EQ(m.per_query.count(qid), 0u);
                } else {
                    EXPECT_NEAR(rc.per_query.at(qid), want_r, 1e-9);
                    EXPECT_NEAR(m.per_query.at(qid), oracle::mrr(run[qid], judged, k), 1e-9);
                }
                if (std::isnan(want_n)) EXPECT_EQ(n.per_query.count(qid), 0u);
                else EXPECT_NEAR(n.per_query.at(qid), want_n, 1e-9);
            }
        }
    }
}

TEST(Csv, ReportAndComparison) {
    const Qrels q{{"q1", {{"a", 1}}}};
    const auto a = evaluate_run({{"q1", ranking_of({"a"})}}, q, {parse_metric("mrr@10")});
    const auto csv = format_report_csv(a);
    EXPECT_EQ(csv.rfind("query_id,metric,value\n", 0), 0u);
    EXPECT_NE(csv.find("q1,mrr@10,1.000000"), std::string::npos);
    const auto cmp = format_comparison_csv(compare_runs(a, a, "mrr@10"));
    EXPECT_NE(cmp.find("__p_value__"), std::string::npos);
}
