#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "varietyir/corpus_io.hpp"

namespace varietyir {

enum class MetricKind { Mrr, Recall, Ndcg };

struct MetricSpec {
    MetricKind kind = MetricKind::Mrr;
    std::size_t cutoff = 10;
    int threshold = 1;  // mrr / recall only

    /// "mrr@10", "recall@1000", "ndcg@20".
    [[nodiscard]] std::string name() const;
    void validate() const;
    bool operator==(const MetricSpec&) const = default;
};

/// Parses "mrr@10" (optionally "mrr@10/2" to set the relevance threshold).
MetricSpec parse_metric(std::string_view text);

/// Default report set: MRR@10, R@1000, nDCG@20.
std::vector<MetricSpec> default_metrics();

struct MetricResult {
    std::map<std::string, double> per_query;
    double mean = 0.0;
    std::size_t excluded_queries = 0;  // judged queries with nothing relevant
};

/// Per query: 1/rank of the first doc with grade >= threshold within the top
/// k, else 0. Averaged over queries with at least one such doc.
MetricResult mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k, int threshold = 1);

/// Per query: |relevant ∩ top-k| / |relevant|.
MetricResult recall_at_k(const Run& run, const Qrels& qrels, std::size_t k, int threshold = 1);

/// Gain 2^grade − 1, discount 1/log2(rank + 1), normalized by the ideal DCG@k.
MetricResult ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k);

MetricResult compute_metric(const Run& run, const Qrels& qrels, const MetricSpec& spec);

struct EvalReport {
    std::string run_tag;
    std::string qrels_id;
    std::vector<MetricSpec> specs;
    std::map<std::string, std::map<std::string, double>> per_query;  // query -> metric -> value
    std::map<std::string, double> means;
    std::map<std::string, std::size_t> excluded;

    bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate_run(const Run& run, const Qrels& qrels, const std::vector<MetricSpec>& specs,
                        std::string run_tag = {}, std::string qrels_id = {});

/// Exact two-sided binomial sign test; zero deltas are dropped.
double sign_test_p_value(std::size_t positives, std::size_t negatives);
double sign_test_p_value(const std::vector<double>& deltas);

struct RunComparison {
    std::string metric;
    std::map<std::string, double> a;
    std::map<std::string, double> b;
    std::map<std::string, double> deltas;  // b − a
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_delta = 0.0;
    double p_value = 1.0;
};

/// Throws QuerySetMismatch when the two reports score different queries.
RunComparison compare_runs(const EvalReport& a, const EvalReport& b, std::string_view metric);

/// `query_id,metric,value` rows per query, then `__mean__` rows.
std::string format_report_csv(const EvalReport& report);

/// `query_id,metric,a,b,delta` rows, then `__mean__` and `__p_value__` footer rows.
std::string format_comparison_csv(const RunComparison& cmp);

std::string format_fixed(double value, int decimals = 6);

}  // namespace varietyir
