#include "varietyir/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "varietyir/error.hpp"

namespace varietyir {

std::string MetricSpec::name() const {
    switch (kind) {
        case MetricKind::Mrr: return "mrr@" + std::to_string(cutoff);
        case MetricKind::Recall: return "recall@" + std::to_string(cutoff);
        case MetricKind::Ndcg: return "ndcg@" + std::to_string(cutoff);
    }
    return "unknown";
}

void MetricSpec::validate() const {
    if (cutoff < 1) throw Error(ErrorCode::InvalidArgument, "metric cutoff must be >= 1");
    if (threshold < 1) throw Error(ErrorCode::InvalidArgument, "relevance threshold must be >= 1");
}

MetricSpec parse_metric(std::string_view text) {
    const auto at = text.find('@');
    if (at == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "metric needs '@k': " + std::string(text));
    MetricSpec spec;
    const auto kind = text.substr(0, at);
    if (kind == "mrr") spec.kind = MetricKind::Mrr;
    else if (kind == "recall" || kind == "r") spec.kind = MetricKind::Recall;
    else if (kind == "ndcg") spec.kind = MetricKind::Ndcg;
    else throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(kind) + "'");
    auto rest = text.substr(at + 1);
    const auto slash = rest.find('/');
    auto number = [&](std::string_view s) {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error(ErrorCode::InvalidArgument, "bad metric '" + std::string(text) + "'");
        }
        return v;
    };
    const auto cutoff = number(rest.substr(0, slash));
    if (cutoff < 1) throw Error(ErrorCode::InvalidArgument, "metric cutoff must be >= 1");
    spec.cutoff = static_cast<std::size_t>(cutoff);
    if (slash != std::string_view::npos) spec.threshold = static_cast<int>(number(rest.substr(slash + 1)));
    spec.validate();
    return spec;
}

std::vector<MetricSpec> default_metrics() {
    return {{MetricKind::Mrr, 10, 1}, {MetricKind::Recall, 1000, 1}, {MetricKind::Ndcg, 20, 1}};
}

namespace {

const Ranking& ranking_for(const Run& run, const std::string& qid) {
    static const Ranking kEmpty;
    auto it = run.find(qid);
    return it == run.end() ? kEmpty : it->second;
}

int grade_of(const std::map<std::string, int>& judged, const std::string& doc) {
    auto it = judged.find(doc);
    return it == judged.end() ? 0 : it->second;
}

void finish_mean(MetricResult& r) {
    double sum = 0.0;
    for (const auto& [_, v] : r.per_query) sum += v;
    r.mean = r.per_query.empty() ? 0.0 : sum / static_cast<double>(r.per_query.size());
}

}  // namespace

MetricResult mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k, int threshold) {
    MetricResult r;
    for (const auto& [qid, judged] : qrels) {
        const bool any = std::any_of(judged.begin(), judged.end(), [&](const auto& e) { return e.second >= threshold; });
        if (!any) {
            ++r.excluded_queries;
            continue;
        }
        const auto& ranking = ranking_for(run, qid);
        double value = 0.0;
        for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
            if (grade_of(judged, ranking[i].doc_id) >= threshold) {
                value = 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
        r.per_query[qid] = value;
    }
    finish_mean(r);
    return r;
}

MetricResult recall_at_k(const Run& run, const Qrels& qrels, std::size_t k, int threshold) {
    MetricResult r;
    for (const auto& [qid, judged] : qrels) {
        const auto relevant = std::count_if(judged.begin(), judged.end(), [&](const auto& e) { return e.second >= threshold; });
        if (relevant == 0) {
            ++r.excluded_queries;
            continue;
        }
        const auto& ranking = ranking_for(run, qid);
        std::size_t found = 0;
        for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
            if (grade_of(judged, ranking[i].doc_id) >= threshold) ++found;
        }
        r.per_query[qid] = static_cast<double>(found) / static_cast<double>(relevant);
    }
    finish_mean(r);
    return r;
}

MetricResult ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
    MetricResult r;
    for (const auto& [qid, judged] : qrels) {
        std::vector<int> grades;
        for (const auto& [_, g] : judged) {
            if (g > 0) grades.push_back(g);
        }
        std::sort(grades.begin(), grades.end(), std::greater<>());
        double ideal = 0.0;
        for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
            ideal += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i + 2));
        }
        if (ideal <= 0.0) {
            ++r.excluded_queries;
            continue;
        }
        const auto& ranking = ranking_for(run, qid);
        double dcg = 0.0;
        for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
            const int g = grade_of(judged, ranking[i].doc_id);
            if (g > 0) dcg += (std::exp2(g) - 1.0) / std::log2(static_cast<double>(i + 2));
        }
        r.per_query[qid] = dcg / ideal;
    }
    finish_mean(r);
    return r;
}

MetricResult compute_metric(const Run& run, const Qrels& qrels, const MetricSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case MetricKind::Mrr: return mrr_at_k(run, qrels, spec.cutoff, spec.threshold);
        case MetricKind::Recall: return recall_at_k(run, qrels, spec.cutoff, spec.threshold);
        case MetricKind::Ndcg: return ndcg_at_k(run, qrels, spec.cutoff);
    }
    return {};
}

EvalReport evaluate_run(const Run& run, const Qrels& qrels, const std::vector<MetricSpec>& specs, std::string run_tag,
                        std::string qrels_id) {
    if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
    EvalReport report{std::move(run_tag), std::move(qrels_id), specs, {}, {}, {}};
    for (const auto& spec : specs) {
        const auto result = compute_metric(run, qrels, spec);
        const auto name = spec.name();
        for (const auto& [qid, v] : result.per_query) report.per_query[qid][name] = v;
        report.means[name] = result.mean;
        report.excluded[name] = result.excluded_queries;
    }
    return report;
}

double sign_test_p_value(std::size_t positives, std::size_t negatives) {
    const std::size_t n = positives + negatives;
    if (n == 0) return 1.0;
    const std::size_t k = std::min(positives, negatives);
    // Two-sided: 2 * P(X <= k), X ~ Binomial(n, 1/2); terms summed in log space.
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                                  std::lgamma(static_cast<double>(n - i) + 1.0);
        tail += std::exp(log_choose + log_half_n);
    }
    return std::min(1.0, 2.0 * tail);
}

double sign_test_p_value(const std::vector<double>& deltas) {
    std::size_t pos = 0, neg = 0;
    for (double d : deltas) {
        if (d > 0.0) ++pos;
        else if (d < 0.0) ++neg;
    }
    return sign_test_p_value(pos, neg);
}

RunComparison compare_runs(const EvalReport& a, const EvalReport& b, std::string_view metric) {
    RunComparison cmp;
    cmp.metric = std::string(metric);
    auto collect = [&](const EvalReport& r, std::map<std::string, double>& out) {
        for (const auto& [qid, values] : r.per_query) {
            auto it = values.find(cmp.metric);
            if (it != values.end()) out[qid] = it->second;
        }
    };
    collect(a, cmp.a);
    collect(b, cmp.b);
    if (cmp.a.size() != cmp.b.size() ||
        !std::equal(cmp.a.begin(), cmp.a.end(), cmp.b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
        throw Error(ErrorCode::QuerySetMismatch, "reports cover different queries for " + cmp.metric);
    }
    std::vector<double> deltas;
    double sa = 0.0, sb = 0.0;
    for (const auto& [qid, va] : cmp.a) {
        const double vb = cmp.b.at(qid);
        cmp.deltas[qid] = vb - va;
        deltas.push_back(vb - va);
        sa += va;
        sb += vb;
    }
    if (!cmp.a.empty()) {
        const auto n = static_cast<double>(cmp.a.size());
        cmp.mean_a = sa / n;
        cmp.mean_b = sb / n;
        cmp.mean_delta = cmp.mean_b - cmp.mean_a;
    }
    cmp.p_value = sign_test_p_value(deltas);
    return cmp;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string format_report_csv(const EvalReport& report) {
    std::string out = "query_id,metric,value\n";
    for (const auto& [qid, values] : report.per_query) {
        for (const auto& spec : report.specs) {
            auto it = values.find(spec.name());
            if (it != values.end()) out += qid + "," + spec.name() + "," + format_fixed(it->second) + "\n";
        }
    }
    for (const auto& spec : report.specs) {
        out += "__mean__," + spec.name() + "," + format_fixed(report.means.at(spec.name())) + "\n";
    }
    return out;
}

std::string format_comparison_csv(const RunComparison& cmp) {
    std::string out = "query_id,metric,a,b,delta\n";
    for (const auto& [qid, d] : cmp.deltas) {
        out += qid + "," + cmp.metric + "," + format_fixed(cmp.a.at(qid)) + "," + format_fixed(cmp.b.at(qid)) + "," +
               format_fixed(d) + "\n";
    }
    out += "__mean__," + cmp.metric + "," + format_fixed(cmp.mean_a) + "," + format_fixed(cmp.mean_b) + "," +
           format_fixed(cmp.mean_delta) + "\n";
    out += "__p_value__," + cmp.metric + ",,," + format_fixed(cmp.p_value, 9) + "\n";
    return out;
}

}  // namespace varietyir
