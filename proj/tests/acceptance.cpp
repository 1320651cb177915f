// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. argv[1] is a scratch directory for outputs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "varietyir/error.hpp"
#include "varietyir/evaluator.hpp"
#include "varietyir/experiment.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/synthetic.hpp"
#include "varietyir/trainer.hpp"
#include "varietyir/transducer.hpp"

using namespace varietyir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, Outcome o, double secs, double limit) {
    if (secs >= limit) o.require(false, "runtime " + format_fixed(secs, 1) + "s over " + format_fixed(limit, 0) + "s");
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
}

// 1 -------------------------------------------------------------------------
Outcome metric_oracle() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t docs = 1 + rng() % 50;
        Qrels qrels;
        auto& judged = qrels["q"];
        const std::size_t rel = rng() % 6;
        for (std::size_t i = 0; i < rel; ++i) judged["d" + std::to_string(rng() % docs)] = 1 + static_cast<int>(rng() % 3);
        for (std::size_t i = rng() % 4; i > 0; --i) judged.emplace("d" + std::to_string(rng() % docs), 0);
        Run run;
        auto& r = run["q"];
        for (std::size_t d = 0; d < docs; ++d) {
            if (rng() % 3 != 0) r.push_back({"d" + std::to_string(d), static_cast<double>(rng() % 100)});
        }
        sort_ranking(r);
        const std::size_t k = 1 + rng() % 60;
        const double want[3] = {oracle::mrr(r, judged, 10), oracle::recall(r, judged, k), oracle::ndcg(r, judged, 20)};
        const MetricResult got[3] = {mrr_at_k(run, qrels, 10), recall_at_k(run, qrels, k), ndcg_at_k(run, qrels, 20)};
        for (int m = 0; m < 3; ++m) {
            if (std::isnan(want[m])) {
                o.require(got[m].per_query.empty() && got[m].excluded_queries == 1, "excluded query mishandled");
                continue;
            }
            if (m == 0 && std::isnan(want[1])) continue;
            o.require(got[m].per_query.size() == 1, "query missing from result");
            if (got[m].per_query.size() == 1) worst = std::max(worst, std::fabs(got[m].per_query.at("q") - want[m]));
        }
    }
    o.require(worst <= 1e-9, "max deviation " + std::to_string(worst));
    return o;
}

// 2 -------------------------------------------------------------------------
Outcome bm25_equivalence() {
    Outcome o;
    {
        const DocumentCollection c({{"d1", "apple", ""}, {"d2", "banana", ""}});
        const auto r = bm25_search("apple", build_index(c), {}, 10);
        o.require(r.size() == 1 && r[0].doc_id == "d1" && std::fabs(r[0].score - std::log(2.0)) < 1e-12 &&
                      format_fixed(r[0].score, 6) == "0.693147",
                  "ln(2) single-term case");
    }
    std::mt19937_64 rng(77);
    const std::string alphabet = "abcdeéfg";
    for (int corpus = 0; corpus < 50; ++corpus) {
        const std::size_t n = 1 + rng() % 200;
        std::vector<std::pair<std::string, std::string>> raw;
        std::vector<Document> docs;
        for (std::size_t d = 0; d < n; ++d) {
            std::string text;
            for (std::size_t w = rng() % 12; w > 0; --w) text += oracle::random_word(rng, "abcdefg", 1, 3) + " ";
            raw.emplace_back("d" + std::to_string(d), text);
            docs.push_back({raw.back().first, text, ""});
        }
        const auto idx = build_index(DocumentCollection(docs));
        for (int q = 0; q < 20; ++q) {
            std::string query;
            for (std::size_t w = 1 + rng() % 4; w > 0; --w) query += oracle::random_word(rng, "abcdefg", 1, 3) + " ";
            const auto got = bm25_search(query, idx, {}, n);
            const auto want = oracle::bm25(query, raw, 0.9, 0.4);
            if (got.size() != want.size()) {
                o.require(false, "length mismatch");
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                o.require(got[i].doc_id == want[i].first, "order mismatch");
                o.require(std::fabs(got[i].score - want[i].second) <= 1e-9, "score mismatch");
            }
        }
    }
    return o;
}

// 3 -------------------------------------------------------------------------
Outcome gradient_check_suite() {
    Outcome o;
    const std::vector<double> neg(15, 0.42);
    o.require(std::fabs(infonce_from_scores(0.42, neg, 0.05) - std::log(16.0)) <= 1e-12, "ln(N+1) at uniform scores");

    CorpusSpec spec;
    spec.doc_count = 60;
    spec.vocab_size = 200;
    spec.train_queries = 8;
    spec.eval_queries = 1;
    const auto data = synthesize_corpus(spec, 5);
    TrainConfig tc;
    tc.negatives_per_query = 3;
    const auto ts = build_triplets(data.train_queries, data.qrels, data.docs, tc, build_index(data.docs));
    const auto batch = triplet_texts(std::span(ts.triplets).first(4), data.docs);
    EncoderConfig ec;
    ec.dim = 16;
    ec.hasher.bucket_count = 2048;
    const auto params = init_encoder(ec, 11);
    // Strict relative error on a non-saturated instance (tau 0.5).
    for (auto mode : {ScoringMode::SingleVector, ScoringMode::MultiVectorMaxSim}) {
        const auto r = gradient_check(params, batch, 1e-4, 120, 3, 0.5, mode);
        o.require(r.coordinates.size() >= 100, "fewer than 100 coordinates");
        o.require(r.max_relative_error < 1e-5, std::string(to_string(mode)) + " max relative error " +
                                                   std::to_string(r.max_relative_error));
        const auto pooled = batch_infonce_loss(params, batch, 0.5, mode);
        o.require(std::isfinite(pooled.loss) && pooled.loss >= 0.0, "loss not finite");
    }
    // At the training temperature central differences carry ~1e-11 of roundoff
    // noise, so coordinates with |g| < 1e-4 are held to an absolute bound and
    // the rest to the relative one.
    double rel = 0.0, abs_small = 0.0, strict = 0.0;
    std::size_t resolvable = 0;
    for (auto mode : {ScoringMode::SingleVector, ScoringMode::MultiVectorMaxSim}) {
        const auto r = gradient_check(params, batch, 1e-4, 120, 3, tc.temperature, mode);
        for (const auto& c : r.coordinates) {
            const double m = std::max(std::fabs(c.analytic), std::fabs(c.numeric));
            const double d = std::fabs(c.analytic - c.numeric);
            if (m >= 1e-4) {
                ++resolvable;
                rel = std::max(rel, d / m);
            } else {
                abs_small = std::max(abs_small, d);
            }
        }
        strict = std::max(strict, r.max_relative_error);
    }
    o.require(rel < 1e-5, "tau 0.05 relative error " + std::to_string(rel));
    o.require(abs_small < 1e-9, "tau 0.05 absolute error on tiny gradients " + std::to_string(abs_small));
    std::printf("info [3] tau=%.2f: %zu resolvable coords rel %.3e, tiny coords abs %.3e, unfloored rel %.3e\n",
                tc.temperature, resolvable, rel, abs_small, strict);
    return o;
}

// 4 -------------------------------------------------------------------------
Outcome transducer_suite() {
    Outcome o;
    std::mt19937_64 rng(4);
    const VarietyRuleSet empty{"e", "f", {}, {}};
    const std::string alphabet = "abcxyz çàñ你 .,'-";
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        std::uniform_int_distribution<int> len(0, 30);
        // alphabet mixes multi-byte characters; sample whole codepoints
        static const std::vector<std::string> cps = {"a", "b", "c", "x", "y", "z", " ", "ç", "à", "ñ", "你", ".", ",", "'", "-"};
        for (int n = len(rng); n > 0; --n) s += cps[rng() % cps.size()];
        if (transduce(s, empty) != s) {
            o.require(false, "empty ruleset changed '" + s + "'");
            break;
        }
    }
    const VarietyRuleSet abb{"t", "f", {{"ab", "x"}, {"b", "y"}}, {}};
    o.require(transduce("abb", abb) == "xy", "abb -> xy");
    const VarietyRuleSet lex{"t", "f", {{"s", "ç"}}, {{"chat", "gat"}}};
    o.require(transduce("chat sec", lex) == "gat çec", "chat sec -> gat çec");
    o.require(transduce("chat sec", lex) == transduce("chat sec", lex), "determinism");

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto specs = make_family_specs(2 + seed % 3, 6 + seed % 10, 0.5, 3, seed);
        try {
            validate_families(specs);
        } catch (const Error&) {
            o.require(false, "generated families overlap");
        }
        std::vector<std::vector<VarietyRuleSet>> fams;
        for (const auto& s : specs) {
            fams.push_back(generate_family(s));
            o.require(generate_family(s) == fams.back(), "family generation not deterministic");
        }
        for (std::size_t a = 0; a < fams.size(); ++a) {
            for (std::size_t i = 0; i < fams[a].size(); ++i) {
                for (std::size_t j = i + 1; j < fams[a].size(); ++j) {
                    o.require(shared_rule_count(fams[a][i], fams[a][j]) > 0, "siblings share no rule");
                }
                for (std::size_t b = a + 1; b < fams.size(); ++b) {
                    for (const auto& other : fams[b]) {
                        o.require(shared_rule_count(fams[a][i], other) == 0, "families share a rule");
                    }
                }
            }
        }
        auto dup = specs;
        dup[1].shared_rule_pool = dup[0].shared_rule_pool;
        bool rejected = false;
        try {
            validate_families(dup);
        } catch (const Error& e) {
            rejected = e.code() == ErrorCode::FamilyOverlap;
        }
        o.require(rejected, "overlapping pools accepted");
    }
    return o;
}

// 5-10 ----------------------------------------------------------------------
double mean_of(const ResultTable& t, const std::string& ranker, const std::string& pair, const std::string& lang,
               const std::string& cond) {
    for (const auto& r : t.summary()) {
        if (r.ranker == ranker && r.pair == pair && r.query_language == lang && r.condition == cond && r.metric == "mrr@10") {
            return r.value;
        }
    }
    return std::nan("");
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    }
    return out;
}

struct SuiteRun {
    std::vector<ResultTable> tables;
    double secs[4] = {0, 0, 0, 0};
    std::vector<ConservationCheck> conservation;
    std::vector<IdentityCheck> identity;
};

SuiteRun run_suite(const ExperimentConfig& cfg, const fs::path& out) {
    SuiteRun s;
    Experiment e(cfg);
    const auto a = e.default_train_pair();
    auto t0 = Clock::now();
    s.tables.push_back(e.run_rq1());
    s.secs[0] = seconds_since(t0);
    t0 = Clock::now();
    s.tables.push_back(e.run_rq2(a));
    s.secs[1] = seconds_since(t0);
    t0 = Clock::now();
    s.tables.push_back(e.run_rq3(a, e.same_family_pairs(a)));
    s.secs[2] = seconds_since(t0);
    t0 = Clock::now();
    s.tables.push_back(e.run_rq4(a, e.cross_family_pairs(a)));
    s.secs[3] = seconds_since(t0);
    e.write_outputs(s.tables, out);
    s.conservation = e.conservation_checks();
    s.identity = e.identity_checks();
    return s;
}

bool neural(const std::string& r) { return r != "bm25"; }

}  // namespace

int main(int argc, char** argv) {
    const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "varietyir_acceptance";
    fs::remove_all(scratch);

    auto timed = [](int id, const std::string& name, double limit, const std::function<Outcome()>& f) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        report(id, name, o, seconds_since(t0), limit);
    };
    timed(1, "metric oracle suite: 1000 random instances, MRR@10 / Recall@k / nDCG@20 within 1e-9", 10, metric_oracle);
    timed(2, "BM25 indexed search equals full-scan oracle on 50 corpora x 20 queries, ln(2) case", 30, bm25_equivalence);
    timed(3, "InfoNCE gradient check in both scoring modes and ln(N+1) at uniform scores", 60, gradient_check_suite);
    timed(4, "transducer identity, determinism, hand traces and family invariants", 5, transducer_suite);

    const ExperimentConfig cfg;  // defaults: 2000 docs, 100 eval queries, 600 train queries, 5 seeds
    SuiteRun first, second;
    std::string suite_error;
    const auto t0 = Clock::now();
    try {
        first = run_suite(cfg, scratch / "run1");
    } catch (const std::exception& e) {
        suite_error = e.what();
    }
    const double first_secs = seconds_since(t0);
    if (!suite_error.empty()) {
        for (int id = 5; id <= 10; ++id) report(id, "experiment suite", Outcome{false, "exception: " + suite_error}, first_secs, 1e9);
        return failures;
    }
    const auto& rq1 = first.tables[0];
    const auto& rq2 = first.tables[1];
    const auto& rq3 = first.tables[2];
    const auto& rq4 = first.tables[3];
    Experiment probe(cfg);
    const auto pair_a = probe.default_train_pair();

    {
        Outcome o;
        for (const std::string ranker : {"bm25", "single_vector", "multi_vector"}) {
            for (const auto& pair : probe.pair_ids()) {
                const double hi = mean_of(rq1, ranker, pair, "high", "orig"), lo = mean_of(rq1, ranker, pair, "low", "orig");
                const auto* sig = rq1.find(ranker, pair, "low", "mrr@10");
                o.require(lo < hi, ranker + "/" + pair + " low " + format_fixed(lo, 4) + " not below high " + format_fixed(hi, 4));
                o.require(sig != nullptr && sig->p_value < 0.05,
                          ranker + "/" + pair + " p=" + (sig ? format_fixed(sig->p_value, 4) : std::string("n/a")));
            }
        }
        report(5, "RQ1 transduced queries score lower for bm25, single_vector, multi_vector on every pair (p < 0.05)", o,
               first.secs[0], 180);
    }
    {
        Outcome o;
        for (const auto& ranker : cfg.rankers) {
            if (!neural(ranker)) continue;
            const auto* low = rq2.find(ranker, pair_a, "low", "mrr@10");
            o.require(low != nullptr && low->mean_delta > 0.0 && low->p_value < 0.05,
                      ranker + " low-variety delta " + (low ? format_fixed(low->mean_delta, 4) + " p=" + format_fixed(low->p_value, 4) : "n/a"));
            const double hi_orig = mean_of(rq2, ranker, pair_a, "high", "orig"), hi_ours = mean_of(rq2, ranker, pair_a, "high", "ours");
            o.require(hi_ours >= 0.95 * hi_orig, ranker + " high-variety degraded " + format_fixed(hi_orig, 4) + " -> " + format_fixed(hi_ours, 4));
        }
        report(6, "RQ2 fine-tuning on " + pair_a + " raises low-variety MRR@10 (p < 0.05), high variety within 5%", o,
               first.secs[1], 300);
    }
    {
        Outcome o;
        const auto unseen = probe.same_family_pairs(pair_a);
        o.require(!unseen.empty(), "no unseen same-family pair");
        for (const auto& pair : unseen) {
            for (const auto& ranker : cfg.rankers) {
                if (!neural(ranker)) continue;
                const auto* low = rq3.find(ranker, pair, "low", "mrr@10");
                o.require(low != nullptr && low->seeds_improved() >= 4,
                          ranker + "/" + pair + " improved on " + (low ? std::to_string(low->seeds_improved()) : std::string("0")) + "/5 seeds");
            }
        }
        report(7, "RQ3 zero-shot: low-variety MRR@10 improves on >= 4 of 5 seeds for every unseen same-family pair", o,
               first.secs[2], 180);
    }
    {
        Outcome o;
        const auto cross = probe.cross_family_pairs(pair_a);
        std::size_t neural_rankers = 0;
        for (const auto& r : cfg.rankers) neural_rankers += neural(r) ? 1 : 0;
        const std::size_t expected = neural_rankers * (cross.size() + 1) * 2 * 2 * cfg.metrics.size();
        o.require(rq4.summary().size() == expected, "rq4 table has " + std::to_string(rq4.summary().size()) + " cells, expected " + std::to_string(expected));
        for (const auto& r : rq4.rows) o.require(std::isfinite(r.value), "non-finite metric");
        for (const auto& c : first.identity) o.require(c.identical, "identity control diverged: " + c.table + "/" + c.ranker);
        o.require(!first.identity.empty(), "no identity control recorded");
        const auto csv = format_table_csv(rq4);
        for (const char* key : {"# config_hash: ", "# seeds: ", "# bm25: ", "# train: ", "# rulesets: "}) {
            o.require(csv.find(key) != std::string::npos, std::string("provenance lacks ") + key);
        }
        report(8, "RQ4 cross-family table complete and finite; identity control and provenance hold", o, first.secs[3], 180);
    }
    {
        const auto t1 = Clock::now();
        Outcome o;
        try {
            second = run_suite(cfg, scratch / "run2");
            const auto a = tree(scratch / "run1"), b = tree(scratch / "run2");
            o.require(!a.empty() && a.count("REPORT.md") == 1, "nothing written");
            std::size_t runs = 0, csvs = 0;
            for (const auto& [k, _] : a) {
                runs += k.ends_with(".run");
                csvs += k.ends_with(".csv");
            }
            o.require(runs > 0 && csvs > 0, "missing run files or CSVs");
            for (const auto& [k, v] : a) {
                auto it = b.find(k);
                o.require(it != b.end() && it->second == v, "differs: " + k);
            }
            o.require(a.size() == b.size(), "file sets differ");
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        report(9, "two full suite runs produce byte-identical run files, CSVs and REPORT.md", o, seconds_since(t1), 600);
    }
    {
        const auto t1 = Clock::now();
        Outcome o;
        std::size_t checked = 0;
        for (const auto* s : {&first, &second}) {
            for (const auto& c : s->conservation) {
                o.require(c.holds(), c.rerank_run + " " + c.metric);
                ++checked;
            }
        }
        // Emitted files: the reranked run must be a permutation of its first stage.
        for (const auto& [rel, text] : tree(scratch / "run1")) {
            const auto name = fs::path(rel).filename().string();
            if (!name.starts_with("rerank.") || !name.ends_with(".run")) continue;
            const auto base_path = scratch / "run1" / fs::path(rel).parent_path() / ("single_vector." + name.substr(7));
            const auto rerank_run = parse_run(text), base_run = read_run(base_path);
            for (const auto& [q, ranking] : rerank_run) {
                std::set<std::string> x, y;
                for (const auto& e : ranking) x.insert(e.doc_id);
                for (const auto& e : base_run.at(q)) y.insert(e.doc_id);
                o.require(x == y, "candidate set changed in " + rel);
            }
            Qrels qrels;
            for (const auto& sd : probe.data(0).eval_queries) qrels[sd.query_id] = probe.data(0).qrels.at(sd.query_id);
            const MetricSpec spec{MetricKind::Recall, cfg.run_file_depth, 1};
            o.require(compute_metric(rerank_run, qrels, spec).mean == compute_metric(base_run, qrels, spec).mean, "recall differs in " + rel);
            ++checked;
        }
        o.require(checked > 0, "no rerank runs found");
        report(10, "rerank runs keep Recall@k of their first stage exactly (" + std::to_string(checked) + " checks)", o,
               seconds_since(t1), 60);
    }
    std::printf("%d criteria failed; experiment suite %.1fs\n", failures, first_secs);
    return failures;
}
