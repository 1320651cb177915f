// Command-line front end: standalone index/search/transduce/train/evaluate/
// compare steps plus the synthetic research-question pipelines.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "varietyir/analyzer.hpp"
#include "varietyir/corpus_io.hpp"
#include "varietyir/error.hpp"
#include "varietyir/evaluator.hpp"
#include "varietyir/experiment.hpp"
#include "varietyir/experiment_config.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/neural_ranker.hpp"
#include "varietyir/rng.hpp"
#include "varietyir/trainer.hpp"
#include "varietyir/transducer.hpp"

namespace fs = std::filesystem;
using namespace varietyir;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> rankers;
    std::string format = "tsv";
};

ExperimentConfig effective_config(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
    if (c.seed) cfg.seeds = {*c.seed};
    if (!c.out.empty()) cfg.out = c.out;
    if (!c.rankers.empty()) cfg.rankers = c.rankers;
    cfg.validate();
    return cfg;
}

LoadOptions load_options(const Common& c) { return {parse_record_format(c.format), false}; }

void add_common(CLI::App* app, Common& c, bool with_ranker) {
    app->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "seed (overrides the config seed list)");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--format", c.format, "record format for collections/queries")->check(CLI::IsMember({"tsv", "jsonl"}));
    if (with_ranker) {
        app->add_option("--ranker", c.rankers, "ranker: bm25, single_vector, multi_vector, rerank");
    }
}

fs::path out_path(const Common& c, const std::string& explicit_path, const std::string& fallback) {
    if (!explicit_path.empty()) return explicit_path;
    return fs::path(c.out.empty() ? "." : c.out) / fallback;
}

EncoderParams params_or_init(const std::string& path, const ExperimentConfig& cfg) {
    if (!path.empty()) return load_params(path);
    return init_encoder(cfg.encoder, derive_seed(cfg.seeds.front(), 12));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variety-robust retrieval toolkit"};
    app.require_subcommand(1);

    // index
    Common ic;
    std::string index_docs, index_file;
    auto* index = app.add_subcommand("index", "build a BM25 index snapshot");
    add_common(index, ic, false);
    index->add_option("--collection", index_docs, "document collection")->required()->check(CLI::ExistingFile);
    index->add_option("--index", index_file, "snapshot path (default <out>/index.txt)");

    // search
    Common sc;
    std::string search_index, search_docs, search_queries, search_run, search_params, search_tag;
    std::size_t search_depth = 1000;
    auto* search = app.add_subcommand("search", "rank documents for a query file into a TREC run");
    add_common(search, sc, true);
    search->add_option("--queries", search_queries, "query file")->required()->check(CLI::ExistingFile);
    search->add_option("--index", search_index, "BM25 snapshot (bm25 ranker)");
    search->add_option("--collection", search_docs, "document collection (neural rankers, or bm25 without --index)");
    search->add_option("--params", search_params, "encoder checkpoint (default: seeded untrained encoder)");
    search->add_option("--run", search_run, "run file (default <out>/<ranker>.run)");
    search->add_option("--depth", search_depth, "ranking depth")->check(CLI::PositiveNumber);
    search->add_option("--tag", search_tag, "run tag");

    // transduce
    Common tc;
    std::string tr_rules, tr_queries, tr_output;
    auto* trans = app.add_subcommand("transduce", "rewrite a query file with a variety rule set");
    add_common(trans, tc, false);
    trans->add_option("--rules", tr_rules, "rule set file")->required()->check(CLI::ExistingFile);
    trans->add_option("--queries", tr_queries, "query file")->required()->check(CLI::ExistingFile);
    trans->add_option("--output", tr_output, "transduced queries (default <out>/queries.<ruleset>.tsv)");

    // train
    Common trc;
    std::string train_docs, train_queries, train_qrels, train_rules, train_params, train_manifest, train_init;
    auto* trn = app.add_subcommand("train", "fine-tune the subword encoder with InfoNCE");
    add_common(trn, trc, false);
    trn->add_option("--collection", train_docs, "document collection")->required()->check(CLI::ExistingFile);
    trn->add_option("--queries", train_queries, "training queries")->required()->check(CLI::ExistingFile);
    trn->add_option("--qrels", train_qrels, "qrels")->required()->check(CLI::ExistingFile);
    trn->add_option("--rules", train_rules, "transduce queries with this rule set first")->check(CLI::ExistingFile);
    trn->add_option("--init", train_init, "starting checkpoint");
    trn->add_option("--params", train_params, "output checkpoint (default <out>/encoder.bin)");
    trn->add_option("--manifest", train_manifest, "training manifest (default <out>/manifest.csv)");

    // evaluate
    Common ec;
    std::string ev_run, ev_qrels, ev_output;
    std::vector<std::string> ev_metrics;
    auto* eval = app.add_subcommand("evaluate", "score a TREC run against qrels");
    add_common(eval, ec, false);
    eval->add_option("--run", ev_run, "run file")->required()->check(CLI::ExistingFile);
    eval->add_option("--qrels", ev_qrels, "qrels")->required()->check(CLI::ExistingFile);
    eval->add_option("--metric", ev_metrics, "metric such as mrr@10, recall@1000, ndcg@20");
    eval->add_option("--output", ev_output, "CSV path (default stdout)");

    // compare
    Common cc;
    std::string cmp_a, cmp_b, cmp_qrels, cmp_metric = "mrr@10", cmp_output;
    auto* cmp = app.add_subcommand("compare", "paired sign test between two runs");
    add_common(cmp, cc, false);
    cmp->add_option("--run-a", cmp_a, "baseline run")->required()->check(CLI::ExistingFile);
    cmp->add_option("--run-b", cmp_b, "candidate run")->required()->check(CLI::ExistingFile);
    cmp->add_option("--qrels", cmp_qrels, "qrels")->required()->check(CLI::ExistingFile);
    cmp->add_option("--metric", cmp_metric, "metric");
    cmp->add_option("--output", cmp_output, "CSV path (default stdout)");

    // experiment
    Common xc;
    std::string rq, pair_a;
    std::vector<std::string> pairs;
    auto* exp = app.add_subcommand("experiment", "run research-question pipelines on synthetic data");
    add_common(exp, xc, true);
    exp->add_option("rq", rq, "rq1, rq2, rq3, rq4 or all")->required()->check(CLI::IsMember({"rq1", "rq2", "rq3", "rq4", "all"}));
    exp->add_option("--pair-a", pair_a, "training pair (default from config)");
    exp->add_option("--pairs", pairs, "evaluation pairs for rq3/rq4 (default: all eligible)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*index) {
            const auto cfg = effective_config(ic);
            const auto docs = load_collection(index_docs, load_options(ic));
            const auto idx = build_index(docs, cfg.analyzer);
            const auto path = out_path(ic, index_file, "index.txt");
            save_index(idx, path);
            std::printf("indexed %zu documents, %zu terms -> %s\n", idx.doc_count(), idx.term_count(), path.c_str());
        } else if (*search) {
            const auto cfg = effective_config(sc);
            const std::string ranker = sc.rankers.empty() ? "bm25" : sc.rankers.front();
            const auto queries = load_queries(search_queries, {parse_record_format(sc.format), true});
            Run run;
            if (ranker == "bm25") {
                InvertedIndex idx;
                if (!search_index.empty()) {
                    idx = load_index(search_index);
                } else if (!search_docs.empty()) {
                    idx = build_index(load_collection(search_docs, load_options(sc)), cfg.analyzer);
                } else {
                    throw Error(ErrorCode::InvalidArgument, "bm25 search needs --index or --collection");
                }
                for (const auto& q : queries) run[q.query_id] = bm25_search(q.text, idx, cfg.bm25, search_depth);
            } else {
                if (search_docs.empty()) throw Error(ErrorCode::InvalidArgument, "neural search needs --collection");
                const auto docs = load_collection(search_docs, load_options(sc));
                const auto params = params_or_init(search_params, cfg);
                const auto store = DenseStore::build(docs, params, cfg.analyzer);
                const auto mode = parse_scoring_mode(ranker);
                for (const auto& q : queries) {
                    if (analyze(q.text, cfg.analyzer).empty()) {
                        run[q.query_id] = {};
                        continue;
                    }
                    run[q.query_id] = search_dense(q.text, params, store, mode, search_depth, cfg.rerank_depth).ranking;
                }
            }
            const auto path = out_path(sc, search_run, ranker + ".run");
            write_run(run, search_tag.empty() ? ranker : search_tag, path);
            std::printf("%zu queries -> %s\n", run.size(), path.c_str());
        } else if (*trans) {
            const auto rs = load_ruleset(tr_rules);
            const auto queries = load_queries(tr_queries, {parse_record_format(tc.format), true});
            const auto path = out_path(tc, tr_output, "queries." + rs.ruleset_id + ".tsv");
            write_queries(transduce_queryset(queries, rs), path);
            std::printf("%zu queries transduced with %s -> %s\n", queries.size(), rs.ruleset_id.c_str(), path.c_str());
        } else if (*trn) {
            const auto cfg = effective_config(trc);
            const auto docs = load_collection(train_docs, load_options(trc));
            auto queries = load_queries(train_queries, load_options(trc));
            if (!train_rules.empty()) queries = transduce_queryset(queries, load_ruleset(train_rules));
            const auto qrels = load_qrels(train_qrels);
            TrainConfig t = cfg.train;
            t.seed = derive_seed(cfg.seeds.front(), 13);
            const auto idx = build_index(docs, cfg.analyzer);
            const auto triplets = build_triplets(queries, qrels, docs, t, idx, cfg.bm25);
            const auto init = params_or_init(train_init, cfg);
            const auto result = train(init, triplets.triplets, docs, t, cfg.analyzer);
            const auto params_path = out_path(trc, train_params, "encoder.bin");
            save_params(result.params, params_path);
            const auto manifest_path = out_path(trc, train_manifest, "manifest.csv");
            write_file(manifest_path, format_training_manifest(t, triplets, result.report));
            std::printf("trained on %zu triplets, final loss %.6f -> %s\n", triplets.triplets.size(),
                        result.report.epoch_mean_loss.back(), params_path.c_str());
        } else if (*eval) {
            std::vector<MetricSpec> specs;
            for (const auto& m : ev_metrics) specs.push_back(parse_metric(m));
            if (specs.empty()) specs = default_metrics();
            const auto report = evaluate_run(read_run(ev_run), load_qrels(ev_qrels), specs, fs::path(ev_run).stem().string(),
                                             fs::path(ev_qrels).stem().string());
            const auto csv = format_report_csv(report);
            if (ev_output.empty()) std::cout << csv; else write_file(ev_output, csv);
        } else if (*cmp) {
            const auto spec = parse_metric(cmp_metric);
            const auto qrels = load_qrels(cmp_qrels);
            const auto a = evaluate_run(read_run(cmp_a), qrels, {spec});
            const auto b = evaluate_run(read_run(cmp_b), qrels, {spec});
            const auto csv = format_comparison_csv(compare_runs(a, b, spec.name()));
            if (cmp_output.empty()) std::cout << csv; else write_file(cmp_output, csv);
        } else if (*exp) {
            const auto cfg = effective_config(xc);
            Experiment e(cfg);
            const auto a = pair_a.empty() ? e.default_train_pair() : pair_a;
            std::vector<ResultTable> tables;
            if (rq == "rq1" || rq == "all") tables.push_back(e.run_rq1());
            if (rq != "rq1") tables.push_back(e.run_rq2(a));
            if (rq == "rq3" || rq == "all") {
                tables.push_back(e.run_rq3(a, rq == "rq3" && !pairs.empty() ? pairs : e.same_family_pairs(a)));
            }
            if (rq == "rq4" || rq == "all") {
                tables.push_back(e.run_rq4(a, rq == "rq4" && !pairs.empty() ? pairs : e.cross_family_pairs(a)));
            }
            e.write_outputs(tables, cfg.out);
            for (const auto& c : e.conservation_checks()) {
                if (!c.holds()) throw Error(ErrorCode::InvalidArgument, "rerank changed " + c.metric + " of " + c.first_stage_run);
            }
            for (const auto& c : e.identity_checks()) {
                if (!c.identical) throw Error(ErrorCode::InvalidArgument, "control pair diverged for " + c.ranker);
            }
            std::printf("%s -> %s\n", rq.c_str(), (cfg.out / "REPORT.md").c_str());
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
