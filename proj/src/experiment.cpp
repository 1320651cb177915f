#include "varietyir/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "varietyir/error.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/neural_ranker.hpp"
#include "varietyir/rng.hpp"
#include "varietyir/trainer.hpp"

namespace varietyir {

namespace {

constexpr std::uint64_t kCorpusStream = 10;
constexpr std::uint64_t kFamilyStream = 11;
constexpr std::uint64_t kEncoderStream = 12;
constexpr std::uint64_t kTrainStream = 13;

bool is_neural(std::string_view ranker) { return ranker != "bm25"; }

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

std::size_t SignificanceRow::seeds_improved() const {
    return static_cast<std::size_t>(std::count_if(seed_deltas.begin(), seed_deltas.end(), [](double d) { return d > 0.0; }));
}

std::vector<ResultRow> ResultTable::summary() const {
    std::vector<ResultRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [](const ResultRow& r) { return r.seed == "mean"; });
    return out;
}

const SignificanceRow* ResultTable::find(std::string_view ranker, std::string_view pair, std::string_view query_language,
                                         std::string_view metric) const {
    for (const auto& s : significance) {
        if (s.ranker == ranker && s.pair == pair && s.query_language == query_language && s.metric == metric) return &s;
    }
    return nullptr;
}

struct Experiment::SeedContext {
    std::uint64_t seed = 0;
    SyntheticData data;
    Qrels eval_qrels;
    std::vector<VarietyPair> pairs;  // control last
    InvertedIndex index;
    EncoderParams init;
    DenseStore init_store;
    std::optional<EncoderParams> single;
    std::optional<EncoderParams> multi;
    DenseStore single_store;
    DenseStore multi_store;
    std::map<std::string, Run> runs;
    std::map<std::string, EvalReport> reports;

    const VarietyPair* find_pair(std::string_view id) const {
        for (const auto& p : pairs) {
            if (p.id == id) return &p;
        }
        return nullptr;
    }
};

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.write_runs && cfg_.run_file_depth < std::min(cfg_.rerank_depth, cfg_.retrieval_depth)) {
        throw Error(ErrorCode::ConfigInvalid, "run_file_depth must be >= rerank_depth so emitted reranks stay permutations");
    }
    if (!cfg_.family_rule_files.empty()) {
        for (std::size_t i = 0; i < cfg_.family_rule_files.size(); ++i) {
            const auto rs = load_ruleset(cfg_.family_rule_files[i]);
            FamilySpec spec;
            spec.family_id = rs.family_id;
            spec.shared_rule_pool = rs.rules;
            spec.sampling_fraction = cfg_.rule_fraction;
            spec.variety_count = cfg_.varieties_per_family;
            spec.seed = i;
            if (spec.shared_rule_pool.empty()) throw Error(ErrorCode::ConfigInvalid, "family file has no rules");
            file_families_.push_back(std::move(spec));
        }
        validate_families(file_families_);
    } else {
        validate_families(make_family_specs(cfg_.families, cfg_.rules_per_family, cfg_.rule_fraction,
                                            cfg_.varieties_per_family, 0));
    }
    seeds_.resize(cfg_.seeds.size());
    const auto ids = pair_ids();
    if (!cfg_.train_pair.empty() && std::find(ids.begin(), ids.end(), cfg_.train_pair) == ids.end()) {
        throw Error(ErrorCode::ConfigInvalid, "train_pair '" + cfg_.train_pair + "' is not a generated pair");
    }
}

Experiment::~Experiment() = default;
Experiment::Experiment(Experiment&&) noexcept = default;
Experiment& Experiment::operator=(Experiment&&) noexcept = default;

std::vector<std::string> Experiment::pair_ids() const {
    std::vector<std::string> ids;
    if (!file_families_.empty()) {
        for (const auto& f : file_families_) {
            for (std::size_t v = 0; v < cfg_.varieties_per_family; ++v) ids.push_back(f.family_id + "-v" + std::to_string(v));
        }
        return ids;
    }
    for (std::size_t f = 0; f < cfg_.families; ++f) {
        for (std::size_t v = 0; v < cfg_.varieties_per_family; ++v) ids.push_back("f" + std::to_string(f) + "-v" + std::to_string(v));
    }
    return ids;
}

std::string Experiment::family_of(std::string_view pair) const {
    if (pair == kControlPair) return std::string(kControlPair);
    const auto ids = pair_ids();
    if (std::find(ids.begin(), ids.end(), pair) == ids.end()) {
        throw Error(ErrorCode::InvalidArgument, "unknown variety pair '" + std::string(pair) + "'");
    }
    return std::string(pair.substr(0, pair.rfind("-v")));
}

std::string Experiment::default_train_pair() const {
    return cfg_.train_pair.empty() ? pair_ids().front() : cfg_.train_pair;
}

std::vector<std::string> Experiment::same_family_pairs(std::string_view pair_a) const {
    std::vector<std::string> out;
    const auto fam = family_of(pair_a);
    for (const auto& id : pair_ids()) {
        if (id != pair_a && family_of(id) == fam) out.push_back(id);
    }
    return out;
}

std::vector<std::string> Experiment::cross_family_pairs(std::string_view pair_a) const {
    std::vector<std::string> out;
    const auto fam = family_of(pair_a);
    for (const auto& id : pair_ids()) {
        if (family_of(id) != fam) out.push_back(id);
    }
    return out;
}

Experiment::SeedContext& Experiment::seed_context(std::size_t seed_index) {
    auto& slot = seeds_.at(seed_index);
    if (slot) return *slot;
    auto ctx = std::make_unique<SeedContext>();
    const std::uint64_t seed = cfg_.seeds[seed_index];
    ctx->seed = seed;
    ctx->data = synthesize_corpus(cfg_.corpus, derive_seed(seed, kCorpusStream));
    for (const auto& q : ctx->data.eval_queries) {
        auto it = ctx->data.qrels.find(q.query_id);
        if (it != ctx->data.qrels.end()) ctx->eval_qrels.insert(*it);
    }

    std::vector<FamilySpec> families = file_families_;
    if (families.empty()) {
        families = make_family_specs(cfg_.families, cfg_.rules_per_family, cfg_.rule_fraction,
                                     cfg_.varieties_per_family, derive_seed(seed, kFamilyStream));
    } else {
        for (auto& f : families) f.seed = derive_seed(seed, kFamilyStream + 1000 + f.seed);
    }
    validate_families(families);
    for (const auto& f : families) {
        for (auto& rs : generate_family(f)) ctx->pairs.push_back({rs.ruleset_id, rs.family_id, std::move(rs)});
    }
    VarietyRuleSet control;
    control.ruleset_id = std::string(kControlPair);
    control.family_id = std::string(kControlPair);
    ctx->pairs.push_back({control.ruleset_id, control.family_id, control});

    ctx->index = build_index(ctx->data.docs, cfg_.analyzer);
    ctx->init = init_encoder(cfg_.encoder, derive_seed(seed, kEncoderStream));
    ctx->init_store = DenseStore::build(ctx->data.docs, ctx->init, cfg_.analyzer);
    slot = std::move(ctx);
    return *slot;
}

const SyntheticData& Experiment::data(std::size_t seed_index) { return seed_context(seed_index).data; }

const VarietyPair& Experiment::pair(std::size_t seed_index, std::string_view id) {
    const auto* p = seed_context(seed_index).find_pair(id);
    if (p == nullptr) throw Error(ErrorCode::InvalidArgument, "unknown variety pair '" + std::string(id) + "'");
    return *p;
}

std::vector<std::string> Experiment::provenance() const {
    std::vector<std::string> out;
    out.push_back("config_hash: " + cfg_.hash());
    std::string seeds;
    for (auto s : cfg_.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
    out.push_back("seeds: " + seeds);
    char buf[96];
    std::snprintf(buf, sizeof buf, "bm25: k1=%.6g b=%.6g", cfg_.bm25.k1, cfg_.bm25.b);
    out.push_back(buf);
    out.push_back("analyzer: " + describe(cfg_.analyzer));
    std::snprintf(buf, sizeof buf, "encoder: dim=%zu buckets=%u ngram=%zu-%zu hash=fnv1a64 hash_seed=%llu init_scale=%.6g",
                  cfg_.encoder.dim, cfg_.encoder.hasher.bucket_count, cfg_.encoder.hasher.ngram_min,
                  cfg_.encoder.hasher.ngram_max, static_cast<unsigned long long>(cfg_.encoder.hasher.hash_seed),
                  cfg_.encoder.init_scale);
    out.push_back(buf);
    out.push_back("train: " + cfg_.train.describe() + " objective=infonce+in_batch");
    std::string ids;
    for (const auto& id : pair_ids()) ids += (ids.empty() ? "" : ",") + id;
    out.push_back("rulesets: " + ids + "," + std::string(kControlPair));
    out.push_back("train_pair: " + default_train_pair());
    return out;
}

// ---------------------------------------------------------------------------
// Retrieval + evaluation

namespace {

Ranking dense_or_empty(const std::string& text, const EncoderParams& params, const DenseStore& store, ScoringMode mode,
                       std::size_t depth) {
    try {
        return search_dense(text, params, store, mode, depth).ranking;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyText || e.code() == ErrorCode::DegenerateEmbedding) return {};
        throw;
    }
}

std::string run_key(const std::string& ranker, const std::string& pair_id, const std::string& condition) {
    return ranker + "." + (pair_id.empty() ? std::string("high") : pair_id + ".low") + "." + condition;
}

Run truncate_run(const Run& run, std::size_t depth) {
    Run out;
    for (const auto& [q, ranking] : run) {
        auto& r = out[q];
        r.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(std::min(depth, ranking.size())));
    }
    return out;
}

// Pools per-query values over seeds, prefixing query ids with the seed.
SignificanceRow pooled_significance(const std::string& ranker, const std::string& pair, const std::string& lang,
                                    const std::string& comparison, const std::string& metric,
                                    const std::vector<const EvalReport*>& a, const std::vector<const EvalReport*>& b,
                                    const std::vector<std::uint64_t>& seeds) {
    SignificanceRow sig{ranker, pair, lang, comparison, metric, 0.0, 0.0, 0.0, 1.0, {}};
    EvalReport pa, pb;
    for (std::size_t s = 0; s < a.size(); ++s) {
        const auto prefix = "s" + std::to_string(seeds[s]) + ":";
        for (const auto& [q, v] : a[s]->per_query) pa.per_query[prefix + q] = v;
        for (const auto& [q, v] : b[s]->per_query) pb.per_query[prefix + q] = v;
        sig.seed_deltas.push_back(b[s]->means.at(metric) - a[s]->means.at(metric));
    }
    const auto cmp = compare_runs(pa, pb, metric);
    sig.mean_a = cmp.mean_a;
    sig.mean_b = cmp.mean_b;
    sig.mean_delta = cmp.mean_delta;
    sig.p_value = cmp.p_value;
    return sig;
}

void append_rows(ResultTable& table, const ExperimentConfig& cfg, const std::string& ranker, const std::string& pair,
                 const std::string& lang, const std::string& condition, const std::vector<const EvalReport*>& per_seed) {
    for (const auto& m : cfg.metrics) {
        std::vector<double> values;
        for (std::size_t s = 0; s < per_seed.size(); ++s) {
            values.push_back(per_seed[s]->means.at(m.name()));
            table.rows.push_back({ranker, pair, lang, condition, m.name(), values.back(), std::to_string(cfg.seeds[s])});
        }
        table.rows.push_back({ranker, pair, lang, condition, m.name(), mean_of(values), "mean"});
    }
}

}  // namespace

const EvalReport& Experiment::cell(std::size_t seed_index, const std::string& ranker, const std::string& pair_id,
                                   const std::string& condition) {
    auto& ctx = seed_context(seed_index);
    const auto key = run_key(ranker, pair_id, condition);
    if (auto it = ctx.reports.find(key); it != ctx.reports.end()) return it->second;

    const bool ours = condition == "ours";
    if (ours && (!ctx.single || !ctx.multi)) {
        throw Error(ErrorCode::MissingTrainedParams, "no trained encoder for condition 'ours'");
    }
    QuerySet queries = ctx.data.eval_queries;
    if (!pair_id.empty()) {
        const auto* p = ctx.find_pair(pair_id);
        if (p == nullptr) throw Error(ErrorCode::InvalidArgument, "unknown variety pair '" + pair_id + "'");
        queries = transduce_queryset(queries, p->ruleset);
    }
    const EncoderParams& single = ours ? *ctx.single : ctx.init;
    const DenseStore& single_store = ours ? ctx.single_store : ctx.init_store;
    const EncoderParams& multi = ours ? *ctx.multi : ctx.init;
    const DenseStore& multi_store = ours ? ctx.multi_store : ctx.init_store;
    const std::size_t depth = cfg_.retrieval_depth;

    Run run;
    if (ranker == "bm25") {
        for (const auto& q : queries) run[q.query_id] = bm25_search(q.text, ctx.index, cfg_.bm25, depth);
    } else if (ranker == "single_vector") {
        for (const auto& q : queries) {
            run[q.query_id] = dense_or_empty(q.text, single, single_store, ScoringMode::SingleVector, depth);
        }
    } else if (ranker == "multi_vector") {
        for (const auto& q : queries) {
            run[q.query_id] = dense_or_empty(q.text, multi, multi_store, ScoringMode::MultiVectorMaxSim, depth);
        }
    } else if (ranker == "rerank") {
        const auto base_key = run_key("single_vector", pair_id, condition);
        cell(seed_index, "single_vector", pair_id, condition);
        const Run& base = ctx.runs.at(base_key);
        for (const auto& q : queries) {
            const auto& b = base.at(q.query_id);
            if (b.empty()) {
                run[q.query_id] = {};
                continue;
            }
            run[q.query_id] = rerank(b, q.text, multi, multi_store, std::min(cfg_.rerank_depth, b.size()));
        }
        std::vector<MetricSpec> recall_specs;
        for (const auto& m : cfg_.metrics) {
            if (m.kind == MetricKind::Recall) recall_specs.push_back(m);
        }
        recall_specs.push_back({MetricKind::Recall, depth, 1});
        if (cfg_.write_runs && seed_index == 0) recall_specs.push_back({MetricKind::Recall, cfg_.run_file_depth, 1});
        const auto tag = "seed" + std::to_string(ctx.seed) + "/";
        for (const auto& spec : recall_specs) {
            conservation_.push_back({tag + key, tag + base_key, spec.name(),
                                     compute_metric(run, ctx.eval_qrels, spec).mean,
                                     compute_metric(base, ctx.eval_qrels, spec).mean});
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown ranker '" + ranker + "'");
    }

    if (cfg_.write_runs && seed_index == 0) {
        run_files_["runs/seed" + std::to_string(ctx.seed) + "/" + key + ".run"] =
            format_run(truncate_run(run, cfg_.run_file_depth), key);
    }
    auto report = evaluate_run(run, ctx.eval_qrels, cfg_.metrics, key, "seed" + std::to_string(ctx.seed));
    ctx.runs.emplace(key, std::move(run));
    return ctx.reports.emplace(key, std::move(report)).first->second;
}

ResultTable Experiment::run_rq1() {
    ResultTable table;
    table.name = "rq1";
    table.provenance = provenance();
    auto ids = pair_ids();
    ids.emplace_back(kControlPair);

    for (const auto& ranker : cfg_.rankers) {
        for (const auto& id : ids) {
            std::vector<const EvalReport*> highs, lows;
            for (std::size_t s = 0; s < cfg_.seeds.size(); ++s) {
                highs.push_back(&cell(s, ranker, "", "orig"));
                lows.push_back(&cell(s, ranker, id, "orig"));
                if (id == kControlPair) {
                    auto& ctx = seed_context(s);
                    identity_.push_back({"rq1", ranker, "orig", ctx.seed,
                                         ctx.runs.at(run_key(ranker, id, "orig")) == ctx.runs.at(run_key(ranker, "", "orig"))});
                }
            }
            append_rows(table, cfg_, ranker, id, "high", "orig", highs);
            append_rows(table, cfg_, ranker, id, "low", "orig", lows);
            for (const auto& m : cfg_.metrics) {
                table.significance.push_back(
                    pooled_significance(ranker, id, "low", "low-vs-high", m.name(), highs, lows, cfg_.seeds));
            }
        }
    }
    return table;
}

void Experiment::ensure_trained(std::string_view pair_a) {
    if (trained_pair_ == pair_a) return;
    if (pair_a == kControlPair) throw Error(ErrorCode::InvalidArgument, "cannot train on the control pair");
    (void)family_of(pair_a);
    const bool need_single = cfg_.has_ranker("single_vector") || cfg_.has_ranker("rerank");
    const bool need_multi = cfg_.has_ranker("multi_vector") || cfg_.has_ranker("rerank");

    for (std::size_t s = 0; s < cfg_.seeds.size(); ++s) {
        auto& ctx = seed_context(s);
        const auto& pa = pair(s, pair_a);
        const auto queries = transduce_queryset(ctx.data.train_queries, pa.ruleset);
        TrainConfig tc = cfg_.train;
        tc.seed = derive_seed(ctx.seed, kTrainStream);
        const auto triplets = build_triplets(queries, ctx.data.qrels, ctx.data.docs, tc, ctx.index, cfg_.bm25);

        std::set<std::string> eval_ids;
        for (const auto& q : ctx.data.eval_queries) eval_ids.insert(q.query_id);
        for (const auto& t : triplets.triplets) {
            if (eval_ids.count(t.query.query_id) != 0) {
                throw Error(ErrorCode::InvalidArgument, "evaluation query '" + t.query.query_id + "' leaked into training");
            }
        }

        const auto dir = "manifests/seed" + std::to_string(ctx.seed) + "/";
        auto fit = [&](ScoringMode mode) {
            TrainConfig c = tc;
            c.loss_mode = mode;
            auto res = train(ctx.init, triplets.triplets, ctx.data.docs, c, cfg_.analyzer);
            manifests_[dir + std::string(to_string(mode)) + ".csv"] =
                "# train_pair = " + std::string(pair_a) + "\n" + format_training_manifest(c, triplets, res.report);
            return std::move(res.params);
        };
        ctx.single = need_single ? fit(ScoringMode::SingleVector) : ctx.init;
        ctx.single_store = need_single ? DenseStore::build(ctx.data.docs, *ctx.single, cfg_.analyzer) : ctx.init_store;
        ctx.multi = need_multi ? fit(ScoringMode::MultiVectorMaxSim) : ctx.init;
        ctx.multi_store = need_multi ? DenseStore::build(ctx.data.docs, *ctx.multi, cfg_.analyzer) : ctx.init_store;

        for (auto* m : {&ctx.runs}) {
            for (auto it = m->begin(); it != m->end();) it = it->first.ends_with(".ours") ? m->erase(it) : std::next(it);
        }
        for (auto it = ctx.reports.begin(); it != ctx.reports.end();) {
            it = it->first.ends_with(".ours") ? ctx.reports.erase(it) : std::next(it);
        }
    }
    trained_pair_ = std::string(pair_a);
}

ResultTable Experiment::transfer_table(std::string name, std::string_view pair_a, const std::vector<std::string>& pairs,
                                       bool with_control) {
    std::vector<std::string> rankers;
    std::copy_if(cfg_.rankers.begin(), cfg_.rankers.end(), std::back_inserter(rankers),
                 [](const std::string& r) { return is_neural(r); });
    if (rankers.empty()) throw Error(ErrorCode::InvalidArgument, name + " needs at least one neural ranker");

    ResultTable table;
    table.name = std::move(name);
    table.provenance = provenance();
    table.provenance.push_back("trained_on: " + std::string(pair_a));
    auto ids = pairs;
    if (with_control) ids.emplace_back(kControlPair);

    for (const auto& ranker : rankers) {
        for (const auto& id : ids) {
            for (const char* lang : {"high", "low"}) {
                const std::string pair_arg = std::string(lang) == "high" ? "" : id;
                std::vector<const EvalReport*> orig, ours;
                for (std::size_t s = 0; s < cfg_.seeds.size(); ++s) {
                    orig.push_back(&cell(s, ranker, pair_arg, "orig"));
                    ours.push_back(&cell(s, ranker, pair_arg, "ours"));
                }
                append_rows(table, cfg_, ranker, id, lang, "orig", orig);
                append_rows(table, cfg_, ranker, id, lang, "ours", ours);
                for (const auto& m : cfg_.metrics) {
                    table.significance.push_back(
                        pooled_significance(ranker, id, lang, "ours-vs-orig", m.name(), orig, ours, cfg_.seeds));
                }
            }
            if (id == kControlPair) {
                for (std::size_t s = 0; s < cfg_.seeds.size(); ++s) {
                    auto& ctx = seed_context(s);
                    for (const char* cond : {"orig", "ours"}) {
                        identity_.push_back({table.name, ranker, cond, ctx.seed,
                                             ctx.runs.at(run_key(ranker, id, cond)) == ctx.runs.at(run_key(ranker, "", cond))});
                    }
                }
            }
        }
    }
    return table;
}

ResultTable Experiment::run_rq2(std::string_view pair_a) {
    if (std::none_of(cfg_.rankers.begin(), cfg_.rankers.end(), [](const std::string& r) { return is_neural(r); })) {
        throw Error(ErrorCode::InvalidArgument, "rq2 needs at least one neural ranker");
    }
    ensure_trained(pair_a);
    return transfer_table("rq2", pair_a, {std::string(pair_a)}, true);
}

ResultTable Experiment::run_rq3(std::string_view pair_a, const std::vector<std::string>& unseen_pairs) {
    if (trained_pair_.empty() || trained_pair_ != pair_a) {
        throw Error(ErrorCode::MissingTrainedParams, "run rq2 for '" + std::string(pair_a) + "' before rq3");
    }
    for (const auto& p : unseen_pairs) {
        if (p == pair_a) throw Error(ErrorCode::PairNotUnseen, "pair '" + p + "' was used for training");
        (void)family_of(p);
    }
    return transfer_table("rq3", pair_a, unseen_pairs, false);
}

ResultTable Experiment::run_rq4(std::string_view pair_a, const std::vector<std::string>& cross_family) {
    if (trained_pair_.empty() || trained_pair_ != pair_a) {
        throw Error(ErrorCode::MissingTrainedParams, "run rq2 for '" + std::string(pair_a) + "' before rq4");
    }
    const auto fam = family_of(pair_a);
    for (const auto& p : cross_family) {
        if (family_of(p) == fam) {
            throw Error(ErrorCode::FamilyOverlap, "pair '" + p + "' shares family '" + fam + "' with the training pair");
        }
    }
    return transfer_table("rq4", pair_a, cross_family, true);
}

// ---------------------------------------------------------------------------
// Output

std::string format_plot_csv(const ResultTable& table) {
    std::string out = "ranker,pair,query_language,condition,metric,value,seed\n";
    for (const auto& r : table.rows) {
        out += r.ranker + "," + r.pair + "," + r.query_language + "," + r.condition + "," + r.metric + "," +
               format_fixed(r.value, 6) + "," + r.seed + "\n";
    }
    return out;
}

void emit_plot_data(const std::vector<ResultTable>& tables, const std::filesystem::path& dir) {
    for (const auto& t : tables) write_file(dir / ("plot_" + t.name + ".csv"), format_plot_csv(t));
}

std::string format_table_csv(const ResultTable& table) {
    std::string out;
    for (const auto& p : table.provenance) out += "# " + p + "\n";
    out += "ranker,pair,query_language,condition,metric,mean\n";
    for (const auto& r : table.summary()) {
        out += r.ranker + "," + r.pair + "," + r.query_language + "," + r.condition + "," + r.metric + "," +
               format_fixed(r.value, 6) + "\n";
    }
    return out;
}

std::string format_significance_csv(const ResultTable& table) {
    std::string out = "ranker,pair,query_language,comparison,metric,mean_a,mean_b,mean_delta,p_value,seeds_improved,seeds\n";
    for (const auto& s : table.significance) {
        out += s.ranker + "," + s.pair + "," + s.query_language + "," + s.comparison + "," + s.metric + "," +
               format_fixed(s.mean_a, 6) + "," + format_fixed(s.mean_b, 6) + "," + format_fixed(s.mean_delta, 6) + "," +
               format_fixed(s.p_value, 9) + "," + std::to_string(s.seeds_improved()) + "," +
               std::to_string(s.seed_deltas.size()) + "\n";
    }
    return out;
}

std::string format_report_markdown(const std::vector<ResultTable>& tables, const std::vector<std::string>& provenance) {
    std::string out = "# Experiment report\n\n## Provenance\n\n";
    for (const auto& p : provenance) out += "- " + p + "\n";
    for (const auto& t : tables) {
        out += "\n## " + t.name + "\n\n";
        for (std::size_t i = provenance.size(); i < t.provenance.size(); ++i) out += "- " + t.provenance[i] + "\n";
        if (t.provenance.size() > provenance.size()) out += "\n";
        out += "| ranker | pair | queries | condition | metric | mean |\n|---|---|---|---|---|---|\n";
        for (const auto& r : t.summary()) {
            out += "| " + r.ranker + " | " + r.pair + " | " + r.query_language + " | " + r.condition + " | " + r.metric +
                   " | " + format_fixed(r.value, 4) + " |\n";
        }
        out += "\n| ranker | pair | queries | comparison | metric | delta | p | seeds improved |\n"
               "|---|---|---|---|---|---|---|---|\n";
        for (const auto& s : t.significance) {
            out += "| " + s.ranker + " | " + s.pair + " | " + s.query_language + " | " + s.comparison + " | " + s.metric +
                   " | " + format_fixed(s.mean_delta, 4) + " | " + format_fixed(s.p_value, 6) + " | " +
                   std::to_string(s.seeds_improved()) + "/" + std::to_string(s.seed_deltas.size()) + " |\n";
        }
    }
    return out;
}

void Experiment::write_outputs(const std::vector<ResultTable>& tables, const std::filesystem::path& dir) const {
    write_file(dir / "config.txt", cfg_.canonical());
    write_file(dir / "REPORT.md", format_report_markdown(tables, provenance()));
    emit_plot_data(tables, dir);
    for (const auto& t : tables) {
        write_file(dir / (t.name + "_table.csv"), format_table_csv(t));
        write_file(dir / (t.name + "_significance.csv"), format_significance_csv(t));
    }
    for (const auto& [rel, text] : run_files_) write_file(dir / rel, text);
    for (const auto& [rel, text] : manifests_) write_file(dir / rel, text);
    for (const auto& ctx : seeds_) {
        if (!ctx) continue;
        for (const auto& p : ctx->pairs) {
            write_file(dir / ("rulesets/seed" + std::to_string(ctx->seed)) / (p.id + ".rules"), format_ruleset(p.ruleset));
        }
    }
}

}  // namespace varietyir
