#include "varietyir/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "varietyir/error.hpp"
#include "varietyir/rng.hpp"

namespace varietyir {

std::string_view to_string(NegativeSource source) {
    switch (source) {
        case NegativeSource::Bm25Hard: return "bm25_hard";
        case NegativeSource::Random: return "random";
        case NegativeSource::Mixed: return "mixed";
    }
    return "unknown";
}

NegativeSource parse_negative_source(std::string_view name) {
    if (name == "bm25_hard") return NegativeSource::Bm25Hard;
    if (name == "random") return NegativeSource::Random;
    if (name == "mixed") return NegativeSource::Mixed;
    throw Error(ErrorCode::InvalidArgument, "unknown negative source '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (batch_size < 2) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 2");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidArgument, "learning_rate must be finite and >= 0");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
    if (negatives_per_query < 1) throw Error(ErrorCode::InvalidArgument, "negatives_per_query must be >= 1");
    if (loss_mode == ScoringMode::Rerank) throw Error(ErrorCode::InvalidArgument, "loss mode must be single_vector or multi_vector");
}

std::string TrainConfig::describe() const {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "epochs=%zu batch_size=%zu learning_rate=%.9g temperature=%.9g negatives_per_query=%zu "
                  "negative_source=%s seed=%llu loss_mode=%s",
                  epochs, batch_size, learning_rate, temperature, negatives_per_query,
                  std::string(to_string(negative_source)).c_str(), static_cast<unsigned long long>(seed),
                  std::string(to_string(loss_mode)).c_str());
    return buf;
}

// ---------------------------------------------------------------------------
// Triplets

namespace {

void add_random_negatives(std::vector<std::string>& out, std::size_t wanted, const DocumentCollection& coll,
                          const std::set<std::string, std::less<>>& excluded, Rng& rng) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < coll.size(); ++i) {
        const auto& id = coll[i].doc_id;
        if (!excluded.contains(id) && std::find(out.begin(), out.end(), id) == out.end()) pool.push_back(i);
    }
    // Partial Fisher–Yates: first `wanted` slots are a uniform sample.
    for (std::size_t i = 0; i < pool.size() && out.size() < wanted; ++i) {
        std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
        out.push_back(coll[pool[i]].doc_id);
    }
}

}  // namespace

TripletSet build_triplets(const QuerySet& queries, const Qrels& qrels, const DocumentCollection& coll,
                          const TrainConfig& cfg, const InvertedIndex& idx, const BM25Params& bm25) {
    cfg.validate();
    TripletSet out;
    Rng rng(derive_seed(cfg.seed, 1));
    const std::size_t n = cfg.negatives_per_query;
    for (const auto& q : queries) {
        auto judged = qrels.find(q.query_id);
        std::vector<std::string> positives;
        std::set<std::string, std::less<>> relevant;
        if (judged != qrels.end()) {
            for (const auto& [doc, grade] : judged->second) {
                if (grade >= 1 && coll.find(doc)) {
                    positives.push_back(doc);
                    relevant.insert(doc);
                }
            }
        }
        if (positives.empty()) {
            ++out.skipped_queries;
            continue;
        }
        for (const auto& pos : positives) {
            std::vector<std::string> negatives;
            const std::size_t hard = cfg.negative_source == NegativeSource::Bm25Hard ? n
                                   : cfg.negative_source == NegativeSource::Mixed    ? (n + 1) / 2
                                                                                     : 0;
            if (hard > 0) {
                for (const auto& hit : bm25_search(q.text, idx, bm25, hard + relevant.size())) {
                    if (negatives.size() >= hard) break;
                    if (!relevant.contains(hit.doc_id)) negatives.push_back(hit.doc_id);
                }
            }
            add_random_negatives(negatives, n, coll, relevant, rng);
            if (negatives.empty()) {
                ++out.skipped_positives;
                continue;
            }
            out.triplets.push_back({q, pos, std::move(negatives)});
        }
    }
    if (out.triplets.empty()) throw Error(ErrorCode::NoPositives, "no training triplets could be built");
    return out;
}

std::vector<TripletTexts> triplet_texts(std::span<const TrainingTriplet> triplets, const DocumentCollection& coll) {
    auto text_of = [&](const std::string& id) -> const std::string& {
        auto i = coll.find(id);
        if (!i) throw Error(ErrorCode::UnknownDocId, "doc '" + id + "' not in collection");
        return coll[*i].text;
    };
    std::vector<TripletTexts> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) {
        TripletTexts tt{t.query.query_id, t.query.text, t.positive_doc_id, text_of(t.positive_doc_id), {}, {}};
        for (const auto& neg : t.negative_doc_ids) {
            tt.negative_ids.push_back(neg);
            tt.negatives.push_back(text_of(neg));
        }
        out.push_back(std::move(tt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss

double infonce_from_scores(double positive, std::span<const double> negatives, double temperature) {
    double top = positive / temperature;
    for (double s : negatives) top = std::max(top, s / temperature);
    double sum = std::exp(positive / temperature - top);
    for (double s : negatives) sum += std::exp(s / temperature - top);
    return top + std::log(sum) - positive / temperature;
}

double ParamGradient::norm() const {
    double s = 0.0;
    for (double x : embedding) s += x * x;
    for (double x : projection) s += x * x;
    return std::sqrt(s);
}

namespace {

struct TokenTrace {
    std::vector<std::uint32_t> ids;
    std::vector<double> mean;  // mean subword embedding
    std::vector<double> pre;   // projection * mean
    double norm = 0.0;
};

/// Forward pass that keeps what the backward pass needs.
struct TextTrace {
    std::vector<TokenTrace> tokens;
    EncodedText enc;
    double pooled_norm = 0.0;
    std::vector<double> d_tokens;  // dL/d(unit token vectors)
    std::vector<double> d_pooled;  // dL/d(unit pooled vector)
};

TextTrace forward(std::string_view text, const EncoderParams& params, const AnalyzerConfig& cfg) {
    const std::size_t dim = params.dim;
    const auto tokens = analyze(text, cfg);
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, "text has no tokens");
    TextTrace tr;
    tr.enc.dim = dim;
    tr.enc.token_vectors.resize(tokens.size() * dim);
    std::vector<double> sum(dim, 0.0);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        TokenTrace tok;
        tok.ids = hash_subwords(tokens[t], params.hasher);
        tok.mean.assign(dim, 0.0);
        for (auto id : tok.ids) {
            const auto row = params.embedding_row(id);
            for (std::size_t i = 0; i < dim; ++i) tok.mean[i] += row[i];
        }
        const double inv = 1.0 / static_cast<double>(tok.ids.size());
        for (auto& x : tok.mean) x *= inv;
        tok.pre.assign(dim, 0.0);
        for (std::size_t r = 0; r < dim; ++r) {
            tok.pre[r] = dot(std::span<const double>(params.projection).subspan(r * dim, dim), tok.mean);
        }
        tok.norm = std::sqrt(dot(tok.pre, tok.pre));
        if (tok.norm < 1e-12) throw Error(ErrorCode::DegenerateEmbedding, "token vector norm below 1e-12");
        for (std::size_t i = 0; i < dim; ++i) {
            tr.enc.token_vectors[t * dim + i] = tok.pre[i] / tok.norm;
            sum[i] += tok.pre[i];
        }
        tr.tokens.push_back(std::move(tok));
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (auto& x : sum) x *= inv;
    tr.pooled_norm = std::sqrt(dot(sum, sum));
    if (tr.pooled_norm < 1e-12) throw Error(ErrorCode::DegenerateEmbedding, "pooled vector norm below 1e-12");
    tr.enc.pooled.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) tr.enc.pooled[i] = sum[i] / tr.pooled_norm;
    tr.d_tokens.assign(tr.enc.token_vectors.size(), 0.0);
    tr.d_pooled.assign(dim, 0.0);
    return tr;
}

/// Gradient of x/|x| applied to upstream `du`: (du − u(u·du)) / |x|.
void unit_backward(std::span<const double> unit, std::span<const double> du, double norm, std::span<double> out) {
    const double proj = dot(unit, du);
    for (std::size_t i = 0; i < unit.size(); ++i) out[i] = (du[i] - unit[i] * proj) / norm;
}

void backward(const TextTrace& tr, const EncoderParams& params, ParamGradient& grad) {
    const std::size_t dim = params.dim;
    const std::size_t n = tr.tokens.size();
    std::vector<double> d_mean_pre(dim);
    unit_backward(tr.enc.pooled, tr.d_pooled, tr.pooled_norm, d_mean_pre);
    std::vector<double> d_pre(dim), d_unit(dim), d_mean(dim);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& tok = tr.tokens[t];
        unit_backward(tr.enc.token(t), std::span<const double>(tr.d_tokens).subspan(t * dim, dim), tok.norm, d_unit);
        for (std::size_t i = 0; i < dim; ++i) d_pre[i] = d_unit[i] + d_mean_pre[i] / static_cast<double>(n);
        std::fill(d_mean.begin(), d_mean.end(), 0.0);
        for (std::size_t r = 0; r < dim; ++r) {
            const double g = d_pre[r];
            if (g == 0.0) continue;
            double* prow = grad.projection.data() + r * dim;
            const double* wrow = params.projection.data() + r * dim;
            for (std::size_t c = 0; c < dim; ++c) {
                prow[c] += g * tok.mean[c];
                d_mean[c] += wrow[c] * g;
            }
        }
        const double inv = 1.0 / static_cast<double>(tok.ids.size());
        for (auto id : tok.ids) {
            double* erow = grad.embedding.data() + static_cast<std::size_t>(id) * dim;
            for (std::size_t c = 0; c < dim; ++c) erow[c] += d_mean[c] * inv;
        }
    }
}

struct Candidate {
    std::size_t trace = 0;
    bool positive = false;
};

double pair_score(const TextTrace& q, const TextTrace& d, ScoringMode mode) {
    return mode == ScoringMode::SingleVector ? score_single(q.enc, d.enc) : score_maxsim(q.enc, d.enc);
}

/// Adds `weight` * ds/d(unit vectors) for one (query, doc) score.
void score_backward(TextTrace& q, TextTrace& d, ScoringMode mode, double weight) {
    const std::size_t dim = q.enc.dim;
    if (mode == ScoringMode::SingleVector) {
        for (std::size_t i = 0; i < dim; ++i) {
            q.d_pooled[i] += weight * d.enc.pooled[i];
            d.d_pooled[i] += weight * q.enc.pooled[i];
        }
        return;
    }
    for (std::size_t i = 0; i < q.enc.token_count(); ++i) {
        std::size_t best = 0;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d.enc.token_count(); ++j) {
            const double s = dot(q.enc.token(i), d.enc.token(j));
            if (s > best_sim) {
                best_sim = s;
                best = j;
            }
        }
        const auto qt = q.enc.token(i);
        const auto dt = d.enc.token(best);
        for (std::size_t c = 0; c < dim; ++c) {
            q.d_tokens[i * dim + c] += weight * dt[c];
            d.d_tokens[best * dim + c] += weight * qt[c];
        }
    }
}

LossGradient batch_loss_impl(const EncoderParams& params, std::span<const TripletTexts> batch, double temperature,
                             ScoringMode mode, const AnalyzerConfig& cfg, bool want_gradient, bool in_batch) {
    if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
    if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
    if (mode == ScoringMode::Rerank) throw Error(ErrorCode::InvalidArgument, "loss mode must be single or multi vector");

    std::vector<TextTrace> traces;
    std::map<std::string, std::size_t> doc_trace;
    auto doc = [&](const std::string& id, const std::string& text) {
        auto it = doc_trace.find(id);
        if (it != doc_trace.end()) return it->second;
        traces.push_back(forward(text, params, cfg));
        doc_trace.emplace(id, traces.size() - 1);
        return traces.size() - 1;
    };

    std::vector<std::size_t> query_trace(batch.size());
    std::vector<std::vector<Candidate>> candidates(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& t = batch[b];
        if (t.negatives.empty()) throw Error(ErrorCode::InvalidArgument, "triplet needs >= 1 negative");
        traces.push_back(forward(t.query, params, cfg));
        query_trace[b] = traces.size() - 1;
        std::set<std::string> used{t.positive_id};
        candidates[b].push_back({doc(t.positive_id, t.positive), true});
        for (std::size_t i = 0; i < t.negatives.size(); ++i) {
            if (used.insert(t.negative_ids[i]).second) candidates[b].push_back({doc(t.negative_ids[i], t.negatives[i]), false});
        }
    }
    if (in_batch) {
        for (std::size_t b = 0; b < batch.size(); ++b) {
            std::set<std::string> used{batch[b].positive_id};
            for (const auto& id : batch[b].negative_ids) used.insert(id);
            for (std::size_t o = 0; o < batch.size(); ++o) {
                if (o == b || batch[o].query_id == batch[b].query_id) continue;
                if (used.insert(batch[o].positive_id).second) {
                    candidates[b].push_back({doc_trace.at(batch[o].positive_id), false});
                }
            }
        }
    }

    LossGradient out;
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<double> scores;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        auto& q = traces[query_trace[b]];
        scores.clear();
        for (const auto& c : candidates[b]) scores.push_back(pair_score(q, traces[c.trace], mode));
        const double loss = infonce_from_scores(scores[0], std::span<const double>(scores).subspan(1), temperature);
        if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "loss is not finite", b + 1);
        out.loss += loss * scale;
        if (!want_gradient) continue;
        double top = -std::numeric_limits<double>::infinity();
        for (double s : scores) top = std::max(top, s / temperature);
        double z = 0.0;
        for (double s : scores) z += std::exp(s / temperature - top);
        for (std::size_t c = 0; c < candidates[b].size(); ++c) {
            const double softmax = std::exp(scores[c] / temperature - top) / z;
            const double ds = (softmax - (candidates[b][c].positive ? 1.0 : 0.0)) / temperature * scale;
            score_backward(q, traces[candidates[b][c].trace], mode, ds);
        }
    }
    if (want_gradient) {
        out.gradient.embedding.assign(params.embedding.size(), 0.0);
        out.gradient.projection.assign(params.projection.size(), 0.0);
        for (const auto& tr : traces) backward(tr, params, out.gradient);
    }
    return out;
}

}  // namespace

LossGradient infonce_loss(const EncoderParams& params, const TripletTexts& triplet, double temperature,
                          ScoringMode mode, const AnalyzerConfig& cfg) {
    return batch_loss_impl(params, std::span<const TripletTexts>(&triplet, 1), temperature, mode, cfg, true, false);
}

LossGradient batch_infonce_loss(const EncoderParams& params, std::span<const TripletTexts> batch, double temperature,
                                ScoringMode mode, const AnalyzerConfig& cfg, bool want_gradient) {
    return batch_loss_impl(params, batch, temperature, mode, cfg, want_gradient, true);
}

// ---------------------------------------------------------------------------
// Optimizer

namespace {

/// Adam over the full parameter vector. Rows whose gradient has always been
/// zero have zero moments and receive a zero step, so they are skipped.
class Adam {
public:
    Adam(const EncoderParams& params, double lr)
        : lr_(lr), dim_(params.dim), m_emb_(params.embedding.size(), 0.0), v_emb_(params.embedding.size(), 0.0),
          m_proj_(params.projection.size(), 0.0), v_proj_(params.projection.size(), 0.0),
          live_(params.hasher.bucket_count, 0) {}

    void step(EncoderParams& params, const ParamGradient& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t row = 0; row < live_.size(); ++row) {
            if (!live_[row]) {
                const double* gr = g.embedding.data() + row * dim_;
                if (std::all_of(gr, gr + dim_, [](double x) { return x == 0.0; })) continue;
                live_[row] = 1;
                live_rows_.push_back(row);
            }
        }
        std::sort(live_rows_.begin(), live_rows_.end());
        for (auto row : live_rows_) {
            for (std::size_t c = 0; c < dim_; ++c) {
                const std::size_t i = row * dim_ + c;
                update(params.embedding[i], g.embedding[i], m_emb_[i], v_emb_[i], c1, c2);
            }
        }
        for (std::size_t i = 0; i < params.projection.size(); ++i) {
            update(params.projection[i], g.projection[i], m_proj_[i], v_proj_[i], c1, c2);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    void update(double& x, double g, double& m, double& v, double c1, double c2) const {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g * g;
        x -= lr_ * (m / c1) / (std::sqrt(v / c2) + kEps);
    }

    double lr_;
    std::size_t dim_;
    std::uint64_t t_ = 0;
    std::vector<double> m_emb_, v_emb_, m_proj_, v_proj_;
    std::vector<char> live_;
    std::vector<std::size_t> live_rows_;
};

}  // namespace

TrainResult train(const EncoderParams& init, std::span<const TrainingTriplet> triplets, const DocumentCollection& coll,
                  const TrainConfig& cfg, const AnalyzerConfig& analyzer) {
    cfg.validate();
    if (triplets.empty()) throw Error(ErrorCode::InvalidArgument, "no triplets to train on");
    const auto texts = triplet_texts(triplets, coll);

    TrainResult result{init, {}};
    EncoderParams& params = result.params;
    Adam adam(params, cfg.learning_rate);
    Rng rng(derive_seed(cfg.seed, 2));
    std::vector<std::size_t> order(texts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<TripletTexts> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        double norm_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) batch.push_back(texts[order[i]]);
            LossGradient lg;
            try {
                lg = batch_infonce_loss(params, batch, cfg.temperature, cfg.loss_mode, analyzer, true);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NonFiniteLoss) throw;
                throw Error(ErrorCode::NonFiniteLoss,
                            "epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(batches + 1));
            }
            const double gnorm = lg.gradient.norm();
            if (!std::isfinite(gnorm)) {
                throw Error(ErrorCode::NonFiniteLoss,
                            "non-finite gradient at epoch " + std::to_string(epoch + 1) + " batch " +
                                std::to_string(batches + 1));
            }
            adam.step(params, lg.gradient);
            loss_sum += lg.loss * static_cast<double>(batch.size());
            norm_sum += gnorm;
            ++batches;
        }
        result.report.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
        result.report.epoch_grad_norm.push_back(norm_sum / static_cast<double>(batches));
    }
    refresh_version(params);
    result.report.final_params_version = params.version;
    result.report.triplet_count = texts.size();
    return result;
}

// ---------------------------------------------------------------------------
// Finite-difference verification

double relative_error(double analytic, double numeric) {
    if (analytic == 0.0 && numeric == 0.0) return 0.0;
    return std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
}

GradientCheckResult gradient_check_at(const EncoderParams& params, std::span<const TripletTexts> sample,
                                      double epsilon, std::span<const ParamCoordinate> coordinates,
                                      double temperature, ScoringMode mode, const AnalyzerConfig& cfg) {
    const auto analytic = batch_infonce_loss(params, sample, temperature, mode, cfg, true);
    EncoderParams probe = params;
    GradientCheckResult out;
    for (const auto& c : coordinates) {
        double& slot = c.in_projection ? probe.projection.at(c.row * probe.dim + c.column)
                                       : probe.embedding.at(c.row * probe.dim + c.column);
        const double a = c.in_projection ? analytic.gradient.projection[c.row * probe.dim + c.column]
                                         : analytic.gradient.embedding[c.row * probe.dim + c.column];
        const double saved = slot;
        slot = saved + epsilon;
        const double up = batch_infonce_loss(probe, sample, temperature, mode, cfg, false).loss;
        slot = saved - epsilon;
        const double down = batch_infonce_loss(probe, sample, temperature, mode, cfg, false).loss;
        slot = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        CoordinateCheck check{c, a, numeric, relative_error(a, numeric)};
        out.max_relative_error = std::max(out.max_relative_error, check.relative_error);
        out.coordinates.push_back(check);
    }
    return out;
}

GradientCheckResult gradient_check(const EncoderParams& params, std::span<const TripletTexts> sample, double epsilon,
                                   std::size_t count, std::uint64_t seed, double temperature, ScoringMode mode,
                                   const AnalyzerConfig& cfg) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [1e-6, 1e-3]");
    std::set<std::uint32_t> rows;
    auto collect = [&](const std::string& text) {
        for (const auto& tok : analyze(text, cfg)) {
            for (auto id : hash_subwords(tok, params.hasher)) rows.insert(id);
        }
    };
    for (const auto& t : sample) {
        collect(t.query);
        collect(t.positive);
        for (const auto& n : t.negatives) collect(n);
    }
    const std::vector<std::uint32_t> row_list(rows.begin(), rows.end());
    const std::size_t embedding_slots = row_list.size() * params.dim;
    const std::size_t total = embedding_slots + params.projection.size();
    Rng rng(seed);
    std::vector<ParamCoordinate> coords;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t pick = rng.index(total);
        if (pick < embedding_slots) {
            coords.push_back({false, row_list[pick / params.dim], pick % params.dim});
        } else {
            const std::size_t p = pick - embedding_slots;
            coords.push_back({true, p / params.dim, p % params.dim});
        }
    }
    return gradient_check_at(params, sample, epsilon, coords, temperature, mode, cfg);
}

std::string format_training_manifest(const TrainConfig& cfg, const TripletSet& triplets, const LossReport& report) {
    std::string out = "# train_config = " + cfg.describe() + "\n";
    out += "# seed = " + std::to_string(cfg.seed) + "\n";
    out += "# triplets = " + std::to_string(triplets.triplets.size()) + "\n";
    out += "# skipped_queries = " + std::to_string(triplets.skipped_queries) + "\n";
    out += "# skipped_positives = " + std::to_string(triplets.skipped_positives) + "\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(report.final_params_version));
    out += "# final_params_version = " + std::string(buf) + "\n";
    out += "epoch,mean_loss,grad_norm\n";
    for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", e + 1, report.epoch_mean_loss[e], report.epoch_grad_norm[e]);
        out += buf;
    }
    return out;
}

}  // namespace varietyir
