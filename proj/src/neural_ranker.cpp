#include "varietyir/neural_ranker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "varietyir/error.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/rng.hpp"
#include "varietyir/utf8.hpp"

namespace varietyir {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr char kCheckpointMagic[8] = {'V', 'I', 'R', 'E', 'N', 'C', '0', '1'};
constexpr double kDegenerateNorm = 1e-12;

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

template <typename T>
std::uint64_t fnv_value(std::uint64_t h, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    return fnv_bytes(h, buf, sizeof(T));
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void normalize_into(std::span<const double> v, std::span<double> out) {
    const double n = l2_norm(v);
    if (n < kDegenerateNorm) throw Error(ErrorCode::DegenerateEmbedding, "vector norm below 1e-12");
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
}

}  // namespace

void SubwordHasherConfig::validate() const {
    if (ngram_min < 1 || ngram_min > ngram_max) throw Error(ErrorCode::InvalidArgument, "need 1 <= ngram_min <= ngram_max");
    if (bucket_count < 2 || !std::has_single_bit(bucket_count)) {
        throw Error(ErrorCode::InvalidArgument, "bucket_count must be a power of two >= 2");
    }
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset;
    if (seed != 0) h = fnv_value(h, seed);
    return fnv_bytes(h, bytes.data(), bytes.size());
}

std::vector<std::string> subword_ngrams(std::string_view token, const SubwordHasherConfig& cfg) {
    if (token.empty()) throw Error(ErrorCode::EmptyToken, "cannot hash an empty token");
    std::vector<char32_t> cps{U'<'};
    const auto body = utf8::decode(token);
    cps.insert(cps.end(), body.begin(), body.end());
    cps.push_back(U'>');

    std::vector<std::string> grams;
    for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max && n <= cps.size(); ++n) {
        for (std::size_t start = 0; start + n <= cps.size(); ++start) {
            grams.push_back(utf8::encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(start),
                                                               cps.begin() + static_cast<std::ptrdiff_t>(start + n))));
        }
    }
    return grams;
}

std::vector<std::uint32_t> hash_subwords(std::string_view token, const SubwordHasherConfig& cfg) {
    cfg.validate();
    const auto grams = subword_ngrams(token, cfg);
    std::vector<std::uint32_t> ids;
    ids.reserve(grams.size());
    for (const auto& g : grams) {
        ids.push_back(static_cast<std::uint32_t>(fnv1a64(g, cfg.hash_seed) & (cfg.bucket_count - 1)));
    }
    return ids;
}

void EncoderParams::validate() const {
    hasher.validate();
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
    if (embedding.size() != static_cast<std::size_t>(hasher.bucket_count) * dim || projection.size() != dim * dim) {
        throw Error(ErrorCode::InvalidArgument, "parameter shapes do not match config");
    }
    auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(embedding.begin(), embedding.end(), finite) ||
        !std::all_of(projection.begin(), projection.end(), finite)) {
        throw Error(ErrorCode::InvalidArgument, "non-finite parameter");
    }
}

EncoderParams init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
    EncoderParams p;
    p.hasher = cfg.hasher;
    p.dim = cfg.dim;
    p.seed = seed;
    p.hasher.validate();
    if (cfg.dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
    Rng rng(seed);
    p.embedding.resize(static_cast<std::size_t>(cfg.hasher.bucket_count) * cfg.dim);
    for (auto& x : p.embedding) x = cfg.init_scale * rng.normal();
    p.projection.assign(cfg.dim * cfg.dim, 0.0);
    for (std::size_t i = 0; i < cfg.dim; ++i) p.projection[i * cfg.dim + i] = 1.0;
    refresh_version(p);
    return p;
}

std::uint64_t params_fingerprint(const EncoderParams& p) {
    std::uint64_t h = kFnvOffset;
    h = fnv_value(h, static_cast<std::uint64_t>(p.hasher.ngram_min));
    h = fnv_value(h, static_cast<std::uint64_t>(p.hasher.ngram_max));
    h = fnv_value(h, static_cast<std::uint64_t>(p.hasher.bucket_count));
    h = fnv_value(h, p.hasher.hash_seed);
    h = fnv_value(h, static_cast<std::uint64_t>(p.dim));
    for (double x : p.embedding) h = fnv_value(h, x);
    for (double x : p.projection) h = fnv_value(h, x);
    return h;
}

void refresh_version(EncoderParams& params) { params.version = params_fingerprint(params); }

namespace {

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view& in) {
    if (in.size() < sizeof(T)) throw Error(ErrorCode::MalformedRecord, "truncated checkpoint");
    char buf[sizeof(T)];
    std::memcpy(buf, in.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    in.remove_prefix(sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace

void save_params(const EncoderParams& params, const std::filesystem::path& path) {
    std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
    put<std::uint64_t>(out, params.hasher.hash_seed);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.hasher.ngram_min));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.hasher.ngram_max));
    put<std::uint32_t>(out, params.hasher.bucket_count);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.dim));
    put<std::uint64_t>(out, params.seed);
    put<std::uint64_t>(out, params.version);
    out.reserve(out.size() + 8 * params.parameter_count());
    for (double x : params.embedding) put(out, x);
    for (double x : params.projection) put(out, x);
    write_file(path, out);
}

EncoderParams load_params(const std::filesystem::path& path) {
    const std::string blob = read_file(path);
    std::string_view in(blob);
    if (in.size() < sizeof kCheckpointMagic || std::memcmp(in.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
        throw Error(ErrorCode::MalformedRecord, "not an encoder checkpoint: " + path.string());
    }
    in.remove_prefix(sizeof kCheckpointMagic);
    EncoderParams p;
    p.hasher.hash_seed = take<std::uint64_t>(in);
    p.hasher.ngram_min = take<std::uint32_t>(in);
    p.hasher.ngram_max = take<std::uint32_t>(in);
    p.hasher.bucket_count = take<std::uint32_t>(in);
    p.dim = take<std::uint32_t>(in);
    p.seed = take<std::uint64_t>(in);
    const auto stored_version = take<std::uint64_t>(in);
    p.hasher.validate();
    const std::size_t emb = static_cast<std::size_t>(p.hasher.bucket_count) * p.dim;
    if (in.size() != 8 * (emb + p.dim * p.dim)) throw Error(ErrorCode::MalformedRecord, "checkpoint size mismatch");
    p.embedding.resize(emb);
    for (auto& x : p.embedding) x = take<double>(in);
    p.projection.resize(p.dim * p.dim);
    for (auto& x : p.projection) x = take<double>(in);
    p.validate();
    refresh_version(p);
    if (p.version != stored_version) throw Error(ErrorCode::MalformedRecord, "checkpoint fingerprint mismatch");
    return p;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> token_preactivation(std::string_view token, const EncoderParams& params) {
    const auto ids = hash_subwords(token, params.hasher);
    const std::size_t dim = params.dim;
    std::vector<double> mean(dim, 0.0);
    for (auto id : ids) {
        const auto row = params.embedding_row(id);
        for (std::size_t i = 0; i < dim; ++i) mean[i] += row[i];
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (auto& x : mean) x *= inv;
    std::vector<double> h(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
        h[r] = dot(std::span<const double>(params.projection).subspan(r * dim, dim), mean);
    }
    return h;
}

namespace {

/// Shared by encode() and DenseStore so both paths produce identical bits.
EncodedText assemble(const std::vector<const std::vector<double>*>& pre, std::size_t dim) {
    EncodedText out;
    out.dim = dim;
    out.token_vectors.resize(pre.size() * dim);
    std::vector<double> sum(dim, 0.0);
    for (std::size_t t = 0; t < pre.size(); ++t) {
        normalize_into(*pre[t], std::span<double>(out.token_vectors).subspan(t * dim, dim));
        for (std::size_t i = 0; i < dim; ++i) sum[i] += (*pre[t])[i];
    }
    const double inv = 1.0 / static_cast<double>(pre.size());
    for (auto& x : sum) x *= inv;
    out.pooled.resize(dim);
    normalize_into(sum, out.pooled);
    return out;
}

}  // namespace

EncodedText encode(std::string_view text, const EncoderParams& params, const AnalyzerConfig& cfg) {
    const auto tokens = analyze(text, cfg);
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, "text has no tokens");
    std::vector<std::vector<double>> pre;
    pre.reserve(tokens.size());
    for (const auto& t : tokens) pre.push_back(token_preactivation(t, params));
    std::vector<const std::vector<double>*> refs;
    for (const auto& v : pre) refs.push_back(&v);
    return assemble(refs, params.dim);
}

double score_single(const EncodedText& q, const EncodedText& d) {
    if (q.dim != d.dim) throw Error(ErrorCode::DimensionMismatch, "encodings have different dims");
    return dot(q.pooled, d.pooled);
}

double score_maxsim(const EncodedText& q, const EncodedText& d) {
    if (q.dim != d.dim) throw Error(ErrorCode::DimensionMismatch, "encodings have different dims");
    double total = 0.0;
    for (std::size_t i = 0; i < q.token_count(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d.token_count(); ++j) best = std::max(best, dot(q.token(i), d.token(j)));
        if (d.token_count() > 0) total += best;
    }
    return total;
}

std::string_view to_string(ScoringMode mode) {
    switch (mode) {
        case ScoringMode::SingleVector: return "single_vector";
        case ScoringMode::MultiVectorMaxSim: return "multi_vector";
        case ScoringMode::Rerank: return "rerank";
    }
    return "unknown";
}

ScoringMode parse_scoring_mode(std::string_view name) {
    if (name == "single_vector" || name == "single") return ScoringMode::SingleVector;
    if (name == "multi_vector" || name == "multi_vector_maxsim" || name == "maxsim") return ScoringMode::MultiVectorMaxSim;
    if (name == "rerank") return ScoringMode::Rerank;
    throw Error(ErrorCode::InvalidArgument, "unknown scoring mode '" + std::string(name) + "'");
}

DenseStore DenseStore::build(const DocumentCollection& coll, const EncoderParams& params, const AnalyzerConfig& cfg) {
    DenseStore store;
    store.params_version_ = params.version;
    store.dim_ = params.dim;
    store.analyzer_ = cfg;
    const std::size_t dim = params.dim;

    std::unordered_map<std::string, std::uint32_t> vocab;
    std::vector<std::vector<double>> pre;
    store.pooled_.assign(coll.size() * dim, 0.0);
    for (std::size_t d = 0; d < coll.size(); ++d) {
        store.doc_ids_.push_back(coll[d].doc_id);
        store.doc_index_.emplace(coll[d].doc_id, d);
        std::vector<std::uint32_t> ids;
        for (const auto& tok : analyze(coll[d].text, cfg)) {
            auto [it, inserted] = vocab.emplace(tok, static_cast<std::uint32_t>(pre.size()));
            if (inserted) pre.push_back(token_preactivation(tok, params));
            ids.push_back(it->second);
        }
        if (!ids.empty()) {
            std::vector<const std::vector<double>*> refs;
            for (auto id : ids) refs.push_back(&pre[id]);
            const auto enc = assemble(refs, dim);
            std::copy(enc.pooled.begin(), enc.pooled.end(), store.pooled_.begin() + static_cast<std::ptrdiff_t>(d * dim));
        }
        store.doc_tokens_.push_back(std::move(ids));
    }
    store.vocab_vectors_.resize(pre.size() * dim);
    for (std::size_t v = 0; v < pre.size(); ++v) {
        normalize_into(pre[v], std::span<double>(store.vocab_vectors_).subspan(v * dim, dim));
    }
    return store;
}

std::optional<std::size_t> DenseStore::find(std::string_view doc_id) const {
    auto it = doc_index_.find(std::string(doc_id));
    if (it == doc_index_.end()) return std::nullopt;
    return it->second;
}

EncodedText DenseStore::encoded(std::size_t doc) const {
    EncodedText out;
    out.dim = dim_;
    for (auto id : doc_tokens_[doc]) {
        const auto v = std::span<const double>(vocab_vectors_).subspan(static_cast<std::size_t>(id) * dim_, dim_);
        out.token_vectors.insert(out.token_vectors.end(), v.begin(), v.end());
    }
    const auto p = std::span<const double>(pooled_).subspan(doc * dim_, dim_);
    out.pooled.assign(p.begin(), p.end());
    return out;
}

double DenseStore::score(const EncodedText& q, std::size_t doc, ScoringMode mode) const {
    if (q.dim != dim_) throw Error(ErrorCode::DimensionMismatch, "query dim differs from store dim");
    if (doc_tokens_[doc].empty()) return 0.0;
    if (mode == ScoringMode::SingleVector) return dot(q.pooled, std::span<const double>(pooled_).subspan(doc * dim_, dim_));
    double total = 0.0;
    for (std::size_t i = 0; i < q.token_count(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (auto id : doc_tokens_[doc]) {
            best = std::max(best, dot(q.token(i), std::span<const double>(vocab_vectors_).subspan(id * dim_, dim_)));
        }
        total += best;
    }
    return total;
}

std::vector<double> DenseStore::score_all(const EncodedText& q, ScoringMode mode) const {
    if (q.dim != dim_) throw Error(ErrorCode::DimensionMismatch, "query dim differs from store dim");
    std::vector<double> scores(size(), 0.0);
    if (mode == ScoringMode::SingleVector) {
        for (std::size_t d = 0; d < size(); ++d) scores[d] = score(q, d, mode);
        return scores;
    }
    // Query-token x vocabulary similarity table; per-document maxima are
    // lookups, summed in query-token order exactly as score_maxsim does.
    const std::size_t vocab = vocab_vectors_.size() / std::max<std::size_t>(dim_, 1);
    std::vector<double> sims(q.token_count() * vocab);
    for (std::size_t i = 0; i < q.token_count(); ++i) {
        for (std::size_t v = 0; v < vocab; ++v) {
            sims[i * vocab + v] = dot(q.token(i), std::span<const double>(vocab_vectors_).subspan(v * dim_, dim_));
        }
    }
    for (std::size_t d = 0; d < size(); ++d) {
        if (doc_tokens_[d].empty()) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < q.token_count(); ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (auto id : doc_tokens_[d]) best = std::max(best, sims[i * vocab + id]);
            total += best;
        }
        scores[d] = total;
    }
    return scores;
}

namespace {

void check_version(const EncoderParams& params, const DenseStore& store) {
    if (params.version != store.params_version()) {
        throw Error(ErrorCode::StaleEncodings, "store was encoded with different params");
    }
}

Ranking rerank_encoded(const Ranking& base, const EncodedText& q, const DenseStore& store, std::size_t k) {
    if (k > base.size()) throw Error(ErrorCode::InvalidArgument, "rerank depth exceeds base ranking");
    std::vector<std::size_t> docs;
    docs.reserve(base.size());
    for (const auto& e : base) {
        auto d = store.find(e.doc_id);
        if (!d) throw Error(ErrorCode::UnknownDocId, "doc '" + e.doc_id + "' not in store");
        docs.push_back(*d);
    }
    if (k == 0) return base;
    Ranking head;
    head.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        head.push_back({base[i].doc_id, store.score(q, docs[i], ScoringMode::MultiVectorMaxSim)});
    }
    sort_ranking(head);
    const double floor = head.back().score;
    for (std::size_t i = k; i < base.size(); ++i) {
        head.push_back({base[i].doc_id, floor - static_cast<double>(i - k + 1)});
    }
    return head;
}

}  // namespace

DenseRanking search_dense(std::string_view query_text, const EncoderParams& params, const DenseStore& store,
                          ScoringMode mode, std::size_t k, std::size_t rerank_depth) {
    check_version(params, store);
    const auto q = encode(query_text, params, store.analyzer());
    const ScoringMode first = mode == ScoringMode::Rerank ? ScoringMode::SingleVector : mode;
    const auto scores = store.score_all(q, first);
    Ranking candidates;
    candidates.reserve(store.size());
    for (std::size_t d = 0; d < store.size(); ++d) candidates.push_back({store.doc_ids()[d], scores[d]});
    DenseRanking out{select_top_k(std::move(candidates), k), params.version, mode};
    if (mode == ScoringMode::Rerank) {
        out.ranking = rerank_encoded(out.ranking, q, store, std::min(rerank_depth, out.ranking.size()));
    }
    return out;
}

Ranking rerank(const Ranking& base, std::string_view query_text, const EncoderParams& params, const DenseStore& store,
               std::size_t k) {
    check_version(params, store);
    if (k == 0) return base;
    return rerank_encoded(base, encode(query_text, params, store.analyzer()), store, k);
}

}  // namespace varietyir
