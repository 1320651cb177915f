#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varietyir/analyzer.hpp"
#include "varietyir/corpus_io.hpp"

namespace varietyir {

/// Character n-gram hashing over "<token>" (codepoints), FNV-1a 64.
struct SubwordHasherConfig {
    std::size_t ngram_min = 3;
    std::size_t ngram_max = 5;
    std::uint32_t bucket_count = 32768;
    std::uint64_t hash_seed = 0;

    void validate() const;
    bool operator==(const SubwordHasherConfig&) const = default;
};

/// FNV-1a 64-bit. A non-zero seed is hashed (8 little-endian bytes) ahead of
/// the data; seed 0 yields the textbook function.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

/// Every n-gram of "<token>" with length in [ngram_min, ngram_max].
std::vector<std::string> subword_ngrams(std::string_view token, const SubwordHasherConfig& cfg);

/// Bucket ids of subword_ngrams(token), in enumeration order. Throws EmptyToken.
std::vector<std::uint32_t> hash_subwords(std::string_view token, const SubwordHasherConfig& cfg);

struct EncoderConfig {
    SubwordHasherConfig hasher;
    std::size_t dim = 64;
    double init_scale = 0.1;
};

/// Ranker parameters: bucket_count x dim embedding table and a dim x dim
/// projection, both row-major. `version` is a content fingerprint.
struct EncoderParams {
    SubwordHasherConfig hasher;
    std::size_t dim = 0;
    std::vector<double> embedding;
    std::vector<double> projection;
    std::uint64_t seed = 0;
    std::uint64_t version = 0;

    [[nodiscard]] std::span<const double> embedding_row(std::uint32_t bucket) const {
        return std::span<const double>(embedding).subspan(static_cast<std::size_t>(bucket) * dim, dim);
    }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return embedding.size() + projection.size(); }

    /// Throws InvalidArgument on non-finite entries or inconsistent shapes.
    void validate() const;

    bool operator==(const EncoderParams&) const = default;
};

/// Gaussian embeddings scaled by init_scale; identity projection.
EncoderParams init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

std::uint64_t params_fingerprint(const EncoderParams& params);

/// Recomputes and stores the fingerprint.
void refresh_version(EncoderParams& params);

/// Binary checkpoint: magic, config, version, then raw little-endian doubles.
void save_params(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_params(const std::filesystem::path& path);

/// Pre-normalization token vector: projection * mean(subword embeddings).
std::vector<double> token_preactivation(std::string_view token, const EncoderParams& params);

/// Unit-norm per-token vectors (row-major, token_count x dim) and a unit-norm
/// pooled vector.
struct EncodedText {
    std::size_t dim = 0;
    std::vector<double> token_vectors;
    std::vector<double> pooled;

    [[nodiscard]] std::size_t token_count() const noexcept { return dim == 0 ? 0 : token_vectors.size() / dim; }
    [[nodiscard]] std::span<const double> token(std::size_t i) const {
        return std::span<const double>(token_vectors).subspan(i * dim, dim);
    }
    bool operator==(const EncodedText&) const = default;
};

/// Throws EmptyText when the analyzer yields no tokens and
/// DegenerateEmbedding when any vector is (numerically) zero.
EncodedText encode(std::string_view text, const EncoderParams& params, const AnalyzerConfig& cfg = {});

double dot(std::span<const double> a, std::span<const double> b);

/// Cosine of pooled vectors. Throws DimensionMismatch.
double score_single(const EncodedText& q, const EncodedText& d);

/// Sum over query tokens of the best cosine against any document token.
double score_maxsim(const EncodedText& q, const EncodedText& d);

enum class ScoringMode { SingleVector, MultiVectorMaxSim, Rerank };

std::string_view to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view name);

/// Pre-encoded documents for exhaustive dense search. Token vectors are
/// stored once per distinct token.
class DenseStore {
public:
    DenseStore() = default;

    static DenseStore build(const DocumentCollection& coll, const EncoderParams& params,
                            const AnalyzerConfig& cfg = {});

    [[nodiscard]] std::uint64_t params_version() const noexcept { return params_version_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return doc_ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    [[nodiscard]] const AnalyzerConfig& analyzer() const noexcept { return analyzer_; }
    [[nodiscard]] std::optional<std::size_t> find(std::string_view doc_id) const;

    /// Reassembles the document's EncodedText (empty for token-less docs).
    [[nodiscard]] EncodedText encoded(std::size_t doc) const;

    /// Scores every document; documents without tokens score 0.
    [[nodiscard]] std::vector<double> score_all(const EncodedText& q, ScoringMode mode) const;
    [[nodiscard]] double score(const EncodedText& q, std::size_t doc, ScoringMode mode) const;

private:
    std::uint64_t params_version_ = 0;
    std::size_t dim_ = 0;
    AnalyzerConfig analyzer_;
    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, std::size_t> doc_index_;
    std::vector<double> vocab_vectors_;                 // distinct tokens, unit norm
    std::vector<std::vector<std::uint32_t>> doc_tokens_;  // indices into vocab, document order
    std::vector<double> pooled_;                          // size() x dim; zero rows for empty docs
};

struct DenseRanking {
    Ranking ranking;
    std::uint64_t params_version = 0;
    ScoringMode mode = ScoringMode::SingleVector;
};

/// Exhaustive top-k. Rerank mode retrieves with the single-vector scorer and
/// re-scores the first `rerank_depth` hits with MaxSim. Throws StaleEncodings
/// when the store was built from different params.
DenseRanking search_dense(std::string_view query_text, const EncoderParams& params, const DenseStore& store,
                          ScoringMode mode, std::size_t k, std::size_t rerank_depth = 100);

/// Re-scores the top `k` of `base` with MaxSim. The tail keeps base order and
/// receives placeholder scores strictly below the reranked head, so the
/// output is a permutation of the input. Throws UnknownDocId, StaleEncodings,
/// InvalidArgument when k > |base|.
Ranking rerank(const Ranking& base, std::string_view query_text, const EncoderParams& params,
               const DenseStore& store, std::size_t k);

}  // namespace varietyir
