#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varietyir/analyzer.hpp"
#include "varietyir/corpus_io.hpp"

namespace varietyir {

struct BM25Params {
    double k1 = 0.9;
    double b = 0.4;

    /// Throws InvalidArgument unless k1 > 0 and b in [0, 1].
    void validate() const;
};

struct Posting {
    std::uint32_t doc_index = 0;
    std::uint32_t term_frequency = 0;

    bool operator==(const Posting&) const = default;
};

/// Postings plus collection statistics for BM25. Immutable after build.
class InvertedIndex {
public:
    InvertedIndex() = default;

    [[nodiscard]] const AnalyzerConfig& analyzer() const noexcept { return analyzer_; }
    [[nodiscard]] std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    [[nodiscard]] double avgdl() const noexcept { return avgdl_; }
    [[nodiscard]] std::size_t term_count() const noexcept { return postings_.size(); }
    [[nodiscard]] const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    [[nodiscard]] const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }

    /// Empty span for unknown terms.
    [[nodiscard]] std::span<const Posting> postings(std::string_view term) const;
    [[nodiscard]] std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }

    /// Terms in ascending byte order.
    [[nodiscard]] std::vector<std::string> sorted_terms() const;

    bool operator==(const InvertedIndex& other) const;

    friend InvertedIndex build_index(const DocumentCollection&, const AnalyzerConfig&);
    friend InvertedIndex parse_index_snapshot(std::string_view);

private:
    void finalize_stats();

    AnalyzerConfig analyzer_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    std::vector<std::string> doc_ids_;
    double avgdl_ = 0.0;
};

/// Throws EmptyCollection for an empty collection.
InvertedIndex build_index(const DocumentCollection& coll, const AnalyzerConfig& cfg = {});

/// Robertson–Spärck Jones idf with +1 inside the log; always positive.
double bm25_idf(std::size_t doc_count, std::size_t df);

/// Saturated term-frequency component for one (term, document) pair.
double bm25_tf_component(double tf, double doc_length, double avgdl, const BM25Params& params);

/// Top-k documents by BM25, best-first with doc_id tie-break. Documents with
/// zero score are dropped. Repeated query terms contribute once per occurrence.
Ranking bm25_search(std::string_view query_text, const InvertedIndex& idx, const BM25Params& params,
                    std::size_t k);

/// Full-scan reference scorer: re-analyzes every document. One score per
/// document, in collection order.
std::vector<double> bm25_score_naive(std::string_view query_text, const DocumentCollection& coll,
                                     const BM25Params& params, const AnalyzerConfig& cfg = {});

/// Versioned text snapshot. Loading reproduces search results bit-exactly.
std::string format_index_snapshot(const InvertedIndex& idx);
InvertedIndex parse_index_snapshot(std::string_view contents);
void save_index(const InvertedIndex& idx, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

/// Shared top-k selection: best-first, doc_id ascending on ties.
Ranking select_top_k(Ranking candidates, std::size_t k);

}  // namespace varietyir
