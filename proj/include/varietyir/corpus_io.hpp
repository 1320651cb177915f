#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varietyir/error.hpp"

namespace varietyir {

struct Document {
    std::string doc_id;
    std::string text;
    std::string language_tag;

    bool operator==(const Document&) const = default;
};

struct Query {
    std::string query_id;
    std::string text;
    std::string language_tag;

    bool operator==(const Query&) const = default;
};

inline const std::string& record_id(const Document& d) { return d.doc_id; }
inline const std::string& record_id(const Query& q) { return q.query_id; }

/// Ordered, id-unique collection of records. Immutable once built.
template <typename Record>
class RecordSet {
public:
    RecordSet() = default;

    /// Throws DuplicateId (with the 1-based position of the repeat) or
    /// MalformedRecord for an empty id.
    explicit RecordSet(std::vector<Record> records) : records_(std::move(records)) {
        index_.reserve(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& id = record_id(records_[i]);
            if (id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id", i + 1);
            if (!index_.emplace(id, i).second) {
                throw Error(ErrorCode::DuplicateId, "duplicate id '" + id + "'", i + 1);
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] const Record& operator[](std::size_t i) const { return records_[i]; }
    [[nodiscard]] std::span<const Record> records() const noexcept { return records_; }
    [[nodiscard]] auto begin() const noexcept { return records_.begin(); }
    [[nodiscard]] auto end() const noexcept { return records_.end(); }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool operator==(const RecordSet& other) const { return records_ == other.records_; }

private:
    std::vector<Record> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

using DocumentCollection = RecordSet<Document>;
using QuerySet = RecordSet<Query>;

/// query_id -> (doc_id -> grade).
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct QrelEntry {
    std::string query_id;
    std::string doc_id;
    int grade = 0;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Ordered best-first.
using Ranking = std::vector<ScoredDoc>;

/// query_id -> ranking. Ordered map so serialization order is stable.
using Run = std::map<std::string, Ranking>;

struct RunEntry {
    std::string query_id;
    std::string doc_id;
    std::size_t rank = 0;
    double score = 0.0;
    std::string run_tag;
};

enum class RecordFormat { Tsv, Jsonl };

RecordFormat parse_record_format(std::string_view name);

struct LoadOptions {
    RecordFormat format = RecordFormat::Tsv;
    bool allow_empty_text = false;
};

DocumentCollection load_collection(const std::filesystem::path& path, const LoadOptions& options = {});
QuerySet load_queries(const std::filesystem::path& path, const LoadOptions& options = {});

DocumentCollection parse_collection(std::string_view contents, const LoadOptions& options = {});
QuerySet parse_queries(std::string_view contents, const LoadOptions& options = {});

void write_collection(const DocumentCollection& docs, const std::filesystem::path& path);
void write_queries(const QuerySet& queries, const std::filesystem::path& path);

Qrels load_qrels(const std::filesystem::path& path);
Qrels parse_qrels(std::string_view contents);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

/// Sorts best-first: score descending, doc_id ascending on ties.
void sort_ranking(Ranking& ranking);
bool ranking_order(const ScoredDoc& a, const ScoredDoc& b);

/// One TREC line: `qid Q0 docid rank score tag` with six-decimal score.
std::string format_run_line(std::string_view query_id, std::string_view doc_id, std::size_t rank, double score,
                            std::string_view run_tag);
std::string format_run(const Run& run, std::string_view run_tag);
void write_run(const Run& run, std::string_view run_tag, const std::filesystem::path& path);

Run parse_run(std::string_view contents);
Run read_run(const std::filesystem::path& path);
std::vector<RunEntry> parse_run_entries(std::string_view contents);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace varietyir
