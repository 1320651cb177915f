#include "varietyir/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "varietyir/utf8.hpp"

namespace varietyir {

namespace {

/// Calls fn(line, 1-based line number) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view contents, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        auto end = contents.find('\n', pos);
        if (end == std::string_view::npos) end = contents.size();
        std::string_view line = contents.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (!line.empty()) fn(line, line_no);
        pos = end + 1;
    }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        out.push_back(line.substr(start, i - start));
    }
    return out;
}

struct RawRecord {
    std::string id;
    std::string text;
    std::string language_tag;
};

std::vector<RawRecord> parse_records(std::string_view contents, const LoadOptions& options,
                                     std::string_view id_key) {
    std::vector<RawRecord> out;
    std::set<std::string, std::less<>> seen;
    for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
        if (!utf8::is_valid(line)) throw Error(ErrorCode::MalformedRecord, "invalid UTF-8", line_no);
        RawRecord rec;
        if (options.format == RecordFormat::Tsv) {
            auto fields = split(line, '\t');
            if (fields.size() < 2 || fields.size() > 3) {
                throw Error(ErrorCode::MalformedRecord, "expected <id>\\t<text>[\\t<language_tag>]", line_no);
            }
            rec.id = fields[0];
            rec.text = fields[1];
            if (fields.size() == 3) rec.language_tag = fields[2];
        } else {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
            }
            auto field = [&](std::string_view key, bool required) -> std::string {
                auto it = j.is_object() ? j.find(key) : j.end();
                if (it == j.end()) {
                    if (required) throw Error(ErrorCode::MalformedRecord, "missing '" + std::string(key) + "'", line_no);
                    return {};
                }
                if (!it->is_string()) {
                    throw Error(ErrorCode::MalformedRecord, "'" + std::string(key) + "' must be a string", line_no);
                }
                return it->get<std::string>();
            };
            rec.id = field(id_key, true);
            rec.text = field("text", true);
            rec.language_tag = field("language_tag", false);
        }
        if (rec.id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id", line_no);
        if (rec.text.empty() && !options.allow_empty_text) {
            throw Error(ErrorCode::MalformedRecord, "empty text", line_no);
        }
        if (seen.contains(rec.id)) throw Error(ErrorCode::DuplicateId, "duplicate id '" + rec.id + "'", line_no);
        seen.insert(rec.id);
        out.push_back(std::move(rec));
    });
    return out;
}

int parse_int(std::string_view field, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::MalformedRecord, "not an integer: '" + std::string(field) + "'", line_no);
    }
    return value;
}

std::string tsv_line(const std::string& id, const std::string& text, const std::string& tag) {
    std::string line = id + '\t' + text;
    if (!tag.empty()) line += '\t' + tag;
    line += '\n';
    return line;
}

}  // namespace

RecordFormat parse_record_format(std::string_view name) {
    if (name == "tsv") return RecordFormat::Tsv;
    if (name == "jsonl") return RecordFormat::Jsonl;
    throw Error(ErrorCode::InvalidArgument, "unknown record format '" + std::string(name) + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed: " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open for writing " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

DocumentCollection parse_collection(std::string_view contents, const LoadOptions& options) {
    std::vector<Document> docs;
    for (auto& r : parse_records(contents, options, "doc_id")) {
        docs.push_back({std::move(r.id), std::move(r.text), std::move(r.language_tag)});
    }
    return DocumentCollection(std::move(docs));
}

QuerySet parse_queries(std::string_view contents, const LoadOptions& options) {
    std::vector<Query> queries;
    for (auto& r : parse_records(contents, options, "query_id")) {
        queries.push_back({std::move(r.id), std::move(r.text), std::move(r.language_tag)});
    }
    return QuerySet(std::move(queries));
}

DocumentCollection load_collection(const std::filesystem::path& path, const LoadOptions& options) {
    return parse_collection(read_file(path), options);
}

QuerySet load_queries(const std::filesystem::path& path, const LoadOptions& options) {
    return parse_queries(read_file(path), options);
}

void write_collection(const DocumentCollection& docs, const std::filesystem::path& path) {
    std::string out;
    for (const auto& d : docs) out += tsv_line(d.doc_id, d.text, d.language_tag);
    write_file(path, out);
}

void write_queries(const QuerySet& queries, const std::filesystem::path& path) {
    std::string out;
    for (const auto& q : queries) out += tsv_line(q.query_id, q.text, q.language_tag);
    write_file(path, out);
}

Qrels parse_qrels(std::string_view contents) {
    Qrels qrels;
    for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_whitespace(line);
        if (fields.size() != 4) throw Error(ErrorCode::MalformedRecord, "expected 'qid 0 docid grade'", line_no);
        const int grade = parse_int(fields[3], line_no);
        if (grade < 0) throw Error(ErrorCode::NegativeGrade, "grade " + std::to_string(grade), line_no);
        auto& judged = qrels[std::string(fields[0])];
        if (!judged.emplace(std::string(fields[2]), grade).second) {
            throw Error(ErrorCode::DuplicateId,
                        "duplicate judgment " + std::string(fields[0]) + "/" + std::string(fields[2]), line_no);
        }
    });
    return qrels;
}

Qrels load_qrels(const std::filesystem::path& path) { return parse_qrels(read_file(path)); }

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
    std::string out;
    for (const auto& [qid, judged] : qrels) {
        for (const auto& [docid, grade] : judged) out += qid + " 0 " + docid + " " + std::to_string(grade) + "\n";
    }
    write_file(path, out);
}

bool ranking_order(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

void sort_ranking(Ranking& ranking) { std::sort(ranking.begin(), ranking.end(), ranking_order); }

std::string format_run_line(std::string_view query_id, std::string_view doc_id, std::size_t rank, double score,
                            std::string_view run_tag) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", score);
    std::string line;
    line.reserve(query_id.size() + doc_id.size() + run_tag.size() + 32);
    line.append(query_id).append(" Q0 ").append(doc_id).append(" ").append(std::to_string(rank));
    line.append(" ").append(buf).append(" ").append(run_tag).append("\n");
    return line;
}

std::string format_run(const Run& run, std::string_view run_tag) {
    std::string out;
    for (const auto& [qid, ranking] : run) {
        std::set<std::string_view> seen;
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            if (i > 0 && ranking_order(ranking[i], ranking[i - 1])) {
                throw Error(ErrorCode::UnsortedRanking, "ranking for " + qid + " is not best-first");
            }
            if (!seen.insert(ranking[i].doc_id).second) {
                throw Error(ErrorCode::DuplicateId, "doc " + ranking[i].doc_id + " repeated for " + qid);
            }
            out += format_run_line(qid, ranking[i].doc_id, i + 1, ranking[i].score, run_tag);
        }
    }
    return out;
}

void write_run(const Run& run, std::string_view run_tag, const std::filesystem::path& path) {
    write_file(path, format_run(run, run_tag));
}

std::vector<RunEntry> parse_run_entries(std::string_view contents) {
    std::vector<RunEntry> entries;
    for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_whitespace(line);
        if (fields.size() != 6) {
            throw Error(ErrorCode::MalformedRecord, "expected 'qid Q0 docid rank score tag'", line_no);
        }
        const int rank = parse_int(fields[3], line_no);
        if (rank < 1) throw Error(ErrorCode::MalformedRecord, "rank must be >= 1", line_no);
        double score = 0.0;
        auto [ptr, ec] = std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), score);
        if (ec != std::errc{} || ptr != fields[4].data() + fields[4].size()) {
            throw Error(ErrorCode::MalformedRecord, "bad score '" + std::string(fields[4]) + "'", line_no);
        }
        entries.push_back({std::string(fields[0]), std::string(fields[2]), static_cast<std::size_t>(rank), score,
                           std::string(fields[5])});
    });
    return entries;
}

Run parse_run(std::string_view contents) {
    std::map<std::string, std::vector<RunEntry>> grouped;
    for (auto& e : parse_run_entries(contents)) grouped[e.query_id].push_back(std::move(e));
    Run run;
    for (auto& [qid, entries] : grouped) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
        Ranking ranking;
        std::set<std::string_view> seen;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].rank != i + 1) {
                throw Error(ErrorCode::NonContiguousRanks, "query " + qid + " ranks are not 1..n");
            }
            if (!seen.insert(entries[i].doc_id).second) {
                throw Error(ErrorCode::DuplicateId, "doc " + entries[i].doc_id + " repeated for " + qid);
            }
            if (i > 0 && entries[i].score > entries[i - 1].score) {
                throw Error(ErrorCode::UnsortedRanking, "query " + qid + " scores increase with rank");
            }
            ranking.push_back({entries[i].doc_id, entries[i].score});
        }
        run.emplace(qid, std::move(ranking));
    }
    return run;
}

Run read_run(const std::filesystem::path& path) { return parse_run(read_file(path)); }

}  // namespace varietyir
