#include "varietyir/lexical_index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "varietyir/error.hpp"

namespace varietyir {

namespace {
constexpr std::string_view kSnapshotMagic = "varietyir-index 1";
}

void BM25Params::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) throw Error(ErrorCode::InvalidArgument, "BM25 k1 must be > 0");
    if (!(b >= 0.0 && b <= 1.0)) throw Error(ErrorCode::InvalidArgument, "BM25 b must be in [0, 1]");
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

std::vector<std::string> InvertedIndex::sorted_terms() const {
    std::vector<std::string> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, _] : postings_) terms.push_back(term);
    std::sort(terms.begin(), terms.end());
    return terms;
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
    return analyzer_ == other.analyzer_ && doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ &&
           avgdl_ == other.avgdl_ && postings_ == other.postings_;
}

void InvertedIndex::finalize_stats() {
    double total = 0.0;
    for (auto len : doc_lengths_) total += len;
    avgdl_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

InvertedIndex build_index(const DocumentCollection& coll, const AnalyzerConfig& cfg) {
    if (coll.empty()) throw Error(ErrorCode::EmptyCollection, "cannot index an empty collection");
    InvertedIndex idx;
    idx.analyzer_ = cfg;
    idx.doc_ids_.reserve(coll.size());
    idx.doc_lengths_.reserve(coll.size());
    std::unordered_map<std::string, std::uint32_t> tf;
    for (std::size_t i = 0; i < coll.size(); ++i) {
        const auto tokens = analyze(coll[i].text, cfg);
        idx.doc_ids_.push_back(coll[i].doc_id);
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        tf.clear();
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            idx.postings_[term].push_back({static_cast<std::uint32_t>(i), count});
        }
    }
    idx.finalize_stats();
    return idx;
}

double bm25_idf(std::size_t doc_count, std::size_t df) {
    const auto n = static_cast<double>(doc_count);
    const auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double bm25_tf_component(double tf, double doc_length, double avgdl, const BM25Params& params) {
    const double norm = avgdl > 0.0 ? doc_length / avgdl : 1.0;
    return tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
}

Ranking select_top_k(Ranking candidates, std::size_t k) {
    if (k < candidates.size()) {
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                          ranking_order);
        candidates.resize(k);
    } else {
        std::sort(candidates.begin(), candidates.end(), ranking_order);
    }
    return candidates;
}

Ranking bm25_search(std::string_view query_text, const InvertedIndex& idx, const BM25Params& params, std::size_t k) {
    params.validate();
    const auto terms = analyze(query_text, idx.analyzer());
    std::vector<double> scores(idx.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& term : terms) {
        const auto plist = idx.postings(term);
        if (plist.empty()) continue;
        const double idf = bm25_idf(idx.doc_count(), plist.size());
        for (const auto& p : plist) {
            if (scores[p.doc_index] == 0.0) touched.push_back(p.doc_index);
            scores[p.doc_index] +=
                idf * bm25_tf_component(p.term_frequency, idx.doc_lengths()[p.doc_index], idx.avgdl(), params);
        }
    }
    Ranking candidates;
    candidates.reserve(touched.size());
    for (auto d : touched) {
        if (scores[d] > 0.0) candidates.push_back({idx.doc_ids()[d], scores[d]});
    }
    return select_top_k(std::move(candidates), k);
}

std::vector<double> bm25_score_naive(std::string_view query_text, const DocumentCollection& coll,
                                     const BM25Params& params, const AnalyzerConfig& cfg) {
    params.validate();
    const auto terms = analyze(query_text, cfg);
    std::vector<std::vector<std::string>> doc_tokens;
    doc_tokens.reserve(coll.size());
    double total = 0.0;
    for (const auto& d : coll) {
        doc_tokens.push_back(analyze(d.text, cfg));
        total += static_cast<double>(doc_tokens.back().size());
    }
    const double avgdl = coll.empty() ? 0.0 : total / static_cast<double>(coll.size());

    std::vector<double> scores(coll.size(), 0.0);
    for (const auto& term : terms) {
        std::size_t df = 0;
        for (const auto& toks : doc_tokens) {
            if (std::find(toks.begin(), toks.end(), term) != toks.end()) ++df;
        }
        if (df == 0) continue;
        const double idf = bm25_idf(coll.size(), df);
        for (std::size_t i = 0; i < coll.size(); ++i) {
            const auto tf = std::count(doc_tokens[i].begin(), doc_tokens[i].end(), term);
            if (tf == 0) continue;
            scores[i] += idf * bm25_tf_component(static_cast<double>(tf), static_cast<double>(doc_tokens[i].size()),
                                                 avgdl, params);
        }
    }
    return scores;
}

std::string format_index_snapshot(const InvertedIndex& idx) {
    std::string out(kSnapshotMagic);
    out += "\nanalyzer " + describe(idx.analyzer()) + "\n";
    out += "docs " + std::to_string(idx.doc_count()) + "\n";
    for (std::size_t i = 0; i < idx.doc_count(); ++i) {
        out += idx.doc_ids()[i] + "\t" + std::to_string(idx.doc_lengths()[i]) + "\n";
    }
    const auto terms = idx.sorted_terms();
    out += "terms " + std::to_string(terms.size()) + "\n";
    for (const auto& term : terms) {
        out += term;
        for (const auto& p : idx.postings(term)) {
            out += "\t" + std::to_string(p.doc_index) + ":" + std::to_string(p.term_frequency);
        }
        out += "\n";
    }
    return out;
}

namespace {

struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    std::string_view next() {
        if (pos >= text.size()) throw Error(ErrorCode::MalformedRecord, "truncated index snapshot", line_no + 1);
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        return line;
    }
};

template <typename T>
T parse_number(std::string_view s, std::size_t line_no) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::MalformedRecord, "bad number '" + std::string(s) + "'", line_no);
    }
    return value;
}

std::size_t parse_count(std::string_view line, std::string_view keyword, std::size_t line_no) {
    if (!line.starts_with(keyword) || line.size() <= keyword.size() + 1 || line[keyword.size()] != ' ') {
        throw Error(ErrorCode::MalformedRecord, "expected '" + std::string(keyword) + " <n>'", line_no);
    }
    return parse_number<std::size_t>(line.substr(keyword.size() + 1), line_no);
}

}  // namespace

InvertedIndex parse_index_snapshot(std::string_view contents) {
    LineReader reader{contents};
    if (reader.next() != kSnapshotMagic) throw Error(ErrorCode::MalformedRecord, "not an index snapshot", 1);
    InvertedIndex idx;
    auto analyzer_line = reader.next();
    if (!analyzer_line.starts_with("analyzer ")) {
        throw Error(ErrorCode::MalformedRecord, "expected analyzer line", reader.line_no);
    }
    idx.analyzer_ = parse_analyzer_description(analyzer_line.substr(9));
    const std::size_t docs = parse_count(reader.next(), "docs", reader.line_no);
    for (std::size_t i = 0; i < docs; ++i) {
        auto line = reader.next();
        auto tab = line.rfind('\t');
        if (tab == std::string_view::npos || tab == 0) {
            throw Error(ErrorCode::MalformedRecord, "expected <doc_id>\\t<length>", reader.line_no);
        }
        idx.doc_ids_.emplace_back(line.substr(0, tab));
        idx.doc_lengths_.push_back(parse_number<std::uint32_t>(line.substr(tab + 1), reader.line_no));
    }
    const std::size_t terms = parse_count(reader.next(), "terms", reader.line_no);
    for (std::size_t t = 0; t < terms; ++t) {
        auto line = reader.next();
        auto tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0) {
            throw Error(ErrorCode::MalformedRecord, "expected term postings", reader.line_no);
        }
        std::vector<Posting> plist;
        std::size_t pos = tab + 1;
        while (pos <= line.size()) {
            auto end = line.find('\t', pos);
            if (end == std::string_view::npos) end = line.size();
            auto item = line.substr(pos, end - pos);
            auto colon = item.find(':');
            if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedRecord, "bad posting", reader.line_no);
            Posting p{parse_number<std::uint32_t>(item.substr(0, colon), reader.line_no),
                      parse_number<std::uint32_t>(item.substr(colon + 1), reader.line_no)};
            if (p.doc_index >= docs || (!plist.empty() && p.doc_index <= plist.back().doc_index)) {
                throw Error(ErrorCode::MalformedRecord, "postings out of order", reader.line_no);
            }
            plist.push_back(p);
            pos = end + 1;
        }
        idx.postings_.emplace(std::string(line.substr(0, tab)), std::move(plist));
    }
    idx.finalize_stats();
    return idx;
}

void save_index(const InvertedIndex& idx, const std::filesystem::path& path) {
    write_file(path, format_index_snapshot(idx));
}

InvertedIndex load_index(const std::filesystem::path& path) { return parse_index_snapshot(read_file(path)); }

}  // namespace varietyir
