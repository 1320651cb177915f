#include "varietyir/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "varietyir/error.hpp"

namespace varietyir {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        auto end = value.find(',', pos);
        if (end == std::string_view::npos) end = value.size();
        auto item = trim(value.substr(pos, end - pos));
        if (!item.empty()) out.push_back(item);
        pos = end + 1;
    }
    return out;
}

[[noreturn]] void invalid(std::string_view key, std::string_view value) {
    throw Error(ErrorCode::ConfigInvalid, "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) invalid(key, value);
    return v;
}

std::size_t to_size(std::string_view key, std::string_view value) { return static_cast<std::size_t>(to_u64(key, value)); }

double to_double(std::string_view key, std::string_view value) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) invalid(key, value);
    return v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    invalid(key, value);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn&& fn) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += fn(items[i]);
    }
    return out;
}

const std::vector<std::string> kKnownRankers{"bm25", "single_vector", "multi_vector", "rerank"};

}  // namespace

void CorpusSpec::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
    if (doc_count < 1) fail("doc_count must be >= 1");
    if (vocab_size < 2) fail("vocab_size must be >= 2");
    if (passage_min_len < 1 || passage_min_len > passage_max_len) fail("need 1 <= passage_min_len <= passage_max_len");
    if (train_queries < 1 || eval_queries < 1) fail("query counts must be >= 1");
    if (train_queries + eval_queries > doc_count) fail("train_queries + eval_queries must not exceed doc_count");
    if (query_min_len < 1 || query_min_len > query_max_len) fail("need 1 <= query_min_len <= query_max_len");
    if (!(zipf_exponent >= 0.0)) fail("zipf_exponent must be >= 0");
}

bool ExperimentConfig::has_ranker(std::string_view name) const {
    return std::find(rankers.begin(), rankers.end(), name) != rankers.end();
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
    corpus.validate();
    if (family_rule_files.empty()) {
        if (families < 2) fail("need >= 2 families");
        if (families > 4) fail("at most 4 generated families are supported");
        if (rules_per_family < 1) fail("rules_per_family must be >= 1");
        if (!(rule_fraction > 0.0 && rule_fraction <= 1.0)) fail("rule_fraction must be in (0, 1]");
    } else if (family_rule_files.size() < 2) {
        fail("need >= 2 family rule files");
    }
    if (varieties_per_family < 2) fail("need >= 2 varieties per family");
    if (rankers.empty()) fail("no rankers selected");
    for (const auto& r : rankers) {
        if (std::find(kKnownRankers.begin(), kKnownRankers.end(), r) == kKnownRankers.end()) fail("unknown ranker '" + r + "'");
    }
    if (retrieval_depth < 1 || rerank_depth < 1) fail("retrieval and rerank depths must be >= 1");
    if (seeds.empty()) fail("need >= 1 seed");
    if (metrics.empty()) fail("need >= 1 metric");
    try {
        bm25.validate();
        encoder.hasher.validate();
        train.validate();
        for (const auto& m : metrics) m.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    if (encoder.dim < 2) fail("dim must be >= 2");
    if (!(encoder.init_scale > 0.0)) fail("init_scale must be > 0");
}

std::vector<std::string> experiment_config_keys() {
    return {"doc_count", "vocab_size", "passage_min_len", "passage_max_len", "train_queries", "eval_queries",
            "query_min_len", "query_max_len", "query_noise_words", "zipf_exponent", "families", "varieties_per_family", "rules_per_family",
            "rule_fraction", "family_rule_files", "train_pair", "rankers", "retrieval_depth", "rerank_depth", "bm25_k1",
            "bm25_b", "lowercase", "unicode_normalization", "cjk_mode", "dim", "buckets", "ngram_min", "ngram_max",
            "hash_seed", "init_scale", "epochs", "batch_size", "learning_rate", "temperature", "negatives_per_query",
            "negative_source", "loss_mode", "metrics", "seeds", "write_runs", "run_file_depth", "out"};
}

void apply_config_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    auto& c = cfg.corpus;
    if (key == "doc_count") c.doc_count = to_size(key, value);
    else if (key == "vocab_size") c.vocab_size = to_size(key, value);
    else if (key == "passage_min_len") c.passage_min_len = to_size(key, value);
    else if (key == "passage_max_len") c.passage_max_len = to_size(key, value);
    else if (key == "train_queries") c.train_queries = to_size(key, value);
    else if (key == "eval_queries") c.eval_queries = to_size(key, value);
    else if (key == "query_min_len") c.query_min_len = to_size(key, value);
    else if (key == "query_max_len") c.query_max_len = to_size(key, value);
    else if (key == "query_noise_words") c.query_noise_words = to_size(key, value);
    else if (key == "zipf_exponent") c.zipf_exponent = to_double(key, value);
    else if (key == "families") cfg.families = to_size(key, value);
    else if (key == "varieties_per_family") cfg.varieties_per_family = to_size(key, value);
    else if (key == "rules_per_family") cfg.rules_per_family = to_size(key, value);
    else if (key == "rule_fraction") cfg.rule_fraction = to_double(key, value);
    else if (key == "family_rule_files") {
        cfg.family_rule_files.clear();
        for (auto item : split_list(value)) cfg.family_rule_files.emplace_back(item);
    } else if (key == "train_pair") cfg.train_pair = std::string(value);
    else if (key == "rankers") {
        cfg.rankers.clear();
        for (auto item : split_list(value)) cfg.rankers.emplace_back(item);
    } else if (key == "retrieval_depth") cfg.retrieval_depth = to_size(key, value);
    else if (key == "rerank_depth") cfg.rerank_depth = to_size(key, value);
    else if (key == "bm25_k1") cfg.bm25.k1 = to_double(key, value);
    else if (key == "bm25_b") cfg.bm25.b = to_double(key, value);
    else if (key == "lowercase") cfg.analyzer.lowercase = to_bool(key, value);
    else if (key == "unicode_normalization") {
        if (value == "nfkc") cfg.analyzer.unicode_normalization = UnicodeNormalization::CompatibilityComposed;
        else if (value == "none") cfg.analyzer.unicode_normalization = UnicodeNormalization::None;
        else invalid(key, value);
    } else if (key == "cjk_mode") {
        if (value == "unigram") cfg.analyzer.cjk_mode = CjkMode::CodepointUnigram;
        else if (value == "off") cfg.analyzer.cjk_mode = CjkMode::Off;
        else invalid(key, value);
    } else if (key == "dim") cfg.encoder.dim = to_size(key, value);
    else if (key == "buckets") cfg.encoder.hasher.bucket_count = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "ngram_min") cfg.encoder.hasher.ngram_min = to_size(key, value);
    else if (key == "ngram_max") cfg.encoder.hasher.ngram_max = to_size(key, value);
    else if (key == "hash_seed") cfg.encoder.hasher.hash_seed = to_u64(key, value);
    else if (key == "init_scale") cfg.encoder.init_scale = to_double(key, value);
    else if (key == "epochs") cfg.train.epochs = to_size(key, value);
    else if (key == "batch_size") cfg.train.batch_size = to_size(key, value);
    else if (key == "learning_rate") cfg.train.learning_rate = to_double(key, value);
    else if (key == "temperature") cfg.train.temperature = to_double(key, value);
    else if (key == "negatives_per_query") cfg.train.negatives_per_query = to_size(key, value);
    else if (key == "negative_source") {
        try {
            cfg.train.negative_source = parse_negative_source(value);
        } catch (const Error&) {
            invalid(key, value);
        }
    } else if (key == "loss_mode") {
        // Each neural ranker trains with its own scorer; this only affects `varietyir train`.
        try {
            cfg.train.loss_mode = parse_scoring_mode(value);
        } catch (const Error&) {
            invalid(key, value);
        }
    } else if (key == "metrics") {
        cfg.metrics.clear();
        try {
            for (auto item : split_list(value)) cfg.metrics.push_back(parse_metric(item));
        } catch (const Error&) {
            invalid(key, value);
        }
    } else if (key == "seeds") {
        cfg.seeds.clear();
        for (auto item : split_list(value)) cfg.seeds.push_back(to_u64(key, item));
    } else if (key == "write_runs") cfg.write_runs = to_bool(key, value);
    else if (key == "run_file_depth") cfg.run_file_depth = to_size(key, value);
    else if (key == "out") cfg.out = std::string(value);
    else throw Error(ErrorCode::ConfigInvalid, "unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_experiment_config(std::string_view text) {
    ExperimentConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigInvalid, "expected 'key = value'", line_no);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            apply_config_setting(cfg, key, value);
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigInvalid, e.what(), line_no);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path));
}

std::string ExperimentConfig::canonical() const {
    const auto& c = corpus;
    std::string out;
    auto kv = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
    kv("doc_count", std::to_string(c.doc_count));
    kv("vocab_size", std::to_string(c.vocab_size));
    kv("passage_min_len", std::to_string(c.passage_min_len));
    kv("passage_max_len", std::to_string(c.passage_max_len));
    kv("train_queries", std::to_string(c.train_queries));
    kv("eval_queries", std::to_string(c.eval_queries));
    kv("query_min_len", std::to_string(c.query_min_len));
    kv("query_max_len", std::to_string(c.query_max_len));
    kv("query_noise_words", std::to_string(c.query_noise_words));
    kv("zipf_exponent", fmt_double(c.zipf_exponent));
    kv("families", std::to_string(families));
    kv("varieties_per_family", std::to_string(varieties_per_family));
    kv("rules_per_family", std::to_string(rules_per_family));
    kv("rule_fraction", fmt_double(rule_fraction));
    kv("family_rule_files", join(family_rule_files, [](const auto& p) { return p.string(); }));
    kv("train_pair", train_pair);
    kv("rankers", join(rankers, [](const auto& r) { return r; }));
    kv("retrieval_depth", std::to_string(retrieval_depth));
    kv("rerank_depth", std::to_string(rerank_depth));
    kv("bm25_k1", fmt_double(bm25.k1));
    kv("bm25_b", fmt_double(bm25.b));
    kv("lowercase", analyzer.lowercase ? "true" : "false");
    kv("unicode_normalization", analyzer.unicode_normalization == UnicodeNormalization::CompatibilityComposed ? "nfkc" : "none");
    kv("cjk_mode", analyzer.cjk_mode == CjkMode::CodepointUnigram ? "unigram" : "off");
    kv("dim", std::to_string(encoder.dim));
    kv("buckets", std::to_string(encoder.hasher.bucket_count));
    kv("ngram_min", std::to_string(encoder.hasher.ngram_min));
    kv("ngram_max", std::to_string(encoder.hasher.ngram_max));
    kv("hash_seed", std::to_string(encoder.hasher.hash_seed));
    kv("init_scale", fmt_double(encoder.init_scale));
    kv("epochs", std::to_string(train.epochs));
    kv("batch_size", std::to_string(train.batch_size));
    kv("learning_rate", fmt_double(train.learning_rate));
    kv("temperature", fmt_double(train.temperature));
    kv("negatives_per_query", std::to_string(train.negatives_per_query));
    kv("negative_source", std::string(to_string(train.negative_source)));
    kv("loss_mode", std::string(to_string(train.loss_mode)));
    kv("metrics", join(metrics, [](const MetricSpec& m) {
           return m.kind == MetricKind::Ndcg || m.threshold == 1 ? m.name() : m.name() + "/" + std::to_string(m.threshold);
       }));
    kv("seeds", join(seeds, [](std::uint64_t s) { return std::to_string(s); }));
    kv("write_runs", write_runs ? "true" : "false");
    kv("run_file_depth", std::to_string(run_file_depth));
    return out;
}

std::string ExperimentConfig::hash() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

}  // namespace varietyir
