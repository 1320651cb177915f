#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "varietyir/evaluator.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/neural_ranker.hpp"
#include "varietyir/trainer.hpp"

namespace varietyir {

/// Shape of the synthetic passage collection and its query sets.
struct CorpusSpec {
    std::size_t doc_count = 2000;
    std::size_t vocab_size = 4000;
    std::size_t passage_min_len = 20;
    std::size_t passage_max_len = 40;
    std::size_t train_queries = 600;
    std::size_t eval_queries = 100;
    std::size_t query_min_len = 3;
    std::size_t query_max_len = 5;
    std::size_t query_noise_words = 1;  // off-topic Zipf words mixed into each query
    double zipf_exponent = 1.0;

    void validate() const;
};

/// Everything one experiment invocation needs. Parsed from a line-based
/// `key = value` file; every key has a default and unknown keys are errors.
struct ExperimentConfig {
    CorpusSpec corpus;

    std::size_t families = 2;
    std::size_t varieties_per_family = 3;
    std::size_t rules_per_family = 20;
    double rule_fraction = 0.5;
    std::vector<std::filesystem::path> family_rule_files;  // overrides generated pools
    std::string train_pair;                               // empty: first variety of first family

    std::vector<std::string> rankers{"bm25", "single_vector", "multi_vector", "rerank"};
    std::size_t retrieval_depth = 1000;
    std::size_t rerank_depth = 100;
    BM25Params bm25;
    AnalyzerConfig analyzer;
    EncoderConfig encoder;
    TrainConfig train;
    std::vector<MetricSpec> metrics = default_metrics();
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    bool write_runs = true;
    std::size_t run_file_depth = 100;
    std::filesystem::path out = "results";

    /// Throws ConfigInvalid.
    void validate() const;

    /// Canonical `key = value` listing of every effective setting except `out`.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string hash() const;

    [[nodiscard]] bool has_ranker(std::string_view name) const;
};

/// Throws ConfigInvalid with the offending line number.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies one `key = value` setting.
void apply_config_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Documented key list, in canonical order.
std::vector<std::string> experiment_config_keys();

}  // namespace varietyir
