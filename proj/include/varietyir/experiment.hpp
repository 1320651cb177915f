#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varietyir/corpus_io.hpp"
#include "varietyir/evaluator.hpp"
#include "varietyir/experiment_config.hpp"
#include "varietyir/synthetic.hpp"
#include "varietyir/transducer.hpp"

namespace varietyir {

/// A (high-resource document, low-resource query) variety pair. The high
/// side is always the untransduced collection language.
struct VarietyPair {
    std::string id;
    std::string family_id;
    VarietyRuleSet ruleset;
};

inline constexpr std::string_view kControlPair = "control";

/// One tidy row of plot data. `seed` is the seed value or "mean".
struct ResultRow {
    std::string ranker;
    std::string pair;
    std::string query_language;  // "high" | "low"
    std::string condition;       // "orig" | "ours"
    std::string metric;
    double value = 0.0;
    std::string seed;
};

/// Paired comparison pooled over queries x seeds (query ids prefixed by seed).
struct SignificanceRow {
    std::string ranker;
    std::string pair;
    std::string query_language;
    std::string comparison;  // "low-vs-high" | "ours-vs-orig"
    std::string metric;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_delta = 0.0;
    double p_value = 1.0;
    std::vector<double> seed_deltas;  // per-seed mean(b) − mean(a)
    [[nodiscard]] std::size_t seeds_improved() const;
};

struct ResultTable {
    std::string name;
    std::vector<ResultRow> rows;  // per seed, followed by the seed mean
    std::vector<SignificanceRow> significance;
    std::vector<std::string> provenance;

    [[nodiscard]] std::vector<ResultRow> summary() const;  // "mean" rows only
    [[nodiscard]] const SignificanceRow* find(std::string_view ranker, std::string_view pair,
                                              std::string_view query_language, std::string_view metric) const;
};

/// Recall of a rerank run against the first-stage run it permuted.
struct ConservationCheck {
    std::string rerank_run;
    std::string first_stage_run;
    std::string metric;
    double rerank_value = 0.0;
    double first_stage_value = 0.0;
    [[nodiscard]] bool holds() const { return rerank_value == first_stage_value; }
};

/// Identity-transducer control: low-variety run must equal the high one.
struct IdentityCheck {
    std::string table;
    std::string ranker;
    std::string condition;
    std::uint64_t seed = 0;
    bool identical = false;
};

/// Drives the four research-question pipelines on synthetic data. Seeds are
/// materialized lazily; trained encoders from run_rq2 are reused by
/// run_rq3 / run_rq4.
class Experiment {
public:
    /// Validates the config; throws ConfigInvalid / FamilyOverlap.
    explicit Experiment(ExperimentConfig cfg);
    ~Experiment();
    Experiment(Experiment&&) noexcept;
    Experiment& operator=(Experiment&&) noexcept;

    [[nodiscard]] const ExperimentConfig& config() const noexcept { return cfg_; }

    /// Variety pair ids in generation order (control excluded).
    [[nodiscard]] std::vector<std::string> pair_ids() const;
    [[nodiscard]] std::string family_of(std::string_view pair) const;
    [[nodiscard]] std::string default_train_pair() const;
    [[nodiscard]] std::vector<std::string> same_family_pairs(std::string_view pair_a) const;
    [[nodiscard]] std::vector<std::string> cross_family_pairs(std::string_view pair_a) const;

    /// Pairs and data of one seed (materialized on demand).
    [[nodiscard]] const SyntheticData& data(std::size_t seed_index);
    [[nodiscard]] const VarietyPair& pair(std::size_t seed_index, std::string_view id);

    ResultTable run_rq1();
    ResultTable run_rq2(std::string_view pair_a);
    /// Throws MissingTrainedParams (run_rq2 not run for pair_a) or PairNotUnseen.
    ResultTable run_rq3(std::string_view pair_a, const std::vector<std::string>& unseen_pairs);
    /// Throws MissingTrainedParams or FamilyOverlap.
    ResultTable run_rq4(std::string_view pair_a, const std::vector<std::string>& cross_family_pairs);

    [[nodiscard]] const std::vector<ConservationCheck>& conservation_checks() const noexcept { return conservation_; }
    [[nodiscard]] const std::vector<IdentityCheck>& identity_checks() const noexcept { return identity_; }

    /// TREC run texts queued for writing, keyed by relative path.
    [[nodiscard]] const std::map<std::string, std::string>& run_files() const noexcept { return run_files_; }

    [[nodiscard]] std::vector<std::string> provenance() const;

    /// Writes tables, plot data, runs, manifests, rule files and REPORT.md.
    void write_outputs(const std::vector<ResultTable>& tables, const std::filesystem::path& dir) const;

private:
    struct SeedContext;
    SeedContext& seed_context(std::size_t seed_index);
    // Run + report for one cell; an empty pair id means the high-variety queries.
    const EvalReport& cell(std::size_t seed_index, const std::string& ranker, const std::string& pair_id,
                           const std::string& condition);
    void ensure_trained(std::string_view pair_a);
    ResultTable transfer_table(std::string name, std::string_view pair_a, const std::vector<std::string>& pairs,
                               bool with_control);

    ExperimentConfig cfg_;
    std::vector<FamilySpec> file_families_;
    std::vector<std::unique_ptr<SeedContext>> seeds_;
    std::string trained_pair_;
    std::vector<ConservationCheck> conservation_;
    std::vector<IdentityCheck> identity_;
    std::map<std::string, std::string> run_files_;
    std::map<std::string, std::string> manifests_;
};

/// One tidy CSV per table: `plot_<name>.csv` with columns
/// ranker,pair,query_language,condition,metric,value,seed.
void emit_plot_data(const std::vector<ResultTable>& tables, const std::filesystem::path& dir);
std::string format_plot_csv(const ResultTable& table);

/// Summary table with provenance comment header.
std::string format_table_csv(const ResultTable& table);
std::string format_significance_csv(const ResultTable& table);
std::string format_report_markdown(const std::vector<ResultTable>& tables, const std::vector<std::string>& provenance);

}  // namespace varietyir
