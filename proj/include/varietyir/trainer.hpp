#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "varietyir/corpus_io.hpp"
#include "varietyir/lexical_index.hpp"
#include "varietyir/neural_ranker.hpp"

namespace varietyir {

struct TrainingTriplet {
    Query query;
    std::string positive_doc_id;
    std::vector<std::string> negative_doc_ids;
};

enum class NegativeSource { Bm25Hard, Random, Mixed };

std::string_view to_string(NegativeSource source);
NegativeSource parse_negative_source(std::string_view name);

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double temperature = 0.05;
    std::size_t negatives_per_query = 4;
    NegativeSource negative_source = NegativeSource::Bm25Hard;
    std::uint64_t seed = 0;
    ScoringMode loss_mode = ScoringMode::SingleVector;

    /// Throws InvalidArgument.
    void validate() const;
    [[nodiscard]] std::string describe() const;
};

struct TripletSet {
    std::vector<TrainingTriplet> triplets;
    std::size_t skipped_queries = 0;   // no judged positive
    std::size_t skipped_positives = 0; // no negative available
};

/// One triplet per (query, positive) with grade >= 1. Hard negatives are the
/// top non-relevant BM25 hits for the (transduced) query text; random ones
/// are drawn with the seeded generator. Throws NoPositives when empty.
TripletSet build_triplets(const QuerySet& queries, const Qrels& qrels, const DocumentCollection& coll,
                          const TrainConfig& cfg, const InvertedIndex& idx, const BM25Params& bm25 = {});

/// −ln softmax of the positive among {positive} ∪ negatives at temperature τ,
/// evaluated with a shifted log-sum-exp.
double infonce_from_scores(double positive, std::span<const double> negatives, double temperature);

/// Dense gradient buffers shaped like EncoderParams.
struct ParamGradient {
    std::vector<double> embedding;
    std::vector<double> projection;

    [[nodiscard]] double norm() const;
};

struct LossGradient {
    double loss = 0.0;
    ParamGradient gradient;
};

/// Plain-text view of a triplet used by the loss.
struct TripletTexts {
    std::string query_id;
    std::string query;
    std::string positive_id;
    std::string positive;
    std::vector<std::string> negative_ids;
    std::vector<std::string> negatives;
};

/// InfoNCE for one query against its positive and explicit negatives, with
/// analytic gradients w.r.t. every encoder parameter (double precision).
/// Throws NonFiniteLoss.
LossGradient infonce_loss(const EncoderParams& params, const TripletTexts& triplet, double temperature,
                          ScoringMode mode, const AnalyzerConfig& cfg = {});

/// Mean InfoNCE over a batch, each query additionally contrasted against the
/// other triplets' positives. Gradient is skipped when `want_gradient` is false.
LossGradient batch_infonce_loss(const EncoderParams& params, std::span<const TripletTexts> batch, double temperature,
                                ScoringMode mode, const AnalyzerConfig& cfg = {}, bool want_gradient = true);

struct LossReport {
    std::vector<double> epoch_mean_loss;
    std::vector<double> epoch_grad_norm;
    std::uint64_t final_params_version = 0;
    std::size_t triplet_count = 0;
};

struct TrainResult {
    EncoderParams params;
    LossReport report;
};

/// Adam (β1 0.9, β2 0.999, ε 1e-8) over seeded-shuffled batches. Never
/// mutates `init`. Throws NonFiniteLoss with epoch/batch position.
TrainResult train(const EncoderParams& init, std::span<const TrainingTriplet> triplets, const DocumentCollection& coll,
                  const TrainConfig& cfg, const AnalyzerConfig& analyzer = {});

std::vector<TripletTexts> triplet_texts(std::span<const TrainingTriplet> triplets, const DocumentCollection& coll);

/// A parameter coordinate: an embedding entry (row, column) or, when
/// `in_projection` is set, a projection entry.
struct ParamCoordinate {
    bool in_projection = false;
    std::size_t row = 0;
    std::size_t column = 0;
};

struct CoordinateCheck {
    ParamCoordinate coordinate;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::vector<CoordinateCheck> coordinates;
};

/// |a − n| / max(|a|, |n|), defined as 0 when both are exactly zero.
double relative_error(double analytic, double numeric);

/// Central differences on the listed coordinates of the batch loss.
GradientCheckResult gradient_check_at(const EncoderParams& params, std::span<const TripletTexts> sample,
                                      double epsilon, std::span<const ParamCoordinate> coordinates,
                                      double temperature, ScoringMode mode, const AnalyzerConfig& cfg = {});

/// Samples `count` coordinates uniformly among the projection and the
/// embedding rows the sample touches. ε must lie in [1e-6, 1e-3].
GradientCheckResult gradient_check(const EncoderParams& params, std::span<const TripletTexts> sample, double epsilon,
                                   std::size_t count, std::uint64_t seed, double temperature, ScoringMode mode,
                                   const AnalyzerConfig& cfg = {});

/// `# key = value` header then `epoch,mean_loss,grad_norm` rows.
std::string format_training_manifest(const TrainConfig& cfg, const TripletSet& triplets, const LossReport& report);

}  // namespace varietyir
