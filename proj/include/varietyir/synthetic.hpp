#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varietyir/corpus_io.hpp"
#include "varietyir/experiment_config.hpp"
#include "varietyir/transducer.hpp"

namespace varietyir {

/// Desk-scale stand-in for a passage-ranking collection: pseudo-words built
/// from a fixed syllable inventory, Zipf-distributed passages, and queries
/// extracted from their single positive passage.
struct SyntheticData {
    DocumentCollection docs;
    QuerySet train_queries;
    QuerySet eval_queries;
    Qrels qrels;
};

/// Throws ConfigInvalid. Deterministic given (spec, seed).
SyntheticData synthesize_corpus(const CorpusSpec& spec, std::uint64_t seed);

/// Letters the synthetic vocabulary is built from. Rule outputs use letters
/// outside this set so rewritten n-grams never occur in documents.
std::string_view synthetic_consonants();
std::string_view synthetic_vowels();

/// One FamilySpec per family with pairwise-disjoint rule pools. Each rule
/// rewrites a consonant–vowel syllable, changing one letter to a character
/// reserved for that family.
std::vector<FamilySpec> make_family_specs(std::size_t families, std::size_t rules_per_family, double fraction,
                                          std::size_t varieties, std::uint64_t seed);

/// Throws FamilyOverlap when two families share a rule or a family id.
void validate_families(std::span<const FamilySpec> families);

}  // namespace varietyir
