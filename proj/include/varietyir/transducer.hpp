#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "varietyir/corpus_io.hpp"

namespace varietyir {

enum class RuleScope { Anywhere, WordInitial, WordFinal, WholeWord };

struct RewriteRule {
    std::string lhs;
    std::string rhs;
    RuleScope scope = RuleScope::Anywhere;

    bool operator==(const RewriteRule&) const = default;
    auto operator<=>(const RewriteRule&) const = default;
};

/// Throws EmptyLhs / NoOpRule for rules that can never be valid.
void validate_rule(const RewriteRule& rule);

/// Simulated translator between a high-resource variety and one related
/// low-resource variety. Rule order matters; lexicon keys are whole words.
struct VarietyRuleSet {
    std::string ruleset_id;
    std::string family_id;
    std::vector<RewriteRule> rules;
    std::map<std::string, std::string> lexicon;

    bool operator==(const VarietyRuleSet&) const = default;
};

/// Parent pool from which sibling varieties of one family are sampled.
struct FamilySpec {
    std::string family_id;
    std::vector<RewriteRule> shared_rule_pool;
    double sampling_fraction = 1.0;
    std::size_t variety_count = 2;
    std::uint64_t seed = 0;
};

/// Line-based rule file:
///   ruleset <id> family <family_id>
///   rule "<lhs>" -> "<rhs>" [initial|final|word]
///   lex <word> -> <word>
/// `#` starts a comment outside quotes. Throws SyntaxError with line number.
VarietyRuleSet parse_ruleset(std::string_view text);
VarietyRuleSet load_ruleset(const std::filesystem::path& path);
std::string format_ruleset(const VarietyRuleSet& rs);

/// Lexicon substitution on whole words, then one left-to-right rule pass
/// where the longest applicable lhs fires (earliest-listed on equal length).
std::string transduce(std::string_view text, const VarietyRuleSet& rs);

/// Same ids and order; texts transduced; language_tag set to the ruleset id.
QuerySet transduce_queryset(const QuerySet& qs, const VarietyRuleSet& rs);

/// Samples `variety_count` siblings from the pool. Pool entry 0 is in every
/// sibling, so siblings always overlap; the rest are drawn with the seeded
/// generator and kept in pool order. Throws EmptyPool.
std::vector<VarietyRuleSet> generate_family(const FamilySpec& spec);

/// Rules present in both rulesets.
std::size_t shared_rule_count(const VarietyRuleSet& a, const VarietyRuleSet& b);

}  // namespace varietyir
