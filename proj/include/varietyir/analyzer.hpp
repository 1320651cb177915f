#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace varietyir {

enum class UnicodeNormalization { None, CompatibilityComposed };
enum class CjkMode { CodepointUnigram, Off };

struct AnalyzerConfig {
    bool lowercase = true;
    UnicodeNormalization unicode_normalization = UnicodeNormalization::CompatibilityComposed;
    CjkMode cjk_mode = CjkMode::CodepointUnigram;

    bool operator==(const AnalyzerConfig&) const = default;
};

/// Letters, digits and combining marks. Everything else delimits tokens.
bool is_word_char(char32_t cp);

/// Han, Hiragana, Katakana or Hangul.
bool is_cjk(char32_t cp);

/// Normalizes, lowercases and splits `text` into tokens. Deterministic for a
/// given config; input must be valid UTF-8.
std::vector<std::string> analyze(std::string_view text, const AnalyzerConfig& cfg = {});

std::string describe(const AnalyzerConfig& cfg);
AnalyzerConfig parse_analyzer_description(std::string_view text);

}  // namespace varietyir
