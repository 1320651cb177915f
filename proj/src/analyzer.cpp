#include "varietyir/analyzer.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include "varietyir/error.hpp"
#include "varietyir/utf8.hpp"

namespace varietyir {

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    const auto c = static_cast<UChar32>(cp);
    return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

bool is_cjk(char32_t cp) {
    if (cp < 0x2E80) return false;
    UErrorCode status = U_ZERO_ERROR;
    const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
    if (U_FAILURE(status)) return false;
    return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA ||
           script == USCRIPT_HANGUL;
}

namespace {

bool is_ascii(std::string_view text) {
    for (char c : text) {
        if (static_cast<unsigned char>(c) >= 0x80) return false;
    }
    return true;
}

std::string prepare(std::string_view text, const AnalyzerConfig& cfg) {
    if (is_ascii(text)) {
        std::string out(text);
        if (cfg.lowercase) {
            for (char& c : out) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        return out;
    }
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    if (cfg.unicode_normalization == UnicodeNormalization::CompatibilityComposed) {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
        if (U_SUCCESS(status)) {
            icu::UnicodeString normalized = nfkc->normalize(u, status);
            if (U_SUCCESS(status)) u = normalized;
        }
    }
    if (cfg.lowercase) u.toLower(icu::Locale::getRoot());
    std::string out;
    u.toUTF8String(out);
    return out;
}

}  // namespace

std::vector<std::string> analyze(std::string_view text, const AnalyzerConfig& cfg) {
    std::vector<std::string> tokens;
    const std::string prepared = prepare(text, cfg);
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    std::size_t pos = 0;
    while (pos < prepared.size()) {
        const std::size_t len = utf8::sequence_length(prepared, pos);
        const std::string_view piece(prepared.data() + pos, len);
        const char32_t cp = len == 1 ? static_cast<unsigned char>(prepared[pos]) : utf8::decode(piece).front();
        if (!is_word_char(cp)) {
            flush();
        } else if (cfg.cjk_mode == CjkMode::CodepointUnigram && is_cjk(cp)) {
            flush();
            tokens.emplace_back(piece);
        } else {
            current.append(piece);
        }
        pos += len;
    }
    flush();
    return tokens;
}

std::string describe(const AnalyzerConfig& cfg) {
    std::string out = cfg.lowercase ? "lowercase=1" : "lowercase=0";
    out += cfg.unicode_normalization == UnicodeNormalization::CompatibilityComposed ? " normalization=nfkc"
                                                                                       : " normalization=none";
    out += cfg.cjk_mode == CjkMode::CodepointUnigram ? " cjk=unigram" : " cjk=off";
    return out;
}

AnalyzerConfig parse_analyzer_description(std::string_view text) {
    AnalyzerConfig cfg;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(' ', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto item = text.substr(pos, end - pos);
        if (item == "lowercase=1") cfg.lowercase = true;
        else if (item == "lowercase=0") cfg.lowercase = false;
        else if (item == "normalization=nfkc") cfg.unicode_normalization = UnicodeNormalization::CompatibilityComposed;
        else if (item == "normalization=none") cfg.unicode_normalization = UnicodeNormalization::None;
        else if (item == "cjk=unigram") cfg.cjk_mode = CjkMode::CodepointUnigram;
        else if (item == "cjk=off") cfg.cjk_mode = CjkMode::Off;
        else if (!item.empty()) throw Error(ErrorCode::MalformedRecord, "unknown analyzer setting '" + std::string(item) + "'");
        pos = end + 1;
    }
    return cfg;
}

}  // namespace varietyir
