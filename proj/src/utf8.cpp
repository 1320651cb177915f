#include "varietyir/utf8.hpp"

#include <unicode/utf8.h>

namespace varietyir::utf8 {

bool is_valid(std::string_view text) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(s, i, length, c);
        if (c < 0) return false;
    }
    return true;
}

std::size_t sequence_length(std::string_view text, std::size_t pos) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    auto i = static_cast<int32_t>(pos);
    UChar32 c = 0;
    U8_NEXT(s, i, static_cast<int32_t>(text.size()), c);
    return static_cast<std::size_t>(i) - pos;
}

std::vector<char32_t> decode(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(s, i, length, c);
        out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
    }
    return out;
}

std::string encode(char32_t cp) {
    char buf[U8_MAX_LENGTH];
    int32_t i = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<std::uint8_t*>(buf), i, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
    if (error) return "\xEF\xBF\xBD";
    return std::string(buf, static_cast<std::size_t>(i));
}

std::string encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) out += encode(c);
    return out;
}

}  // namespace varietyir::utf8
