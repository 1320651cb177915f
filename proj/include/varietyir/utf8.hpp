#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace varietyir::utf8 {

bool is_valid(std::string_view text);

/// Byte length of the code point starting at `pos` (1 on malformed input).
std::size_t sequence_length(std::string_view text, std::size_t pos);

std::vector<char32_t> decode(std::string_view text);
std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

}  // namespace varietyir::utf8
