#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace moira {

// ASCII case folding. Bytes outside ASCII pass through unchanged so that
// arbitrary UTF-8 survives folding.
std::string fold(std::string_view s);

bool is_word_byte(unsigned char c);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view s);

bool starts_with_upper(std::string_view s);

// Folded, single-space joined key for a word sequence.
std::string surface_key(const std::vector<std::string>& words);
std::string surface_key(std::string_view phrase);

}  // namespace moira
