#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Minimal UTF-8 helpers. Malformed sequences decode to U+FFFD.
namespace mwer::utf8 {

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

// Number of code points.
std::size_t length(std::string_view text);

// Simple case folding for Latin, Greek, Cyrillic and Armenian letters.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

bool is_space(char32_t cp);

} // namespace mwer::utf8
