#pragma once

// Thin UTF-8 helpers over ICU's character properties.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace instructkit::unicode {

/// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_letter(char32_t cp);  // general category L*
bool is_digit(char32_t cp);   // general category Nd
bool is_mark(char32_t cp);    // general category M*
bool is_space(char32_t cp);
bool is_latin(char32_t cp);   // any ASCII code point, or script Latin

char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);

std::string to_lower(std::string_view utf8);
std::string to_upper(std::string_view utf8);

/// Number of code points with a letter general category.
std::size_t count_letters(std::string_view utf8);

/// Trims Unicode whitespace from both ends.
std::string trim(std::string_view utf8);

/// Case-folded, trimmed form used for label comparisons.
std::string fold(std::string_view utf8);

/// Collapses internal whitespace runs to one ASCII space and trims.
std::string collapse_whitespace(std::string_view utf8);

}  // namespace instructkit::unicode
