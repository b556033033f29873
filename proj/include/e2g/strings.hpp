#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace e2g {

std::string to_lower(std::string_view s);

/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view s);

/// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

/// Case-insensitive substring search; npos when absent.
std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from = 0);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view s);

}  // namespace e2g
