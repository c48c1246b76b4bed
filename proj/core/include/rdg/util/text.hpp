#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rdg {

/// ASCII case-fold; bytes >= 0x80 pass through unchanged.
std::string casefold(std::string_view s);

/// Splits into lowercase word tokens. ASCII letters and digits and any
/// non-ASCII byte form words; everything else (space, punctuation, hyphen,
/// apostrophe) separates. "South-Eastern Asia" -> {south, eastern, asia}.
std::vector<std::string> word_tokens(std::string_view s);

/// word_tokens joined by single spaces; the canonical key for name lookup.
std::string normalize_phrase(std::string_view s);

/// Classic Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

std::string read_file(const std::filesystem::path& path);

}  // namespace rdg
