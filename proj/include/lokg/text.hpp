#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lokg {

// Text utilities shared by the taxonomy filter, the providers and the mining
// pipeline. All functions operate on UTF-8.

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
void utf8_append(std::string& out, char32_t cp);

bool is_letter(char32_t cp) noexcept;
bool is_digit(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
/// One of . , ; : ? ! -
bool is_sentence_punct(char32_t cp) noexcept;
char32_t to_lower(char32_t cp) noexcept;

std::string to_lower(std::string_view s);
/// Number of code points.
std::size_t utf8_length(std::string_view s);

/// Removes special characters and noise strings while keeping sentence
/// structure:
///  - HTML-like tags, URLs (http://, https://, www.) and e-mail addresses are dropped;
///  - letters, digits, whitespace and . , ; : ? ! - are kept, apostrophes are
///    dropped and every other character becomes a space;
///  - runs of one punctuation character collapse to a single one ("!!" -> "!");
///  - whitespace is collapsed, spaces before . , ; : ? ! are removed, ends trimmed.
std::string clean_text(std::string_view text);

/// A maximal run of text between sentence punctuation, as lowercased word tokens.
using Segment = std::vector<std::string>;

/// Lowercased word tokens split into punctuation-free segments. Hyphens inside
/// a word ("elderly-care") are part of the token.
std::vector<Segment> segment_words(std::string_view cleaned);

/// All lowercased word tokens in order.
std::vector<std::string> tokenize(std::string_view cleaned);

bool is_stopword(std::string_view lowered_word);
bool is_english_stopword(std::string_view lowered_word);
bool is_german_stopword(std::string_view lowered_word);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);
/// Splits one CSV record (RFC 4180 quoting, no embedded line breaks).
std::vector<std::string> csv_split(std::string_view line);
/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace lokg
