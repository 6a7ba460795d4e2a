#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace phocus {

// Trims and collapses runs of whitespace to single spaces.
std::string collapse_whitespace(std::string_view text);

// Splits on whitespace, strips ASCII punctuation from each piece and
// lowercases it. Pieces that are punctuation-only disappear. This is the
// one tokenizer used everywhere: word counts, sentiment, relatedness.
std::vector<std::string> tokenize(std::string_view text);

// Token count of `text` under tokenize().
int count_tokens(std::string_view text);

// Bundled 150-word stop list.
bool is_stopword(const std::string& token);

// Light suffix stripping (s, es, ed, ing). Expects a lowercased token.
std::string stem(std::string token);

// tokenize -> drop stopwords -> stem -> unique set.
std::set<std::string> content_stems(std::string_view text);

// Jaccard similarity of two sets; 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Normalizes an author name to "<given initials> <surname>", lowercase.
// "Smith, John A." and "John A. Smith" both become "j. a. smith".
std::string normalize_author(std::string_view name);

// Lowercased, whitespace-collapsed form used for exact title matching.
std::string normalize_title(std::string_view title);

// FNV-1a 64-bit, used for content-addressed model/artifact versions.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed);

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

// Strict double/int parsing for artifact files; throws parse_error.
double parse_double(std::string_view text, std::string_view what);
long parse_int(std::string_view text, std::string_view what);

} // namespace phocus
