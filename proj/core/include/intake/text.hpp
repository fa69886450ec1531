#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace intake::text {

// Lowercases ASCII letters only; the corpus this project handles is ASCII
// clinical English, and locale-dependent tolower would break determinism.
std::string to_lower(std::string_view s);

// Lowercase alphanumeric runs, in order. Everything else is a separator.
std::vector<std::string> tokenize(std::string_view s);

// True for tokens on the fixed function-word list. Callers almost always
// want is_important instead, which also drops very short tokens.
bool is_stopword(std::string_view lower_token);

// A token carries content if it is not a stopword and longer than 2 chars.
bool is_important(std::string_view lower_token);

// Important tokens of s, deduplicated, first-occurrence order.
std::vector<std::string> important_words(std::string_view s);

// Fraction of phrase's important words that occur among the given tokens.
// Phrase with no important words scores 0.
double important_overlap(std::string_view phrase,
                         const std::vector<std::string>& tokens);

// Canonical form for statement equality: tokens joined by single spaces.
std::string normalize(std::string_view s);

// Splits on '.', '!', '?'; trims; drops empty pieces. Terminators are not
// kept. No abbreviation handling; inputs here are template-built sentences.
std::vector<std::string> split_sentences(std::string_view s);

// True when needle occurs as a contiguous run inside haystack.
bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle);

} // namespace intake::text
