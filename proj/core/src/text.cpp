#include "intake/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace intake::text {
namespace {

// Fixed English function-word list. Tokens of length <= 2 are excluded by
// is_important regardless, so two-letter function words are not listed.
constexpr std::array<std::string_view, 56> kStopwords = {
    "the",   "and",   "but",    "for",   "nor",   "with",  "about", "into",
    "through", "during", "before", "after", "from", "over",  "under", "again",
    "once",  "here",  "there",  "all",   "any",   "both",  "each",  "few",
    "more",  "most",  "other",  "some",  "such",  "only",  "same",  "than",
    "too",   "very",  "can",    "will",  "just",  "should", "now",  "did",
    "does",  "have",  "has",    "had",   "was",   "were",  "been",  "are",
    "what",  "which", "who",    "this",  "that",  "these", "those", "your",
};

char lower_char(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9');
}

} // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower_char);
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_alnum(c)) {
            current.push_back(lower_char(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_stopword(std::string_view lower_token) {
    return std::find(kStopwords.begin(), kStopwords.end(), lower_token) !=
           kStopwords.end();
}

bool is_important(std::string_view lower_token) {
    return lower_token.size() > 2 && !is_stopword(lower_token);
}

std::vector<std::string> important_words(std::string_view s) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(s)) {
        if (!is_important(tok)) continue;
        if (std::find(out.begin(), out.end(), tok) == out.end()) {
            out.push_back(std::move(tok));
        }
    }
    return out;
}

double important_overlap(std::string_view phrase,
                         const std::vector<std::string>& tokens) {
    const auto words = important_words(phrase);
    if (words.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto& w : words) {
        if (std::find(tokens.begin(), tokens.end(), w) != tokens.end()) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(words.size());
}

std::string normalize(std::string_view s) {
    std::string out;
    for (const auto& tok : tokenize(s)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::string current;
    auto flush = [&] {
        const auto begin = current.find_first_not_of(" \t\r\n");
        if (begin != std::string::npos) {
            const auto end = current.find_last_not_of(" \t\r\n");
            sentences.push_back(current.substr(begin, end - begin + 1));
        }
        current.clear();
    };
    for (char c : s) {
        if (c == '.' || c == '!' || c == '?') {
            flush();
        } else {
            current.push_back(c);
        }
    }
    flush();
    return sentences;
}

bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(),
                       needle.end()) != haystack.end();
}

} // namespace intake::text
