#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace peerchain::summary {

bool is_stop_word(std::string_view lowercase_word);

/// Lowercased alphanumeric runs of `text`, stop words included.
std::vector<std::string> words(std::string_view text);

/// `words` minus stop words.
std::vector<std::string> content_words(std::string_view text);

/// Sentences end at '.', '!' or '?' followed by whitespace or end of input.
/// Returned trimmed, terminator kept; blank sentences are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// The `n` most frequent content words, ties broken alphabetically.
std::vector<std::string> top_keywords(std::string_view text, std::size_t n);

/// Fraction of the text's top-`n` keywords that occur among the summary's
/// words. 0 when the text has no content words.
double keyword_coverage(std::string_view summary, std::string_view text, std::size_t n);

struct VerifierConfig {
    std::size_t top_n = 10;
    double tau = 0.5;
    /// Summary length as a fraction of text length, in bytes.
    double min_fraction = 0.02;
    double max_fraction = 0.3;
};

bool default_verifier(std::string_view summary, std::string_view text, const VerifierConfig& config = {});

}  // namespace peerchain::summary
