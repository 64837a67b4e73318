#include "peerchain/summary/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

namespace peerchain::summary {

namespace {

// Sorted, so lookups can use binary search.
constexpr auto kStopWords = std::to_array<std::string_view>({
    "a",       "about",  "above", "after",   "again", "against", "all",    "also",  "am",     "an",
    "and",     "any",    "are",   "as",      "at",    "be",      "because", "been", "before", "being",
    "below",   "between", "both", "but",     "by",    "can",     "could",  "did",   "do",     "does",
    "doing",   "down",   "during", "each",   "few",   "for",     "from",   "further", "had",  "has",
    "have",    "having", "he",    "her",     "here",  "hers",    "herself", "him",  "himself", "his",
    "how",     "i",      "if",    "in",      "into",  "is",      "it",     "its",   "itself", "just",
    "may",     "me",     "might", "more",    "most",  "must",    "my",     "myself", "no",    "nor",
    "not",     "now",    "of",    "off",     "on",    "once",    "only",   "or",    "other",  "our",
    "ours",    "out",    "over",  "own",     "same",  "she",     "should", "so",    "some",   "such",
    "than",    "that",   "the",   "their",   "theirs", "them",   "then",   "there", "these",  "they",
    "this",    "those",  "through", "to",    "too",   "under",   "until",  "up",    "upon",   "us",
    "very",    "was",    "we",    "were",    "what",  "when",    "where",  "which", "while",  "who",
    "whom",    "why",    "will",  "with",    "would", "you",     "your",
});

static_assert(std::is_sorted(kStopWords.begin(), kStopWords.end()));

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

bool is_stop_word(std::string_view w) { return std::binary_search(kStopWords.begin(), kStopWords.end(), w); }

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> content_words(std::string_view text) {
    auto all = words(text);
    std::erase_if(all, [](const std::string& w) { return is_stop_word(w); });
    return all;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
        auto s = trim(text.substr(start, i + 1 - start));
        if (!s.empty()) out.emplace_back(s);
        start = i + 1;
    }
    auto tail = trim(text.substr(std::min(start, text.size())));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

std::vector<std::string> top_keywords(std::string_view text, std::size_t n) {
    std::map<std::string, std::size_t> freq;
    for (auto& w : content_words(text)) ++freq[std::move(w)];
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    // map order is alphabetical, so a stable sort on count keeps ties alphabetical
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ranked[i].first);
    return out;
}

double keyword_coverage(std::string_view summary, std::string_view text, std::size_t n) {
    const auto keys = top_keywords(text, n);
    if (keys.empty()) return 0.0;
    const auto present = words(summary);
    const std::set<std::string> have(present.begin(), present.end());
    const auto hit = std::count_if(keys.begin(), keys.end(), [&](const std::string& k) { return have.count(k) > 0; });
    return static_cast<double>(hit) / static_cast<double>(keys.size());
}

bool default_verifier(std::string_view summary, std::string_view text, const VerifierConfig& config) {
    if (text.empty()) return false;
    const double fraction = static_cast<double>(summary.size()) / static_cast<double>(text.size());
    if (fraction < config.min_fraction || fraction > config.max_fraction) return false;
    return keyword_coverage(summary, text, config.top_n) >= config.tau;
}

}  // namespace peerchain::summary
