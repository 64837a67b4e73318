#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "peerchain/summary/consensus.hpp"

namespace peerchain::summary {

namespace {

std::string join(const std::vector<std::string>& sentences, const std::vector<std::size_t>& picked) {
    std::string out;
    for (std::size_t i : picked) {
        if (!out.empty()) out += ' ';
        out += sentences[i];
    }
    return out;
}

// Takes sentences best-first while the joined length stays within budget,
// always keeping the best one, then restores document order. Sentences that
// score zero are never used as filler.
std::string pick_within_budget(const std::vector<std::string>& sentences, const std::vector<double>& scores,
                               std::size_t limit) {
    if (sentences.empty()) return {};
    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::size_t> picked;
    std::size_t used = 0;
    for (std::size_t i : order) {
        const std::size_t cost = sentences[i].size() + (picked.empty() ? 0 : 1);
        if (!picked.empty() && (used + cost > limit || scores[i] <= 0)) continue;
        picked.push_back(i);
        used += cost;
    }
    std::sort(picked.begin(), picked.end());
    return join(sentences, picked);
}

std::size_t budget_bytes(std::string_view text, double budget) {
    return static_cast<std::size_t>(std::floor(budget * static_cast<double>(text.size())));
}

}  // namespace

std::string lead_sentences(std::string_view text, std::size_t k) {
    const auto sentences = split_sentences(text);
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < sentences.size() && i < k; ++i) picked.push_back(i);
    return join(sentences, picked);
}

std::string densest_sentences(std::string_view text, double budget, std::size_t top_n) {
    const auto sentences = split_sentences(text);
    const auto keys = top_keywords(text, top_n);
    const std::set<std::string> keyset(keys.begin(), keys.end());
    std::vector<double> scores;
    for (const auto& s : sentences) {
        const auto ws = words(s);
        const auto hits = std::count_if(ws.begin(), ws.end(), [&](const std::string& w) { return keyset.count(w) > 0; });
        scores.push_back(ws.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ws.size()));
    }
    return pick_within_budget(sentences, scores, budget_bytes(text, budget));
}

std::string central_sentences(std::string_view text, double budget) {
    const auto sentences = split_sentences(text);
    std::map<std::string, double> centroid;
    for (auto& w : content_words(text)) centroid[std::move(w)] += 1.0;
    // words seen once say nothing about the topic and would give every
    // sentence some similarity to itself
    std::erase_if(centroid, [](const auto& e) { return e.second < 2; });
    double centroid_norm = 0;
    for (const auto& [w, c] : centroid) centroid_norm += c * c;
    centroid_norm = std::sqrt(centroid_norm);

    std::vector<double> scores;
    for (const auto& s : sentences) {
        std::map<std::string, double> tf;
        for (auto& w : content_words(s)) tf[std::move(w)] += 1.0;
        double dot = 0, norm = 0;
        for (const auto& [w, c] : tf) {
            if (auto it = centroid.find(w); it != centroid.end()) dot += c * it->second;
            norm += c * c;
        }
        scores.push_back(norm == 0 || centroid_norm == 0 ? 0.0 : dot / (std::sqrt(norm) * centroid_norm));
    }
    return pick_within_budget(sentences, scores, budget_bytes(text, budget));
}

namespace {

VerifyFn verifier_for(VerifierConfig config) {
    return [config](std::string_view summary, std::string_view text) { return default_verifier(summary, text, config); };
}

}  // namespace

SummarizerInstance lead_k(std::string id, std::size_t k, VerifierConfig verifier) {
    return {std::move(id), [k](std::string_view text) { return lead_sentences(text, k); }, verifier_for(verifier)};
}

SummarizerInstance keyword_density(std::string id, double budget, VerifierConfig verifier) {
    const std::size_t top_n = verifier.top_n;
    return {std::move(id), [budget, top_n](std::string_view text) { return densest_sentences(text, budget, top_n); },
            verifier_for(verifier)};
}

SummarizerInstance centroid(std::string id, double budget, VerifierConfig verifier) {
    return {std::move(id), [budget](std::string_view text) { return central_sentences(text, budget); },
            verifier_for(verifier)};
}

}  // namespace peerchain::summary
