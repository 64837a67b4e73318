#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "peerchain/crypto/types.hpp"
#include "peerchain/summary/text.hpp"

namespace peerchain::summary {

using SummarizeFn = std::function<std::string(std::string_view text)>;
using VerifyFn = std::function<bool(std::string_view summary, std::string_view text)>;

/// Both functions must be deterministic; the pool calls them from several
/// threads when articles are summarized concurrently.
struct SummarizerInstance {
    std::string id;
    SummarizeFn summarize;
    VerifyFn verify;
};

/// First `k` sentences.
std::string lead_sentences(std::string_view text, std::size_t k);
/// Sentences with the highest share of top keywords, up to `budget` of the
/// text length, in document order.
std::string densest_sentences(std::string_view text, double budget, std::size_t top_n = 10);
/// Sentences closest (cosine) to the document's term-frequency centroid over
/// content words seen at least twice, up to `budget` of the text length, in
/// document order.
std::string central_sentences(std::string_view text, double budget);

SummarizerInstance lead_k(std::string id, std::size_t k = 3, VerifierConfig verifier = {});
SummarizerInstance keyword_density(std::string id, double budget = 0.2, VerifierConfig verifier = {});
SummarizerInstance centroid(std::string id, double budget = 0.2, VerifierConfig verifier = {});

/// Seeded selection stream. mt19937_64 and seed_seq are fully specified by
/// the standard, and `below` avoids the library's distributions, so draws are
/// identical across platforms.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// True with probability p.
    bool chance(double p);

private:
    std::mt19937_64 engine_;
};

class ModelPool {
public:
    /// Throws invalid_argument for fewer than 3 instances, duplicate or empty
    /// ids, or missing functions.
    ModelPool(std::vector<SummarizerInstance> instances, std::uint64_t seed);

    std::size_t size() const { return instances_.size(); }
    std::uint64_t seed() const { return seed_; }
    const std::vector<SummarizerInstance>& instances() const { return instances_; }
    /// Throws not_found.
    const SummarizerInstance& instance(std::string_view id) const;

    /// Selection stream for one text: the pool seed combined with the text
    /// digest, so each article gets its own reproducible draws.
    Rng rng_for(std::string_view text) const;

private:
    std::vector<SummarizerInstance> instances_;
    std::uint64_t seed_;
};

/// lead-k, keyword-density and centroid instances with the default verifier.
ModelPool default_pool(std::uint64_t seed, VerifierConfig verifier = {});

struct Generated {
    std::string generator_id;
    std::string summary;
};

/// Throws invalid_argument for empty text.
Generated generate_summary(const ModelPool& pool, std::string_view text, Rng& rng);

struct Verification {
    std::array<std::string, 2> validator_ids;
    std::array<bool, 2> verdicts{};
    bool accepted = false;
};

/// Draws two distinct validators, never the generator. Throws not_found for
/// an unknown generator.
Verification verify_summary(const ModelPool& pool, std::string_view summary, std::string_view text,
                            std::string_view generator_id, Rng& rng);

struct SummaryAttempt {
    std::uint32_t attempt_index = 0;
    std::string generator_id;
    std::string summary;
    std::array<std::string, 2> validator_ids;
    std::array<bool, 2> verdicts{};

    bool accepted() const { return verdicts[0] && verdicts[1]; }
};

struct TrustworthySummary {
    std::string summary;
    crypto::Digest digest;
    SummaryAttempt provenance;
    std::uint32_t attempts_total = 0;
};

/// True when the attempt has two true verdicts from distinct validators that
/// differ from the generator.
bool valid_provenance(const SummaryAttempt& a);

constexpr std::uint32_t kDefaultMaxAttempts = 16;

struct ConsensusRun {
    std::vector<SummaryAttempt> attempts;
    std::optional<TrustworthySummary> result;
};

/// Generate and verify until both validators accept or `max_attempts` runs
/// out. Never throws on exhaustion; `result` is empty instead.
ConsensusRun run_consensus(const ModelPool& pool, std::string_view text, std::uint32_t max_attempts, Rng& rng);

/// Uses `pool.rng_for(text)`. Throws consensus_failed on exhaustion and
/// invalid_argument for max_attempts == 0 or empty text.
TrustworthySummary consensus_summarize(const ModelPool& pool, std::string_view text,
                                       std::uint32_t max_attempts = kDefaultMaxAttempts);

}  // namespace peerchain::summary
