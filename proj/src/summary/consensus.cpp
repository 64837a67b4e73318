#include "peerchain/summary/consensus.hpp"

#include <set>

#include "peerchain/crypto/sm3.hpp"
#include "peerchain/error.hpp"

namespace peerchain::summary {

namespace {

std::seed_seq seed_sequence(std::uint64_t seed, std::uint64_t stream) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    auto seq = seed_sequence(seed, stream);
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine(seed, stream)) {}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "empty range");
    // reject the top partial block so every residue is equally likely
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

bool Rng::chance(double p) {
    // 53 random bits as a double in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p;
}

ModelPool::ModelPool(std::vector<SummarizerInstance> instances, std::uint64_t seed)
    : instances_(std::move(instances)), seed_(seed) {
    if (instances_.size() < 3) {
        throw Error(ErrorCode::invalid_argument, "model pool needs at least 3 instances",
                    std::to_string(instances_.size()));
    }
    std::set<std::string> ids;
    for (const auto& inst : instances_) {
        if (inst.id.empty() || !inst.summarize || !inst.verify) {
            throw Error(ErrorCode::invalid_argument, "incomplete summarizer instance", inst.id);
        }
        if (!ids.insert(inst.id).second) throw Error(ErrorCode::invalid_argument, "duplicate instance id", inst.id);
    }
}

const SummarizerInstance& ModelPool::instance(std::string_view id) const {
    for (const auto& inst : instances_) {
        if (inst.id == id) return inst;
    }
    throw Error(ErrorCode::not_found, "no such summarizer instance", std::string(id));
}

Rng ModelPool::rng_for(std::string_view text) const {
    const auto d = crypto::sm3_digest(text);
    std::uint64_t stream = 0;
    for (int i = 0; i < 8; ++i) stream = (stream << 8) | d.bytes[i];
    return Rng(seed_, stream);
}

ModelPool default_pool(std::uint64_t seed, VerifierConfig verifier) {
    return ModelPool({lead_k("lead-3", 3, verifier), keyword_density("keyword-density", 0.2, verifier),
                      centroid("centroid", 0.2, verifier)},
                     seed);
}

Generated generate_summary(const ModelPool& pool, std::string_view text, Rng& rng) {
    if (text.empty()) throw Error(ErrorCode::invalid_argument, "empty text");
    const auto& inst = pool.instances()[rng.below(pool.size())];
    return {inst.id, inst.summarize(text)};
}

Verification verify_summary(const ModelPool& pool, std::string_view summary, std::string_view text,
                            std::string_view generator_id, Rng& rng) {
    std::vector<const SummarizerInstance*> others;
    bool found = false;
    for (const auto& inst : pool.instances()) {
        if (inst.id == generator_id) {
            found = true;
        } else {
            others.push_back(&inst);
        }
    }
    if (!found) throw Error(ErrorCode::not_found, "no such summarizer instance", std::string(generator_id));
    if (others.size() < 2) throw Error(ErrorCode::invalid_argument, "model pool too small");

    // two draws without replacement
    const std::size_t a = rng.below(others.size());
    std::size_t b = rng.below(others.size() - 1);
    if (b >= a) ++b;

    Verification v;
    v.validator_ids = {others[a]->id, others[b]->id};
    v.verdicts = {others[a]->verify(summary, text), others[b]->verify(summary, text)};
    v.accepted = v.verdicts[0] && v.verdicts[1];
    return v;
}

bool valid_provenance(const SummaryAttempt& a) {
    return a.accepted() && a.validator_ids[0] != a.validator_ids[1] && a.validator_ids[0] != a.generator_id &&
           a.validator_ids[1] != a.generator_id;
}

ConsensusRun run_consensus(const ModelPool& pool, std::string_view text, std::uint32_t max_attempts, Rng& rng) {
    if (max_attempts == 0) throw Error(ErrorCode::invalid_argument, "max_attempts must be at least 1");
    ConsensusRun run;
    for (std::uint32_t i = 1; i <= max_attempts; ++i) {
        auto gen = generate_summary(pool, text, rng);
        auto ver = verify_summary(pool, gen.summary, text, gen.generator_id, rng);
        SummaryAttempt attempt{i, std::move(gen.generator_id), std::move(gen.summary), ver.validator_ids,
                               ver.verdicts};
        run.attempts.push_back(attempt);
        if (ver.accepted) {
            run.result = TrustworthySummary{attempt.summary, crypto::sm3_digest(attempt.summary), std::move(attempt), i};
            break;
        }
    }
    return run;
}

TrustworthySummary consensus_summarize(const ModelPool& pool, std::string_view text, std::uint32_t max_attempts) {
    auto rng = pool.rng_for(text);
    auto run = run_consensus(pool, text, max_attempts, rng);
    if (!run.result) {
        throw Error(ErrorCode::consensus_failed, "no summary accepted by both validators",
                    "attempts=" + std::to_string(run.attempts.size()));
    }
    return std::move(*run.result);
}

}  // namespace peerchain::summary
