#include "peerchain/summary/simulate.hpp"

#include <memory>

#include "peerchain/summary/consensus.hpp"

namespace peerchain::summary {

namespace {

constexpr std::string_view kText = "A fixed input. The simulated instances ignore its content.";

struct RunOutcome {
    std::uint32_t attempts = 0;
    bool accepted = false;
    bool provenance_ok = false;
    bool leaked = false;
};

RunOutcome simulate_one(std::size_t run, double p, std::uint32_t max_attempts, std::uint64_t seed) {
    // One coin stream per run, shared by that run's validators only.
    auto coins = std::make_shared<Rng>(seed, 2 * static_cast<std::uint64_t>(run) + 1);
    std::vector<SummarizerInstance> instances;
    for (int i = 0; i < 3; ++i) {
        const std::string id = "sim-" + std::to_string(i);
        instances.push_back({id, [id](std::string_view) { return "summary by " + id; },
                             [coins, p](std::string_view, std::string_view) { return coins->chance(p); }});
    }
    const ModelPool pool(std::move(instances), seed);
    Rng select(seed, 2 * static_cast<std::uint64_t>(run));
    const auto result = run_consensus(pool, kText, max_attempts, select);
    RunOutcome out;
    out.attempts = static_cast<std::uint32_t>(result.attempts.size());
    out.accepted = result.result.has_value();
    if (out.accepted) {
        out.provenance_ok = valid_provenance(result.result->provenance) &&
                            result.result->attempts_total == out.attempts;
    } else {
        for (const auto& a : result.attempts) out.leaked = out.leaked || a.accepted();
    }
    return out;
}

}  // namespace

SimulationReport simulate_consensus(std::size_t runs, double accept_p, std::uint32_t max_attempts, std::uint64_t seed,
                                    parallel::Exec exec) {
    std::vector<RunOutcome> outcomes(runs);
    SimulationReport report;
    report.runs = runs;
    report.total_attempts = parallel::sum_over(
        runs,
        [&](std::size_t i) {
            outcomes[i] = simulate_one(i, accept_p, max_attempts, seed);
            return static_cast<std::uint64_t>(outcomes[i].attempts);
        },
        exec);
    report.attempts.reserve(runs);
    for (const auto& o : outcomes) {
        report.attempts.push_back(o.attempts);
        if (o.accepted) {
            ++report.accepted;
            if (!o.provenance_ok) ++report.provenance_violations;
        } else {
            ++report.exhausted;
            if (o.leaked) ++report.leaked_summaries;
        }
    }
    return report;
}

}  // namespace peerchain::summary
