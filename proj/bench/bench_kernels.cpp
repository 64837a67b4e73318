// Serial reference vs OpenMP kernels on the three workloads that have both:
// chain verification, single-byte tamper sweeps and consensus simulation.
// Each row also checks that both versions agree.

#include <chrono>
#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#include "ledger_workload.hpp"
#include "peerchain/engine/workload.hpp"
#include "peerchain/filestore/filestore.hpp"
#include "peerchain/ledger/ledger.hpp"
#include "peerchain/summary/simulate.hpp"

using namespace peerchain;
using parallel::Exec;

namespace {

template <typename F>
double best_ms(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

void row(const char* name, const char* size, double serial, double par, bool agree) {
    std::printf("%-18s %-16s %10.2f %10.2f %8.2fx  %s\n", name, size, serial, par, serial / par,
                agree ? "agree" : "DISAGREE");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel kernels"};
    int reps = 3;
    std::size_t txs = 1000;
    std::size_t blob_bytes = 4096;
    std::size_t runs = 10000;
    app.add_option("--reps", reps, "repetitions; the best time is reported");
    app.add_option("--txs", txs, "transactions in the verified chain");
    app.add_option("--bytes", blob_bytes, "plaintext bytes of the swept blob");
    app.add_option("--runs", runs, "consensus simulation runs");
    CLI11_PARSE(app, argc, argv);

    std::printf("threads=%d reps=%d\n", parallel::max_threads(), reps);
    std::printf("%-18s %-16s %10s %10s %9s\n", "kernel", "size", "serial ms", "omp ms", "speedup");

    {
        const auto op = workload::keys_for(7);
        auto ledger = ledger::Ledger::create(op);
        workload::run(*ledger, op, 11, txs);
        const auto blocks = ledger->export_blocks();
        ledger::VerifyReport s, p;
        const double ts = best_ms(reps, [&] { s = ledger::verify_chain(blocks, Exec::serial); });
        const double tp = best_ms(reps, [&] { p = ledger::verify_chain(blocks, Exec::parallel); });
        const auto size = std::to_string(blocks.size()) + " blocks";
        row("verify_chain", size.c_str(), ts, tp, s.ok && p.ok);
    }

    {
        crypto::SeededRandom rng(3);
        const auto key = crypto::generate_symmetric_key(rng);
        const auto text = engine::synthesize_text(3, "bench", static_cast<std::uint32_t>(blob_bytes / 6));
        const std::string plain = text.substr(0, std::min(text.size(), blob_bytes));
        filestore::CiphertextBlob blob;
        blob.article_id = "bench";
        blob.nonce = crypto::generate_nonce(rng);
        blob.ciphertext = crypto::sym_encrypt(key, as_bytes(plain), blob.nonce, filestore::blob_aad("bench", 1, blob.kind));
        const auto digest = crypto::sm3_digest(plain);
        filestore::SweepResult s, p;
        const double ts = best_ms(reps, [&] { s = filestore::tamper_sweep(blob, key, digest, 0xff, Exec::serial); });
        const double tp = best_ms(reps, [&] { p = filestore::tamper_sweep(blob, key, digest, 0xff, Exec::parallel); });
        const auto size = std::to_string(blob.ciphertext.size()) + " bytes";
        row("tamper_sweep", size.c_str(), ts, tp, s.detected == p.detected && s.misses() == 0);
    }

    {
        summary::SimulationReport s, p;
        const double ts = best_ms(reps, [&] { s = summary::simulate_consensus(runs, 0.5, 1000, 5, Exec::serial); });
        const double tp = best_ms(reps, [&] { p = summary::simulate_consensus(runs, 0.5, 1000, 5, Exec::parallel); });
        const auto size = std::to_string(runs) + " runs";
        row("simulate_consensus", size.c_str(), ts, tp, s.attempts == p.attempts);
    }
    return 0;
}
