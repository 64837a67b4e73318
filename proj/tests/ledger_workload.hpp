#pragma once

// Random workload of transactions that all pass pre-validation. Some payloads
// are rejected by the contract on purpose so failed receipts are exercised.

#include <random>
#include <string>
#include <vector>

#include "peerchain/crypto/crypto.hpp"
#include "peerchain/ledger/ledger.hpp"

namespace workload {

using namespace peerchain;
using namespace peerchain::contract;

inline crypto::KeyPair keys_for(std::uint64_t tag) {
    Bytes seed(32, 0);
    for (int i = 0; i < 8; ++i) seed[31 - i] = static_cast<std::uint8_t>(tag >> (8 * i));
    seed[0] = 0x5a;
    return crypto::generate_keypair(ByteView(seed));
}

struct Member {
    crypto::KeyPair keys;
    Address address;
    bool expert = false;
};

struct Stats {
    std::size_t submitted = 0;
    std::size_t failed_receipts = 0;
};

/// Submits exactly `count` transactions to `ledger`, each in its own block
/// unless `batch` > 1. Deterministic in `seed`.
inline Stats run(ledger::Ledger& ledger, const crypto::KeyPair& op, std::uint64_t seed, std::size_t count,
                 std::size_t batch = 1) {
    std::mt19937_64 rng(seed);
    std::vector<Member> members;
    std::vector<std::string> articles;
    const std::string group = "wg";
    const auto group_keys = keys_for(seed * 1000 + 999);
    Stats stats;
    std::vector<ledger::Request> pending;

    auto flush = [&] {
        if (pending.empty()) return;
        for (const auto& r : ledger.submit_all(pending)) {
            ++stats.submitted;
            if (!r.ok) ++stats.failed_receipts;
        }
        pending.clear();
    };
    auto push = [&](const crypto::KeyPair& k, Payload p) {
        pending.push_back({&k, std::move(p), std::nullopt});
        if (pending.size() >= batch) flush();
    };
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto keymap = [&](const Address& uploader) {
        return KeyMap{{uploader, Bytes(113, 1)}, {crypto::derive_address(group_keys.public_key), Bytes(113, 2)}};
    };

    push(op, CreateGroup{group, group_keys.public_key});
    while (stats.submitted + pending.size() < count) {
        const std::size_t remaining = count - stats.submitted - pending.size();
        const int choice = static_cast<int>(rng() % 100);
        if (members.size() < 4 || (choice < 12 && remaining >= 3)) {
            if (remaining < 3) {
                push(op, SetName{"op-" + std::to_string(rng() % 1000)});
                continue;
            }
            // registration, grant and membership travel together
            flush();
            Member m;
            m.keys = keys_for(seed * 1000 + members.size());
            m.address = crypto::derive_address(m.keys.public_key);
            m.expert = rng() % 2 == 0;
            members.push_back(m);
            const auto role = m.expert ? Role::expert : Role::scholar;
            push(op, RegisterAccount{m.keys.public_key, role, "user-" + std::to_string(members.size())});
            push(op, GrantEther{m.address});
            push(op, AddMember{group, m.address, m.expert, Bytes{7}});
            continue;
        }
        const Member& m = members[pick(members.size())];
        if (choice < 40) {
            push(m.keys, SetName{"n" + std::to_string(rng() % 100000)});
        } else if (choice < 55) {
            const std::string id = "a" + std::to_string(articles.size());
            articles.push_back(id);
            push(m.keys, UploadFile{id, crypto::sm3_digest(id), crypto::sm3_digest("abs" + id), group,
                                    keymap(m.address), keymap(m.address)});
        } else if (choice < 70 && !articles.empty()) {
            // may fail: caller is often not the uploader
            push(m.keys, StartReview{articles[pick(articles.size())], ThresholdConfig{2, 1, 2}});
        } else if (choice < 90 && !articles.empty()) {
            // may fail: non-expert, wrong flag or double vote
            push(m.keys, Endorse{articles[pick(articles.size())], rng() % 3 ? Verdict::favorable : Verdict::unfavorable});
        } else if (!articles.empty()) {
            push(m.keys, LogInteraction{articles[pick(articles.size())], "c" + std::to_string(rng()),
                                        InteractionKind::comment, crypto::sm3_digest("body")});
        } else {
            push(m.keys, SetName{"x"});
        }
    }
    flush();
    return stats;
}

}  // namespace workload
