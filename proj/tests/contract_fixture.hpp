#pragma once

// Shared contract fixture for unit and acceptance tests: one group with an
// uploader, `experts` expert members, one scholar member, and an outsider.

#include <numeric>
#include <string>
#include <vector>

#include "peerchain/contract/contract.hpp"
#include "peerchain/crypto/crypto.hpp"

namespace fixture {

using namespace peerchain;
using namespace peerchain::contract;

struct Party {
    crypto::KeyPair keys;
    Address address;
    const PublicKey& public_key() const { return keys.public_key; }
};

inline Party seeded_party(std::uint8_t tag, std::uint8_t index) {
    Bytes seed(32, 0);
    seed[0] = tag;
    seed[31] = index;
    Party p;
    p.keys = crypto::generate_keypair(ByteView(seed));
    p.address = crypto::derive_address(p.keys.public_key);
    return p;
}

struct World {
    State state;
    Party admin, uploader, scholar, outsider, group_keys;
    std::vector<Party> experts;
    Address group_address;
    std::uint64_t time = 1;

    static constexpr const char* group = "g";
    static constexpr const char* article = "paper-1";

    Outcome run(const Party& who, const Payload& p) { return execute(state, who.address, p, time++); }

    Address addr_of_expert(std::size_t i) const { return experts.at(i).address; }
};

inline KeyMap key_map(const World& w, std::uint8_t marker) {
    return {{w.uploader.address, Bytes(113, marker)}, {w.group_address, Bytes(113, marker ^ 0xff)}};
}

/// Builds the group; the article is uploaded (flag 0) when `upload` is set.
inline World make_world(std::size_t expert_count, bool upload = true) {
    World w;
    w.admin = seeded_party(1, 0);
    w.uploader = seeded_party(2, 0);
    w.scholar = seeded_party(3, 0);
    w.outsider = seeded_party(4, 0);
    w.group_keys = seeded_party(5, 0);
    for (std::size_t i = 0; i < expert_count; ++i) w.experts.push_back(seeded_party(6, static_cast<std::uint8_t>(i)));
    w.state.admin = w.admin.address;
    w.group_address = w.group_keys.address;

    auto must = [](const Outcome& o) {
        if (!o.ok) throw Error(o.code, "fixture setup failed", o.message);
    };
    must(w.run(w.admin, RegisterAccount{w.uploader.public_key(), Role::scholar, "uploader"}));
    must(w.run(w.admin, RegisterAccount{w.scholar.public_key(), Role::scholar, "scholar"}));
    must(w.run(w.admin, RegisterAccount{w.outsider.public_key(), Role::scholar, "outsider"}));
    must(w.run(w.admin, CreateGroup{World::group, w.group_keys.public_key()}));
    must(w.run(w.admin, AddMember{World::group, w.uploader.address, false, Bytes{1}}));
    must(w.run(w.admin, AddMember{World::group, w.scholar.address, false, Bytes{2}}));
    for (std::size_t i = 0; i < expert_count; ++i) {
        const auto& e = w.experts[i];
        must(w.run(w.admin, RegisterAccount{e.public_key(), Role::expert, "expert-" + std::to_string(i)}));
        must(w.run(w.admin, AddMember{World::group, e.address, true, Bytes{3, static_cast<std::uint8_t>(i)}}));
    }
    if (upload) {
        UploadFile up;
        up.article_id = World::article;
        up.plaintext_digest = crypto::sm3_digest("full text");
        up.abstract_digest = crypto::sm3_digest("abstract");
        up.group = World::group;
        up.wrapped_keys = key_map(w, 0x11);
        up.abstract_keys = key_map(w, 0x22);
        must(w.run(w.uploader, up));
    }
    return w;
}

/// Independent threshold oracle: brings both fractions to a common
/// denominator instead of cross-multiplying.
inline bool oracle_passes(std::size_t favorable, std::size_t verdicts, std::size_t eligible, std::uint32_t quorum,
                          std::uint32_t num, std::uint32_t den) {
    if (favorable < quorum) return false;
    if (eligible == 0) return true;
    const std::size_t common = std::lcm(eligible, static_cast<std::size_t>(den));
    return verdicts * (common / eligible) >= num * (common / den);
}

}  // namespace fixture
