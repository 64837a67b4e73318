#include <doctest.h>

#include <functional>

#include "contract_fixture.hpp"

using namespace fixture;

namespace {

StateFlag flag(const World& w) { return w.state.files.at(World::article).state_flag; }

StartReview review(std::uint32_t quorum, std::uint32_t num, std::uint32_t den) {
    return StartReview{World::article, ThresholdConfig{quorum, num, den}};
}

Endorse vote(Verdict v) { return Endorse{World::article, v}; }

constexpr auto fav = Verdict::favorable;
constexpr auto unfav = Verdict::unfavorable;

UpdateFile edit(const World& w, const char* text) {
    return UpdateFile{World::article, crypto::sm3_digest(text), crypto::sm3_digest(std::string("abs:") + text),
                      key_map(w, 0x33), key_map(w, 0x44)};
}

Bytes state_bytes(const State& s) {
    Writer wr;
    encode_state(wr, s);
    return std::move(wr).take();
}

}  // namespace

TEST_SUITE("payload encoding") {
    TEST_CASE("every payload kind roundtrips") {
        auto w = make_world(1, false);
        const Digest d = crypto::sm3_digest("d");
        std::vector<Payload> all = {
            Genesis{w.admin.public_key(), 1000000000000ULL, 1000000, GasSchedule{21, {{PayloadKind::endorse, 5}}}},
            RegisterAccount{w.uploader.public_key(), Role::expert, "Zoë"},
            GrantEther{w.uploader.address},
            CreateGroup{"grp", w.group_keys.public_key()},
            AddMember{"grp", w.scholar.address, true, Bytes{9, 8, 7}},
            RemoveMember{"grp", w.scholar.address},
            SetName{"Reviewer-7"},
            UploadFile{"a1", d, d, "grp", key_map(w, 1), key_map(w, 2)},
            StartReview{"a1", ThresholdConfig{3, 2, 3}},
            Endorse{"a1", unfav},
            UpdateFile{"a1", d, d, key_map(w, 3), {}},
            RecordSummary{"a1", d, "lead", {"keyword", "centroid"}},
            LogInteraction{"a1", "c-1", InteractionKind::annotation, d},
        };
        for (const auto& p : all) {
            const Bytes enc = encode_payload(p);
            CHECK(enc[0] == static_cast<std::uint8_t>(kind_of(p)));
            const Payload back = decode_payload(enc);
            CHECK(kind_of(back) == kind_of(p));
            CHECK(encode_payload(back) == enc);
        }
    }

    TEST_CASE("malformed encodings are rejected") {
        Bytes enc = encode_payload(SetName{"x"});
        Bytes trailing = enc;
        trailing.push_back(0);
        CHECK_THROWS_AS(decode_payload(trailing), Error);
        CHECK_THROWS_AS(decode_payload(Bytes(enc.begin(), enc.end() - 1)), Error);
        CHECK_THROWS_AS(decode_payload(Bytes{0x7f}), Error);
        CHECK_THROWS_AS(decode_payload(Bytes{}), Error);
        Bytes bad_verdict = encode_payload(Endorse{"a", fav});
        bad_verdict.back() = 2;
        CHECK_THROWS_AS(decode_payload(bad_verdict), Error);
    }

    TEST_CASE("gas schedule") {
        GasSchedule g{21, {{PayloadKind::upload_file, 40}}};
        CHECK(g.fee(PayloadKind::genesis) == 0);
        CHECK(g.fee(PayloadKind::endorse) == 21);
        CHECK(g.fee(PayloadKind::upload_file) == 40);
    }
}

TEST_SUITE("users and groups") {
    TEST_CASE("set_name") {
        auto w = make_world(1, false);
        CHECK(w.run(w.scholar, SetName{"Reviewer-7"}).ok);
        CHECK(w.state.users.at(w.scholar.address).display_name == "Reviewer-7");
        CHECK(w.run(w.scholar, SetName{"Second"}).ok);
        CHECK(w.state.users.at(w.scholar.address).display_name == "Second");

        auto empty = w.run(w.scholar, SetName{""});
        CHECK_FALSE(empty.ok);
        CHECK(empty.code == ErrorCode::invalid_argument);
        CHECK_FALSE(w.run(w.scholar, SetName{std::string(65, 'x')}).ok);
        CHECK(w.run(w.scholar, SetName{std::string(64, 'x')}).ok);

        auto stranger = seeded_party(9, 9);
        auto o = w.run(stranger, SetName{"ghost"});
        CHECK_FALSE(o.ok);
        CHECK(o.code == ErrorCode::unknown_identity);
    }

    TEST_CASE("administrative payloads need the administrator") {
        auto w = make_world(1, false);
        auto fresh = seeded_party(9, 1);
        CHECK(w.run(w.scholar, RegisterAccount{fresh.public_key(), Role::scholar, "x"}).code ==
              ErrorCode::unauthorized);
        CHECK(w.run(w.scholar, CreateGroup{"g2", fresh.public_key()}).code == ErrorCode::unauthorized);
        CHECK(w.run(w.admin, RegisterAccount{fresh.public_key(), Role::scholar, "x"}).ok);
        CHECK(w.run(w.admin, RegisterAccount{fresh.public_key(), Role::scholar, "x"}).code ==
              ErrorCode::already_exists);
        CHECK(w.run(w.admin, Genesis{}).code == ErrorCode::invalid_argument);
    }

    TEST_CASE("only expert accounts join as experts") {
        auto w = make_world(0, false);
        auto o = w.run(w.admin, AddMember{World::group, w.outsider.address, true, Bytes{1}});
        CHECK_FALSE(o.ok);
        CHECK(w.run(w.admin, AddMember{World::group, w.outsider.address, false, Bytes{1}}).ok);
        CHECK(w.run(w.admin, AddMember{World::group, w.outsider.address, false, Bytes{1}}).code ==
              ErrorCode::already_exists);
        CHECK(w.state.users.at(w.outsider.address).groups.contains(World::group));
        CHECK(w.run(w.admin, RemoveMember{World::group, w.outsider.address}).ok);
        CHECK_FALSE(w.state.users.at(w.outsider.address).groups.contains(World::group));
        CHECK_FALSE(w.state.groups.at(World::group).key_shares.contains(w.outsider.address));
    }
}

TEST_SUITE("upload and review") {
    TEST_CASE("fresh upload is flag 0, version 1") {
        auto w = make_world(2);
        const auto& f = w.state.files.at(World::article);
        CHECK(f.state_flag == StateFlag::not_in_review);
        CHECK(f.version == 1);
        CHECK(f.endorsements.empty());
        CHECK(f.uploader == w.uploader.address);
    }

    TEST_CASE("upload rejections") {
        auto w = make_world(1);
        UploadFile up{World::article, crypto::sm3_digest("x"), crypto::sm3_digest("y"), World::group,
                      key_map(w, 1), key_map(w, 2)};
        CHECK(w.run(w.uploader, up).code == ErrorCode::already_exists);

        up.article_id = "paper-2";
        auto o = w.run(w.outsider, up);
        CHECK(o.code == ErrorCode::unauthorized);

        up.wrapped_keys.erase(w.group_address);
        CHECK(w.run(w.uploader, up).code == ErrorCode::invalid_argument);

        up.wrapped_keys = key_map(w, 1);
        up.article_id = "../escape";
        CHECK(w.run(w.uploader, up).code == ErrorCode::invalid_argument);
        CHECK(w.state.files.size() == 1);
    }

    TEST_CASE("start_review transitions") {
        auto w = make_world(2);
        CHECK(w.run(w.scholar, review(2, 1, 2)).code == ErrorCode::unauthorized);
        CHECK(w.run(w.uploader, review(0, 1, 2)).code == ErrorCode::invalid_argument);
        CHECK(w.run(w.uploader, review(1, 3, 2)).code == ErrorCode::invalid_argument);
        CHECK(flag(w) == StateFlag::not_in_review);
        CHECK(w.run(w.uploader, review(2, 1, 2)).ok);
        CHECK(flag(w) == StateFlag::in_review);
        CHECK(w.run(w.uploader, review(2, 1, 2)).code == ErrorCode::invalid_state);
        CHECK(w.run(w.experts[0], vote(fav)).ok);
        CHECK(w.run(w.experts[1], vote(fav)).ok);
        CHECK(flag(w) == StateFlag::finished);
        CHECK(w.run(w.uploader, review(2, 1, 2)).code == ErrorCode::invalid_state);
    }

    TEST_CASE("endorsement examples") {
        SUBCASE("quorum 2, ratio 1/2, four eligible, two favorable") {
            auto w = make_world(4);
            REQUIRE(w.run(w.uploader, review(2, 1, 2)).ok);
            CHECK(w.run(w.experts[0], vote(fav)).ok);
            CHECK(flag(w) == StateFlag::in_review);
            CHECK(w.run(w.experts[1], vote(fav)).ok);
            CHECK(flag(w) == StateFlag::finished);
            CHECK(oracle_passes(2, 2, 4, 2, 1, 2));
        }
        SUBCASE("quorum 3, ratio 1/2, four eligible, fav fav unfav") {
            auto w = make_world(4);
            REQUIRE(w.run(w.uploader, review(3, 1, 2)).ok);
            CHECK(w.run(w.experts[0], vote(fav)).ok);
            CHECK(w.run(w.experts[1], vote(fav)).ok);
            CHECK(w.run(w.experts[2], vote(unfav)).ok);
            CHECK(flag(w) == StateFlag::in_review);
            CHECK_FALSE(oracle_passes(2, 3, 4, 3, 1, 2));
        }
    }

    TEST_CASE("endorsement rejections") {
        auto w = make_world(3);
        CHECK(w.run(w.experts[0], vote(fav)).code == ErrorCode::invalid_state);
        REQUIRE(w.run(w.uploader, review(3, 1, 1)).ok);
        CHECK(w.run(w.experts[0], vote(fav)).ok);
        auto twice = w.run(w.experts[0], vote(unfav));
        CHECK(twice.code == ErrorCode::already_exists);
        CHECK(w.state.files.at(World::article).endorsements.at(w.experts[0].address) == fav);
        CHECK(w.run(w.uploader, vote(fav)).code == ErrorCode::unauthorized);
        CHECK(w.run(w.scholar, vote(fav)).code == ErrorCode::unauthorized);
        CHECK(w.run(w.outsider, vote(fav)).code == ErrorCode::unauthorized);
        CHECK(w.state.files.at(World::article).endorsements.size() == 1);
    }

    TEST_CASE("expert uploader is excluded from its own review") {
        auto w = make_world(2, false);
        UploadFile up{"by-expert", crypto::sm3_digest("x"), crypto::sm3_digest("y"), World::group, {}, {}};
        up.wrapped_keys = {{w.experts[0].address, Bytes{1}}, {w.group_address, Bytes{2}}};
        up.abstract_keys = up.wrapped_keys;
        REQUIRE(w.run(w.experts[0], up).ok);
        REQUIRE(w.run(w.experts[0], StartReview{"by-expert", ThresholdConfig{1, 1, 1}}).ok);
        const auto& f = w.state.files.at("by-expert");
        CHECK(f.eligible_experts.size() == 1);
        CHECK_FALSE(f.eligible_experts.contains(w.experts[0].address));
        CHECK(w.run(w.experts[0], Endorse{"by-expert", fav}).code == ErrorCode::unauthorized);
        CHECK(w.run(w.experts[1], Endorse{"by-expert", fav}).ok);
        CHECK(w.state.files.at("by-expert").state_flag == StateFlag::finished);
    }

    TEST_CASE("eligibility is a snapshot taken at start_review") {
        auto w = make_world(2);
        REQUIRE(w.run(w.uploader, review(2, 1, 1)).ok);
        auto late = seeded_party(7, 0);
        REQUIRE(w.run(w.admin, RegisterAccount{late.public_key(), Role::expert, "late"}).ok);
        REQUIRE(w.run(w.admin, AddMember{World::group, late.address, true, Bytes{1}}).ok);
        CHECK(w.run(late, vote(fav)).code == ErrorCode::unauthorized);
        CHECK(w.state.files.at(World::article).eligible_experts.size() == 2);

        REQUIRE(w.run(w.admin, RemoveMember{World::group, w.experts[1].address}).ok);
        CHECK(w.run(w.experts[1], vote(fav)).code == ErrorCode::unauthorized);
        CHECK(w.run(w.experts[0], vote(fav)).ok);
        // the removed expert still counts in the denominator, so 1/2 < 1
        CHECK(flag(w) == StateFlag::in_review);
    }

    TEST_CASE("threshold predicate matches the oracle for small groups") {
        const std::vector<std::pair<std::uint32_t, std::uint32_t>> ratios = {{1, 4}, {1, 3}, {1, 2},
                                                                             {2, 3}, {3, 4}, {1, 1}};
        std::size_t sequences = 0;
        for (std::size_t g = 1; g <= 3; ++g) {
            const World base = make_world(g);
            for (std::uint32_t q = 1; q <= 3; ++q) {
                for (auto [num, den] : ratios) {
                    World w0 = base;
                    REQUIRE(w0.run(w0.uploader, review(q, num, den)).ok);
                    std::function<void(const World&, std::vector<bool>&, std::size_t, std::size_t)> walk;
                    walk = [&](const World& w, std::vector<bool>& used, std::size_t favs, std::size_t n) {
                        ++sequences;
                        const bool expect = oracle_passes(favs, n, g, q, num, den);
                        CHECK((flag(w) == StateFlag::finished) == expect);
                        for (std::size_t e = 0; e < g; ++e) {
                            if (used[e]) continue;
                            for (auto v : {fav, unfav}) {
                                World next = w;
                                auto o = next.run(next.experts[e], vote(v));
                                CHECK(o.ok == !expect);
                                if (!o.ok) continue;
                                used[e] = true;
                                walk(next, used, favs + (v == fav), n + 1);
                                used[e] = false;
                            }
                        }
                    };
                    std::vector<bool> used(g, false);
                    walk(w0, used, 0, 0);
                }
            }
        }
        CHECK(sequences > 0);
    }
}

TEST_SUITE("access") {
    TEST_CASE("policy table by relation and flag") {
        auto w = make_world(2);
        auto level = [&](const Party& p) { return get_file(w.state, p.address, World::article).level; };
        CHECK(level(w.uploader) == AccessLevel::full);
        CHECK(level(w.experts[0]) == AccessLevel::abstract_only);
        CHECK(level(w.scholar) == AccessLevel::abstract_only);
        CHECK_THROWS_AS(get_file(w.state, w.outsider.address, World::article), Error);

        REQUIRE(w.run(w.uploader, review(2, 1, 1)).ok);
        CHECK(level(w.experts[0]) == AccessLevel::review);
        CHECK(level(w.scholar) == AccessLevel::abstract_only);

        REQUIRE(w.run(w.experts[0], vote(fav)).ok);
        REQUIRE(w.run(w.experts[1], vote(fav)).ok);
        CHECK(level(w.experts[0]) == AccessLevel::full);
        CHECK(level(w.scholar) == AccessLevel::full);
        CHECK(level(w.uploader) == AccessLevel::full);
    }

    TEST_CASE("views release keys only at the matching level") {
        auto w = make_world(2);
        REQUIRE(w.run(w.uploader, review(2, 1, 1)).ok);

        auto scholar = get_file(w.state, w.scholar.address, World::article);
        CHECK(scholar.level == AccessLevel::abstract_only);
        CHECK_FALSE(scholar.article_key.has_value());
        CHECK_FALSE(scholar.plaintext_digest.has_value());
        REQUIRE(scholar.abstract_key.has_value());
        CHECK(scholar.abstract_key->wrapped.recipient == w.group_address);
        CHECK(scholar.abstract_key->group_key_share == Bytes{2});

        auto expert = get_file(w.state, w.experts[0].address, World::article);
        CHECK(expert.level == AccessLevel::review);
        CHECK(expert.caller_may_endorse);
        CHECK(expert.plaintext_digest.has_value());
        CHECK(expert.eligible == 2);
        CHECK_FALSE(expert.article_key.has_value());

        auto up = get_file(w.state, w.uploader.address, World::article);
        REQUIRE(up.article_key.has_value());
        CHECK(up.article_key->wrapped.recipient == w.uploader.address);
        CHECK_FALSE(up.article_key->group_key_share.has_value());

        REQUIRE(w.run(w.experts[0], vote(fav)).ok);
        REQUIRE(w.run(w.experts[1], vote(fav)).ok);
        auto done = get_file(w.state, w.scholar.address, World::article);
        REQUIRE(done.article_key.has_value());
        CHECK(done.article_key->wrapped.recipient == w.group_address);
        CHECK(done.article_key->wrapped.ciphertext == w.state.files.at(World::article).wrapped_keys.at(w.group_address));
    }

    TEST_CASE("unknown article and visibility list") {
        auto w = make_world(1);
        try {
            get_file(w.state, w.uploader.address, "nope");
            FAIL("expected not_found");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::not_found);
        }
        try {
            get_file(w.state, w.outsider.address, World::article);
            FAIL("expected unauthorized");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unauthorized);
        }
        CHECK(visible_articles(w.state, w.scholar.address) == std::vector<ArticleId>{World::article});
        CHECK(visible_articles(w.state, w.outsider.address).empty());
    }
}

TEST_SUITE("modification and provenance") {
    TEST_CASE("authorized edit appends a log entry") {
        auto w = make_world(1);
        const std::uint64_t t = w.time;
        REQUIRE(w.run(w.uploader, edit(w, "v2")).ok);
        const auto& f = w.state.files.at(World::article);
        CHECK(f.version == 2);
        REQUIRE(f.modification_log.size() == 1);
        const auto& m = f.modification_log[0];
        CHECK(m.modifier == w.uploader.address);
        CHECK(m.time == t);
        CHECK(m.article_id == World::article);
        CHECK(m.new_digest == crypto::sm3_digest("v2"));
        CHECK(f.plaintext_digest == crypto::sm3_digest("v2"));
        CHECK(f.digest_for_version(1) == crypto::sm3_digest("full text"));
        CHECK(f.digest_for_version(2) == crypto::sm3_digest("v2"));
        CHECK_FALSE(f.digest_for_version(3).has_value());
    }

    TEST_CASE("unauthorized edit leaves the version unchanged") {
        auto w = make_world(1);
        CHECK(w.run(w.scholar, edit(w, "x")).code == ErrorCode::unauthorized);
        CHECK(w.run(w.outsider, edit(w, "x")).code == ErrorCode::unauthorized);
        CHECK(w.state.files.at(World::article).version == 1);
    }

    TEST_CASE("edits after acceptance keep flag 2") {
        auto w = make_world(1);
        REQUIRE(w.run(w.uploader, review(1, 1, 1)).ok);
        REQUIRE(w.run(w.experts[0], vote(fav)).ok);
        REQUIRE(flag(w) == StateFlag::finished);
        CHECK(w.run(w.scholar, edit(w, "by scholar")).ok);
        CHECK(flag(w) == StateFlag::finished);
        CHECK(w.state.files.at(World::article).version == 2);
    }

    TEST_CASE("record_summary arity and disjointness") {
        auto w = make_world(1);
        const Digest d = crypto::sm3_digest("summary");
        CHECK(w.run(w.admin, RecordSummary{World::article, d, "A", {"B", "C"}}).ok);
        CHECK(w.state.files.at(World::article).abstract_digest == d);
        CHECK(w.run(w.admin, RecordSummary{World::article, d, "A", {"B"}}).code == ErrorCode::invalid_argument);
        CHECK(w.run(w.admin, RecordSummary{World::article, d, "A", {"A", "B"}}).code == ErrorCode::invalid_argument);
        CHECK(w.run(w.admin, RecordSummary{World::article, d, "A", {"B", "B"}}).code == ErrorCode::invalid_argument);
        CHECK(w.run(w.uploader, RecordSummary{World::article, d, "A", {"B", "C"}}).code == ErrorCode::unauthorized);
        CHECK(w.run(w.admin, RecordSummary{"nope", d, "A", {"B", "C"}}).code == ErrorCode::not_found);
        CHECK(w.state.files.at(World::article).summaries.size() == 1);
    }

    TEST_CASE("comments need full access and unique ids") {
        auto w = make_world(1);
        const Digest d = crypto::sm3_digest("body");
        CHECK(w.run(w.uploader, LogInteraction{World::article, "c1", InteractionKind::comment, d}).ok);
        CHECK(w.run(w.uploader, LogInteraction{World::article, "c1", InteractionKind::comment, d}).code ==
              ErrorCode::already_exists);
        CHECK(w.run(w.scholar, LogInteraction{World::article, "c2", InteractionKind::annotation, d}).code ==
              ErrorCode::unauthorized);
        CHECK(w.state.files.at(World::article).interactions.size() == 1);
    }

    TEST_CASE("state encoding is deterministic and sensitive") {
        auto a = make_world(2);
        auto b = make_world(2);
        CHECK(state_bytes(a.state) == state_bytes(b.state));
        REQUIRE(b.run(b.scholar, SetName{"changed"}).ok);
        CHECK(state_bytes(a.state) != state_bytes(b.state));
    }
}
