#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include <unistd.h>

#include "peerchain/crypto/sm3.hpp"
#include "peerchain/error.hpp"
#include "peerchain/summary/consensus.hpp"
#include "peerchain/summary/replay.hpp"
#include "peerchain/summary/simulate.hpp"

using namespace peerchain;
using namespace peerchain::summary;
using parallel::Exec;

namespace {

const std::string kArticle =
    "Blockchain ledgers record peer review events so that reviewers cannot silently alter verdicts. "
    "We describe a review platform where every article is hashed and encrypted before storage. "
    "The weather on the day of the experiment was mild and sunny. "
    "Experts endorse articles through a contract, and the contract counts endorsements against thresholds. "
    "Reviewers read an abstract before they are granted the full article. "
    "Lunch was served in the courtyard after the second session. "
    "The ledger keeps a hash chain of blocks, so any tampering with recorded review events is detected. "
    "Abstracts are produced by summarizer instances and accepted only when two validators agree. "
    "Several participants travelled by train to attend. "
    "Encryption keys for each article are wrapped for the uploader and for the review group. "
    "The contract moves an article from upload to review and then to a finished review state. "
    "A final panel thanked the organizers. "
    "Our evaluation replays a workload of articles, comments and endorsements against the ledger. "
    "Every replayed block verifies, and the recomputed state matches the recorded state root. "
    "Future work covers reputation for reviewers and incentives for timely review.";

SummarizerInstance fixed(std::string id, bool verdict) {
    return {id, [id](std::string_view) { return "from " + id; },
            [verdict](std::string_view, std::string_view) { return verdict; }};
}

double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
    double x = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        x += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    }
    return x;
}

}  // namespace

TEST_SUITE("text") {
    TEST_CASE("stop words, tokens and sentences") {
        CHECK(is_stop_word("the"));
        CHECK(is_stop_word("your"));
        CHECK_FALSE(is_stop_word("ledger"));
        CHECK(words("Hello, WORLD-42!") == std::vector<std::string>{"hello", "world", "42"});
        CHECK(content_words("The ledger and the block") == std::vector<std::string>{"ledger", "block"});
        const auto s = split_sentences("One. Two!  Three? v1.2 stays whole. tail without stop");
        REQUIRE(s.size() == 5);
        CHECK(s[0] == "One.");
        CHECK(s[3] == "v1.2 stays whole.");
        CHECK(s[4] == "tail without stop");
        CHECK(split_sentences("   ").empty());
    }

    TEST_CASE("keywords rank by count, then alphabetically") {
        const auto k = top_keywords("beta alpha beta gamma alpha beta delta the the the", 3);
        CHECK(k == std::vector<std::string>{"beta", "alpha", "delta"});
        CHECK(top_keywords("", 5).empty());
        CHECK(keyword_coverage("alpha", "", 5) == 0.0);
    }

    TEST_CASE("verifier: full text, unrelated text, length bounds") {
        VerifierConfig wide;
        wide.max_fraction = 1.0;
        CHECK(keyword_coverage(kArticle, kArticle, 10) == 1.0);
        CHECK(default_verifier(kArticle, kArticle, wide));
        // default cap rejects a summary as long as the text
        CHECK_FALSE(default_verifier(kArticle, kArticle));
        const std::string unrelated = "Cats sleep most afternoons beside warm windows.";
        CHECK(keyword_coverage(unrelated, kArticle, 10) == 0.0);
        CHECK_FALSE(default_verifier(unrelated, kArticle, wide));
        CHECK_FALSE(default_verifier("", kArticle, wide));
        CHECK_FALSE(default_verifier("x", ""));
    }

    TEST_CASE("raising tau never admits a summary rejected at a lower tau") {
        // every contiguous run of sentences of the article is a candidate
        const auto sentences = split_sentences(kArticle);
        std::vector<std::string> candidates;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            std::string acc;
            for (std::size_t j = i; j < sentences.size(); ++j) {
                acc += (acc.empty() ? "" : " ") + sentences[j];
                candidates.push_back(acc);
            }
        }
        std::size_t flips = 0;
        for (const auto& c : candidates) {
            bool rejected_below = false;
            for (int t = 0; t <= 20; ++t) {
                VerifierConfig cfg;
                cfg.tau = t / 20.0;
                const bool ok = default_verifier(c, kArticle, cfg);
                if (ok && rejected_below) ++flips;
                rejected_below = rejected_below || !ok;
            }
        }
        CHECK(candidates.size() == sentences.size() * (sentences.size() + 1) / 2);
        CHECK(flips == 0);
    }
}

TEST_SUITE("summarizers") {
    TEST_CASE("lead-k on ten sentences returns the first k") {
        std::string text;
        for (int i = 1; i <= 10; ++i) text += "Sentence number " + std::to_string(i) + " here. ";
        CHECK(lead_sentences(text, 3) == "Sentence number 1 here. Sentence number 2 here. Sentence number 3 here.");
        CHECK(lead_sentences(text, 0).empty());
        CHECK(split_sentences(lead_sentences(text, 20)).size() == 10);
    }

    TEST_CASE("budgeted extractors stay within budget and keep document order") {
        for (const auto& out : {densest_sentences(kArticle, 0.2), central_sentences(kArticle, 0.2)}) {
            CHECK(!out.empty());
            CHECK(out.size() <= static_cast<std::size_t>(0.2 * kArticle.size()));
            std::size_t last = 0;
            for (const auto& s : split_sentences(out)) {
                const auto at = kArticle.find(s);
                REQUIRE(at != std::string::npos);
                CHECK(at >= last);
                last = at;
            }
        }
        // the off-topic sentences are never picked by either extractor
        CHECK(densest_sentences(kArticle, 0.2).find("weather") == std::string::npos);
        CHECK(central_sentences(kArticle, 0.2).find("Lunch") == std::string::npos);
    }

    TEST_CASE("stubs are deterministic") {
        for (const auto& inst : default_pool(1).instances()) {
            CHECK(inst.summarize(kArticle) == inst.summarize(kArticle));
        }
    }
}

TEST_SUITE("pool") {
    TEST_CASE("construction rules") {
        CHECK_THROWS_AS(ModelPool({fixed("a", true), fixed("b", true)}, 1), Error);
        CHECK_THROWS_AS(ModelPool({fixed("a", true), fixed("a", true), fixed("c", true)}, 1), Error);
        CHECK_THROWS_AS(ModelPool({fixed("", true), fixed("b", true), fixed("c", true)}, 1), Error);
        SummarizerInstance broken{"x", {}, {}};
        CHECK_THROWS_AS(ModelPool({fixed("a", true), fixed("b", true), broken}, 1), Error);
        ModelPool ok({fixed("a", true), fixed("b", true), fixed("c", true)}, 1);
        CHECK(ok.instance("b").id == "b");
        CHECK_THROWS_AS(ok.instance("z"), Error);
    }

    TEST_CASE("fixed seed selects the same generator on repeat") {
        const auto pool = default_pool(7);
        auto r1 = pool.rng_for(kArticle);
        auto r2 = pool.rng_for(kArticle);
        for (int i = 0; i < 50; ++i) {
            CHECK(generate_summary(pool, kArticle, r1).generator_id == generate_summary(pool, kArticle, r2).generator_id);
        }
        CHECK_THROWS_AS(generate_summary(pool, "", r1), Error);
    }

    TEST_CASE("generator selection is uniform over 10,000 draws") {
        ModelPool pool({fixed("a", true), fixed("b", true), fixed("c", true)}, 99);
        Rng rng(99, 0);
        std::map<std::string, double> counts;
        const int n = 10000;
        for (int i = 0; i < n; ++i) counts[generate_summary(pool, "t", rng).generator_id] += 1;
        const double expected = n / 3.0;
        const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
        std::vector<double> obs, exp;
        for (const auto& [id, c] : counts) {
            CHECK(std::abs(c - expected) <= 3 * sigma);
            obs.push_back(c);
            exp.push_back(expected);
        }
        CHECK(counts.size() == 3);
        // 2 degrees of freedom, 0.999 quantile
        CHECK(chi_square(obs, exp) < 13.816);
    }

    TEST_CASE("validators exclude the generator over 10,000 trials") {
        ModelPool pool({fixed("a", true), fixed("b", true), fixed("c", true), fixed("d", true), fixed("e", true)}, 3);
        Rng rng(3, 1);
        std::size_t bad = 0;
        std::map<std::string, int> seen;
        for (int i = 0; i < 10000; ++i) {
            const std::string gen = pool.instances()[rng.below(pool.size())].id;
            const auto v = verify_summary(pool, "s", "t", gen, rng);
            if (v.validator_ids[0] == gen || v.validator_ids[1] == gen || v.validator_ids[0] == v.validator_ids[1]) {
                ++bad;
            }
            ++seen[v.validator_ids[0]];
            ++seen[v.validator_ids[1]];
        }
        CHECK(bad == 0);
        CHECK(seen.size() == 5);
        CHECK_THROWS_AS(verify_summary(pool, "s", "t", "nobody", rng), Error);
    }

    TEST_CASE("acceptance is the conjunction of both verdicts") {
        ModelPool pool({fixed("gen", true), fixed("yes", true), fixed("no", false)}, 5);
        Rng rng(5, 5);
        const auto v = verify_summary(pool, "s", "t", "gen", rng);
        CHECK(std::set<std::string>(v.validator_ids.begin(), v.validator_ids.end()) ==
              std::set<std::string>{"yes", "no"});
        CHECK(v.verdicts[0] != v.verdicts[1]);
        CHECK_FALSE(v.accepted);
        const auto both = verify_summary(pool, "s", "t", "no", rng);
        CHECK(both.verdicts[0]);
        CHECK(both.verdicts[1]);
        CHECK(both.accepted);
    }
}

TEST_SUITE("consensus") {
    TEST_CASE("always-accepting validators finish in one attempt") {
        ModelPool pool({fixed("a", true), fixed("b", true), fixed("c", true)}, 11);
        const auto s = consensus_summarize(pool, "some text", 16);
        CHECK(s.attempts_total == 1);
        CHECK(s.provenance.attempt_index == 1);
        CHECK(valid_provenance(s.provenance));
        CHECK(s.digest == crypto::sm3_digest(s.summary));
        CHECK(s.summary == s.provenance.summary);
    }

    TEST_CASE("always-rejecting validators stop after exactly max_attempts") {
        ModelPool pool({fixed("a", false), fixed("b", false), fixed("c", false)}, 12);
        Rng rng(12, 0);
        const auto run = run_consensus(pool, "text", 10, rng);
        CHECK(run.attempts.size() == 10);
        CHECK_FALSE(run.result.has_value());
        try {
            consensus_summarize(pool, "text", 10);
            FAIL("exhaustion not reported");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::consensus_failed);
            CHECK(e.detail() == "attempts=10");
        }
        CHECK_THROWS_AS(consensus_summarize(pool, "text", 0), Error);
    }

    TEST_CASE("default pool reaches consensus and is reproducible") {
        const auto pool = default_pool(2024);
        const auto a = consensus_summarize(pool, kArticle);
        const auto b = consensus_summarize(default_pool(2024), kArticle);
        CHECK(valid_provenance(a.provenance));
        CHECK(default_verifier(a.summary, kArticle));
        CHECK(a.summary == b.summary);
        CHECK(a.provenance.generator_id == b.provenance.generator_id);
        CHECK(a.provenance.validator_ids == b.provenance.validator_ids);
        CHECK(a.attempts_total == b.attempts_total);
    }

    TEST_CASE("Monte Carlo: mean attempts at p = 0.5 matches 1/p^2") {
        const double p = 0.5;
        const double oracle_mean = 1.0 / (p * p);
        const auto serial = simulate_consensus(10000, p, 1000, 42, Exec::serial);
        const auto par = simulate_consensus(10000, p, 1000, 42, Exec::parallel);
        CHECK(serial.attempts == par.attempts);
        CHECK(std::abs(serial.mean_attempts() - oracle_mean) <= 0.05 * oracle_mean);
        CHECK(serial.accepted == 10000);
        CHECK(serial.provenance_violations == 0);

        // histogram against the Geometric(p^2) mass function, tail pooled from 12
        const double q = p * p;
        std::vector<double> obs(12, 0), exp(12, 0);
        for (auto a : serial.attempts) obs[std::min<std::size_t>(a, 12) - 1] += 1;
        for (int k = 1; k < 12; ++k) exp[k - 1] = 10000 * q * std::pow(1 - q, k - 1);
        exp[11] = 10000 * std::pow(1 - q, 11);
        // 11 degrees of freedom, 0.999 quantile
        CHECK(chi_square(obs, exp) < 31.264);
    }

    TEST_CASE("Monte Carlo: always-reject runs all exhaust with nothing leaked") {
        const auto r = simulate_consensus(500, 0.0, 10, 1, Exec::parallel);
        CHECK(r.exhausted == 500);
        CHECK(r.leaked_summaries == 0);
        CHECK(r.total_attempts == 5000);
    }
}

TEST_SUITE("replay tape") {
    TEST_CASE("record, save, replay") {
        int calls = 0;
        RecordedSummarizer rec(RecordedSummarizer::Mode::record, [&](std::string_view t) {
            ++calls;
            return std::string(t.substr(0, 4)) + "#" + std::to_string(calls);
        });
        const auto f = rec.as_function();
        CHECK(f("alpha text") == "alph#1");
        CHECK(f("alpha text") == "alph#1");
        CHECK(f("beta text") == "beta#2");
        CHECK(calls == 2);

        const auto path = std::filesystem::temp_directory_path() / ("pc-tape-" + std::to_string(::getpid()) + ".json");
        rec.save(path);
        auto replay = RecordedSummarizer::load(path, RecordedSummarizer::Mode::replay);
        CHECK(replay.size() == 2);
        CHECK(replay("beta text") == "beta#2");
        try {
            replay("gamma");
            FAIL("unrecorded input served");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::not_found);
        }
        std::filesystem::remove(path);
        CHECK_THROWS_AS(RecordedSummarizer(RecordedSummarizer::Mode::record), Error);
        CHECK_THROWS_AS(RecordedSummarizer::load(path, RecordedSummarizer::Mode::replay), Error);
    }
}
