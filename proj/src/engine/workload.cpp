#include "peerchain/engine/workload.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "peerchain/crypto/sm3.hpp"

namespace peerchain::engine {

namespace {

constexpr std::array<std::pair<ActionKind, std::string_view>, 9> kKinds = {{
    {ActionKind::group, "group"},
    {ActionKind::user, "user"},
    {ActionKind::submit, "submit"},
    {ActionKind::review, "review"},
    {ActionKind::endorse, "endorse"},
    {ActionKind::comment, "comment"},
    {ActionKind::annotate, "annotate"},
    {ActionKind::modify, "modify"},
    {ActionKind::read, "read"},
}};

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::io_error); ++i) {
        const auto code = static_cast<ErrorCode>(i);
        if (error_code_name(code) == name) return code;
    }
    return std::nullopt;
}

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::invalid_argument, "malformed workload", "line " + std::to_string(line) + ": " + why);
}

std::uint32_t parse_u32(std::string_view s, std::size_t line) {
    if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        bad_line(line, "expected a number, got '" + std::string(s) + "'");
    }
    return static_cast<std::uint32_t>(std::stoul(std::string(s)));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(sep, start), s.size());
        out.emplace_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

Action parse_line(const std::vector<std::string>& tok, std::size_t line) {
    Action a;
    a.line = line;
    auto kind = std::find_if(kKinds.begin(), kKinds.end(), [&](const auto& k) { return k.second == tok[0]; });
    if (kind == kKinds.end()) bad_line(line, "unknown action '" + tok[0] + "'");
    a.kind = kind->first;

    std::vector<std::string> pos;
    std::map<std::string, std::string> opts;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos) {
            pos.push_back(tok[i]);
        } else if (!opts.emplace(tok[i].substr(0, eq), tok[i].substr(eq + 1)).second) {
            bad_line(line, "repeated option " + tok[i].substr(0, eq));
        }
    }
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = opts.find(key);
        if (it == opts.end()) return std::nullopt;
        auto v = it->second;
        opts.erase(it);
        return v;
    };
    auto need = [&](std::size_t n) {
        if (pos.size() != n) {
            bad_line(line, std::string(action_name(a.kind)) + " takes " + std::to_string(n) + " arguments");
        }
    };

    if (auto e = take("expect")) {
        a.expect = error_code_from_name(*e);
        if (!a.expect) bad_line(line, "unknown error code '" + *e + "'");
    }
    switch (a.kind) {
        case ActionKind::group:
            need(1);
            a.group = pos[0];
            break;
        case ActionKind::user:
            need(2);
            a.actor = pos[0];
            if (pos[1] == "expert") {
                a.role = Role::expert;
            } else if (pos[1] != "scholar") {
                bad_line(line, "role must be scholar or expert");
            }
            if (auto g = take("groups")) a.groups = split(*g, ',');
            break;
        case ActionKind::submit:
            need(3);
            a.actor = pos[0];
            a.article = pos[1];
            a.group = pos[2];
            if (auto w = take("words")) a.words = parse_u32(*w, line);
            else bad_line(line, "submit needs words=");
            break;
        case ActionKind::review: {
            need(2);
            a.actor = pos[0];
            a.article = pos[1];
            const auto q = take("quorum");
            const auto r = take("ratio");
            if (!q || !r) bad_line(line, "review needs quorum= and ratio=");
            a.thresholds.expert_quorum = parse_u32(*q, line);
            const auto parts = split(*r, '/');
            if (parts.size() != 2) bad_line(line, "ratio must be num/den");
            a.thresholds.ratio_num = parse_u32(parts[0], line);
            a.thresholds.ratio_den = parse_u32(parts[1], line);
            break;
        }
        case ActionKind::endorse:
            need(3);
            a.actor = pos[0];
            a.article = pos[1];
            if (pos[2] == "favorable") {
                a.verdict = Verdict::favorable;
            } else if (pos[2] == "unfavorable") {
                a.verdict = Verdict::unfavorable;
            } else {
                bad_line(line, "verdict must be favorable or unfavorable");
            }
            break;
        case ActionKind::comment:
        case ActionKind::annotate:
            need(2);
            a.actor = pos[0];
            a.article = pos[1];
            a.words = 24;
            if (auto w = take("words")) a.words = parse_u32(*w, line);
            break;
        case ActionKind::modify:
            need(2);
            a.actor = pos[0];
            a.article = pos[1];
            if (auto w = take("words")) a.words = parse_u32(*w, line);
            else bad_line(line, "modify needs words=");
            break;
        case ActionKind::read:
            need(2);
            a.actor = pos[0];
            a.article = pos[1];
            break;
    }
    if (!opts.empty()) bad_line(line, "unknown option " + opts.begin()->first);
    if ((a.kind == ActionKind::submit || a.kind == ActionKind::modify) && a.words == 0) {
        bad_line(line, "words must be positive");
    }
    return a;
}

}  // namespace

std::string_view action_name(ActionKind k) {
    for (const auto& [kind, name] : kKinds) {
        if (kind == k) return name;
    }
    return "?";
}

std::size_t WorkloadSpec::count(ActionKind k) const {
    return static_cast<std::size_t>(
        std::count_if(actions.begin(), actions.end(), [k](const Action& a) { return a.kind == k; }));
}

WorkloadSpec parse_workload(std::string_view text) {
    WorkloadSpec spec;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        spec.actions.push_back(parse_line(tok, line_no));
    }
    return spec;
}

WorkloadSpec load_workload(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read workload", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_workload(ss.str());
}

std::string format_action(const Action& a) {
    std::string s(action_name(a.kind));
    auto arg = [&s](std::string_view v) {
        s += ' ';
        s += v;
    };
    switch (a.kind) {
        case ActionKind::group: arg(a.group); break;
        case ActionKind::user: {
            arg(a.actor);
            arg(contract::role_name(a.role));
            if (!a.groups.empty()) {
                std::string g = "groups=";
                for (std::size_t i = 0; i < a.groups.size(); ++i) g += (i ? "," : "") + a.groups[i];
                arg(g);
            }
            break;
        }
        case ActionKind::submit:
            arg(a.actor);
            arg(a.article);
            arg(a.group);
            arg("words=" + std::to_string(a.words));
            break;
        case ActionKind::review:
            arg(a.actor);
            arg(a.article);
            arg("quorum=" + std::to_string(a.thresholds.expert_quorum));
            arg("ratio=" + std::to_string(a.thresholds.ratio_num) + "/" + std::to_string(a.thresholds.ratio_den));
            break;
        case ActionKind::endorse:
            arg(a.actor);
            arg(a.article);
            arg(contract::verdict_name(a.verdict));
            break;
        case ActionKind::comment:
        case ActionKind::annotate:
        case ActionKind::modify:
            arg(a.actor);
            arg(a.article);
            arg("words=" + std::to_string(a.words));
            break;
        case ActionKind::read:
            arg(a.actor);
            arg(a.article);
            break;
    }
    if (a.expect) arg("expect=" + std::string(error_code_name(*a.expect)));
    return s;
}

std::string format_workload(const WorkloadSpec& spec) {
    std::string out;
    for (const auto& a : spec.actions) out += format_action(a) + "\n";
    return out;
}

namespace {

constexpr std::array<std::array<std::string_view, 8>, 6> kTopics = {{
    {"ledger", "block", "consensus", "validator", "transaction", "signature", "hash", "chain"},
    {"cipher", "key", "encryption", "nonce", "elliptic", "curve", "digest", "protocol"},
    {"review", "reviewer", "endorsement", "threshold", "expert", "verdict", "manuscript", "quorum"},
    {"summary", "abstract", "sentence", "keyword", "coverage", "extraction", "model", "corpus"},
    {"storage", "replica", "shard", "latency", "throughput", "cache", "index", "compaction"},
    {"peer", "gossip", "overlay", "routing", "bandwidth", "packet", "topology", "broadcast"},
}};

constexpr std::array<std::string_view, 32> kFiller = {
    "approach",  "result",   "method",  "design",     "analysis",  "system",   "evidence", "measure",
    "careful",   "simple",   "robust",  "practical",  "improves",  "reduces",  "supports", "shows",
    "prior",     "baseline", "setting", "experiment", "framework", "property", "variant",  "large",
    "observes",  "compares", "limits",  "extends",    "workload",  "scenario", "question", "outcome",
};

constexpr std::array<std::string_view, 8> kGlue = {"the", "of", "and", "with", "for", "in", "a", "to"};

std::uint64_t stream_for(std::string_view label) {
    const auto d = crypto::sm3_digest(label);
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d.bytes[i];
    return s;
}

}  // namespace

std::string synthesize_text(std::uint64_t seed, std::string_view label, std::uint32_t words) {
    summary::Rng rng(seed, stream_for(label));
    const auto& topic = kTopics[rng.below(kTopics.size())];
    std::string out;
    std::uint32_t written = 0;
    while (written < words) {
        const std::uint32_t len = 8 + static_cast<std::uint32_t>(rng.below(9));
        std::string sentence;
        for (std::uint32_t i = 0; i < len; ++i) {
            std::string_view w;
            const auto roll = rng.below(100);
            if (roll < 35) {
                w = topic[rng.below(topic.size())];
            } else if (roll < 65) {
                w = kGlue[rng.below(kGlue.size())];
            } else {
                w = kFiller[rng.below(kFiller.size())];
            }
            if (!sentence.empty()) sentence += ' ';
            sentence += w;
        }
        sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
        if (!out.empty()) out += ' ';
        out += sentence + ".";
        written += len;
    }
    return out;
}

WorkloadSpec generate_workload(const WorkloadShape& shape, std::uint64_t seed) {
    if (shape.groups == 0 && shape.users > 0) throw Error(ErrorCode::invalid_argument, "users need at least one group");
    if (shape.experts > shape.users) throw Error(ErrorCode::invalid_argument, "more experts than users");
    if (shape.min_words == 0 || shape.min_words > shape.max_words) {
        throw Error(ErrorCode::invalid_argument, "word range must be positive and ordered");
    }
    summary::Rng rng(seed, stream_for("workload"));
    WorkloadSpec spec;
    auto act = [&](ActionKind kind, std::string actor = {}, std::string article = {}) -> Action& {
        Action& a = spec.actions.emplace_back();
        a.kind = kind;
        a.actor = std::move(actor);
        a.article = std::move(article);
        return a;
    };
    auto name = [](char prefix, std::size_t i) {
        std::string n = std::to_string(i + 1);
        return std::string(1, prefix) + (n.size() < 2 ? "0" : "") + n;
    };

    std::vector<std::string> groups;
    for (std::size_t g = 0; g < shape.groups; ++g) {
        groups.push_back("g" + std::to_string(g + 1));
        act(ActionKind::group).group = groups.back();
    }

    struct Member {
        std::string name;
        std::size_t group;
        bool expert;
    };
    std::vector<Member> users;
    std::vector<std::vector<std::size_t>> members(shape.groups), experts(shape.groups);
    for (std::size_t i = 0; i < shape.users; ++i) {
        // experts first, so they spread round-robin over the groups
        const bool expert = i < shape.experts;
        const std::size_t g = i % shape.groups;
        users.push_back({name('u', i), g, expert});
        members[g].push_back(i);
        if (expert) experts[g].push_back(i);
        auto& a = act(ActionKind::user, users.back().name);
        a.role = expert ? Role::expert : Role::scholar;
        a.groups = {groups[g]};
    }

    struct Article {
        std::string id;
        std::size_t group;
        std::size_t uploader;
        bool finished = false;
        std::uint32_t modifications = 0;
    };
    std::vector<Article> articles;
    for (std::size_t a = 0; a < shape.articles && !users.empty(); ++a) {
        const std::size_t g = a % shape.groups;
        if (members[g].empty()) continue;
        Article art{name('a', a), g, members[g][rng.below(members[g].size())]};
        const auto words = shape.min_words + static_cast<std::uint32_t>(rng.below(shape.max_words - shape.min_words + 1));
        auto& s = act(ActionKind::submit, users[art.uploader].name, art.id);
        s.group = groups[g];
        s.words = words;
        articles.push_back(art);
    }

    constexpr std::array<std::pair<std::uint32_t, std::uint32_t>, 3> kRatios = {{{1, 2}, {2, 3}, {1, 3}}};
    for (std::size_t a = 0; a < articles.size(); ++a) {
        auto& art = articles[a];
        std::vector<std::size_t> eligible;
        for (auto e : experts[art.group]) {
            if (e != art.uploader) eligible.push_back(e);
        }
        if (eligible.empty()) continue;
        const auto [num, den] = kRatios[rng.below(kRatios.size())];
        ThresholdConfig t{static_cast<std::uint32_t>(std::min<std::size_t>(2, eligible.size())), num, den};
        act(ActionKind::review, users[art.uploader].name, art.id).thresholds = t;

        for (std::size_t i = eligible.size(); i > 1; --i) std::swap(eligible[i - 1], eligible[rng.below(i)]);
        const bool finish = a % 4 != 3;
        std::size_t favorable = 0, verdicts = 0;
        for (std::size_t i = 0; i < eligible.size(); ++i) {
            const std::size_t left = eligible.size() - i - 1;
            Verdict v = Verdict::favorable;
            if (!finish) {
                // one vote that cannot reach a quorum of two on its own
                if (t.expert_quorum < 2) break;
            } else if (favorable + left >= t.expert_quorum && rng.below(5) == 0) {
                v = Verdict::unfavorable;
            }
            act(ActionKind::endorse, users[eligible[i]].name, art.id).verdict = v;
            ++verdicts;
            if (v == Verdict::favorable) ++favorable;
            if (!finish) break;
            if (t.satisfied(favorable, verdicts, eligible.size())) {
                art.finished = true;
                break;
            }
        }
    }

    for (std::size_t m = 0; m < shape.modifications && !articles.empty(); ++m) {
        auto& art = articles[rng.below(articles.size())];
        ++art.modifications;
        const auto words = shape.min_words + static_cast<std::uint32_t>(rng.below(shape.max_words - shape.min_words + 1));
        act(ActionKind::modify, users[art.uploader].name, art.id).words = words;
    }

    // comments need full access: the uploader always has it, other members
    // once review has finished
    const std::size_t interactions = articles.empty() ? 0 : shape.comments + shape.annotations;
    std::vector<ActionKind> kinds(shape.comments, ActionKind::comment);
    kinds.insert(kinds.end(), shape.annotations, ActionKind::annotate);
    for (std::size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[rng.below(i)]);
    for (std::size_t i = 0; i < interactions; ++i) {
        const auto& art = articles[rng.below(articles.size())];
        const std::size_t who = art.finished ? members[art.group][rng.below(members[art.group].size())] : art.uploader;
        act(kinds[i], users[who].name, art.id).words = 12 + static_cast<std::uint32_t>(rng.below(30));
    }

    for (const auto& art : articles) {
        const std::size_t who = members[art.group][rng.below(members[art.group].size())];
        act(ActionKind::read, users[who].name, art.id);
    }
    // reads from outside the article's group, which must be refused
    if (shape.groups > 1) {
        for (std::size_t i = 0; i < std::min<std::size_t>(2, articles.size()); ++i) {
            const auto& art = articles[i];
            const std::size_t other = (art.group + 1) % shape.groups;
            if (members[other].empty()) continue;
            act(ActionKind::read, users[members[other].front()].name, art.id).expect = ErrorCode::unauthorized;
        }
    }
    return spec;
}

ReplayReport replay_workload(Engine& engine, const WorkloadSpec& spec, std::uint64_t seed) {
    using Clock = std::chrono::steady_clock;
    ReplayReport report;
    std::map<std::string, Credentials> users;
    std::map<std::string, std::uint32_t> versions;
    const auto start = Clock::now();

    auto who = [&](const Action& a) -> const Credentials& {
        auto it = users.find(a.actor);
        if (it == users.end()) throw Error(ErrorCode::not_found, "unknown workload user", a.actor);
        return it->second;
    };

    for (std::size_t step = 0; step < spec.actions.size(); ++step) {
        const auto& a = spec.actions[step];
        const auto t0 = Clock::now();
        bool succeeded = false;
        try {
            switch (a.kind) {
                case ActionKind::group: engine.create_group(a.group); break;
                case ActionKind::user:
                    users[a.actor] = engine.register_user(a.actor, a.role, a.groups, seed);
                    break;
                case ActionKind::submit:
                    engine.submit_article(Actor::local(who(a)), synthesize_text(seed, a.article + "/v1", a.words),
                                          a.group, a.article);
                    versions[a.article] = 1;
                    break;
                case ActionKind::review: engine.run_review(Actor::local(who(a)), a.article, a.thresholds); break;
                case ActionKind::endorse: engine.cast_endorsement(Actor::local(who(a)), a.article, a.verdict); break;
                case ActionKind::comment:
                case ActionKind::annotate: {
                    const auto kind = a.kind == ActionKind::comment ? InteractionKind::comment : InteractionKind::annotation;
                    const auto label = a.article + "/note/" + std::to_string(step);
                    engine.post_comment(Actor::local(who(a)), a.article, kind, synthesize_text(seed, label, a.words),
                                        "n" + std::to_string(step));
                    break;
                }
                case ActionKind::modify: {
                    const auto next = versions[a.article] + 1;
                    const auto label = a.article + "/v" + std::to_string(next);
                    versions[a.article] =
                        engine.modify_article(Actor::local(who(a)), a.article, synthesize_text(seed, label, a.words));
                    break;
                }
                case ActionKind::read: engine.read_article(Actor::local(who(a)), a.article); break;
            }
            succeeded = true;
        } catch (const Error& e) {
            if (a.expect && *a.expect == e.code()) {
                ++report.expected_rejections;
            } else {
                std::string detail = "step " + std::to_string(step + 1);
                if (a.line) detail += " (line " + std::to_string(a.line) + ")";
                detail += ": " + format_action(a);
                if (!e.detail().empty()) detail += "; " + e.detail();
                throw Error(e.code(), e.what(), detail);
            }
        }
        if (succeeded && a.expect) {
            throw Error(ErrorCode::invalid_state, "step succeeded but a failure was expected",
                        "step " + std::to_string(step + 1) + ": " + format_action(a));
        }
        const std::string kind(action_name(a.kind));
        ++report.counts[kind];
        report.seconds_by_kind[kind] += std::chrono::duration<double>(Clock::now() - t0).count();
    }

    const auto verify = engine.ledger().verify_chain();
    report.chain_ok = verify.ok;
    report.chain_reason = verify.reason;
    report.height = engine.ledger().height();
    for (const auto& b : engine.ledger().blocks()) report.transactions += b->block.txs.size();
    report.state_root = engine.ledger().snapshot()->state_root();
    report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report;
}

}  // namespace peerchain::engine
