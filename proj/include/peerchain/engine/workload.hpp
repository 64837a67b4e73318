#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peerchain/engine/engine.hpp"

namespace peerchain::engine {

/// Workload files are plain text, one action per line, fields separated by
/// spaces; '#' starts a comment.
///
///   group    <group>
///   user     <name> <scholar|expert> [groups=<g1>,<g2>]
///   submit   <user> <article> <group> words=<n>
///   review   <user> <article> quorum=<q> ratio=<num>/<den>
///   endorse  <user> <article> <favorable|unfavorable>
///   comment  <user> <article> [words=<n>]
///   annotate <user> <article> [words=<n>]
///   modify   <user> <article> words=<n>
///   read     <user> <article>
///
/// Any action may end with expect=<error code>: the step must then fail with
/// that code, and counts as an expected rejection rather than a failure.
/// Article and comment texts are synthesized from (seed, article, version).
enum class ActionKind { group, user, submit, review, endorse, comment, annotate, modify, read };

std::string_view action_name(ActionKind k);

struct Action {
    ActionKind kind = ActionKind::group;
    std::string actor;
    std::string article;
    std::string group;
    Role role = Role::scholar;
    std::vector<std::string> groups;
    std::uint32_t words = 0;
    ThresholdConfig thresholds;
    Verdict verdict = Verdict::favorable;
    std::optional<ErrorCode> expect;
    std::size_t line = 0;
};

struct WorkloadSpec {
    std::vector<Action> actions;

    std::size_t count(ActionKind k) const;
};

/// Throws invalid_argument naming the offending line.
WorkloadSpec parse_workload(std::string_view text);
WorkloadSpec load_workload(const std::filesystem::path& path);
std::string format_action(const Action& a);
std::string format_workload(const WorkloadSpec& spec);

struct WorkloadShape {
    std::size_t users = 23;
    std::size_t experts = 9;
    std::size_t groups = 2;
    std::size_t articles = 19;
    std::size_t comments = 31;
    std::size_t annotations = 49;
    std::size_t modifications = 4;
    std::uint32_t min_words = 160;
    std::uint32_t max_words = 360;
};

/// A well-formed workload of the given shape: every action succeeds except
/// the few deliberate outsider reads marked expect=unauthorized.
WorkloadSpec generate_workload(const WorkloadShape& shape, std::uint64_t seed);

/// Deterministic prose about one of a fixed set of topics.
std::string synthesize_text(std::uint64_t seed, std::string_view label, std::uint32_t words);

struct ReplayReport {
    std::map<std::string, std::size_t> counts;
    std::map<std::string, double> seconds_by_kind;
    std::size_t expected_rejections = 0;
    double seconds = 0;
    std::uint64_t height = 0;
    std::size_t transactions = 0;
    bool chain_ok = false;
    std::string chain_reason;
    Digest state_root;
};

/// Runs every action in order against `engine`. User keys derive from
/// `seed`. Throws on the first unexpected outcome, naming the step.
ReplayReport replay_workload(Engine& engine, const WorkloadSpec& spec, std::uint64_t seed);

}  // namespace peerchain::engine
