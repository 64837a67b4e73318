#include "peerchain/summary/replay.hpp"

#include <fstream>

#include <json.hpp>

#include "peerchain/crypto/sm3.hpp"
#include "peerchain/error.hpp"

namespace peerchain::summary {

namespace {

constexpr const char* kFormat = "peerchain-summary-tape/1";

}  // namespace

RecordedSummarizer::RecordedSummarizer(Mode mode, SummarizeFn live)
    : mode_(mode), live_(std::move(live)), tape_(std::make_shared<Tape>()) {
    if (mode_ == Mode::record && !live_) throw Error(ErrorCode::invalid_argument, "record mode needs a live summarizer");
}

std::string RecordedSummarizer::operator()(std::string_view text) const {
    const std::string key = crypto::sm3_digest(text).hex();
    {
        std::lock_guard lock(tape_->mu);
        auto it = tape_->responses.find(key);
        if (it != tape_->responses.end()) return it->second;
    }
    if (mode_ == Mode::replay) throw Error(ErrorCode::not_found, "no recorded summary for input", key);
    std::string out = live_(text);
    std::lock_guard lock(tape_->mu);
    // a concurrent caller may have recorded first; keep its answer
    return tape_->responses.emplace(key, std::move(out)).first->second;
}

SummarizeFn RecordedSummarizer::as_function() const {
    return [self = *this](std::string_view text) { return self(text); };
}

std::size_t RecordedSummarizer::size() const {
    std::lock_guard lock(tape_->mu);
    return tape_->responses.size();
}

void RecordedSummarizer::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["format"] = kFormat;
    doc["responses"] = nlohmann::json::array();
    {
        std::lock_guard lock(tape_->mu);
        for (const auto& [key, out] : tape_->responses) {
            doc["responses"].push_back({{"input_sm3", key}, {"output", out}});
        }
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write summary tape", path.string());
    f << doc.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::io_error, "cannot write summary tape", path.string());
}

RecordedSummarizer RecordedSummarizer::load(const std::filesystem::path& path, Mode mode, SummarizeFn live) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot read summary tape", path.string());
    RecordedSummarizer r(mode, std::move(live));
    try {
        const auto doc = nlohmann::json::parse(f);
        if (doc.at("format") != kFormat) throw Error(ErrorCode::corrupt_data, "unknown summary tape format");
        for (const auto& e : doc.at("responses")) {
            r.tape_->responses.emplace(e.at("input_sm3").get<std::string>(), e.at("output").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_data, "malformed summary tape", e.what());
    }
    return r;
}

}  // namespace peerchain::summary
