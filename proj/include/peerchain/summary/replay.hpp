#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "peerchain/summary/consensus.hpp"

namespace peerchain::summary {

/// Wraps a summarizer that may not be deterministic, such as a remote model
/// service. In record mode the first answer for each input is kept and
/// returned for repeats; in replay mode only recorded answers are served and
/// an unseen input throws not_found. Copies share one recording.
class RecordedSummarizer {
public:
    enum class Mode { record, replay };

    RecordedSummarizer(Mode mode, SummarizeFn live = {});

    std::string operator()(std::string_view text) const;
    SummarizeFn as_function() const;

    Mode mode() const { return mode_; }
    std::size_t size() const;

    /// JSON file: {"format": ..., "responses": [{"input_sm3", "output"}]}.
    void save(const std::filesystem::path& path) const;
    /// Throws io_error or corrupt_data.
    static RecordedSummarizer load(const std::filesystem::path& path, Mode mode, SummarizeFn live = {});

private:
    struct Tape {
        std::mutex mu;
        std::map<std::string, std::string> responses;
    };

    Mode mode_;
    SummarizeFn live_;
    std::shared_ptr<Tape> tape_;
};

}  // namespace peerchain::summary
