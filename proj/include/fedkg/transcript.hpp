#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedkg {

struct TranscriptEntry {
    std::chrono::system_clock::time_point timestamp;
    std::string tool;
    nlohmann::json args;            // possibly truncated, see kMaxArgumentChars
    std::string outcome;            // one-line summary
    std::optional<size_t> row_count;
    std::optional<std::string> error;
};

// Per-session in-memory log of tool invocations plus the Markdown
// renderer behind create_chat_transcript. Append and render may
// interleave; render sees a consistent snapshot.
class TranscriptStore {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    // Argument values beyond this many characters are cut with a marker.
    static constexpr size_t kMaxArgumentChars = 2000;
    // Oldest entries beyond this cap are dropped with a marker.
    static constexpr size_t kMaxEntries = 1000;

    explicit TranscriptStore(Clock clock = nullptr);

    void ensure_session(const std::string& session_id);

    // Never throws; recording must not fail a tool call.
    void record_tool_call(const std::string& session_id, const std::string& tool,
                          const nlohmann::json& args, const std::string& outcome,
                          std::optional<size_t> row_count = std::nullopt,
                          std::optional<std::string> error = std::nullopt) noexcept;

    // Markdown document: title, generation timestamp, optional narrative,
    // then one section per recorded call, SPARQL arguments fenced as
    // ```sparql. Unknown sessions raise a not-found error.
    std::string create_chat_transcript(const std::string& session_id, const std::string& title,
                                       const std::optional<std::string>& narrative) const;

    size_t entry_count(const std::string& session_id) const;

private:
    struct Session {
        std::vector<TranscriptEntry> entries;
        size_t dropped = 0;
    };

    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, Session> sessions_;
};

} // namespace fedkg
