#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nearnote/presence.hpp"

namespace nearnote {

// One detection-log line:
//   Entrou desconhecido - Jj 34:C8:03:F6:F3:A8<TAB>Time: 25/07/2013
//   11:03:04.000<TAB>Coord: 38.738522;-9.1543572
// The renderer is canonical (single tab between segments); the parser is
// lenient and accepts any whitespace run. "desconhecido" marks unknown
// devices; "conhecido" is the canonical keyword for known ones.
struct LogLine {
    PresenceDirection direction = PresenceDirection::Entered;
    bool known = false;
    std::optional<std::string> name;  // advertised device name, when any
    DeviceId device;
    TimestampMs at = 0;
    GeoPoint coord;

    bool operator==(const LogLine&) const = default;
};

std::string render_log_line(const LogLine& line);

LogLine log_line_from_event(const PresenceEvent& event);

struct LineIssue {
    std::size_t lineno = 0;  // 1-based
    std::string reason;
};

struct ParsedLog {
    std::vector<LogLine> lines;
    std::vector<LineIssue> issues;
};

// Parses every well-formed line; malformed ones are reported with their
// line number instead of aborting the whole document. Blank lines are
// skipped.
ParsedLog parse_log(std::string_view text);

// Throws MalformedLine at the first bad line.
std::vector<LogLine> parse_log_strict(std::string_view text);

struct FlapCandidate {
    DeviceId device;
    TimestampMs exited_at = 0;
    TimestampMs reentered_at = 0;
    TimestampMs gap_ms = 0;
};

struct LogStats {
    std::size_t total_lines = 0;
    std::size_t distinct_devices = 0;
    std::map<int, std::size_t> detections_per_hour;  // hour of day 0..23
    std::size_t max_simultaneous = 0;
    std::vector<FlapCandidate> flap_candidates;
};

struct ReconstructionResult {
    std::vector<PresenceSession> sessions;  // ordered by (entered_at, device)
    LogStats stats;
    std::vector<std::string> warnings;
};

// Folds Entrou/Saiu pairs back into presence sessions. Lines are sorted by
// timestamp first, so callers may pass them in any order. A dangling Saiu
// yields a warning plus a synthetic point session; a dangling Entrou yields
// an open session. Re-entries faster than scan_period_ms are flagged as
// flap candidates.
ReconstructionResult reconstruct_sessions(std::vector<LogLine> lines,
                                          TimestampMs scan_period_ms = 30'000);

}  // namespace nearnote
