#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nearnote/model.hpp"

namespace nearnote {

enum class SegmentKind { Vibrate, Pause };

struct VibeSegment {
    SegmentKind kind = SegmentKind::Vibrate;
    std::int64_t duration_ms = 0;
    auto operator<=>(const VibeSegment&) const = default;
};

// Alternating vibrate/pause segments, all durations positive. Construction
// validates; a malformed pattern is a hard error, never a runtime fallback.
struct VibePattern {
    std::vector<VibeSegment> segments;

    static VibePattern make(std::vector<VibeSegment> segments);
    std::string str() const;  // "V500" / "V50 P100 V250"

    auto operator<=>(const VibePattern&) const = default;
};

// The three notification kinds the pattern code distinguishes.
enum class FeedbackKind { PersonNearby, AudioNoteFired, TextNoteFired };

struct FeedbackConfig {
    // The stop between the two bursts of the text-note pattern.
    std::int64_t text_note_pause_ms = 100;
};

// PersonNearby   -> [Vibrate 500]
// AudioNoteFired -> [Vibrate 250]
// TextNoteFired  -> [Vibrate 50, Pause <configured>, Vibrate 250]
VibePattern pattern_for(FeedbackKind kind, const FeedbackConfig& cfg = {});

class FeedbackSink {
public:
    virtual ~FeedbackSink() = default;
    virtual void vibrate(TimestampMs at, const VibePattern& pattern) = 0;
};

class RecordingSink final : public FeedbackSink {
public:
    void vibrate(TimestampMs at, const VibePattern& pattern) override {
        records.emplace_back(at, pattern);
    }
    std::vector<std::pair<TimestampMs, VibePattern>> records;
};

// Silent mode suppresses emission only; detection, triggering and history
// continue unchanged (history is appended by the caller either way).
void emit_feedback(const Notification& notification, FeedbackKind kind,
                   const PrivacyState& privacy, const FeedbackConfig& cfg,
                   FeedbackSink* sink);

}  // namespace nearnote
