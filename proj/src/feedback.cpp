#include "nearnote/feedback.hpp"

#include "nearnote/errors.hpp"

namespace nearnote {

VibePattern VibePattern::make(std::vector<VibeSegment> segments) {
    if (segments.empty()) {
        throw Error("vibration pattern must have at least one segment");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].duration_ms <= 0) {
            throw Error("vibration segment duration must be positive");
        }
        if (i > 0 && segments[i].kind == segments[i - 1].kind) {
            throw Error("adjacent vibration segments must alternate kinds");
        }
    }
    return VibePattern{std::move(segments)};
}

std::string VibePattern::str() const {
    std::string out;
    for (const auto& seg : segments) {
        if (!out.empty()) out.push_back(' ');
        out.push_back(seg.kind == SegmentKind::Vibrate ? 'V' : 'P');
        out += std::to_string(seg.duration_ms);
    }
    return out;
}

VibePattern pattern_for(FeedbackKind kind, const FeedbackConfig& cfg) {
    switch (kind) {
        case FeedbackKind::PersonNearby:
            return VibePattern::make({{SegmentKind::Vibrate, 500}});
        case FeedbackKind::AudioNoteFired:
            return VibePattern::make({{SegmentKind::Vibrate, 250}});
        case FeedbackKind::TextNoteFired:
            return VibePattern::make({{SegmentKind::Vibrate, 50},
                                      {SegmentKind::Pause, cfg.text_note_pause_ms},
                                      {SegmentKind::Vibrate, 250}});
    }
    throw Error("unknown feedback kind");
}

void emit_feedback(const Notification& notification, FeedbackKind kind,
                   const PrivacyState& privacy, const FeedbackConfig& cfg,
                   FeedbackSink* sink) {
    if (privacy.silent || sink == nullptr) {
        return;
    }
    sink->vibrate(notification.at, pattern_for(kind, cfg));
}

}  // namespace nearnote
