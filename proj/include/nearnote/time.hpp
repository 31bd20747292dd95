#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nearnote {

// All timestamps are integer milliseconds since the Unix epoch. Wall-clock
// time always flows through an injectable Clock so simulated runs stay
// deterministic.
using TimestampMs = std::int64_t;

struct CivilTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
    int millis = 0;

    auto operator<=>(const CivilTime&) const = default;
};

CivilTime civil_from_ms(TimestampMs ms);
TimestampMs ms_from_civil(const CivilTime& c);

// "DD/MM/YYYY HH:MM:SS.mmm" — the format used by the detection logs and by
// scenario scripts.
std::string render_datetime(TimestampMs ms);
std::optional<TimestampMs> parse_datetime(std::string_view date_token,
                                          std::string_view time_token);
std::optional<TimestampMs> parse_datetime(std::string_view combined);

class Clock {
public:
    virtual ~Clock() = default;
    virtual TimestampMs now() const = 0;
};

class SystemClock final : public Clock {
public:
    TimestampMs now() const override;
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(TimestampMs start = 0) : now_(start) {}
    TimestampMs now() const override { return now_; }
    void set(TimestampMs t) { now_ = t; }
    void advance(TimestampMs delta) { now_ += delta; }

private:
    TimestampMs now_;
};

}  // namespace nearnote
