#include <doctest.h>

#include <random>

#include "nearnote/ids.hpp"
#include "nearnote/store.hpp"

using namespace nearnote;

TEST_CASE("device id parses the log sample and canonicalizes case") {
    CHECK(DeviceId::parse("34:C8:03:F6:F3:A8").str() == "34:C8:03:F6:F3:A8");
    CHECK(DeviceId::parse("34:c8:03:f6:f3:a8").str() == "34:C8:03:F6:F3:A8");
}

TEST_CASE("device id rejects malformed input") {
    CHECK_THROWS_AS(DeviceId::parse("34:C8:03"), MalformedId);
    CHECK_THROWS_AS(DeviceId::parse(""), MalformedId);
    CHECK_THROWS_AS(DeviceId::parse("34:C8:03:F6:F3:A8:FF"), MalformedId);
    CHECK_THROWS_AS(DeviceId::parse("GG:C8:03:F6:F3:A8"), MalformedId);
    CHECK_THROWS_AS(DeviceId::parse("34-C8-03-F6-F3-A8"), MalformedId);
    CHECK_THROWS_AS(DeviceId::parse("34:C8:03:F6:F3:A"), MalformedId);
    CHECK(!DeviceId::try_parse("34:C8:0:3F6:F3:A8").has_value());
}

TEST_CASE("parse/format is idempotent over random ids") {
    std::mt19937_64 rng(42);
    const char* hex = "0123456789abcdefABCDEF";
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (int group = 0; group < 6; ++group) {
            if (group > 0) text.push_back(':');
            text.push_back(hex[rng() % 22]);
            text.push_back(hex[rng() % 22]);
        }
        const DeviceId id = DeviceId::parse(text);
        const DeviceId again = DeviceId::parse(id.str());
        CHECK(id == again);
        CHECK(id.str() == again.str());
    }
}

TEST_CASE("note ids are creator scoped and never reused") {
    const DeviceId d1 = DeviceId::parse("02:00:00:00:00:01");
    const DeviceId d2 = DeviceId::parse("02:00:00:00:00:02");
    auto s1 = ClientStore::in_memory(d1);
    auto s2 = ClientStore::in_memory(d2);

    const NoteId first = s1->create_note(TextBody{"a"}, 1000);
    CHECK(first.creator == d1);
    CHECK(first.seq == 1);

    NoteId latest = first;
    for (int i = 0; i < 6; ++i) latest = s1->create_note(TextBody{"x"}, 1000);
    CHECK(latest.seq == 7);
    CHECK(s1->create_note(TextBody{"y"}, 1000).seq == 8);

    // distinct creators at the same sequence stay distinct
    NoteId other = s2->create_note(TextBody{"b"}, 1000);
    for (int i = 0; i < 2; ++i) other = s2->create_note(TextBody{"b"}, 1000);
    CHECK(other.seq == 3);
    CHECK(other != NoteId{d1, 3});

    // deletion never frees a sequence number
    s1->delete_note(latest);
    CHECK(s1->create_note(TextBody{"z"}, 1000).seq == 9);
}

TEST_CASE("note id string round trip") {
    const NoteId id{DeviceId::parse("AA:BB:CC:DD:EE:FF"), 42};
    CHECK(id.str() == "AA:BB:CC:DD:EE:FF/42");
    CHECK(NoteId::parse(id.str()) == id);
    CHECK_THROWS_AS(NoteId::parse("AA:BB:CC:DD:EE:FF"), MalformedId);
    CHECK_THROWS_AS(NoteId::parse("AA:BB:CC:DD:EE:FF/0"), MalformedId);
    CHECK_THROWS_AS(NoteId::parse("AA:BB:CC:DD:EE:FF/x"), MalformedId);
}
