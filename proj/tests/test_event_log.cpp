#include <doctest.h>

#include <sstream>

#include "bpsforge/common.hpp"
#include "bpsforge/event_log.hpp"
#include "test_support.hpp"

using namespace bpsforge;

namespace {

const char* kPurchasingCsv =
    "Case ID,Activity,Start Timestamp,Complete Timestamp,Resource\n"
    "1,Create Purchase Requisition,2011/01/01 00:00:00,2011/01/01 00:37:00,Kim Passa\n"
    "2,Create Purchase Requisition,2011/01/01 00:16:00,2011/01/01 00:29:00,Immanuel Karagianni\n"
    "3,Create Purchase Requisition,2011/01/01 02:23:00,2011/01/01 03:03:00,Kim Passa\n"
    "1,Create Request for Quotation,2011/01/01 05:37:00,2011/01/01 05:45:00,Kim Passa\n"
    "1,Analyze Request for Quotation,2011/01/01 06:41:00,2011/01/01 06:55:00,Karel de G root\n"
    "2,Create Request for Quotation,2011/01/01 08:16:00,2011/01/01 08:26:00,Alberto Duport\n"
    "4,Create Purchase Requisition,2011/01/01 08:39:00,2011/01/01 09:00:00,Fjodor Kowalski\n";

ColumnMap purchasing_columns() {
    return ColumnMap{"Case ID", "Activity", "Start Timestamp", "Complete Timestamp", "Resource"};
}

}  // namespace

TEST_CASE("timestamp parsing accepts ISO-8601 and slash formats") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_timestamp("1970/01/01 00:00:30") == 30);
    CHECK(parse_timestamp("2011/01/01 00:37:00") - parse_timestamp("2011/01/01 00:00:00") == 2220);
    CHECK(parse_timestamp("2024-03-01T12:00:00+02:00") ==
          parse_timestamp("2024-03-01T10:00:00Z"));
    CHECK(parse_timestamp("2024-03-01T10:00:00.500Z") == parse_timestamp("2024-03-01T10:00:00Z"));
    CHECK(format_timestamp(parse_timestamp("2011-01-01T00:37:00Z")) == "2011-01-01T00:37:00Z");
    CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2024-13-01T00:00:00Z"), ParseError);
}

TEST_CASE("CSV parse of the purchasing example") {
    const EventLog log = parse_csv_text(kPurchasingCsv, purchasing_columns());
    REQUIRE(log.traces.size() == 4);

    const Trace& case1 = log.traces[0];
    CHECK(case1.case_id == "1");
    REQUIRE(case1.events.size() == 3);
    CHECK(case1.events[0].activity == "Create Purchase Requisition");
    CHECK(case1.events[0].processing_time() == 2220);
    CHECK(case1.events[0].resource == "Kim Passa");
    // timestamp order within the trace
    CHECK(case1.events[1].activity == "Create Request for Quotation");
    CHECK(case1.events[2].activity == "Analyze Request for Quotation");

    CHECK(log.traces[1].events.size() == 2);
    CHECK(log.traces[2].events.size() == 1);
    CHECK(log.traces[3].events.size() == 1);
    CHECK(log.event_count() == 7);
}

TEST_CASE("CSV parse of a single row yields one single-event trace") {
    const EventLog log = parse_csv_text(
        "case_id,activity,resource,start_time,end_time\n"
        "9,only,r,2024-01-01T00:00:00Z,2024-01-01T00:00:00Z\n");
    CHECK(log.traces.size() == 1);
    CHECK(log.traces[0].events.size() == 1);
    CHECK(log.traces[0].events[0].processing_time() == 0);
}

TEST_CASE("CSV errors") {
    SUBCASE("missing mapped column") {
        CHECK_THROWS_AS(parse_csv_text("a,b\n1,2\n"), ConfigError);
    }
    SUBCASE("malformed timestamp names the row") {
        try {
            parse_csv_text(
                "case_id,activity,resource,start_time,end_time\n"
                "1,a,r,2024-01-01T00:00:00Z,2024-01-01T00:01:00Z\n"
                "1,b,r,not-a-time,2024-01-01T00:02:00Z\n");
            FAIL("expected ParseError");
        } catch (const ParseError& err) {
            CHECK(std::string(err.what()).find("row 3") != std::string::npos);
        }
    }
    SUBCASE("zero data rows") {
        CHECK_THROWS_AS(parse_csv_text("case_id,activity,resource,start_time,end_time\n"),
                        ParseError);
    }
    SUBCASE("end before start") {
        CHECK_THROWS_AS(parse_csv_text("case_id,activity,resource,start_time,end_time\n"
                                       "1,a,r,2024-01-02T00:00:00Z,2024-01-01T00:00:00Z\n"),
                        ParseError);
    }
}

TEST_CASE("missing resource column fills AUTO; reserved name warns but parses") {
    ParseStats stats;
    const EventLog log = parse_csv_text(
        "case_id,activity,start_time,end_time\n"
        "1,a,2024-01-01T00:00:00Z,2024-01-01T00:01:00Z\n",
        ColumnMap{"case_id", "activity", "start_time", "end_time", ""}, ',', &stats);
    CHECK(log.traces[0].events[0].resource == kAutoResource);

    const EventLog log2 = parse_csv_text(
        "case_id,activity,resource,start_time,end_time\n"
        "1,a,AUTO,2024-01-01T00:00:00Z,2024-01-01T00:01:00Z\n",
        ColumnMap{}, ',', &stats);
    CHECK(log2.traces[0].events[0].resource == kAutoResource);
    CHECK(stats.auto_resource_inputs == 1);
}

TEST_CASE("quoted CSV fields and custom delimiter") {
    const EventLog log = parse_csv_text(
        "case_id;activity;resource;start_time;end_time\n"
        "1;\"step; one\";\"Smith, \"\"Jo\"\"\";2024-01-01T00:00:00Z;2024-01-01T00:05:00Z\n",
        ColumnMap{}, ';');
    CHECK(log.traces[0].events[0].activity == "step; one");
    CHECK(log.traces[0].events[0].resource == "Smith, \"Jo\"");
}

TEST_CASE("XES parsing fuses start/complete pairs") {
    const std::string xes = R"(<?xml version="1.0"?>
<log>
  <trace>
    <string key="concept:name" value="c1"/>
    <event>
      <string key="concept:name" value="alpha"/>
      <string key="org:resource" value="r1"/>
      <string key="lifecycle:transition" value="start"/>
      <date key="time:timestamp" value="2024-01-01T00:00:00Z"/>
    </event>
    <event>
      <string key="concept:name" value="alpha"/>
      <string key="lifecycle:transition" value="complete"/>
      <date key="time:timestamp" value="2024-01-01T00:10:00Z"/>
    </event>
  </trace>
</log>)";
    ParseStats stats;
    const EventLog log = parse_xes_text(xes, &stats);
    REQUIRE(log.traces.size() == 1);
    REQUIRE(log.traces[0].events.size() == 1);
    CHECK(log.traces[0].case_id == "c1");
    CHECK(log.traces[0].events[0].processing_time() == 600);
    CHECK(log.traces[0].events[0].resource == "r1");
    CHECK(stats.unpaired_lifecycle == 0);
}

TEST_CASE("XES complete-only events become zero-duration with one warning each") {
    const std::string xes = R"(<log><trace>
      <string key="concept:name" value="c"/>
      <event><string key="concept:name" value="x"/>
        <string key="lifecycle:transition" value="complete"/>
        <date key="time:timestamp" value="2024-01-01T00:00:00Z"/></event>
      <event><string key="concept:name" value="y"/>
        <string key="lifecycle:transition" value="complete"/>
        <date key="time:timestamp" value="2024-01-01T00:05:00Z"/></event>
    </trace></log>)";
    ParseStats stats;
    const EventLog log = parse_xes_text(xes, &stats);
    CHECK(log.event_count() == 2);
    CHECK(stats.unpaired_lifecycle == 2);
    for (const Event& e : log.traces[0].events) CHECK(e.processing_time() == 0);
}

TEST_CASE("XES unpaired start is repaired to zero duration") {
    const std::string xes = R"(<log><trace>
      <string key="concept:name" value="c"/>
      <event><string key="concept:name" value="x"/>
        <string key="lifecycle:transition" value="start"/>
        <date key="time:timestamp" value="2024-01-01T00:00:00Z"/></event>
    </trace></log>)";
    ParseStats stats;
    const EventLog log = parse_xes_text(xes, &stats);
    CHECK(stats.unpaired_lifecycle == 1);
    CHECK(log.traces[0].events[0].start_ts == log.traces[0].events[0].end_ts);
}

TEST_CASE("malformed XES raises a parse error") {
    CHECK_THROWS_AS(parse_xes_text("<log><trace>"), ParseError);
    CHECK_THROWS_AS(parse_xes_text("<notalog/>"), ParseError);
}

TEST_CASE("CSV -> XES -> parse round trip is identity") {
    const EventLog original = parse_csv_text(kPurchasingCsv, purchasing_columns());
    std::ostringstream xes;
    write_xes(original, xes);
    const EventLog reparsed = parse_xes_text(xes.str());
    CHECK(original == reparsed);
}

TEST_CASE("CSV serialization round trip is identity") {
    const EventLog original = parse_csv_text(kPurchasingCsv, purchasing_columns());
    const EventLog reparsed = parse_csv_text(to_csv_string(original));
    CHECK(original == reparsed);
}

TEST_CASE("parsing is deterministic") {
    const EventLog a = parse_csv_text(kPurchasingCsv, purchasing_columns());
    const EventLog b = parse_csv_text(kPurchasingCsv, purchasing_columns());
    CHECK(a == b);
    CHECK(to_csv_string(a) == to_csv_string(b));
}

TEST_CASE("events with identical start order by end then label") {
    std::vector<Event> events;
    events.push_back(Event{"1", "zeta", "r", 100, 300});
    events.push_back(Event{"1", "beta", "r", 100, 200});
    events.push_back(Event{"1", "alpha", "r", 100, 200});
    const EventLog log = build_log(std::move(events));
    CHECK(log.traces[0].events[0].activity == "alpha");
    CHECK(log.traces[0].events[1].activity == "beta");
    CHECK(log.traces[0].events[2].activity == "zeta");
}

TEST_CASE("log statistics on a hand-computed synthetic log") {
    testing::SeqLogBuilder builder;
    builder.duration = 100;
    builder.gap = 0;
    for (int i = 0; i < 8; ++i) builder.add_trace({"a", "b"});
    builder.add_trace({"a", "b", "c", "d"});
    builder.add_trace({"a"});
    const LogStatistics st = log_statistics(builder.build());

    CHECK(st.trace_count == 10);
    CHECK(st.event_count == 8 * 2 + 4 + 1);
    CHECK(st.distinct_activities == 4);
    CHECK(st.mean_activities_per_trace == doctest::Approx(2.1));
    CHECK(st.max_activities_per_trace == 4);
    // 8 traces of 200 s, one of 400 s, one of 100 s
    CHECK(st.max_case_duration_s == 400);
    CHECK(st.mean_case_duration_s == doctest::Approx((8 * 200 + 400 + 100) / 10.0));
}

TEST_CASE("log statistics of a single zero-duration event") {
    std::vector<Event> events{Event{"1", "a", "r", 50, 50}};
    const LogStatistics st = log_statistics(build_log(std::move(events)));
    CHECK(st.trace_count == 1);
    CHECK(st.event_count == 1);
    CHECK(st.mean_case_duration_s == 0.0);
    CHECK(st.max_case_duration_s == 0);
}
