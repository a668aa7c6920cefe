#include <doctest.h>

#include <cmath>
#include <set>

#include "bpsforge/common.hpp"
#include "bpsforge/parameters.hpp"
#include "test_support.hpp"

using namespace bpsforge;
using namespace bpsforge::testing;

namespace {

std::vector<double> draw(Distribution d, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(d.sample(rng));
    return out;
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("zero-variance series short-circuits to a fixed value") {
    const Distribution d = fit_distribution(std::vector<double>(25, 3600.0));
    CHECK(d.family == DistFamily::fixed);
    CHECK(d.value == doctest::Approx(3600.0));
    CHECK(d.fit_error == 0.0);
}

TEST_CASE("exponential samples select the exponential family with a close mean") {
    const auto samples = draw(Distribution::exponential(100.0), 10000, 424242);
    const Distribution d = fit_distribution(samples);
    CHECK(d.family == DistFamily::exponential);
    CHECK(d.mean == doctest::Approx(100.0).epsilon(0.05));
}

TEST_CASE("normal samples recover the mean within 2 percent") {
    const auto samples = draw(Distribution::normal(1285.0, 137.0), 10000, 7);
    const Distribution d = fit_distribution(samples);
    CHECK(d.expected_value() == doctest::Approx(1285.0).epsilon(0.02));
    CHECK(d.family == DistFamily::normal);
}

TEST_CASE("fitting recovers the source mean within 5 percent for every family") {
    std::vector<Distribution> sources{
        Distribution::normal(500.0, 60.0),     Distribution::exponential(300.0),
        Distribution::uniform(100.0, 900.0),   Distribution::triangular(0.0, 200.0, 1000.0),
        Distribution::gamma_dist(3.0, 40.0),   Distribution::lognormal(4.0, 0.5),
        Distribution::fixed_value(250.0),
    };
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto samples = draw(sources[i], 10000, 1000 + i);
        const Distribution fitted = fit_distribution(samples);
        // The hard bound is the mean; family identity may differ for
        // near-degenerate shapes.
        CHECK(fitted.expected_value() ==
              doctest::Approx(mean_of(samples)).epsilon(0.05));
    }
}

TEST_CASE("distribution invariants and sampling") {
    CHECK_THROWS_AS(Distribution::exponential(0.0), ConfigError);
    CHECK_THROWS_AS(Distribution::uniform(5.0, 5.0), ConfigError);
    CHECK_THROWS_AS(Distribution::triangular(0.0, 10.0, 5.0), ConfigError);

    // Negative draws are clamped at zero.
    const auto samples = draw(Distribution::normal(1.0, 50.0), 2000, 3);
    for (double s : samples) CHECK(s >= 0.0);
}

TEST_CASE("distribution JSON round trips") {
    for (const Distribution& d :
         {Distribution::fixed_value(42.0), Distribution::normal(10.0, 2.0),
          Distribution::exponential(7.0), Distribution::uniform(1.0, 9.0),
          Distribution::triangular(0.0, 1.0, 4.0), Distribution::gamma_dist(2.0, 3.0),
          Distribution::lognormal(1.0, 0.5)}) {
        const Distribution back = Distribution::from_json(d.to_json());
        CHECK(back.family == d.family);
        CHECK(back.expected_value() == doctest::Approx(d.expected_value()));
    }
}

TEST_CASE("inter-arrival series: same-day differences only") {
    SeqLogBuilder builder;
    builder.t0 = parse_timestamp("2011-01-01T00:00:00Z");
    builder.spacing = 0;
    builder.add_trace({"a"});
    builder.add_trace({"a"});
    builder.add_trace({"a"});
    builder.events[1].start_ts = parse_timestamp("2011-01-01T00:16:00Z");
    builder.events[1].end_ts = builder.events[1].start_ts + 10;
    builder.events[2].start_ts = parse_timestamp("2011-01-01T02:23:00Z");
    builder.events[2].end_ts = builder.events[2].start_ts + 10;

    const InterArrivalSeries series = inter_arrival_series(builder.build());
    CHECK_FALSE(series.cross_day_fallback);
    REQUIRE(series.samples.size() == 2);
    CHECK(series.samples[0] == doctest::Approx(960.0));
    CHECK(series.samples[1] == doctest::Approx(7620.0));
}

TEST_CASE("inter-arrival series falls back across days when needed") {
    SeqLogBuilder builder;
    builder.t0 = parse_timestamp("2011-01-01T12:00:00Z");
    builder.spacing = 2 * kSecondsPerDay;
    builder.add_trace({"a"});
    builder.add_trace({"a"});
    const InterArrivalSeries series = inter_arrival_series(builder.build());
    CHECK(series.cross_day_fallback);
    REQUIRE(series.samples.size() == 1);
    CHECK(series.samples[0] == doctest::Approx(2.0 * kSecondsPerDay));

    SeqLogBuilder single;
    single.add_trace({"a"});
    CHECK_THROWS_AS(inter_arrival_series(single.build()), ConfigError);
}

TEST_CASE("poisson arrivals within one day recover the exponential mean") {
    Rng rng = make_rng(99);
    std::exponential_distribution<double> gap(1.0 / 100.0);
    SeqLogBuilder builder;
    builder.t0 = parse_timestamp("2024-05-06T00:00:00Z");
    builder.spacing = 0;
    Timestamp t = builder.t0;
    for (int c = 0; c < 600; ++c) {
        builder.add_trace({"a"});
        builder.events.back().start_ts = t;
        builder.events.back().end_ts = t + 5;
        t += std::max<std::int64_t>(1, std::llround(gap(rng)));
    }
    const InterArrivalSeries series = inter_arrival_series(builder.build());
    const Distribution d = fit_distribution(series.samples);
    CHECK(d.family == DistFamily::exponential);
    CHECK(d.mean == doctest::Approx(100.0).epsilon(0.10));
}

TEST_CASE("discovered branching normalizes the running-example counts") {
    const ProcessModel m = xor_model();
    const std::map<std::string, long> traversal{{"f2", 563}, {"f3", 608}};
    const auto probs = branching_probabilities(traversal, m, BranchingMode::discovered);

    CHECK(std::abs(probs.at("f2") - 0.4808) < 1e-4);
    CHECK(std::abs(probs.at("f3") - 0.5192) < 1e-4);
    // renders as 0.48 / 0.52 at two decimals
    CHECK(std::round(probs.at("f2") * 100.0) == 48.0);
    CHECK(std::round(probs.at("f3") * 100.0) == 52.0);
    CHECK(probs.at("f2") + probs.at("f3") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equiprobable branching splits evenly") {
    const ProcessModel m = xor_model();
    const auto probs = branching_probabilities({}, m, BranchingMode::equiprobable);
    CHECK(probs.at("f2") == doctest::Approx(0.5));
    CHECK(probs.at("f3") == doctest::Approx(0.5));
}

TEST_CASE("three-way counts 1,1,2 normalize to 0.25, 0.25, 0.5") {
    ProcessModel m;
    m.nodes = {{"start", NodeKind::start, ""}, {"a", NodeKind::activity, "a"},
               {"xs", NodeKind::xor_split, ""}, {"b", NodeKind::activity, "b"},
               {"c", NodeKind::activity, "c"},  {"d", NodeKind::activity, "d"},
               {"xj", NodeKind::xor_join, ""},  {"end", NodeKind::finish, ""}};
    m.flows = {{"f0", 0, 1}, {"f1", 1, 2}, {"fb", 2, 3}, {"fc", 2, 4}, {"fd", 2, 5},
               {"jb", 3, 6}, {"jc", 4, 6}, {"jd", 5, 6}, {"f2", 6, 7}};
    m.finalize();
    m.validate();

    const auto probs =
        branching_probabilities({{"fb", 1}, {"fc", 1}, {"fd", 2}}, m, BranchingMode::discovered);
    CHECK(probs.at("fb") == doctest::Approx(0.25));
    CHECK(probs.at("fc") == doctest::Approx(0.25));
    CHECK(probs.at("fd") == doctest::Approx(0.5));
}

TEST_CASE("discovered mode falls back to equiprobable for never-fired gateways") {
    const ProcessModel m = xor_model();
    const auto probs = branching_probabilities({}, m, BranchingMode::discovered);
    CHECK(probs.at("f2") == doctest::Approx(0.5));
    CHECK(probs.at("f3") == doctest::Approx(0.5));
}

TEST_CASE("random branching is seeded, normalized and in range") {
    const ProcessModel m = xor_model();
    Rng rng1 = make_rng(5), rng2 = make_rng(5);
    const auto a = branching_probabilities({}, m, BranchingMode::random, &rng1);
    const auto b = branching_probabilities({}, m, BranchingMode::random, &rng2);
    CHECK(a == b);
    CHECK(a.at("f2") + a.at("f3") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.at("f2") >= 0.0);
    CHECK(a.at("f2") <= 1.0);
    CHECK_THROWS_AS(branching_probabilities({}, m, BranchingMode::random, nullptr), ConfigError);
}

namespace {

EventLog resource_log(const std::vector<std::pair<std::string, std::vector<std::string>>>& work) {
    // work: resource -> activities it performs (each 3 times)
    std::vector<Event> events;
    Timestamp t = parse_timestamp("2024-03-04T09:00:00Z");  // a Monday
    int c = 0;
    for (const auto& [resource, activities] : work) {
        for (int rep = 0; rep < 3; ++rep) {
            const std::string case_id = "c" + std::to_string(++c);
            Timestamp ct = t;
            for (const std::string& a : activities) {
                events.push_back(Event{case_id, a, resource, ct, ct + 600});
                ct += 700;
            }
            t += 3600;
        }
    }
    return build_log(std::move(events));
}

}  // namespace

TEST_CASE("disjoint activity profiles yield one pool per resource") {
    const EventLog log =
        resource_log({{"r1", {"a"}}, {"r2", {"b"}}, {"r3", {"c"}}});
    const PoolAssignment pa = discover_resource_pools(log, 0.99, 0.0);
    CHECK(pa.pools.size() == 3);
    for (const ResourcePool& p : pa.pools) CHECK(p.members.size() == 1);
    CHECK(pa.activity_pool.size() == 3);
}

TEST_CASE("identical profiles land in the same pool") {
    const EventLog log = resource_log({{"r1", {"a", "b"}}, {"r2", {"a", "b"}}});
    const PoolAssignment pa = discover_resource_pools(log, 0.5, 0.0);
    CHECK(pa.pools.size() == 1);
    CHECK(pa.pools[0].members == std::vector<std::string>{"r1", "r2"});
}

TEST_CASE("pools partition resources and cover every activity") {
    const EventLog log = resource_log(
        {{"r1", {"a", "b"}}, {"r2", {"a", "b"}}, {"r3", {"c"}}, {"r4", {"c", "d"}}});
    const PoolAssignment pa = discover_resource_pools(log, 0.6, 0.0);

    std::set<std::string> seen;
    for (const ResourcePool& p : pa.pools)
        for (const std::string& r : p.members) CHECK(seen.insert(r).second);
    CHECK(seen == std::set<std::string>{"r1", "r2", "r3", "r4"});

    std::set<std::string> pool_ids;
    for (const ResourcePool& p : pa.pools) pool_ids.insert(p.id);
    for (const std::string& a : {"a", "b", "c", "d"})
        CHECK(pool_ids.count(pa.activity_pool.at(a)) == 1);
}

TEST_CASE("an all-AUTO log yields a single infinite AUTO pool") {
    SeqLogBuilder builder;
    builder.resource = kAutoResource;
    builder.add_traces({"a", "b"}, 3);
    const PoolAssignment pa = discover_resource_pools(builder.build(), 0.5, 0.95);
    REQUIRE(pa.pools.size() == 1);
    CHECK(pa.pools[0].id == kAutoResource);
    CHECK(pa.pools[0].infinite);
    CHECK(pa.activity_pool.at("a") == kAutoResource);
}

TEST_CASE("activities performed mostly by AUTO map to the AUTO pool") {
    std::vector<Event> events;
    Timestamp t = parse_timestamp("2024-03-04T09:00:00Z");
    for (int c = 0; c < 4; ++c) {
        const std::string id = "c" + std::to_string(c + 1);
        events.push_back(Event{id, "human", "r1", t, t + 100});
        events.push_back(Event{id, "robot", kAutoResource, t + 100, t + 100});
        t += 1000;
    }
    events.push_back(Event{"c5", "robot", "r1", t, t + 50});  // one manual execution
    const PoolAssignment pa = discover_resource_pools(build_log(std::move(events)), 0.5, 0.0);
    CHECK(pa.activity_pool.at("human") == "pool_1");
    CHECK(pa.activity_pool.at("robot") == kAutoResource);
}

TEST_CASE("pearson correlation basics") {
    CHECK(pearson_correlation({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(pearson_correlation({5, 5}, {5, 5}) == doctest::Approx(1.0));
    CHECK(pearson_correlation({5, 5}, {1, 2}) == doctest::Approx(0.0));
}

TEST_CASE("timetables: window arithmetic") {
    const Timetable t = Timetable::from_windows({TimeWindow{0, 9, 17}});  // Monday 9-17
    const Timestamp monday_8 = parse_timestamp("2024-03-04T08:00:00Z");
    const Timestamp monday_9 = parse_timestamp("2024-03-04T09:00:00Z");
    const Timestamp monday_10 = parse_timestamp("2024-03-04T10:00:00Z");
    const Timestamp monday_16 = parse_timestamp("2024-03-04T16:00:00Z");
    const Timestamp tuesday = parse_timestamp("2024-03-05T12:00:00Z");

    CHECK(t.next_open(monday_8) == monday_9);
    CHECK(t.next_open(monday_10) == monday_10);
    CHECK(t.next_open(tuesday) == monday_9 + kSecondsPerWeek);
    CHECK(t.contains(monday_10));
    CHECK_FALSE(t.contains(monday_8));
    CHECK(t.weekly_seconds() == 8 * 3600);

    // 2h of work starting Monday 16:00: one hour today, one next Monday.
    CHECK(t.advance(monday_16, 7200) == monday_9 + kSecondsPerWeek + 3600);
    CHECK(Timetable::always().advance(monday_16, 7200) == monday_16 + 7200);
    CHECK(Timetable::always().is_always());
    CHECK_THROWS_AS(Timetable::from_windows({TimeWindow{0, 10, 9}}), ConfigError);
}

TEST_CASE("mined timetables cover the observed working hours") {
    // All events Monday 9:00-12:00.
    std::vector<Event> events;
    const Timestamp monday_9 = parse_timestamp("2024-03-04T09:00:00Z");
    for (int c = 0; c < 10; ++c) {
        const std::string id = "c" + std::to_string(c + 1);
        const Timestamp s = monday_9 + c * 900;
        events.push_back(Event{id, "a", "r1", s, s + 600});
    }
    const PoolAssignment pa = discover_resource_pools(build_log(std::move(events)), 0.5, 0.95);
    REQUIRE(pa.pools.size() == 1);
    const Timetable& tt = pa.pools[0].timetable;
    CHECK_FALSE(tt.is_always());
    CHECK(tt.weekly_seconds() < kSecondsPerWeek);
    CHECK(tt.contains(monday_9));
    for (const TimeWindow& w : tt.windows()) CHECK(w.day == 0);
}

TEST_CASE("assembly validates coverage and probability sums") {
    BpsModel ok = reference_bps_model(10);
    CHECK_NOTHROW(ok.validate());

    SUBCASE("missing duration names the activity") {
        BpsModel bad = reference_bps_model(10);
        bad.activity_durations.erase("c");
        try {
            bad.validate();
            FAIL("expected AssemblyError");
        } catch (const AssemblyError& err) {
            CHECK(std::string(err.what()).find("'c'") != std::string::npos);
        }
    }
    SUBCASE("missing pool mapping") {
        BpsModel bad = reference_bps_model(10);
        bad.activity_pool.erase("d");
        CHECK_THROWS_AS(bad.validate(), AssemblyError);
    }
    SUBCASE("branch probabilities must sum to one") {
        BpsModel bad = reference_bps_model(10);
        bad.branching["f2"] = 0.9;
        CHECK_THROWS_AS(bad.validate(), AssemblyError);
    }
    SUBCASE("a resource cannot belong to two pools") {
        BpsModel bad = reference_bps_model(10);
        bad.pools[1].members.push_back("alice");
        CHECK_THROWS_AS(bad.validate(), AssemblyError);
    }
    SUBCASE("trace count must be positive") {
        BpsModel bad = reference_bps_model(10);
        bad.trace_count_to_simulate = 0;
        CHECK_THROWS_AS(bad.validate(), AssemblyError);
    }
}

TEST_CASE("BPS model JSON round trip") {
    const BpsModel original = reference_bps_model(25);
    const BpsModel back = BpsModel::from_json_string(original.to_json_string());
    CHECK(back.to_json_string() == original.to_json_string());
    CHECK(back.trace_count_to_simulate == 25);
    CHECK(back.branching.at("f2") == doctest::Approx(0.7));
    CHECK(back.pool_of("a").id == "front");
}
