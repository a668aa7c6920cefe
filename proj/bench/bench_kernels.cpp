// Serial reference vs OpenMP kernels: BPTD distance matrix, log alignment,
// log replay. Run with --benchmark_counters_tabular=true for a clean table.
#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "bpsforge/accuracy.hpp"
#include "bpsforge/common.hpp"
#include "bpsforge/conformance.hpp"
#include "bpsforge/discovery.hpp"
#include "bpsforge/event_log.hpp"
#include "bpsforge/replay.hpp"

using namespace bpsforge;

namespace {

EventLog synthetic_log(std::size_t traces, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<int> variant(0, 2);
    std::vector<Event> events;
    Timestamp t0 = 1700000000;
    for (std::size_t c = 0; c < traces; ++c) {
        const std::string case_id = std::to_string(c + 1);
        Timestamp t = t0 + static_cast<Timestamp>(c) * 240;
        std::vector<std::string> acts;
        switch (variant(rng)) {
            case 0: acts = {"a", "b", "c", "f", "g"}; break;
            case 1: acts = {"a", "c", "b", "f", "g"}; break;
            default: acts = {"a", "d", "e", "f", "g"}; break;
        }
        for (const std::string& act : acts) {
            const std::int64_t dur = 30 + static_cast<std::int64_t>(splitmix64(seed ^ static_cast<std::uint64_t>(t)) % 90);
            events.push_back(Event{case_id, act, "r" + std::to_string(c % 4), t, t + dur});
            t += dur + 15;
        }
    }
    return build_log(std::move(events));
}

TimedLog timed_fixture(std::size_t traces, std::uint64_t seed) {
    return timed_view(synthetic_log(traces, seed));
}

void BM_BptdMatrix_Serial(benchmark::State& state) {
    const TimedLog a = timed_fixture(static_cast<std::size_t>(state.range(0)), 1);
    const TimedLog b = timed_fixture(static_cast<std::size_t>(state.range(0)), 2);
    ConcurrencyRelation rel;
    rel.add("b", "c");
    for (auto _ : state) {
        auto matrix = bptd_matrix_serial(a, b, rel);
        benchmark::DoNotOptimize(matrix);
    }
}

void BM_BptdMatrix_Parallel(benchmark::State& state) {
    const TimedLog a = timed_fixture(static_cast<std::size_t>(state.range(0)), 1);
    const TimedLog b = timed_fixture(static_cast<std::size_t>(state.range(0)), 2);
    ConcurrencyRelation rel;
    rel.add("b", "c");
    for (auto _ : state) {
        auto matrix = bptd_matrix(a, b, rel);
        benchmark::DoNotOptimize(matrix);
    }
}

void BM_AlignLog_Serial(benchmark::State& state) {
    const EventLog log = synthetic_log(static_cast<std::size_t>(state.range(0)), 3);
    const ProcessModel model = discover_model(log, DiscoveryParams{0.5, 0.0});
    for (auto _ : state) {
        auto alignments = align_log_serial(model, log);
        benchmark::DoNotOptimize(alignments);
    }
}

void BM_AlignLog_Parallel(benchmark::State& state) {
    const EventLog log = synthetic_log(static_cast<std::size_t>(state.range(0)), 3);
    const ProcessModel model = discover_model(log, DiscoveryParams{0.5, 0.0});
    for (auto _ : state) {
        auto alignments = align_log(model, log);
        benchmark::DoNotOptimize(alignments);
    }
}

void BM_ReplayLog_Serial(benchmark::State& state) {
    const EventLog log = synthetic_log(static_cast<std::size_t>(state.range(0)), 4);
    const ProcessModel model = discover_model(log, DiscoveryParams{0.5, 0.0});
    for (auto _ : state) {
        auto replay = replay_log_serial(model, log);
        benchmark::DoNotOptimize(replay);
    }
}

void BM_ReplayLog_Parallel(benchmark::State& state) {
    const EventLog log = synthetic_log(static_cast<std::size_t>(state.range(0)), 4);
    const ProcessModel model = discover_model(log, DiscoveryParams{0.5, 0.0});
    for (auto _ : state) {
        auto replay = replay_log(model, log);
        benchmark::DoNotOptimize(replay);
    }
}

}  // namespace

BENCHMARK(BM_BptdMatrix_Serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BptdMatrix_Parallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlignLog_Serial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlignLog_Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplayLog_Serial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplayLog_Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
