// Acceptance suite: one line per criterion, non-zero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bpsforge/accuracy.hpp"
#include "bpsforge/common.hpp"
#include "bpsforge/conformance.hpp"
#include "bpsforge/discovery.hpp"
#include "bpsforge/hungarian.hpp"
#include "bpsforge/optimizer.hpp"
#include "bpsforge/pipeline.hpp"
#include "bpsforge/replay.hpp"
#include "bpsforge/simulator.hpp"
#include "test_support.hpp"

using namespace bpsforge;
using namespace bpsforge::testing;

namespace {

TimedTrace tt(const std::vector<std::tuple<std::string, double, double>>& events) {
    TimedTrace t;
    for (const auto& [l, p, w] : events) t.events.push_back(TimedEvent{l, p, w});
    return t;
}

// --------------------------------------------------------------------------
// 1. BPTD worked example: 1.142 with b||c under dynamic beta, 2.042 without.
// --------------------------------------------------------------------------
bool bptd_worked_example() {
    const TimedTrace sigma = tt({{"a", 0.3, 0.4}, {"b", 0.5, 0.1}, {"c", 0.4, 0.1}});
    const TimedTrace sigma_prime =
        tt({{"a", 0.2, 0.4}, {"c", 0.5, 0.2}, {"b", 0.5, 0.1}, {"d", 0.1, 0.1}});
    BptdConfig dynamic;
    dynamic.dynamic_beta = true;
    ConcurrencyRelation rel;
    rel.add("b", "c");

    const auto t0 = std::chrono::steady_clock::now();
    const double with_conc = bptd(sigma, sigma_prime, rel, dynamic);
    const double without = bptd(sigma, sigma_prime, ConcurrencyRelation{}, dynamic);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();

    return std::abs(with_conc - 1.142) <= 1e-9 && std::abs(without - 2.042) <= 1e-9 && ms < 1.0;
}

// --------------------------------------------------------------------------
// 2. With an empty concurrency relation and identical times, bptd matches an
//    independent brute-force Damerau-Levenshtein oracle on 1000 random pairs.
// --------------------------------------------------------------------------
int dl_oracle(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> memo(n + 1, std::vector<int>(m + 1, -1));
    auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> int {
        if (i == 0) return static_cast<int>(j);
        if (j == 0) return static_cast<int>(i);
        int& slot = memo[i][j];
        if (slot >= 0) return slot;
        int best = self(self, i - 1, j) + 1;
        best = std::min(best, self(self, i, j - 1) + 1);
        best = std::min(best, self(self, i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1));
        if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
            best = std::min(best, self(self, i - 2, j - 2) + 1);
        return slot = best;
    };
    return rec(rec, n, m);
}

bool dl_reduction() {
    Rng rng = make_rng(20240201);
    std::uniform_int_distribution<int> len(0, 10);
    std::uniform_int_distribution<int> letter(0, 4);
    const ConcurrencyRelation empty;

    for (int round = 0; round < 1000; ++round) {
        std::string a, b;
        for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>('a' + letter(rng)));
        for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>('a' + letter(rng)));
        auto as_trace = [](const std::string& w) {
            TimedTrace t;
            for (char c : w) t.events.push_back(TimedEvent{std::string(1, c), 0.25, 0.75});
            return t;
        };
        if (bptd(as_trace(a), as_trace(b), empty) != static_cast<double>(dl_oracle(a, b)))
            return false;
    }
    return true;
}

// --------------------------------------------------------------------------
// 3. Hungarian pairing cost equals the exhaustive permutation minimum on 200
//    random cost matrices up to 6x6.
// --------------------------------------------------------------------------
bool hungarian_exactness() {
    Rng rng = make_rng(555);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> size(1, 6);

    for (int round = 0; round < 200; ++round) {
        const std::size_t n = size(rng);
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost)
            for (double& c : row) c = unit(rng);
        std::vector<int> assignment;
        const double got = hungarian(cost, assignment);

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                total += cost[i][static_cast<std::size_t>(perm[i])];
            best = std::min(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (std::abs(got - best) > 1e-9) return false;
    }
    return true;
}

// --------------------------------------------------------------------------
// 4. Replay conservation on 100 synthetic conformant traces.
// --------------------------------------------------------------------------
bool replay_conservation() {
    // 60 one-shot XOR traces plus 40 traces through a self-loop on b.
    SeqLogBuilder xor_part;
    xor_part.duration = 77;
    xor_part.gap = 13;
    xor_part.add_traces({"a", "b", "d"}, 35);
    xor_part.add_traces({"a", "c", "d"}, 25);
    const EventLog xor_log = xor_part.build();
    const ProcessModel xor_m = xor_model();

    const EventLog loop_log =
        variant_log({{{"a", "b", "c"}, 25}, {{"a", "b", "b", "c"}, 10}, {{"a", "b", "b", "b", "c"}, 5}});
    const ProcessModel loop_m = discover_model(loop_log, DiscoveryParams{1.0, 0.0});

    auto check = [](const ProcessModel& m, const EventLog& log, long expected_firings) {
        const LogReplay r = replay_log(m, log);
        for (std::size_t i = 0; i < log.traces.size(); ++i) {
            std::int64_t from_events = 0;
            for (const Event& e : log.traces[i].events) from_events += e.processing_time();
            const std::int64_t from_replay =
                std::accumulate(r.traces[i].processing.begin(), r.traces[i].processing.end(),
                                std::int64_t{0});
            if (from_replay != from_events) return false;
            for (std::int64_t w : r.traces[i].waiting)
                if (w < 0) return false;
        }
        long total = 0;
        for (const auto& [flow, count] : r.traversal) total += count;
        return total == expected_firings;
    };

    // The XOR fires once per trace. The loop XOR fires once per b occurrence.
    long loop_b = 0;
    for (const Trace& t : loop_log.traces)
        for (const Event& e : t.events)
            if (e.activity == "b") ++loop_b;
    return check(xor_m, xor_log, 60) && check(loop_m, loop_log, loop_b);
}

// --------------------------------------------------------------------------
// 5. Branching normalization of the counts 563 / 608.
// --------------------------------------------------------------------------
bool branching_normalization() {
    const ProcessModel m = xor_model();
    const auto probs =
        branching_probabilities({{"f2", 563}, {"f3", 608}}, m, BranchingMode::discovered);
    const double pb = probs.at("f2"), pc = probs.at("f3");
    return std::abs(pb - 0.4808) <= 1e-4 && std::abs(pc - 0.5192) <= 1e-4 &&
           std::round(pb * 100.0) == 48.0 && std::round(pc * 100.0) == 52.0;
}

// --------------------------------------------------------------------------
// 6. Distribution fitting on seeded samples.
// --------------------------------------------------------------------------
bool distribution_fitting() {
    Rng rng = make_rng(424242);
    std::vector<double> exp_samples;
    for (int i = 0; i < 10000; ++i)
        exp_samples.push_back(Distribution::exponential(100.0).sample(rng));
    const Distribution exp_fit = fit_distribution(exp_samples);
    if (exp_fit.family != DistFamily::exponential) return false;
    if (std::abs(exp_fit.mean - 100.0) > 5.0) return false;

    Rng rng2 = make_rng(7);
    std::vector<double> normal_samples;
    for (int i = 0; i < 10000; ++i)
        normal_samples.push_back(Distribution::normal(1285.0, 137.0).sample(rng2));
    const Distribution normal_fit = fit_distribution(normal_samples);
    return std::abs(normal_fit.expected_value() - 1285.0) <= 0.02 * 1285.0;
}

// --------------------------------------------------------------------------
// 7. Self-consistency round trip: simulate a hand-built model, rediscover a
//    BPS model from the log, simulate it, and compare.
// --------------------------------------------------------------------------
bool self_consistency() {
    const BpsModel ground_model = reference_bps_model(200);
    SimConfig ground_cfg;
    ground_cfg.seed = 2027;
    ground_cfg.start_timestamp = parse_timestamp("2024-04-01T08:00:00Z");
    const EventLog ground_log = simulate(ground_model, ground_cfg);

    BuildOptions options;
    options.config.epsilon = 0.5;
    options.config.eta = 0.0;
    options.config.repair = RepairMethod::alignment;
    options.config.branching = BranchingMode::discovered;
    options.config.similarity_threshold = 0.5;
    const BuildResult built = build_bps_model(ground_log, options);

    // Rediscovered branching within +-0.05 of 0.7 / 0.3.
    std::vector<double> probs;
    for (const auto& [flow, p] : built.bps.branching) probs.push_back(p);
    if (probs.size() != 2) return false;
    std::sort(probs.begin(), probs.end());
    if (std::abs(probs[0] - 0.3) > 0.05 || std::abs(probs[1] - 0.7) > 0.05) return false;

    SimConfig sim_cfg;
    sim_cfg.seed = 4458;
    sim_cfg.start_timestamp = built.log_start;
    const EventLog rediscovered_log = simulate(built.bps, sim_cfg);

    const GroundTruth ground(ground_log);
    const ScoreResult score = score_simulation(ground, rediscovered_log);
    std::fprintf(stderr, "  [self_consistency] ELS=%.4f branching={%.3f, %.3f}\n", score.els,
                 probs[1], probs[0]);
    return score.els >= 0.9;
}

// --------------------------------------------------------------------------
// 8. Optimizer improvement on the noisy self-consistency log: the best of 20
//    trials beats the baseline in at least 8 of 10 seeded repetitions.
// --------------------------------------------------------------------------
EventLog jitter_durations(const EventLog& log, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> factor(0.8, 1.2);
    std::vector<Event> events;
    for (const Trace& t : log.traces) {
        for (Event e : t.events) {
            const std::int64_t dur = e.processing_time();
            e.end_ts = e.start_ts + std::max<std::int64_t>(
                                        0, std::llround(static_cast<double>(dur) * factor(rng)));
            events.push_back(std::move(e));
        }
    }
    return build_log(std::move(events));
}

bool optimizer_improvement() {
    const BpsModel ground_model = reference_bps_model(120);
    int wins = 0;
    for (std::uint64_t rep = 1; rep <= 10; ++rep) {
        SimConfig cfg;
        cfg.seed = derive_seed(9000, rep);
        cfg.start_timestamp = parse_timestamp("2024-04-01T08:00:00Z");
        const EventLog ground_log = jitter_durations(simulate(ground_model, cfg), rep);

        const TrialResult baseline = run_baseline(ground_log, 1, rep);

        OptimizeOptions options;
        options.trials = 20;
        options.runs_per_trial = 1;
        options.seed = derive_seed(7000, rep);
        const OptimizeResult result = optimize(ground_log, options);

        const double baseline_els = baseline.ok ? baseline.mean_els : 0.0;
        if (result.best().mean_els >= baseline_els) ++wins;
        std::fprintf(stderr, "  [optimizer_improvement] rep %llu: baseline=%.4f best=%.4f\n",
                     static_cast<unsigned long long>(rep), baseline_els, result.best().mean_els);
    }
    return wins >= 8;
}

// --------------------------------------------------------------------------
// 9. Simulator determinism and resource safety over 1000 cases.
// --------------------------------------------------------------------------
bool simulator_determinism() {
    const BpsModel bps = reference_bps_model(1000, 120.0);
    SimConfig cfg;
    cfg.seed = 31337;
    cfg.start_timestamp = parse_timestamp("2024-02-05T00:00:00Z");
    const EventLog a = simulate(bps, cfg);
    const EventLog b = simulate(bps, cfg);
    if (to_csv_string(a) != to_csv_string(b)) return false;

    std::map<std::string, std::vector<std::pair<Timestamp, Timestamp>>> busy;
    for (const Trace& t : a.traces)
        for (const Event& e : t.events)
            if (e.resource != kAutoResource) busy[e.resource].emplace_back(e.start_ts, e.end_ts);
    for (auto& [resource, intervals] : busy) {
        std::sort(intervals.begin(), intervals.end());
        for (std::size_t i = 1; i < intervals.size(); ++i)
            if (intervals[i].first < intervals[i - 1].second) return false;
    }
    return a.traces.size() == 1000;
}

// --------------------------------------------------------------------------
// 10. Repair post-conditions on a 30%-non-conformant log.
// --------------------------------------------------------------------------
bool repair_postcondition() {
    const ProcessModel m = xor_model();
    SeqLogBuilder builder;
    builder.add_traces({"a", "b", "d"}, 40);
    builder.add_traces({"a", "c", "d"}, 30);
    builder.add_traces({"a", "d"}, 18);        // drop the XOR activity
    builder.add_traces({"b", "a", "d"}, 12);   // swap the head
    const EventLog log = builder.build();     // 100 traces, 30 non-conformant

    const std::vector<Alignment> alignments = align_log(m, log);
    for (RepairMethod method :
         {RepairMethod::removal, RepairMethod::replacement, RepairMethod::alignment}) {
        const EventLog repaired = repair_log(log, m, method, alignments);
        if (method == RepairMethod::removal && repaired.traces.size() != 70) return false;
        if (method != RepairMethod::removal && repaired.traces.size() != 100) return false;
        for (const Alignment& a : align_log(m, repaired))
            if (a.fitness != 1.0) return false;
    }
    return true;
}

struct Criterion {
    const char* name;
    bool (*run)();
    double budget_seconds;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"bptd_worked_example", bptd_worked_example, 1.0},
        {"dl_reduction", dl_reduction, 5.0},
        {"hungarian_exactness", hungarian_exactness, 5.0},
        {"replay_conservation", replay_conservation, 1.0},
        {"branching_normalization", branching_normalization, 1.0},
        {"distribution_fitting", distribution_fitting, 2.0},
        {"self_consistency", self_consistency, 60.0},
        {"optimizer_improvement", optimizer_improvement, 600.0},
        {"simulator_determinism", simulator_determinism, 30.0},
        {"repair_postcondition", repair_postcondition, 30.0},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string error;
        try {
            ok = c.run();
        } catch (const std::exception& err) {
            error = err.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (seconds > c.budget_seconds) ok = false;
        std::printf("%s %-26s (%.2f s, budget %.0f s)%s%s\n", ok ? "PASS" : "FAIL", c.name,
                    seconds, c.budget_seconds, error.empty() ? "" : " error: ", error.c_str());
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
