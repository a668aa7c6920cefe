#include "bpsforge/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bpsforge/common.hpp"

namespace bpsforge {

Timetable Timetable::always() {
    Timetable t;
    for (int day = 0; day < 7; ++day) t.windows_.push_back(TimeWindow{day, 0, 24});
    t.compile();
    return t;
}

Timetable Timetable::from_windows(std::vector<TimeWindow> windows) {
    Timetable t;
    t.windows_ = std::move(windows);
    t.compile();
    return t;
}

void Timetable::compile() {
    std::vector<std::pair<std::int64_t, std::int64_t>> raw;
    for (const TimeWindow& w : windows_) {
        if (w.day < 0 || w.day > 6 || w.start_hour < 0 || w.end_hour > 24 ||
            w.start_hour >= w.end_hour)
            throw ConfigError("invalid timetable window");
        const std::int64_t base = static_cast<std::int64_t>(w.day) * kSecondsPerDay;
        raw.emplace_back(base + w.start_hour * 3600LL, base + w.end_hour * 3600LL);
    }
    std::sort(raw.begin(), raw.end());
    spans_.clear();
    for (const auto& span : raw) {
        if (!spans_.empty() && span.first <= spans_.back().second)
            spans_.back().second = std::max(spans_.back().second, span.second);
        else
            spans_.push_back(span);
    }
    if (spans_.empty()) throw ConfigError("timetable has no availability windows");
}

bool Timetable::is_always() const {
    return spans_.size() == 1 && spans_.front().first == 0 &&
           spans_.front().second == kSecondsPerWeek;
}

std::int64_t Timetable::weekly_seconds() const {
    std::int64_t total = 0;
    for (const auto& [s, e] : spans_) total += e - s;
    return total;
}

bool Timetable::contains(Timestamp t) const {
    const std::int64_t u = week_offset(t);
    for (const auto& [s, e] : spans_)
        if (u >= s && u < e) return true;
    return false;
}

Timestamp Timetable::next_open(Timestamp t) const {
    if (is_always()) return t;
    const std::int64_t u = week_offset(t);
    for (const auto& [s, e] : spans_) {
        if (u >= s && u < e) return t;
        if (u < s) return t + (s - u);
    }
    // Wrap to the first window of the next week.
    return t + (kSecondsPerWeek - u) + spans_.front().first;
}

Timestamp Timetable::advance(Timestamp start, std::int64_t working) const {
    if (working <= 0) return start;
    if (is_always()) return start + working;
    Timestamp t = next_open(start);
    std::int64_t remaining = working;
    // Guard: weekly_seconds() > 0 by construction, so this terminates.
    while (true) {
        const std::int64_t u = week_offset(t);
        for (const auto& [s, e] : spans_) {
            if (u >= s && u < e) {
                const std::int64_t room = e - u;
                if (remaining <= room) return t + remaining;
                remaining -= room;
                t += room;
                break;
            }
        }
        t = next_open(t);
    }
}

const ResourcePool& BpsModel::pool_of(const std::string& activity) const {
    auto it = activity_pool.find(activity);
    if (it == activity_pool.end())
        throw AssemblyError("activity '" + activity + "' has no resource pool");
    for (const ResourcePool& p : pools)
        if (p.id == it->second) return p;
    throw AssemblyError("activity '" + activity + "' maps to unknown pool '" + it->second + "'");
}

void BpsModel::validate() const {
    model.validate();
    if (trace_count_to_simulate < 1) throw AssemblyError("trace count to simulate must be >= 1");

    for (const ModelNode& n : model.nodes) {
        if (n.kind != NodeKind::activity) continue;
        if (activity_durations.find(n.label) == activity_durations.end())
            throw AssemblyError("no duration distribution for activity '" + n.label + "'");
        pool_of(n.label);
    }
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        if (model.nodes[i].kind != NodeKind::xor_split) continue;
        double sum = 0.0;
        for (int f : model.out_flows(static_cast<int>(i))) {
            auto it = branching.find(model.flows[static_cast<std::size_t>(f)].id);
            if (it == branching.end())
                throw AssemblyError("no branching probability for flow " +
                                    model.flows[static_cast<std::size_t>(f)].id);
            if (it->second < 0.0) throw AssemblyError("negative branching probability");
            sum += it->second;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw AssemblyError("branching probabilities of gateway " + model.nodes[i].id +
                                " sum to " + std::to_string(sum));
    }
    std::set<std::string> seen;
    for (const ResourcePool& p : pools) {
        if (p.members.empty() && !p.infinite)
            throw AssemblyError("pool '" + p.id + "' has no members");
        for (const std::string& r : p.members)
            if (!seen.insert(r).second)
                throw AssemblyError("resource '" + r + "' appears in more than one pool");
    }
}

InterArrivalSeries inter_arrival_series(const EventLog& log) {
    if (log.traces.size() < 2)
        throw ConfigError("inter-arrival discovery needs at least two traces");
    std::vector<Timestamp> starts;
    starts.reserve(log.traces.size());
    for (const Trace& t : log.traces) starts.push_back(t.start());
    std::sort(starts.begin(), starts.end());

    InterArrivalSeries out;
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (day_index(starts[i]) != day_index(starts[i - 1])) continue;
        const double diff = static_cast<double>(starts[i] - starts[i - 1]);
        if (diff > 0.0) out.samples.push_back(diff);
    }
    if (out.samples.empty()) {
        log_warn("no same-day arrival pairs; falling back to cross-day differences");
        out.cross_day_fallback = true;
        for (std::size_t i = 1; i < starts.size(); ++i)
            out.samples.push_back(static_cast<double>(starts[i] - starts[i - 1]));
    }
    return out;
}

const char* branching_mode_name(BranchingMode m) {
    switch (m) {
        case BranchingMode::random: return "random";
        case BranchingMode::equiprobable: return "equiprobable";
        case BranchingMode::discovered: return "discovered";
    }
    return "?";
}

BranchingMode branching_mode_from_name(const std::string& name) {
    if (name == "random") return BranchingMode::random;
    if (name == "equiprobable") return BranchingMode::equiprobable;
    if (name == "discovered") return BranchingMode::discovered;
    throw ConfigError("unknown branching mode: " + name);
}

std::map<std::string, double> branching_probabilities(const std::map<std::string, long>& traversal,
                                                      const ProcessModel& model, BranchingMode mode,
                                                      Rng* rng) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        if (model.nodes[i].kind != NodeKind::xor_split) continue;
        const auto& outs = model.out_flows(static_cast<int>(i));
        std::vector<double> weights(outs.size(), 0.0);

        switch (mode) {
            case BranchingMode::equiprobable:
                std::fill(weights.begin(), weights.end(), 1.0);
                break;
            case BranchingMode::random: {
                if (rng == nullptr) throw ConfigError("random branching mode needs an RNG");
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (double& w : weights) w = unit(*rng);
                if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0)
                    std::fill(weights.begin(), weights.end(), 1.0);
                break;
            }
            case BranchingMode::discovered: {
                long total = 0;
                for (std::size_t k = 0; k < outs.size(); ++k) {
                    auto it = traversal.find(
                        model.flows[static_cast<std::size_t>(outs[k])].id);
                    const long c = it == traversal.end() ? 0 : it->second;
                    weights[k] = static_cast<double>(c);
                    total += c;
                }
                if (total == 0) {
                    log_warn("gateway " + model.nodes[i].id +
                             " never fired during replay; using equiprobable branching");
                    std::fill(weights.begin(), weights.end(), 1.0);
                }
                break;
            }
        }

        const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        double assigned = 0.0;
        for (std::size_t k = 0; k < outs.size(); ++k) {
            double p = weights[k] / sum;
            if (k + 1 == outs.size()) p = std::max(0.0, 1.0 - assigned);  // exact unit sum
            assigned += p;
            out[model.flows[static_cast<std::size_t>(outs[k])].id] = p;
        }
    }
    return out;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 && vb == 0.0) return 1.0;  // both flat: identical behavior
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

namespace {

Timetable mine_timetable(const std::vector<int>& hour_counts, double coverage_quantile) {
    if (coverage_quantile <= 0.0) return Timetable::always();
    long total = 0;
    for (int c : hour_counts) total += c;
    if (total == 0) return Timetable::always();

    std::vector<int> order(hour_counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return hour_counts[static_cast<std::size_t>(x)] >
                                                hour_counts[static_cast<std::size_t>(y)]; });

    std::vector<char> open(hour_counts.size(), 0);
    long covered = 0;
    const double target = coverage_quantile * static_cast<double>(total);
    for (int h : order) {
        if (static_cast<double>(covered) >= target) break;
        if (hour_counts[static_cast<std::size_t>(h)] == 0) break;
        open[static_cast<std::size_t>(h)] = 1;
        covered += hour_counts[static_cast<std::size_t>(h)];
    }

    std::vector<TimeWindow> windows;
    for (int day = 0; day < 7; ++day) {
        int h = 0;
        while (h < 24) {
            if (!open[static_cast<std::size_t>(day * 24 + h)]) {
                ++h;
                continue;
            }
            int end = h;
            while (end < 24 && open[static_cast<std::size_t>(day * 24 + end)]) ++end;
            windows.push_back(TimeWindow{day, h, end});
            h = end;
        }
    }
    return Timetable::from_windows(std::move(windows));
}

}  // namespace

PoolAssignment discover_resource_pools(const EventLog& log, double similarity_threshold,
                                       double coverage_quantile) {
    if (similarity_threshold < 0.0 || similarity_threshold > 1.0)
        throw ConfigError("similarity threshold must lie in [0,1]");

    std::set<std::string> label_set;
    std::map<std::string, std::map<std::string, long>> profile_counts;  // resource -> activity -> n
    bool has_auto = false;
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            label_set.insert(e.activity);
            if (e.resource == kAutoResource) {
                has_auto = true;
                continue;
            }
            ++profile_counts[e.resource][e.activity];
        }
    }
    const std::vector<std::string> labels(label_set.begin(), label_set.end());

    PoolAssignment out;
    std::vector<std::string> resources;
    for (const auto& [r, _] : profile_counts) resources.push_back(r);

    if (resources.empty()) {
        // Everything is AUTO: one infinite pool covering all activities.
        ResourcePool auto_pool;
        auto_pool.id = kAutoResource;
        auto_pool.infinite = true;
        auto_pool.timetable = Timetable::always();
        out.pools.push_back(std::move(auto_pool));
        for (const std::string& l : labels) out.activity_pool[l] = kAutoResource;
        return out;
    }

    // Activity execution profile per resource.
    std::vector<std::vector<double>> profiles(resources.size(),
                                              std::vector<double>(labels.size(), 0.0));
    for (std::size_t r = 0; r < resources.size(); ++r) {
        const auto& counts = profile_counts[resources[r]];
        for (std::size_t l = 0; l < labels.size(); ++l) {
            auto it = counts.find(labels[l]);
            if (it != counts.end()) profiles[r][l] = static_cast<double>(it->second);
        }
    }

    // Connected components over the similarity graph.
    std::vector<std::size_t> parent(resources.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < resources.size(); ++i)
        for (std::size_t j = i + 1; j < resources.size(); ++j)
            if (pearson_correlation(profiles[i], profiles[j]) >= similarity_threshold)
                parent[find(i)] = find(j);

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < resources.size(); ++i) components[find(i)].push_back(i);

    // Deterministic pool ids: sort components by their smallest member name.
    std::vector<std::vector<std::size_t>> ordered;
    for (auto& [root, members] : components) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return resources[a] < resources[b];
        });
        ordered.push_back(members);
    }
    std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
        return resources[a.front()] < resources[b.front()];
    });

    std::map<std::string, std::size_t> pool_of_resource;
    for (std::size_t p = 0; p < ordered.size(); ++p) {
        ResourcePool pool;
        pool.id = "pool_" + std::to_string(p + 1);
        for (std::size_t r : ordered[p]) {
            pool.members.push_back(resources[r]);
            pool_of_resource[resources[r]] = p;
        }
        pool.timetable = Timetable::always();
        out.pools.push_back(std::move(pool));
    }

    // Assign each activity to the pool that performs it most often; AUTO wins
    // only when it outnumbers every real pool.
    std::map<std::string, std::vector<long>> activity_pool_counts;
    std::map<std::string, long> activity_auto_counts;
    for (const std::string& l : labels) activity_pool_counts[l].assign(ordered.size(), 0);
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            if (e.resource == kAutoResource) {
                ++activity_auto_counts[e.activity];
                continue;
            }
            ++activity_pool_counts[e.activity][pool_of_resource[e.resource]];
        }
    }

    bool need_auto_pool = false;
    for (const std::string& l : labels) {
        const auto& counts = activity_pool_counts[l];
        long best = -1;
        std::size_t best_pool = 0;
        for (std::size_t p = 0; p < counts.size(); ++p) {
            if (counts[p] > best) {
                best = counts[p];
                best_pool = p;
            }
        }
        if (activity_auto_counts[l] > best) {
            out.activity_pool[l] = kAutoResource;
            need_auto_pool = true;
        } else {
            out.activity_pool[l] = out.pools[best_pool].id;
        }
    }
    if (has_auto && need_auto_pool) {
        ResourcePool auto_pool;
        auto_pool.id = kAutoResource;
        auto_pool.infinite = true;
        auto_pool.timetable = Timetable::always();
        out.pools.push_back(std::move(auto_pool));
    }

    // Timetables: hour-of-week histogram of start/end instants per pool.
    std::map<std::string, std::vector<int>> hour_counts;
    for (const ResourcePool& p : out.pools) hour_counts[p.id].assign(168, 0);
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            if (e.resource == kAutoResource) continue;
            const std::string& pool_id = out.pools[pool_of_resource[e.resource]].id;
            ++hour_counts[pool_id][static_cast<std::size_t>(hour_of_week(e.start_ts))];
            ++hour_counts[pool_id][static_cast<std::size_t>(hour_of_week(e.end_ts))];
        }
    }
    for (ResourcePool& p : out.pools) {
        if (p.infinite) continue;
        p.timetable = mine_timetable(hour_counts[p.id], coverage_quantile);
    }
    return out;
}

BpsModel assemble(ProcessModel model, Distribution inter_arrival,
                  std::map<std::string, Distribution> durations,
                  std::map<std::string, double> branching, PoolAssignment pools,
                  long trace_count) {
    BpsModel bps;
    bps.model = std::move(model);
    bps.inter_arrival = std::move(inter_arrival);
    bps.activity_durations = std::move(durations);
    bps.branching = std::move(branching);
    bps.pools = std::move(pools.pools);
    bps.activity_pool = std::move(pools.activity_pool);
    bps.trace_count_to_simulate = trace_count;
    bps.validate();
    return bps;
}

namespace {

nlohmann::json timetable_to_json(const Timetable& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const TimeWindow& w : t.windows())
        j.push_back({{"day", w.day}, {"startHour", w.start_hour}, {"endHour", w.end_hour}});
    return j;
}

Timetable timetable_from_json(const nlohmann::json& j) {
    std::vector<TimeWindow> windows;
    for (const auto& jw : j)
        windows.push_back(TimeWindow{jw.at("day").get<int>(), jw.at("startHour").get<int>(),
                                     jw.at("endHour").get<int>()});
    return Timetable::from_windows(std::move(windows));
}

}  // namespace

std::string BpsModel::to_json_string(int indent) const {
    nlohmann::json j;
    j["model"] = nlohmann::json::parse(model.to_json_string());
    j["interArrival"] = inter_arrival.to_json();
    j["durations"] = nlohmann::json::object();
    for (const auto& [label, dist] : activity_durations) j["durations"][label] = dist.to_json();
    j["branching"] = nlohmann::json::object();
    for (const auto& [flow, p] : branching) j["branching"][flow] = p;
    j["pools"] = nlohmann::json::array();
    for (const ResourcePool& p : pools) {
        j["pools"].push_back({{"id", p.id},
                              {"members", p.members},
                              {"infinite", p.infinite},
                              {"timetable", timetable_to_json(p.timetable)}});
    }
    j["activityPool"] = nlohmann::json::object();
    for (const auto& [label, pool] : activity_pool) j["activityPool"][label] = pool;
    j["traceCount"] = trace_count_to_simulate;
    return j.dump(indent);
}

BpsModel BpsModel::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& err) {
        throw ModelError(std::string("invalid BPS model JSON: ") + err.what());
    }
    BpsModel bps;
    try {
        bps.model = ProcessModel::from_json_string(j.at("model").dump());
        bps.inter_arrival = Distribution::from_json(j.at("interArrival"));
        for (const auto& [label, jd] : j.at("durations").items())
            bps.activity_durations[label] = Distribution::from_json(jd);
        for (const auto& [flow, jp] : j.at("branching").items())
            bps.branching[flow] = jp.get<double>();
        for (const auto& jp : j.at("pools")) {
            ResourcePool p;
            p.id = jp.at("id").get<std::string>();
            p.members = jp.at("members").get<std::vector<std::string>>();
            p.infinite = jp.value("infinite", false);
            p.timetable = timetable_from_json(jp.at("timetable"));
            bps.pools.push_back(std::move(p));
        }
        for (const auto& [label, jp] : j.at("activityPool").items())
            bps.activity_pool[label] = jp.get<std::string>();
        bps.trace_count_to_simulate = j.at("traceCount").get<long>();
    } catch (const nlohmann::json::exception& err) {
        throw ModelError(std::string("invalid BPS model JSON: ") + err.what());
    }
    bps.validate();
    return bps;
}

BpsModel BpsModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open BPS model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

void BpsModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write BPS model file: " + path);
    out << to_json_string() << '\n';
}

}  // namespace bpsforge
