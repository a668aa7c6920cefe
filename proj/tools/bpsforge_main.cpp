#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bpsforge/accuracy.hpp"
#include "bpsforge/common.hpp"
#include "bpsforge/optimizer.hpp"
#include "bpsforge/pipeline.hpp"
#include "bpsforge/replay.hpp"
#include "bpsforge/simulator.hpp"

namespace fs = std::filesystem;
using namespace bpsforge;

namespace {

struct LogInput {
    std::string path;
    ColumnMap columns;
    char delimiter = ',';
};

EventLog load_log(const LogInput& input) {
    if (input.path.size() >= 4 && input.path.substr(input.path.size() - 4) == ".xes")
        return parse_xes(input.path);
    return parse_csv(input.path, input.columns, input.delimiter);
}

void add_log_options(CLI::App* cmd, LogInput& input) {
    cmd->add_option("--log", input.path, "event log file (.csv or .xes)")->required();
    cmd->add_option("--col-case", input.columns.case_id, "CSV column holding the case id");
    cmd->add_option("--col-activity", input.columns.activity, "CSV column holding the activity");
    cmd->add_option("--col-start", input.columns.start, "CSV column holding the start timestamp");
    cmd->add_option("--col-end", input.columns.end, "CSV column holding the end timestamp");
    cmd->add_option("--col-resource", input.columns.resource,
                    "CSV column holding the resource (empty = none)");
    cmd->add_option("--delimiter", input.delimiter, "CSV delimiter");
}

std::string format_duration(double seconds) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    if (seconds >= kSecondsPerDay) out << seconds / kSecondsPerDay << " days";
    else if (seconds >= 3600) out << seconds / 3600.0 << " hours";
    else out << seconds << " s";
    return out.str();
}

// Table of fitted families: count of activities, mean of means, mean of sds.
std::string fit_summary(const std::map<std::string, Distribution>& durations) {
    struct Row {
        int count = 0;
        double mean_sum = 0.0;
    };
    std::map<std::string, Row> rows;
    for (const auto& [label, dist] : durations) {
        Row& r = rows[dist_family_name(dist.family)];
        ++r.count;
        r.mean_sum += dist.expected_value();
    }
    std::ostringstream out;
    out << "PDF family     #activities  mean of means\n";
    for (const auto& [family, row] : rows) {
        out << std::left << std::setw(15) << family << std::setw(13) << row.count << std::fixed
            << std::setprecision(2) << row.mean_sum / row.count << '\n';
    }
    return out.str();
}

int cmd_discover(const LogInput& input, const TrialConfig& config, const std::string& out_dir,
                 std::uint64_t seed, int jobs) {
    const EventLog log = load_log(input);
    BuildOptions options;
    options.config = config;
    options.jobs = jobs;
    options.seed = seed;
    const BuildResult built = build_bps_model(log, options);

    fs::create_directories(out_dir);
    const std::string model_path = out_dir + "/model.json";
    built.bps.save(model_path);

    std::ostringstream report;
    report << "configuration: " << trial_config_to_string(config) << '\n'
           << "traces: " << log.traces.size() << ", events: " << log.event_count() << '\n'
           << "mean fitness before repair: " << std::fixed << std::setprecision(4)
           << built.diagnostics.mean_fitness_before << '\n'
           << "conformant traces: " << built.diagnostics.conformant_traces << " of "
           << log.traces.size() << '\n'
           << "repaired log size: " << built.diagnostics.repaired_trace_count << '\n'
           << "inter-arrival: " << built.diagnostics.fitted_inter_arrival.to_json().dump() << '\n';
    const std::size_t model_activities = built.diagnostics.fitted_durations.size();
    const LogStatistics stats = log_statistics(log);
    if (built.diagnostics.mean_fitness_before < 0.5)
        report << "warning: mean fitness below 0.5; the discovered model explains little of the "
                  "log\n";
    if (model_activities < stats.distinct_activities)
        report << "warning: frequency filtering dropped "
               << stats.distinct_activities - model_activities << " of "
               << stats.distinct_activities << " activities\n";
    report << '\n' << fit_summary(built.diagnostics.fitted_durations);
    std::ofstream(out_dir + "/report.txt") << report.str();
    std::cout << report.str() << "\nmodel written to " << model_path << '\n';
    return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& out_dir, std::uint64_t seed,
                 int runs, long traces, int jobs) {
    const BpsModel bps = BpsModel::load(model_path);
    fs::create_directories(out_dir);
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < runs; ++r)
        seeds.push_back(derive_seed(seed, 0x72756eu, static_cast<std::uint64_t>(r)));
    SimConfig base;
    base.trace_count = traces;
    const std::vector<EventLog> logs = run_batch(bps, seeds, base, jobs);
    for (std::size_t r = 0; r < logs.size(); ++r) {
        const std::string path = out_dir + "/simulated_" + std::to_string(r) + ".csv";
        write_csv_file(logs[r], path);
        std::cout << "wrote " << path << " (" << logs[r].traces.size() << " traces)\n";
    }
    return 0;
}

void write_pairing_csv(std::ostream& out, const EventLog& ground, const EventLog& simulated,
                       const std::vector<int>& pairing) {
    out << "ground_case,simulated_case\n";
    for (std::size_t i = 0; i < pairing.size(); ++i) {
        out << ground.traces[i].case_id << ',';
        if (pairing[i] >= 0) out << simulated.traces[static_cast<std::size_t>(pairing[i])].case_id;
        out << '\n';
    }
}

int cmd_evaluate(const LogInput& ground_input, const LogInput& simulated_input,
                 const std::string& format, const std::string& pairing_path,
                 const std::string& model_path, const std::string& replay_csv, int jobs) {
    const EventLog ground = load_log(ground_input);
    const EventLog simulated = load_log(simulated_input);
    const EvaluationResult result = evaluate_logs(ground, simulated, BptdConfig{}, jobs);

    if (format == "json") {
        nlohmann::json j{{"els", result.els}, {"maeSeconds", result.mae_seconds}};
        j["pairing"] = nlohmann::json::array();
        for (std::size_t i = 0; i < result.pairing.size(); ++i) {
            if (result.pairing[i] < 0) continue;
            j["pairing"].push_back(
                {{"ground", ground.traces[i].case_id},
                 {"simulated",
                  simulated.traces[static_cast<std::size_t>(result.pairing[i])].case_id}});
        }
        std::cout << j.dump(2) << '\n';
    } else if (format == "csv") {
        std::cout << "metric,value\nels," << result.els << "\nmae_seconds," << result.mae_seconds
                  << '\n';
        write_pairing_csv(std::cout, ground, simulated, result.pairing);
    } else {
        std::cout << "ELS: " << std::fixed << std::setprecision(4) << result.els << '\n'
                  << "cycle-time MAE: " << format_duration(result.mae_seconds) << '\n';
    }
    if (!pairing_path.empty()) {
        std::ofstream out(pairing_path);
        write_pairing_csv(out, ground, simulated, result.pairing);
    }

    // Optional replay dump against a model (log repaired by alignment first).
    if (!replay_csv.empty()) {
        if (model_path.empty()) throw ConfigError("--replay-csv needs --model");
        const BpsModel bps = BpsModel::load(model_path);
        const EventLog repaired = repair_log(ground, bps.model, RepairMethod::alignment,
                                             AlignOptions{}, jobs);
        const LogReplay replay = replay_log(bps.model, repaired, jobs);
        std::ofstream out(replay_csv);
        out << "case_id,activity,start,end,processing_s,enablement,waiting_s\n";
        for (std::size_t i = 0; i < repaired.traces.size(); ++i) {
            const Trace& t = repaired.traces[i];
            for (std::size_t e = 0; e < t.events.size(); ++e) {
                out << t.case_id << ',' << t.events[e].activity << ','
                    << format_timestamp(t.events[e].start_ts) << ','
                    << format_timestamp(t.events[e].end_ts) << ','
                    << replay.traces[i].processing[e] << ','
                    << format_timestamp(replay.traces[i].enablement[e]) << ','
                    << replay.traces[i].waiting[e] << '\n';
            }
        }
        out << "\nflow_id,traversals\n";
        for (const auto& [flow, count] : replay.traversal) out << flow << ',' << count << '\n';
        std::cout << "replay dump written to " << replay_csv << '\n';
    }
    return 0;
}

int cmd_optimize(const LogInput& input, const std::string& out_dir, OptimizeOptions options,
                 bool keep_artifacts) {
    const EventLog log = load_log(input);
    fs::create_directories(out_dir);
    if (keep_artifacts) options.artifact_dir = out_dir + "/trials";

    std::cout << "running baseline configuration...\n";
    const TrialResult baseline = run_baseline(log, options.runs_per_trial, options.seed,
                                              options.jobs);
    std::cout << "optimizing (" << options.trials << " trials, " << options.runs_per_trial
              << " runs each)...\n";
    const OptimizeResult result = optimize(log, options);

    std::ofstream(out_dir + "/history.csv") << history_csv(result.history);
    const TrialResult& best = result.best();
    best.bps->save(out_dir + "/best_model.json");

    std::cout << '\n'
              << "log          Baseline (ELS)  Optimizer (ELS)\n"
              << std::left << std::setw(13) << fs::path(input.path).stem().string() << std::fixed
              << std::setprecision(4) << std::setw(16)
              << (baseline.ok ? baseline.mean_els : 0.0) << best.mean_els << '\n'
              << '\n'
              << "best configuration: " << trial_config_to_string(best.config) << '\n'
              << "history written to " << out_dir << "/history.csv\n"
              << "best model written to " << out_dir << "/best_model.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-driven discovery, simulation and tuning of process simulation models"};
    app.require_subcommand(1);

    LogInput input, simulated_input;
    TrialConfig config;
    std::string out_dir = "out";
    std::string model_path;
    std::string format = "text";
    std::string pairing_path, replay_csv;
    std::uint64_t seed = 1;
    int jobs = 0;
    int runs = 1;
    long traces = 0;
    std::string repair_name = "alignment", branching_name = "discovered";

    CLI::App* discover = app.add_subcommand("discover", "discover a BPS model from an event log");
    add_log_options(discover, input);
    discover->add_option("--out", out_dir, "output directory");
    discover->add_option("--epsilon", config.epsilon, "parallelism threshold [0,1]");
    discover->add_option("--eta", config.eta, "frequency percentile [0,1]");
    discover->add_option("--repair", repair_name, "repair method: removal|replacement|alignment");
    discover->add_option("--branching", branching_name,
                         "branching mode: random|equiprobable|discovered");
    discover->add_option("--pool-threshold", config.similarity_threshold,
                         "resource similarity threshold [0,1]");
    discover->add_option("--seed", seed, "master seed");
    discover->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "simulate a BPS model to CSV logs");
    simulate_cmd->add_option("--model", model_path, "BPS model JSON")->required();
    simulate_cmd->add_option("--out", out_dir, "output directory");
    simulate_cmd->add_option("--seed", seed, "master seed");
    simulate_cmd->add_option("--runs", runs, "number of simulation runs");
    simulate_cmd->add_option("--traces", traces, "override the trace count");
    simulate_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a simulated log against ground truth");
    evaluate->add_option("--ground", input.path, "ground-truth log (.csv or .xes)")->required();
    evaluate->add_option("--simulated", simulated_input.path, "simulated log")->required();
    evaluate->add_option("--col-case", input.columns.case_id, "CSV column holding the case id");
    evaluate->add_option("--col-activity", input.columns.activity, "CSV activity column");
    evaluate->add_option("--col-start", input.columns.start, "CSV start column");
    evaluate->add_option("--col-end", input.columns.end, "CSV end column");
    evaluate->add_option("--col-resource", input.columns.resource, "CSV resource column");
    evaluate->add_option("--delimiter", input.delimiter, "CSV delimiter");
    evaluate->add_option("--format", format, "report format: text|csv|json");
    evaluate->add_option("--pairing", pairing_path, "write the trace pairing CSV here");
    evaluate->add_option("--model", model_path, "BPS model JSON (for --replay-csv)");
    evaluate->add_option("--replay-csv", replay_csv, "dump the ground log's replay to CSV");
    evaluate->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    OptimizeOptions opt;
    bool keep_artifacts = false;
    CLI::App* optimize_cmd = app.add_subcommand("optimize", "search the configuration space");
    add_log_options(optimize_cmd, input);
    optimize_cmd->add_option("--out", out_dir, "output directory");
    optimize_cmd->add_option("--trials", opt.trials, "hyper-parameter combinations to explore");
    optimize_cmd->add_option("--runs", opt.runs_per_trial, "simulation runs per trial");
    optimize_cmd->add_option("--seed", opt.seed, "master seed");
    optimize_cmd->add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");
    optimize_cmd->add_option("--batch", opt.batch, "concurrent trials per TPE round");
    optimize_cmd->add_flag("--keep-artifacts", keep_artifacts, "write per-trial models");

    CLI11_PARSE(app, argc, argv);

    try {
        if (discover->parsed()) {
            config.repair = repair_method_from_name(repair_name);
            config.branching = branching_mode_from_name(branching_name);
            return cmd_discover(input, config, out_dir, seed, jobs);
        }
        if (simulate_cmd->parsed())
            return cmd_simulate(model_path, out_dir, seed, runs, traces, jobs);
        if (evaluate->parsed()) {
            simulated_input.columns = input.columns;
            simulated_input.delimiter = input.delimiter;
            return cmd_evaluate(input, simulated_input, format, pairing_path, model_path,
                                replay_csv, jobs);
        }
        if (optimize_cmd->parsed()) return cmd_optimize(input, out_dir, opt, keep_artifacts);
    } catch (const ParseError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const ModelError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const BpsError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
