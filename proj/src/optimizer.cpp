#include "bpsforge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bpsforge/common.hpp"

namespace bpsforge {

namespace {

double uniform_in(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

TrialConfig random_config(const SearchSpace& space, Rng& rng) {
    TrialConfig cfg;
    cfg.epsilon = uniform_in(rng, space.epsilon_lo, space.epsilon_hi);
    cfg.eta = uniform_in(rng, space.eta_lo, space.eta_hi);
    cfg.similarity_threshold = uniform_in(rng, space.threshold_lo, space.threshold_hi);
    cfg.repair = space.repairs[std::uniform_int_distribution<std::size_t>(
        0, space.repairs.size() - 1)(rng)];
    cfg.branching = space.branchings[std::uniform_int_distribution<std::size_t>(
        0, space.branchings.size() - 1)(rng)];
    return cfg;
}

double gaussian_kernel(double x, double center, double bandwidth) {
    const double z = (x - center) / bandwidth;
    return std::exp(-0.5 * z * z) / bandwidth;
}

// Kernel density over one numeric dimension; an empty point set is uniform.
struct Kde {
    std::vector<double> points;
    double bandwidth = 1.0;
    double lo = 0.0, hi = 1.0;

    double density(double x) const {
        if (points.empty()) return 1.0 / (hi - lo);
        double sum = 0.0;
        for (double p : points) sum += gaussian_kernel(x, p, bandwidth);
        return std::max(sum / static_cast<double>(points.size()), 1e-12);
    }

    double sample(Rng& rng) const {
        if (points.empty()) return uniform_in(rng, lo, hi);
        const std::size_t pick =
            std::uniform_int_distribution<std::size_t>(0, points.size() - 1)(rng);
        std::normal_distribution<double> noise(points[pick], bandwidth);
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double x = noise(rng);
            if (x >= lo && x <= hi) return x;
        }
        return std::clamp(noise(rng), lo, hi);
    }
};

Kde make_kde(const std::vector<double>& points, double lo, double hi) {
    Kde kde;
    kde.points = points;
    kde.lo = lo;
    kde.hi = hi;
    const double n = std::max<double>(1.0, static_cast<double>(points.size()));
    kde.bandwidth = std::max((hi - lo) / std::sqrt(n), 1e-3);
    return kde;
}

// Add-one-smoothed category probabilities.
template <typename T>
std::vector<double> category_probs(const std::vector<T>& domain, const std::vector<T>& observed) {
    std::vector<double> probs(domain.size(), 0.0);
    for (std::size_t i = 0; i < domain.size(); ++i) {
        std::size_t count = 0;
        for (const T& o : observed)
            if (o == domain[i]) ++count;
        probs[i] = (static_cast<double>(count) + 1.0) /
                   (static_cast<double>(observed.size()) + static_cast<double>(domain.size()));
    }
    return probs;
}

template <typename T>
std::size_t sample_category(const std::vector<double>& probs, Rng& rng, const std::vector<T>&) {
    const double u = uniform_in(rng, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

}  // namespace

TrialConfig tpe_suggest(const std::vector<TrialResult>& history, const SearchSpace& space,
                        Rng& rng, const TpeOptions& opts) {
    std::vector<const TrialResult*> ok;
    for (const TrialResult& t : history)
        if (t.ok) ok.push_back(&t);

    if (history.size() < opts.n_startup || ok.size() < 2) return random_config(space, rng);

    std::sort(ok.begin(), ok.end(),
              [](const TrialResult* a, const TrialResult* b) { return a->loss < b->loss; });
    const std::size_t n_good = std::min(
        ok.size() - 1,
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(
                                     opts.gamma * static_cast<double>(ok.size())))));

    struct Dimension {
        Kde good, bad;
        double (*get)(const TrialConfig&);
        void (*set)(TrialConfig&, double);
    };
    std::vector<Dimension> dims;
    auto add_dim = [&](double lo, double hi, double (*get)(const TrialConfig&),
                       void (*set)(TrialConfig&, double)) {
        std::vector<double> good_points, bad_points;
        for (std::size_t i = 0; i < n_good; ++i) good_points.push_back(get(ok[i]->config));
        for (std::size_t i = n_good; i < ok.size(); ++i) bad_points.push_back(get(ok[i]->config));
        dims.push_back(Dimension{make_kde(good_points, lo, hi), make_kde(bad_points, lo, hi),
                                 get, set});
    };
    add_dim(space.epsilon_lo, space.epsilon_hi,
            [](const TrialConfig& c) { return c.epsilon; },
            [](TrialConfig& c, double v) { c.epsilon = v; });
    add_dim(space.eta_lo, space.eta_hi, [](const TrialConfig& c) { return c.eta; },
            [](TrialConfig& c, double v) { c.eta = v; });
    add_dim(space.threshold_lo, space.threshold_hi,
            [](const TrialConfig& c) { return c.similarity_threshold; },
            [](TrialConfig& c, double v) { c.similarity_threshold = v; });

    std::vector<RepairMethod> good_repairs, bad_repairs;
    std::vector<BranchingMode> good_branchings, bad_branchings;
    for (std::size_t i = 0; i < ok.size(); ++i) {
        if (i < n_good) {
            good_repairs.push_back(ok[i]->config.repair);
            good_branchings.push_back(ok[i]->config.branching);
        } else {
            bad_repairs.push_back(ok[i]->config.repair);
            bad_branchings.push_back(ok[i]->config.branching);
        }
    }
    const std::vector<double> repair_good = category_probs(space.repairs, good_repairs);
    const std::vector<double> repair_bad = category_probs(space.repairs, bad_repairs);
    const std::vector<double> branching_good = category_probs(space.branchings, good_branchings);
    const std::vector<double> branching_bad = category_probs(space.branchings, bad_branchings);

    TrialConfig best_cfg;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < opts.candidates; ++c) {
        TrialConfig cfg;
        double score = 0.0;  // log of the l/g ratio
        for (const Dimension& dim : dims) {
            const double x = dim.good.sample(rng);
            dim.set(cfg, x);
            score += std::log(dim.good.density(x)) - std::log(dim.bad.density(x));
        }
        const std::size_t r = sample_category(repair_good, rng, space.repairs);
        cfg.repair = space.repairs[r];
        score += std::log(repair_good[r]) - std::log(repair_bad[r]);
        const std::size_t b = sample_category(branching_good, rng, space.branchings);
        cfg.branching = space.branchings[b];
        score += std::log(branching_good[b]) - std::log(branching_bad[b]);

        if (score > best_score) {
            best_score = score;
            best_cfg = cfg;
        }
    }
    return best_cfg;
}

TrialResult run_trial(const EventLog& log, const GroundTruth& ground, const TrialConfig& config,
                      int runs, std::uint64_t seed, int jobs, double timetable_coverage,
                      const AlignOptions& align, bool force_exponential) {
    TrialResult result;
    result.config = config;
    try {
        BuildOptions options;
        options.config = config;
        options.force_exponential = force_exponential;
        options.timetable_coverage = timetable_coverage;
        options.align = align;
        options.jobs = jobs;
        options.seed = seed;
        const BuildResult built = build_bps_model(log, options);

        double els_sum = 0.0;
        for (int run = 0; run < runs; ++run) {
            SimConfig cfg;
            cfg.seed = derive_seed(seed, 0x73696du /*sim stream*/, static_cast<std::uint64_t>(run));
            cfg.start_timestamp = built.log_start;
            const EventLog simulated = simulate(built.bps, cfg);
            els_sum += score_simulation(ground, simulated, BptdConfig{}, jobs).els;
        }
        result.mean_els = els_sum / static_cast<double>(runs);
        result.loss = 1.0 - result.mean_els;
        result.ok = true;
        result.bps = built.bps;
    } catch (const BpsError& err) {
        result.ok = false;
        result.error = err.what();
        log_info(std::string("trial failed: ") + err.what());
    }
    return result;
}

const TrialResult& OptimizeResult::best() const {
    if (best_index < 0) throw OptimizeError("no successful trial");
    return history[static_cast<std::size_t>(best_index)];
}

TrialConfig baseline_config() {
    TrialConfig cfg;
    cfg.epsilon = 0.1;
    cfg.eta = 0.4;
    cfg.repair = RepairMethod::removal;
    cfg.branching = BranchingMode::equiprobable;
    cfg.similarity_threshold = 0.5;
    return cfg;
}

TrialResult run_baseline(const EventLog& log, int runs, std::uint64_t seed, int jobs) {
    const GroundTruth ground(log);
    return run_trial(log, ground, baseline_config(), runs, derive_seed(seed, 0x62617365u), jobs,
                     0.95, AlignOptions{}, /*force_exponential=*/true);
}

OptimizeResult optimize(const EventLog& log, const OptimizeOptions& options) {
    if (options.trials < 1 || options.runs_per_trial < 1)
        throw ConfigError("optimize needs trials >= 1 and runs_per_trial >= 1");
    const GroundTruth ground(log);
    const SearchSpace space;

    OptimizeResult result;
    Rng suggest_rng = make_rng(derive_seed(options.seed, 0x747065u /*tpe stream*/));

    int trial_index = 0;
    while (trial_index < options.trials) {
        const int batch = std::max(1, options.batch);
        std::vector<TrialConfig> configs;

        // Constant-liar imputation: pending batch members enter the history at
        // the median successful loss so TPE does not resample the same point.
        std::vector<TrialResult> pending = result.history;
        std::vector<double> ok_losses;
        for (const TrialResult& t : result.history)
            if (t.ok) ok_losses.push_back(t.loss);
        double liar = 0.5;
        if (!ok_losses.empty()) {
            std::sort(ok_losses.begin(), ok_losses.end());
            liar = ok_losses[ok_losses.size() / 2];
        }
        for (int b = 0; b < batch && trial_index + b < options.trials; ++b) {
            const TrialConfig cfg = tpe_suggest(pending, space, suggest_rng, options.tpe);
            configs.push_back(cfg);
            TrialResult lie;
            lie.config = cfg;
            lie.ok = true;
            lie.loss = liar;
            pending.push_back(std::move(lie));
        }

        for (const TrialConfig& cfg : configs) {
            TrialResult trial =
                run_trial(log, ground, cfg, options.runs_per_trial,
                          derive_seed(options.seed, 0x7472u, static_cast<std::uint64_t>(trial_index)),
                          options.jobs, options.timetable_coverage, options.align);
            if (trial.ok && !options.artifact_dir.empty()) {
                std::filesystem::create_directories(options.artifact_dir);
                const std::string path = options.artifact_dir + "/trial_" +
                                         std::to_string(trial_index) + "_model.json";
                trial.bps->save(path);
                trial.model_path = path;
            }
            if (trial.ok &&
                (result.best_index < 0 ||
                 trial.loss < result.history[static_cast<std::size_t>(result.best_index)].loss))
                result.best_index = trial_index;
            result.history.push_back(std::move(trial));
            ++trial_index;
        }
    }

    if (result.best_index < 0)
        throw OptimizeError("all " + std::to_string(options.trials) + " trials failed");
    return result;
}

std::string history_csv(const std::vector<TrialResult>& history) {
    std::ostringstream out;
    out << "trial,epsilon,eta,repair,branching,pool_threshold,status,loss,els,error\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const TrialResult& t = history[i];
        out << i << ',' << t.config.epsilon << ',' << t.config.eta << ','
            << repair_method_name(t.config.repair) << ','
            << branching_mode_name(t.config.branching) << ',' << t.config.similarity_threshold
            << ',' << (t.ok ? "ok" : "failed") << ',';
        if (t.ok) out << t.loss << ',' << t.mean_els << ',';
        else out << ",,";
        std::string msg = t.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        out << msg << '\n';
    }
    return out.str();
}

}  // namespace bpsforge
