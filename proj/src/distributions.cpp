#include "bpsforge/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace bpsforge {

const char* dist_family_name(DistFamily f) {
    switch (f) {
        case DistFamily::fixed: return "fixed";
        case DistFamily::normal: return "normal";
        case DistFamily::exponential: return "exponential";
        case DistFamily::uniform: return "uniform";
        case DistFamily::triangular: return "triangular";
        case DistFamily::gamma: return "gamma";
        case DistFamily::lognormal: return "lognormal";
    }
    return "?";
}

DistFamily dist_family_from_name(const std::string& name) {
    if (name == "fixed") return DistFamily::fixed;
    if (name == "normal") return DistFamily::normal;
    if (name == "exponential") return DistFamily::exponential;
    if (name == "uniform") return DistFamily::uniform;
    if (name == "triangular") return DistFamily::triangular;
    if (name == "gamma") return DistFamily::gamma;
    if (name == "lognormal") return DistFamily::lognormal;
    throw ConfigError("unknown distribution family: " + name);
}

namespace {

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

}  // namespace

double Distribution::cdf(double x) const {
    switch (family) {
        case DistFamily::fixed:
            return x < value ? 0.0 : 1.0;
        case DistFamily::normal:
            return normal_cdf(x, mean, sd);
        case DistFamily::exponential:
            return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / mean);
        case DistFamily::uniform:
            if (x <= low) return 0.0;
            if (x >= high) return 1.0;
            return (x - low) / (high - low);
        case DistFamily::triangular: {
            if (x <= low) return 0.0;
            if (x >= high) return 1.0;
            const double span = high - low;
            if (x < mode) return (x - low) * (x - low) / (span * (mode - low));
            if (x > mode) return 1.0 - (high - x) * (high - x) / (span * (high - mode));
            return (mode - low) / span;
        }
        case DistFamily::gamma:
            return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, x / scale);
        case DistFamily::lognormal:
            return x <= 0.0 ? 0.0 : normal_cdf(std::log(x), log_mean, log_sd);
    }
    return 0.0;
}

double Distribution::sample(Rng& rng) const {
    double draw = 0.0;
    switch (family) {
        case DistFamily::fixed:
            draw = value;
            break;
        case DistFamily::normal:
            draw = std::normal_distribution<double>(mean, sd)(rng);
            break;
        case DistFamily::exponential:
            draw = std::exponential_distribution<double>(1.0 / mean)(rng);
            break;
        case DistFamily::uniform:
            draw = std::uniform_real_distribution<double>(low, high)(rng);
            break;
        case DistFamily::triangular: {
            // Inverse-CDF sampling.
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const double cut = (mode - low) / (high - low);
            if (u < cut) draw = low + std::sqrt(u * (high - low) * (mode - low));
            else draw = high - std::sqrt((1.0 - u) * (high - low) * (high - mode));
            break;
        }
        case DistFamily::gamma:
            draw = std::gamma_distribution<double>(shape, scale)(rng);
            break;
        case DistFamily::lognormal:
            draw = std::lognormal_distribution<double>(log_mean, log_sd)(rng);
            break;
    }
    return std::max(0.0, draw);
}

double Distribution::expected_value() const {
    switch (family) {
        case DistFamily::fixed: return value;
        case DistFamily::normal: return mean;
        case DistFamily::exponential: return mean;
        case DistFamily::uniform: return (low + high) / 2.0;
        case DistFamily::triangular: return (low + mode + high) / 3.0;
        case DistFamily::gamma: return shape * scale;
        case DistFamily::lognormal: return std::exp(log_mean + log_sd * log_sd / 2.0);
    }
    return 0.0;
}

nlohmann::json Distribution::to_json() const {
    nlohmann::json j{{"family", dist_family_name(family)}};
    switch (family) {
        case DistFamily::fixed: j["value"] = value; break;
        case DistFamily::normal:
            j["mean"] = mean;
            j["stddev"] = sd;
            break;
        case DistFamily::exponential: j["mean"] = mean; break;
        case DistFamily::uniform:
            j["low"] = low;
            j["high"] = high;
            break;
        case DistFamily::triangular:
            j["low"] = low;
            j["mode"] = mode;
            j["high"] = high;
            break;
        case DistFamily::gamma:
            j["shape"] = shape;
            j["scale"] = scale;
            break;
        case DistFamily::lognormal:
            j["logMean"] = log_mean;
            j["logStddev"] = log_sd;
            break;
    }
    if (fit_error > 0.0) j["fitError"] = fit_error;
    return j;
}

Distribution Distribution::from_json(const nlohmann::json& j) {
    const DistFamily family = dist_family_from_name(j.at("family").get<std::string>());
    Distribution d;
    switch (family) {
        case DistFamily::fixed:
            d = fixed_value(j.at("value").get<double>());
            break;
        case DistFamily::normal:
            d = normal(j.at("mean").get<double>(), j.at("stddev").get<double>());
            break;
        case DistFamily::exponential:
            d = exponential(j.at("mean").get<double>());
            break;
        case DistFamily::uniform:
            d = uniform(j.at("low").get<double>(), j.at("high").get<double>());
            break;
        case DistFamily::triangular:
            d = triangular(j.at("low").get<double>(), j.at("mode").get<double>(),
                           j.at("high").get<double>());
            break;
        case DistFamily::gamma:
            d = gamma_dist(j.at("shape").get<double>(), j.at("scale").get<double>());
            break;
        case DistFamily::lognormal:
            d = lognormal(j.at("logMean").get<double>(), j.at("logStddev").get<double>());
            break;
    }
    d.fit_error = j.value("fitError", 0.0);
    return d;
}

Distribution Distribution::fixed_value(double v) {
    Distribution d;
    d.family = DistFamily::fixed;
    d.value = v;
    return d;
}

Distribution Distribution::exponential(double mean) {
    if (!(mean > 0.0)) throw ConfigError("exponential distribution needs mean > 0");
    Distribution d;
    d.family = DistFamily::exponential;
    d.mean = mean;
    return d;
}

Distribution Distribution::normal(double mean, double sd) {
    if (!(sd > 0.0)) throw ConfigError("normal distribution needs stddev > 0");
    Distribution d;
    d.family = DistFamily::normal;
    d.mean = mean;
    d.sd = sd;
    return d;
}

Distribution Distribution::uniform(double low, double high) {
    if (!(low < high)) throw ConfigError("uniform distribution needs low < high");
    Distribution d;
    d.family = DistFamily::uniform;
    d.low = low;
    d.high = high;
    return d;
}

Distribution Distribution::triangular(double low, double mode, double high) {
    if (!(low < high) || mode < low || mode > high)
        throw ConfigError("triangular distribution needs low <= mode <= high, low < high");
    Distribution d;
    d.family = DistFamily::triangular;
    d.low = low;
    d.mode = mode;
    d.high = high;
    return d;
}

Distribution Distribution::gamma_dist(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw ConfigError("gamma distribution needs shape > 0 and scale > 0");
    Distribution d;
    d.family = DistFamily::gamma;
    d.shape = shape;
    d.scale = scale;
    return d;
}

Distribution Distribution::lognormal(double log_mean, double log_sd) {
    if (!(log_sd > 0.0)) throw ConfigError("lognormal distribution needs log stddev > 0");
    Distribution d;
    d.family = DistFamily::lognormal;
    d.log_mean = log_mean;
    d.log_sd = log_sd;
    return d;
}

double cdf_rms_error(const Distribution& dist, std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double empirical = (static_cast<double>(i) + 0.5) / n;
        const double diff = dist.cdf(samples[i]) - empirical;
        sum += diff * diff;
    }
    return std::sqrt(sum / n);
}

Distribution fit_distribution(const std::vector<double>& samples) {
    if (samples.empty()) throw ConfigError("cannot fit a distribution to an empty series");

    const double n = static_cast<double>(samples.size());
    double sum = 0.0, min_v = samples.front(), max_v = samples.front();
    for (double x : samples) {
        sum += x;
        min_v = std::min(min_v, x);
        max_v = std::max(max_v, x);
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (double x : samples) sq += (x - mean) * (x - mean);
    const double var = samples.size() > 1 ? sq / (n - 1.0) : 0.0;
    const double sd = std::sqrt(var);

    if (!(max_v > min_v)) {
        Distribution d = Distribution::fixed_value(mean);
        d.fit_error = 0.0;
        return d;
    }

    std::vector<Distribution> candidates;
    {
        Distribution d = Distribution::fixed_value(mean);
        candidates.push_back(d);
    }
    candidates.push_back(Distribution::normal(mean, sd));
    if (mean > 0.0) candidates.push_back(Distribution::exponential(mean));
    candidates.push_back(Distribution::uniform(min_v, max_v));
    {
        const double mode = std::clamp(3.0 * mean - min_v - max_v, min_v, max_v);
        candidates.push_back(Distribution::triangular(min_v, mode, max_v));
    }
    if (mean > 0.0 && var > 0.0)
        candidates.push_back(Distribution::gamma_dist(mean * mean / var, var / mean));
    if (min_v > 0.0) {
        double lsum = 0.0;
        for (double x : samples) lsum += std::log(x);
        const double lmean = lsum / n;
        double lsq = 0.0;
        for (double x : samples) lsq += (std::log(x) - lmean) * (std::log(x) - lmean);
        const double lsd = std::sqrt(samples.size() > 1 ? lsq / (n - 1.0) : 0.0);
        if (lsd > 0.0) candidates.push_back(Distribution::lognormal(lmean, lsd));
    }

    double min_error = std::numeric_limits<double>::infinity();
    for (Distribution& d : candidates) {
        d.fit_error = cdf_rms_error(d, samples);
        min_error = std::min(min_error, d.fit_error);
    }
    // Candidates are ordered simplest-first; a later family must beat the
    // minimum by more than the tolerance, otherwise an extra shape parameter
    // chasing sampling noise (gamma vs exponential) would win coin flips.
    constexpr double kParsimonyTolerance = 2e-3;
    for (const Distribution& d : candidates)
        if (d.fit_error <= min_error + kParsimonyTolerance) return d;
    return candidates.front();
}

}  // namespace bpsforge
