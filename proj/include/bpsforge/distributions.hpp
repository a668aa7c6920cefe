#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpsforge/common.hpp"

namespace bpsforge {

enum class DistFamily { fixed, normal, exponential, uniform, triangular, gamma, lognormal };

const char* dist_family_name(DistFamily f);
DistFamily dist_family_from_name(const std::string& name);

// One fitted probability distribution. Parameter slots by family:
//   fixed:       value
//   normal:      mean, sd
//   exponential: mean
//   uniform:     low, high
//   triangular:  low, mode, high
//   gamma:       shape, scale
//   lognormal:   log_mean, log_sd (of the underlying normal)
struct Distribution {
    DistFamily family = DistFamily::fixed;
    double value = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double low = 0.0;
    double high = 0.0;
    double mode = 0.0;
    double shape = 0.0;
    double scale = 0.0;
    double log_mean = 0.0;
    double log_sd = 0.0;
    double fit_error = 0.0;

    double cdf(double x) const;
    // Draws are clamped at zero so durations stay non-negative.
    double sample(Rng& rng) const;
    double expected_value() const;

    nlohmann::json to_json() const;
    static Distribution from_json(const nlohmann::json& j);

    static Distribution fixed_value(double v);
    static Distribution exponential(double mean);
    static Distribution normal(double mean, double sd);
    static Distribution uniform(double low, double high);
    static Distribution triangular(double low, double mode, double high);
    static Distribution gamma_dist(double shape, double scale);
    static Distribution lognormal(double log_mean, double log_sd);
};

// Fits every family by moments/MLE, scores each by the RMS error between its
// CDF and the empirical CDF at the sorted samples, and returns the minimizer.
// A zero-variance series short-circuits to FixedValue with error 0.
Distribution fit_distribution(const std::vector<double>& samples);

// RMS of (cdf - empirical cdf) over sorted samples (Hazen plotting positions).
double cdf_rms_error(const Distribution& dist, std::vector<double> samples);

}  // namespace bpsforge
