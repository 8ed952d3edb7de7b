#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "dltrack/core_model.hpp"

namespace dltrack {

enum class FeatureDist { gaussian, uniform };
std::string_view feature_dist_name(FeatureDist d);
FeatureDist parse_feature_dist(std::string_view s);  // throws config_error

// Distribution of a clutter feature (amplitude or Doppler). Gaussian draws are
// clipped to the bounds; uniform draws span the bounds and ignore mean/sigma.
struct FeatureModel {
    FeatureDist dist = FeatureDist::gaussian;
    double mean = 0.0;
    double sigma = 1.0;
};

struct TargetSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double amplitude = 0.0;  // mean return amplitude
};

struct ScenarioConfig {
    double area_width = 500.0;
    double area_height = 500.0;
    int num_scans = 6;
    double revisit = 4.0;
    int clutter_per_scan = 500;
    std::vector<TargetSpec> targets;

    Interval amplitude_bounds{0.0, 1.0};
    Interval doppler_bounds{-20.0, 20.0};
    FeatureModel clutter_amplitude{FeatureDist::gaussian, 0.3, 0.1};
    FeatureModel clutter_doppler{FeatureDist::gaussian, 0.0, 2.0};
    double target_amplitude_sigma = 0.05;
    double sensor_sigma_x = 2.0;
    double sensor_sigma_y = 2.0;
    double sensor_sigma_doppler = 0.5;
    double miss_probability = 0.0;
    std::uint64_t rng_seed = 1;
};

// Throws config_error naming the field; includes the check that every target
// stays inside the area and its Doppler inside the Doppler bounds.
void check_scenario_config(const ScenarioConfig& cfg);

MeasurementBounds scenario_bounds(const ScenarioConfig& cfg);

// Per-dimension noise of target returns: the natural sigma floors.
Vec4 sensor_sigmas(const ScenarioConfig& cfg);

struct GroundTruth {
    std::vector<TargetSpec> targets;
    // target_of[n] is the target index for measurement n, or -1 for clutter.
    std::vector<int> target_of;
    // per_scan[k][j]: measurement index of target j in scan k, or -1 if missed.
    std::vector<std::vector<long>> per_scan;
};

struct Scenario {
    ScenarioConfig config;
    MeasurementBounds bounds;
    Batch batch;
    GroundTruth truth;
};

Scenario generate(const ScenarioConfig& cfg);

struct ScrReport {
    double amplitude = 0.0;
    double doppler = 0.0;
    double amplitude_db = 0.0;
    double doppler_db = 0.0;
};

// (mu_T - mu_C) / (sigma_C + sigma_T) per feature from the configured
// distributions, averaged over targets; dB = 20 log10.
ScrReport scr_report(const ScenarioConfig& cfg);

// Same ratios measured on a generated scenario's samples.
ScrReport empirical_scr(const Scenario& s);

// Per-replica seed: splitmix64 of the base seed mixed with the replica index.
std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica);

}  // namespace dltrack
