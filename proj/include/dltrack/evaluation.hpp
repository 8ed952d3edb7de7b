#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dltrack/dl_config.hpp"
#include "dltrack/dl_engine.hpp"
#include "dltrack/scenario.hpp"

namespace dltrack {

struct MatchCriteria {
    double position_gate = 8.0;  // mid-batch position error
    double velocity_gate = 0.4;  // velocity vector error
    std::optional<double> amplitude_gate;
};

void check_match_criteria(const MatchCriteria& c);

// 4 sensor position sigmas, and the same over the batch duration.
MatchCriteria default_criteria(const ScenarioConfig& cfg);

struct ScoredTrack {
    TrackHypothesis track;
    double llr = 0.0;
};

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (detection, target)
    std::vector<std::size_t> unmatched_detections;
    std::vector<std::size_t> unmatched_targets;
    // target index for each detection, -1 when it is a false detection
    std::vector<int> target_of_detection;
};

// Greedy one-to-one matching in descending LLR order (ties by track id); each
// detection takes the nearest unmatched target inside all gates.
MatchResult match_tracks(std::span<const ScoredTrack> detections, std::span<const TargetSpec> truth,
                         const MatchCriteria& criteria, double t_mid);

struct TrialOutcome {
    std::uint64_t seed = 0;
    std::size_t num_targets = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> llr;       // every active track, descending
    std::vector<int> matched;      // target index or -1, aligned with llr
};

TrialOutcome run_trial(const ScenarioConfig& scenario, const DLConfig& dl, const MatchCriteria& criteria);

struct RocPoint {
    double llr_threshold = 0.0;
    double pd = 0.0;
    double pfa_per_batch = 0.0;
    double pfa_per_area = 0.0;  // per 10^6 squared length units (km^2 for meters)
    int trials = 0;
};

// Threshold sweep over cached trial outcomes; thresholds are sorted ascending.
std::vector<RocPoint> roc_from_outcomes(std::span<const TrialOutcome> outcomes, std::vector<double> thresholds,
                                        double area);

// Runs `trials` seeded replicas (seed = replica_seed(scenario.rng_seed, i)) on
// up to `threads` workers and sweeps the thresholds.
std::vector<TrialOutcome> run_trials(const ScenarioConfig& scenario, const DLConfig& dl,
                                     const MatchCriteria& criteria, int trials, int threads);
std::vector<RocPoint> roc_curve(const ScenarioConfig& scenario, const DLConfig& dl,
                                std::vector<double> thresholds, int trials, const MatchCriteria& criteria,
                                int threads = 1);

struct ComplexityRow {
    std::size_t n = 0;
    std::size_t h = 0;
    int iterations = 0;
    double ops_per_iter = 0.0;
    double wall_ms = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<double> doubling_ratios;  // cost ratio between consecutive rows
};

struct ComplexityReport {
    std::vector<ComplexityRow> n_sweep;
    std::vector<ComplexityRow> h_sweep;
    LinearFit n_fit;
    LinearFit h_fit;
    LinearFit n_fit_wall;
};

// Ordinary least squares y = intercept + slope x.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

// Fixed-roster runs (lifecycle off) of `iterations` DL iterations each. The
// N sweep holds H at h_fixed; the H sweep holds N at n_fixed. H counts the
// clutter hypothesis.
ComplexityReport complexity_probe(const ScenarioConfig& base, const DLConfig& dl,
                                  std::span<const std::size_t> n_values, std::span<const std::size_t> h_values,
                                  std::size_t h_fixed, std::size_t n_fixed, int iterations = 10);

}  // namespace dltrack
