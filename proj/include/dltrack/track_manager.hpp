#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "dltrack/core_model.hpp"
#include "dltrack/dl_config.hpp"

namespace dltrack {

struct LifecycleEvents {
    int activated = 0;
    int eliminated = 0;
    int pruned = 0;
    int withdrawn = 0;  // dormant seeds that timed out
    int spawned = 0;
    int unjustified = 0;  // removed because the data did not need them

    // Any event that changes the mixture itself (activation does not).
    bool roster_changed() const noexcept { return eliminated + pruned + withdrawn + spawned + unjustified > 0; }
};

// Activation, elimination and seed withdrawal from the current priors (which
// right after an M-step equal <1>_h / N); keeps at least one dormant
// hypothesis and renormalizes priors after removals.
HypothesisSet lifecycle_step(const HypothesisSet& hs, const Batch& batch, const MeasurementBounds& bounds,
                             const DLConfig& cfg, LifecycleEvents* events = nullptr);

// Removes crisp active tracks that duplicate a stronger one at every scan time
// or whose data mass prior * N is below cfg.collapse_support.
HypothesisSet prune_duplicates(const HypothesisSet& hs, const Batch& batch, const DLConfig& cfg,
                               LifecycleEvents* events = nullptr);

bool is_crisp(const TrackHypothesis& h, const DLConfig& cfg);
// sqrt(sigma_x * sigma_y) below crisp_factor times the same mean of the floors.
bool is_localized(const TrackHypothesis& h, const DLConfig& cfg);

// Log-likelihood lost if hypothesis h were dropped and its prior handed to
// clutter, from the E-step weights f of the same set:
//   -sum_n log(1 - f(h|n) + (r_h / r_clutter) f(clutter|n)).
// Entry 0 (clutter) is 0.
std::vector<double> removal_cost(const HypothesisSet& hs, const AssociationMatrix& f);

// Repeatedly drops the active track with the lowest removal cost while that
// cost is at most cfg.min_track_gain, handing its prior to clutter and
// rescaling f exactly before the next cost evaluation.
HypothesisSet drop_unjustified(const HypothesisSet& hs, const AssociationMatrix& f, const DLConfig& cfg,
                               LifecycleEvents* events = nullptr);

// Fresh vague dormant hypothesis: bound midpoints, zero velocity, half-width sigmas.
TrackHypothesis make_vague_track(const MeasurementBounds& bounds, std::uint64_t id);

// Proposes dormant seeds anchored on measurements the clutter hypothesis
// still explains. Anchors already used by earlier waves are not reused.
class SeedProposer {
public:
    SeedProposer(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg);

    // Up to cfg.spawn_pool seeds, best first. Empty when nothing is left.
    std::vector<TrackHypothesis> propose(const AssociationMatrix& f, std::uint64_t& next_id);

private:
    struct Candidate {
        double score = 0.0;
        std::vector<std::size_t> members;
        TrackHypothesis track;
    };
    std::optional<Candidate> grow(std::size_t anchor, const std::vector<char>& free) const;
    std::vector<std::size_t> in_x_window(std::size_t slot, double lo, double hi) const;

    const Batch& batch_;
    MeasurementBounds bounds_;
    DLConfig cfg_;
    double log_clutter_ = 0.0;
    double vmax_ = 0.0;
    std::vector<std::vector<std::size_t>> by_x_;  // per scan slot, sorted by x
    std::vector<char> used_;
    std::mt19937_64 rng_;
};

struct TrackDetection {
    std::size_t column = 0;  // index into the hypothesis set
    std::uint64_t track_id = 0;
    double llr = 0.0;
    std::vector<std::size_t> gate;
    bool candidate = true;  // false: broad track excluded by detect_crisp_only
    bool detected = false;
};

struct DetectionReport {
    std::vector<TrackDetection> tracks;  // every active track, LLR descending
    double threshold = 0.0;

    std::vector<TrackDetection> detections() const;
};

// Measurements whose residual is within two sigmas in every dimension.
std::vector<std::size_t> gate_members(const TrackHypothesis& h, const Batch& batch);

double compute_llr(const TrackHypothesis& h, const Batch& batch, const MeasurementBounds& bounds,
                   std::vector<std::size_t>* gate = nullptr);

DetectionReport declare_detections(const HypothesisSet& hs, const Batch& batch,
                                   const MeasurementBounds& bounds,
                                   double llr_threshold = 0.0, const DLConfig* crisp = nullptr);

}  // namespace dltrack
