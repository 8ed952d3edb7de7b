#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "dltrack/core_model.hpp"

namespace dltrack {

// How the Doppler term is weighted in the range-motion normal equations.
enum class CMode { derived_xd, paper_xy, unity };
std::string_view c_mode_name(CMode m);
CMode parse_c_mode(std::string_view s);  // throws config_error

struct DLConfig {
    int max_iterations = 200;
    double loglik_rel_tolerance = 1e-6;
    Vec4 sigma_floor{2.0, 2.0, 0.05, 0.5};
    CMode c_mode = CMode::derived_xd;
    bool tie_sigma_x_d = false;
    int dormant_count = 1;

    // Absolute prior thresholds. When unset they scale with the batch as
    // activation_support / N and elimination_support / N.
    std::optional<double> activation_threshold;
    std::optional<double> elimination_threshold;
    double activation_support = 3.0;
    double elimination_support = 1.5;

    double collapse_support = 2.5;  // minimum <1>_h for a crisp track
    double crisp_factor = 3.0;      // crisp: every sigma below crisp_factor * floor

    // Only crisp tracks may be declared. A broad component fitted to clutter
    // whose features are not uniform then stays part of the clutter model.
    bool detect_crisp_only = true;

    // At convergence an active track stays only if dropping it would cost
    // more than this much log-likelihood: one nat per free track parameter
    // (x0, y0, vx, vy, a, four sigmas, prior).
    double min_track_gain = 10.0;

    // Data-anchored dormant seeds. Each wave proposes up to spawn_pool seeds
    // built from two-scan pairs of unexplained measurements; seeds that do not
    // activate within dormant_patience iterations are withdrawn.
    bool spawn_seeds = true;
    int spawn_pool = 32;
    int dormant_patience = 4;
    double seed_sigma_scale = 3.0;
    double seed_prior_support = 1.0;
    double seed_min_score = 20.0;  // summed gated log-ratio a seed must reach

    bool lifecycle = true;  // false freezes the roster (complexity probes)
    std::uint64_t rng_seed = 0;

    double activation_for(std::size_t n) const;
    double elimination_for(std::size_t n) const;
};

// Throws config_error naming the offending field.
void check_dl_config(const DLConfig& cfg);

}  // namespace dltrack
