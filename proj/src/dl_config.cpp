#include "dltrack/dl_config.hpp"

#include <cmath>
#include <string>

namespace dltrack {

std::string_view c_mode_name(CMode m) {
    switch (m) {
        case CMode::derived_xd: return "derived_xd";
        case CMode::paper_xy: return "paper_xy";
        case CMode::unity: return "unity";
    }
    return "derived_xd";
}

CMode parse_c_mode(std::string_view s) {
    if (s == "derived_xd") return CMode::derived_xd;
    if (s == "paper_xy") return CMode::paper_xy;
    if (s == "unity") return CMode::unity;
    throw config_error("c_mode must be one of derived_xd, paper_xy, unity (got '" + std::string(s) + "')");
}

double DLConfig::activation_for(std::size_t n) const {
    return activation_threshold ? *activation_threshold : activation_support / static_cast<double>(n);
}

double DLConfig::elimination_for(std::size_t n) const {
    return elimination_threshold ? *elimination_threshold : elimination_support / static_cast<double>(n);
}

void check_dl_config(const DLConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw config_error("dl." + field + ": " + why);
    };
    if (cfg.max_iterations < 1) fail("max_iterations", "must be >= 1");
    if (!(cfg.loglik_rel_tolerance > 0.0)) fail("loglik_rel_tolerance", "must be positive");
    for (std::size_t d = 0; d < kDims; ++d) {
        if (!(cfg.sigma_floor[d] > 0.0) || !std::isfinite(cfg.sigma_floor[d])) {
            fail("sigma_floor." + std::string(dim_name(d)), "must be positive");
        }
    }
    if (cfg.dormant_count < 1) fail("dormant_count", "must be >= 1");
    auto in_unit = [](const std::optional<double>& v) { return !v || (*v > 0.0 && *v < 1.0); };
    if (!in_unit(cfg.activation_threshold)) fail("activation_threshold", "must lie in (0,1)");
    if (!in_unit(cfg.elimination_threshold)) fail("elimination_threshold", "must lie in (0,1)");
    if (cfg.activation_threshold && cfg.elimination_threshold &&
        !(*cfg.elimination_threshold < *cfg.activation_threshold)) {
        fail("elimination_threshold", "must be below activation_threshold");
    }
    if (!(cfg.activation_support > 0.0)) fail("activation_support", "must be positive");
    if (!(cfg.elimination_support > 0.0) || !(cfg.elimination_support < cfg.activation_support)) {
        fail("elimination_support", "must be positive and below activation_support");
    }
    if (cfg.collapse_support < 0.0) fail("collapse_support", "must be >= 0");
    if (!(cfg.crisp_factor >= 1.0)) fail("crisp_factor", "must be >= 1");
    if (!std::isfinite(cfg.min_track_gain)) fail("min_track_gain", "must be finite");
    if (cfg.spawn_pool < 0) fail("spawn_pool", "must be >= 0");
    if (cfg.dormant_patience < 1) fail("dormant_patience", "must be >= 1");
    if (!(cfg.seed_sigma_scale >= 1.0)) fail("seed_sigma_scale", "must be >= 1");
    if (!(cfg.seed_prior_support > 0.0)) fail("seed_prior_support", "must be positive");
}

}  // namespace dltrack
