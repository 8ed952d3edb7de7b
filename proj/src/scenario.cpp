#include "dltrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace dltrack {

namespace {

double draw_feature(const FeatureModel& fm, const Interval& b, std::mt19937_64& rng) {
    if (fm.dist == FeatureDist::uniform) return std::uniform_real_distribution<double>(b.min, b.max)(rng);
    return std::clamp(std::normal_distribution<double>(fm.mean, fm.sigma)(rng), b.min, b.max);
}

double feature_mean(const FeatureModel& fm, const Interval& b) {
    return fm.dist == FeatureDist::uniform ? b.mid() : fm.mean;
}

double feature_sigma(const FeatureModel& fm, const Interval& b) {
    return fm.dist == FeatureDist::uniform ? b.width() / std::sqrt(12.0) : fm.sigma;
}

double to_db(double ratio) { return ratio > 0.0 ? 20.0 * std::log10(ratio) : -INFINITY; }

}  // namespace

std::string_view feature_dist_name(FeatureDist d) {
    return d == FeatureDist::uniform ? "uniform" : "gaussian";
}

FeatureDist parse_feature_dist(std::string_view s) {
    if (s == "gaussian") return FeatureDist::gaussian;
    if (s == "uniform") return FeatureDist::uniform;
    throw config_error("distribution must be 'gaussian' or 'uniform' (got '" + std::string(s) + "')");
}

void check_scenario_config(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw config_error("scenario." + field + ": " + why);
    };
    if (!(cfg.area_width > 0.0)) fail("area_width", "must be positive");
    if (!(cfg.area_height > 0.0)) fail("area_height", "must be positive");
    if (cfg.num_scans < 1) fail("num_scans", "must be >= 1");
    if (!(cfg.revisit > 0.0)) fail("revisit", "must be positive");
    if (cfg.clutter_per_scan < 0) fail("clutter_per_scan", "must be >= 0");
    if (!(cfg.amplitude_bounds.max > cfg.amplitude_bounds.min)) fail("amplitude_bounds", "max must exceed min");
    if (!(cfg.doppler_bounds.max > cfg.doppler_bounds.min)) fail("doppler_bounds", "max must exceed min");
    if (cfg.clutter_amplitude.dist == FeatureDist::gaussian && !(cfg.clutter_amplitude.sigma > 0.0)) {
        fail("clutter_amplitude.sigma", "must be positive");
    }
    if (cfg.clutter_doppler.dist == FeatureDist::gaussian && !(cfg.clutter_doppler.sigma > 0.0)) {
        fail("clutter_doppler.sigma", "must be positive");
    }
    if (!(cfg.target_amplitude_sigma > 0.0)) fail("target_amplitude_sigma", "must be positive");
    if (!(cfg.sensor_sigma_x > 0.0)) fail("sensor_sigma_x", "must be positive");
    if (!(cfg.sensor_sigma_y > 0.0)) fail("sensor_sigma_y", "must be positive");
    if (!(cfg.sensor_sigma_doppler > 0.0)) fail("sensor_sigma_doppler", "must be positive");
    if (!(cfg.miss_probability >= 0.0 && cfg.miss_probability < 1.0)) fail("miss_probability", "must lie in [0,1)");

    const double t_end = (cfg.num_scans - 1) * cfg.revisit;
    for (std::size_t j = 0; j < cfg.targets.size(); ++j) {
        const auto& tg = cfg.targets[j];
        const std::string name = "targets[" + std::to_string(j) + "]";
        for (double t : {0.0, t_end}) {
            const double x = tg.x0 + tg.vx * t;
            const double y = tg.y0 + tg.vy * t;
            if (x < 0.0 || x > cfg.area_width || y < 0.0 || y > cfg.area_height) {
                fail(name, "leaves the area during the scenario");
            }
        }
        if (!cfg.doppler_bounds.contains(tg.vx)) fail(name + ".vx", "outside doppler_bounds");
        if (!cfg.amplitude_bounds.contains(tg.amplitude)) fail(name + ".amplitude", "outside amplitude_bounds");
    }
}

MeasurementBounds scenario_bounds(const ScenarioConfig& cfg) {
    return make_bounds({0.0, cfg.area_width}, {0.0, cfg.area_height}, cfg.amplitude_bounds, cfg.doppler_bounds);
}

Vec4 sensor_sigmas(const ScenarioConfig& cfg) {
    return {cfg.sensor_sigma_x, cfg.sensor_sigma_y, cfg.target_amplitude_sigma, cfg.sensor_sigma_doppler};
}

Scenario generate(const ScenarioConfig& cfg) {
    check_scenario_config(cfg);
    const MeasurementBounds bounds = scenario_bounds(cfg);
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> ux(0.0, cfg.area_width);
    std::uniform_real_distribution<double> uy(0.0, cfg.area_height);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Measurement> ms;
    std::vector<int> owner;
    const std::size_t J = cfg.targets.size();
    GroundTruth truth;
    truth.targets = cfg.targets;
    truth.per_scan.assign(cfg.num_scans, std::vector<long>(J, -1));

    for (int k = 0; k < cfg.num_scans; ++k) {
        const double t = k * cfg.revisit;
        std::vector<Measurement> scan;
        std::vector<int> scan_owner;
        for (int c = 0; c < cfg.clutter_per_scan; ++c) {
            Measurement m;
            m.x = ux(rng);
            m.y = uy(rng);
            m.amplitude = draw_feature(cfg.clutter_amplitude, cfg.amplitude_bounds, rng);
            m.doppler = draw_feature(cfg.clutter_doppler, cfg.doppler_bounds, rng);
            m.t = t;
            m.scan = k;
            scan.push_back(m);
            scan_owner.push_back(-1);
        }
        for (std::size_t j = 0; j < J; ++j) {
            const auto& tg = cfg.targets[j];
            if (cfg.miss_probability > 0.0 && u01(rng) < cfg.miss_probability) continue;
            Measurement m;
            m.x = std::clamp(tg.x0 + tg.vx * t + cfg.sensor_sigma_x * gauss(rng), 0.0, cfg.area_width);
            m.y = std::clamp(tg.y0 + tg.vy * t + cfg.sensor_sigma_y * gauss(rng), 0.0, cfg.area_height);
            m.amplitude = std::clamp(tg.amplitude + cfg.target_amplitude_sigma * gauss(rng),
                                     cfg.amplitude_bounds.min, cfg.amplitude_bounds.max);
            m.doppler = std::clamp(tg.vx + cfg.sensor_sigma_doppler * gauss(rng), cfg.doppler_bounds.min,
                                   cfg.doppler_bounds.max);
            m.t = t;
            m.scan = k;
            scan.push_back(m);
            scan_owner.push_back(static_cast<int>(j));
        }
        std::vector<std::size_t> perm(scan.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i : perm) {
            if (scan_owner[i] >= 0) truth.per_scan[k][scan_owner[i]] = static_cast<long>(ms.size());
            ms.push_back(scan[i]);
            owner.push_back(scan_owner[i]);
        }
    }
    truth.target_of = std::move(owner);
    return Scenario{cfg, bounds, validate_batch(ms, bounds), std::move(truth)};
}

ScrReport scr_report(const ScenarioConfig& cfg) {
    ScrReport r;
    if (cfg.targets.empty()) return r;
    const double mc_a = feature_mean(cfg.clutter_amplitude, cfg.amplitude_bounds);
    const double sc_a = feature_sigma(cfg.clutter_amplitude, cfg.amplitude_bounds);
    const double mc_d = feature_mean(cfg.clutter_doppler, cfg.doppler_bounds);
    const double sc_d = feature_sigma(cfg.clutter_doppler, cfg.doppler_bounds);
    for (const auto& tg : cfg.targets) {
        r.amplitude += std::abs(tg.amplitude - mc_a) / (sc_a + cfg.target_amplitude_sigma);
        r.doppler += std::abs(tg.vx - mc_d) / (sc_d + cfg.sensor_sigma_doppler);
    }
    r.amplitude /= static_cast<double>(cfg.targets.size());
    r.doppler /= static_cast<double>(cfg.targets.size());
    r.amplitude_db = to_db(r.amplitude);
    r.doppler_db = to_db(r.doppler);
    return r;
}

ScrReport empirical_scr(const Scenario& s) {
    auto stats = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() > 1 ? v.size() - 1 : 1))};
    };
    const std::size_t J = s.truth.targets.size();
    std::vector<double> ca, cd;
    std::vector<std::vector<double>> ta(J), td(J);
    for (std::size_t n = 0; n < s.batch.size(); ++n) {
        const int j = s.truth.target_of[n];
        if (j < 0) {
            ca.push_back(s.batch[n].amplitude);
            cd.push_back(s.batch[n].doppler);
        } else {
            ta[j].push_back(s.batch[n].amplitude);
            td[j].push_back(s.batch[n].doppler);
        }
    }
    ScrReport r;
    if (ca.size() < 2 || J == 0) return r;
    const auto [mca, sca] = stats(ca);
    const auto [mcd, scd] = stats(cd);
    std::size_t used = 0;
    for (std::size_t j = 0; j < J; ++j) {
        if (ta[j].size() < 2) continue;
        const auto [mta, sta] = stats(ta[j]);
        const auto [mtd, std_] = stats(td[j]);
        r.amplitude += std::abs(mta - mca) / (sca + sta);
        r.doppler += std::abs(mtd - mcd) / (scd + std_);
        ++used;
    }
    if (used == 0) return r;
    r.amplitude /= static_cast<double>(used);
    r.doppler /= static_cast<double>(used);
    r.amplitude_db = to_db(r.amplitude);
    r.doppler_db = to_db(r.doppler);
    return r;
}

std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (replica + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace dltrack
