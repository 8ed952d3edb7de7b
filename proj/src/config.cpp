#include "dltrack/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dltrack {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Locates a dotted key path ("dl.sigma_floor.x", "scenario.targets[1].vx") by
// searching for each quoted key after the previous one. Returns 0 if not found.
std::size_t locate_line(const std::string& text, const std::string& path) {
    std::size_t pos = 0;
    std::size_t start = 0;
    bool found = false;
    while (start <= path.size()) {
        std::size_t end = path.find('.', start);
        if (end == std::string::npos) end = path.size();
        std::string key = path.substr(start, end - start);
        const std::size_t br = key.find('[');
        if (br != std::string::npos) key.resize(br);
        if (!key.empty()) {
            const std::size_t at = text.find("\"" + key + "\"", pos);
            if (at == std::string::npos) break;
            pos = at + key.size() + 2;
            found = true;
        }
        start = end + 1;
    }
    return found ? line_of_offset(text, pos) : 0;
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& path, const std::string& why) const {
        const std::size_t line = locate_line(text_, path);
        std::string msg = path + ": " + why;
        if (line > 0) msg = "line " + std::to_string(line) + ": " + msg;
        throw config_error(msg);
    }

    void expect_object(const json& j, const std::string& path) const {
        if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    }

    void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) const {
        const std::set<std::string> k(known.begin(), known.end());
        for (const auto& [key, _] : j.items()) {
            if (!k.count(key)) fail(join(path, key), "unknown key");
        }
    }

    template <class T>
    void get(const json& j, const std::string& path, const char* key, T& out) const {
        auto it = j.find(key);
        if (it == j.end()) return;
        out = convert<T>(*it, join(path, key));
    }

    template <class T>
    T convert(const json& v, const std::string& path) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, "expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(path, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
                if (v.get<long long>() < 0) fail(path, "must be non-negative");
                return static_cast<T>(v.get<long long>());
            } else {
                return static_cast<T>(v.get<long long>());
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(path, "expected a number");
            return v.get<double>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, "expected a string");
            return v.get<std::string>();
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    template <class T>
    void get_list(const json& j, const std::string& path, const char* key, std::vector<T>& out) const {
        auto it = j.find(key);
        if (it == j.end()) return;
        const std::string p = join(path, key);
        if (!it->is_array()) fail(p, "expected an array");
        out.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            out.push_back(convert<T>((*it)[i], p + "[" + std::to_string(i) + "]"));
        }
    }

    void get_interval(const json& j, const std::string& path, const char* key, Interval& out) const {
        auto it = j.find(key);
        if (it == j.end()) return;
        const std::string p = join(path, key);
        if (!it->is_array() || it->size() != 2) fail(p, "expected [min, max]");
        out.min = convert<double>((*it)[0], p);
        out.max = convert<double>((*it)[1], p);
        if (!(out.max > out.min)) fail(p, "max must exceed min");
    }

    // Runs a check function and re-raises its config_error with a line number.
    template <class F>
    void relocate(F&& check) const {
        try {
            check();
        } catch (const config_error& e) {
            const std::string what = e.what();
            const std::size_t colon = what.find(':');
            if (colon == std::string::npos) throw;
            std::size_t rest = colon + 1;
            while (rest < what.size() && what[rest] == ' ') ++rest;
            fail(what.substr(0, colon), what.substr(rest));
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    const std::string& text_;
};

void read_feature(const Reader& r, const json& j, const std::string& path, FeatureModel& fm) {
    r.expect_object(j, path);
    r.reject_unknown(j, path, {"dist", "mean", "sigma"});
    std::string dist(feature_dist_name(fm.dist));
    r.get(j, path, "dist", dist);
    try {
        fm.dist = parse_feature_dist(dist);
    } catch (const config_error& e) {
        r.fail(Reader::join(path, "dist"), e.what());
    }
    r.get(j, path, "mean", fm.mean);
    r.get(j, path, "sigma", fm.sigma);
}

void read_scenario(const Reader& r, const json& j, ScenarioConfig& s) {
    const std::string p = "scenario";
    r.expect_object(j, p);
    r.reject_unknown(j, p,
                     {"area_width", "area_height", "num_scans", "revisit", "clutter_per_scan", "targets",
                      "measurement_bounds", "clutter_amplitude", "clutter_doppler", "target_amplitude_sigma",
                      "sensor_sigma_x", "sensor_sigma_y", "sensor_sigma_doppler", "miss_probability"});
    r.get(j, p, "area_width", s.area_width);
    r.get(j, p, "area_height", s.area_height);
    r.get(j, p, "num_scans", s.num_scans);
    r.get(j, p, "revisit", s.revisit);
    r.get(j, p, "clutter_per_scan", s.clutter_per_scan);
    r.get(j, p, "target_amplitude_sigma", s.target_amplitude_sigma);
    r.get(j, p, "sensor_sigma_x", s.sensor_sigma_x);
    r.get(j, p, "sensor_sigma_y", s.sensor_sigma_y);
    r.get(j, p, "sensor_sigma_doppler", s.sensor_sigma_doppler);
    r.get(j, p, "miss_probability", s.miss_probability);
    if (auto it = j.find("measurement_bounds"); it != j.end()) {
        const std::string q = p + ".measurement_bounds";
        r.expect_object(*it, q);
        r.reject_unknown(*it, q, {"amplitude", "doppler"});
        r.get_interval(*it, q, "amplitude", s.amplitude_bounds);
        r.get_interval(*it, q, "doppler", s.doppler_bounds);
    }
    if (auto it = j.find("clutter_amplitude"); it != j.end()) {
        read_feature(r, *it, p + ".clutter_amplitude", s.clutter_amplitude);
    }
    if (auto it = j.find("clutter_doppler"); it != j.end()) {
        read_feature(r, *it, p + ".clutter_doppler", s.clutter_doppler);
    }
    if (auto it = j.find("targets"); it != j.end()) {
        const std::string q = p + ".targets";
        if (!it->is_array()) r.fail(q, "expected an array");
        s.targets.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string e = q + "[" + std::to_string(i) + "]";
            const json& t = (*it)[i];
            r.expect_object(t, e);
            r.reject_unknown(t, e, {"x0", "y0", "vx", "vy", "amplitude"});
            TargetSpec ts;
            r.get(t, e, "x0", ts.x0);
            r.get(t, e, "y0", ts.y0);
            r.get(t, e, "vx", ts.vx);
            r.get(t, e, "vy", ts.vy);
            r.get(t, e, "amplitude", ts.amplitude);
            s.targets.push_back(ts);
        }
    }
}

void read_dl(const Reader& r, const json& j, DLConfig& d, bool& floor_given) {
    const std::string p = "dl";
    r.expect_object(j, p);
    r.reject_unknown(j, p,
                     {"max_iterations", "loglik_rel_tolerance", "sigma_floor", "c_mode", "tie_sigma_x_d",
                      "dormant_count", "activation_threshold", "elimination_threshold", "activation_support",
                      "elimination_support", "collapse_support", "crisp_factor", "detect_crisp_only", "min_track_gain", "spawn_seeds", "spawn_pool",
                      "dormant_patience", "seed_sigma_scale", "seed_prior_support", "seed_min_score"});
    r.get(j, p, "max_iterations", d.max_iterations);
    r.get(j, p, "loglik_rel_tolerance", d.loglik_rel_tolerance);
    r.get(j, p, "tie_sigma_x_d", d.tie_sigma_x_d);
    r.get(j, p, "dormant_count", d.dormant_count);
    r.get(j, p, "activation_support", d.activation_support);
    r.get(j, p, "elimination_support", d.elimination_support);
    r.get(j, p, "collapse_support", d.collapse_support);
    r.get(j, p, "crisp_factor", d.crisp_factor);
    r.get(j, p, "detect_crisp_only", d.detect_crisp_only);
    r.get(j, p, "min_track_gain", d.min_track_gain);
    r.get(j, p, "spawn_seeds", d.spawn_seeds);
    r.get(j, p, "spawn_pool", d.spawn_pool);
    r.get(j, p, "dormant_patience", d.dormant_patience);
    r.get(j, p, "seed_sigma_scale", d.seed_sigma_scale);
    r.get(j, p, "seed_prior_support", d.seed_prior_support);
    r.get(j, p, "seed_min_score", d.seed_min_score);
    for (const char* key : {"activation_threshold", "elimination_threshold"}) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) continue;
        const double v = r.convert<double>(*it, Reader::join(p, key));
        (std::string(key) == "activation_threshold" ? d.activation_threshold : d.elimination_threshold) = v;
    }
    if (auto it = j.find("c_mode"); it != j.end()) {
        const std::string s = r.convert<std::string>(*it, p + ".c_mode");
        try {
            d.c_mode = parse_c_mode(s);
        } catch (const config_error& e) {
            r.fail(p + ".c_mode", e.what());
        }
    }
    if (auto it = j.find("sigma_floor"); it != j.end()) {
        const std::string q = p + ".sigma_floor";
        r.expect_object(*it, q);
        r.reject_unknown(*it, q, {"x", "y", "amplitude", "doppler"});
        r.get(*it, q, "x", d.sigma_floor[0]);
        r.get(*it, q, "y", d.sigma_floor[1]);
        r.get(*it, q, "amplitude", d.sigma_floor[2]);
        r.get(*it, q, "doppler", d.sigma_floor[3]);
        floor_given = true;
    }
}

ordered_json feature_json(const FeatureModel& fm) {
    return ordered_json{{"dist", std::string(feature_dist_name(fm.dist))}, {"mean", fm.mean}, {"sigma", fm.sigma}};
}

}  // namespace

void check_run_config(const RunConfig& cfg) {
    check_scenario_config(cfg.scenario);
    check_dl_config(cfg.dl);
    check_match_criteria(cfg.match);
    if (!std::isfinite(cfg.llr_threshold)) throw config_error("detection.llr_threshold: must be finite");
    if (cfg.roc.clutter_levels.empty()) throw config_error("roc.clutter_levels: must not be empty");
    for (int c : cfg.roc.clutter_levels) {
        if (c < 0) throw config_error("roc.clutter_levels: entries must be >= 0");
    }
    if (cfg.roc.trials < 1) throw config_error("roc.trials: must be >= 1");
    for (double t : cfg.roc.thresholds) {
        if (!std::isfinite(t)) throw config_error("roc.thresholds: entries must be finite");
    }
    if (cfg.bench.n_values.size() < 3) throw config_error("bench.n_values: need at least three values");
    if (cfg.bench.h_values.size() < 3) throw config_error("bench.h_values: need at least three values");
    for (std::size_t h : cfg.bench.h_values) {
        if (h < 2) throw config_error("bench.h_values: entries must be >= 2");
    }
    if (cfg.bench.h_fixed < 2) throw config_error("bench.h_fixed: must be >= 2");
    if (cfg.bench.n_fixed < static_cast<std::size_t>(cfg.scenario.num_scans)) {
        throw config_error("bench.n_fixed: must be at least num_scans");
    }
    if (cfg.bench.iterations < 1) throw config_error("bench.iterations: must be >= 1");
    if (cfg.verify.instances < 1) throw config_error("verify.instances: must be >= 1");
    if (cfg.verify.n < 1) throw config_error("verify.n: must be >= 1");
    if (cfg.verify.h < 1) throw config_error("verify.h: must be >= 1");
    if (cfg.out_dir.empty()) throw config_error("output.dir: must not be empty");
}

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error("line " + std::to_string(line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)) +
                           ": malformed JSON: " + e.what());
    }
    const Reader r(text);
    r.expect_object(root, "");
    r.reject_unknown(root, "", {"seed", "scenario", "dl", "detection", "match", "roc", "bench", "verify", "output"});

    RunConfig cfg;
    r.get(root, "", "seed", cfg.seed);
    if (auto it = root.find("scenario"); it != root.end()) read_scenario(r, *it, cfg.scenario);

    bool floor_given = false;
    if (auto it = root.find("dl"); it != root.end()) read_dl(r, *it, cfg.dl, floor_given);
    if (!floor_given) cfg.dl.sigma_floor = sensor_sigmas(cfg.scenario);

    if (auto it = root.find("detection"); it != root.end()) {
        r.expect_object(*it, "detection");
        r.reject_unknown(*it, "detection", {"llr_threshold"});
        r.get(*it, "detection", "llr_threshold", cfg.llr_threshold);
    }

    cfg.match = default_criteria(cfg.scenario);
    if (auto it = root.find("match"); it != root.end()) {
        r.expect_object(*it, "match");
        r.reject_unknown(*it, "match", {"position_gate", "velocity_gate", "amplitude_gate"});
        r.get(*it, "match", "position_gate", cfg.match.position_gate);
        r.get(*it, "match", "velocity_gate", cfg.match.velocity_gate);
        if (auto a = it->find("amplitude_gate"); a != it->end() && !a->is_null()) {
            cfg.match.amplitude_gate = r.convert<double>(*a, "match.amplitude_gate");
        }
    }

    if (auto it = root.find("roc"); it != root.end()) {
        r.expect_object(*it, "roc");
        r.reject_unknown(*it, "roc", {"clutter_levels", "thresholds", "trials"});
        r.get_list(*it, "roc", "clutter_levels", cfg.roc.clutter_levels);
        r.get_list(*it, "roc", "thresholds", cfg.roc.thresholds);
        if (it->contains("thresholds") && cfg.roc.thresholds.empty()) r.fail("roc.thresholds", "list is empty");
        r.get(*it, "roc", "trials", cfg.roc.trials);
    }
    if (auto it = root.find("bench"); it != root.end()) {
        r.expect_object(*it, "bench");
        r.reject_unknown(*it, "bench", {"n_values", "h_values", "h_fixed", "n_fixed", "iterations"});
        r.get_list(*it, "bench", "n_values", cfg.bench.n_values);
        r.get_list(*it, "bench", "h_values", cfg.bench.h_values);
        r.get(*it, "bench", "h_fixed", cfg.bench.h_fixed);
        r.get(*it, "bench", "n_fixed", cfg.bench.n_fixed);
        r.get(*it, "bench", "iterations", cfg.bench.iterations);
    }
    if (auto it = root.find("verify"); it != root.end()) {
        r.expect_object(*it, "verify");
        r.reject_unknown(*it, "verify", {"instances", "n", "h"});
        r.get(*it, "verify", "instances", cfg.verify.instances);
        r.get(*it, "verify", "n", cfg.verify.n);
        r.get(*it, "verify", "h", cfg.verify.h);
    }
    if (auto it = root.find("output"); it != root.end()) {
        r.expect_object(*it, "output");
        r.reject_unknown(*it, "output", {"dir", "format"});
        r.get(*it, "output", "dir", cfg.out_dir);
        if (auto f = it->find("format"); f != it->end()) {
            const std::string s = r.convert<std::string>(*f, "output.format");
            try {
                cfg.format = io::parse_format(s);
            } catch (const config_error& e) {
                r.fail("output.format", e.what());
            }
        }
    }

    cfg.scenario.rng_seed = cfg.seed;
    cfg.dl.rng_seed = cfg.seed;
    r.relocate([&] { check_run_config(cfg); });
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

std::string resolved_config_json(const RunConfig& cfg) {
    const auto& s = cfg.scenario;
    const auto& d = cfg.dl;
    ordered_json targets = ordered_json::array();
    for (const auto& t : s.targets) {
        targets.push_back({{"x0", t.x0}, {"y0", t.y0}, {"vx", t.vx}, {"vy", t.vy}, {"amplitude", t.amplitude}});
    }
    ordered_json j;
    j["seed"] = cfg.seed;
    j["scenario"] = {
        {"area_width", s.area_width},
        {"area_height", s.area_height},
        {"num_scans", s.num_scans},
        {"revisit", s.revisit},
        {"clutter_per_scan", s.clutter_per_scan},
        {"targets", targets},
        {"measurement_bounds",
         {{"amplitude", {s.amplitude_bounds.min, s.amplitude_bounds.max}},
          {"doppler", {s.doppler_bounds.min, s.doppler_bounds.max}}}},
        {"clutter_amplitude", feature_json(s.clutter_amplitude)},
        {"clutter_doppler", feature_json(s.clutter_doppler)},
        {"target_amplitude_sigma", s.target_amplitude_sigma},
        {"sensor_sigma_x", s.sensor_sigma_x},
        {"sensor_sigma_y", s.sensor_sigma_y},
        {"sensor_sigma_doppler", s.sensor_sigma_doppler},
        {"miss_probability", s.miss_probability},
    };
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    j["dl"] = {
        {"max_iterations", d.max_iterations},
        {"loglik_rel_tolerance", d.loglik_rel_tolerance},
        {"sigma_floor",
         {{"x", d.sigma_floor[0]}, {"y", d.sigma_floor[1]}, {"amplitude", d.sigma_floor[2]}, {"doppler", d.sigma_floor[3]}}},
        {"c_mode", std::string(c_mode_name(d.c_mode))},
        {"tie_sigma_x_d", d.tie_sigma_x_d},
        {"dormant_count", d.dormant_count},
        {"activation_threshold", opt(d.activation_threshold)},
        {"elimination_threshold", opt(d.elimination_threshold)},
        {"activation_support", d.activation_support},
        {"elimination_support", d.elimination_support},
        {"collapse_support", d.collapse_support},
        {"crisp_factor", d.crisp_factor},
        {"detect_crisp_only", d.detect_crisp_only},
        {"min_track_gain", d.min_track_gain},
        {"spawn_seeds", d.spawn_seeds},
        {"spawn_pool", d.spawn_pool},
        {"dormant_patience", d.dormant_patience},
        {"seed_sigma_scale", d.seed_sigma_scale},
        {"seed_prior_support", d.seed_prior_support},
        {"seed_min_score", d.seed_min_score},
    };
    j["detection"] = {{"llr_threshold", cfg.llr_threshold}};
    j["match"] = {{"position_gate", cfg.match.position_gate},
                  {"velocity_gate", cfg.match.velocity_gate},
                  {"amplitude_gate", opt(cfg.match.amplitude_gate)}};
    j["roc"] = {{"clutter_levels", cfg.roc.clutter_levels}};
    if (!cfg.roc.thresholds.empty()) j["roc"]["thresholds"] = cfg.roc.thresholds;  // absent: observed LLRs
    j["roc"]["trials"] = cfg.roc.trials;
    j["bench"] = {{"n_values", cfg.bench.n_values},
                  {"h_values", cfg.bench.h_values},
                  {"h_fixed", cfg.bench.h_fixed},
                  {"n_fixed", cfg.bench.n_fixed},
                  {"iterations", cfg.bench.iterations}};
    j["verify"] = {{"instances", cfg.verify.instances}, {"n", cfg.verify.n}, {"h", cfg.verify.h}};
    j["output"] = {{"dir", cfg.out_dir}, {"format", std::string(io::format_extension(cfg.format).substr(1))}};
    return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // Output location does not change results, so it stays out of the hash.
    RunConfig c = cfg;
    c.out_dir = "out";
    c.format = io::Format::csv;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : resolved_config_json(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dltrack
