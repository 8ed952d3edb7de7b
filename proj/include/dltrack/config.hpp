#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dltrack/dl_config.hpp"
#include "dltrack/evaluation.hpp"
#include "dltrack/io.hpp"
#include "dltrack/scenario.hpp"

namespace dltrack {

struct RocSettings {
    std::vector<int> clutter_levels{50, 100, 200};
    std::vector<double> thresholds;  // empty: every observed LLR
    int trials = 100;
};

struct BenchSettings {
    std::vector<std::size_t> n_values{500, 1000, 2000, 4000, 8000};
    std::vector<std::size_t> h_values{2, 4, 8};
    std::size_t h_fixed = 4;
    std::size_t n_fixed = 2000;
    int iterations = 10;
};

struct VerifySettings {
    int instances = 50;
    std::size_t n = 6;  // measurements per exhaustive instance
    std::size_t h = 3;  // hypotheses per exhaustive instance
};

// Everything one CLI run needs. Every field has a default, so `{}` is valid.
struct RunConfig {
    std::uint64_t seed = 1;
    ScenarioConfig scenario;
    DLConfig dl;
    MatchCriteria match;
    double llr_threshold = 0.0;
    RocSettings roc;
    BenchSettings bench;
    VerifySettings verify;
    std::string out_dir = "out";
    io::Format format = io::Format::csv;
};

// Parses JSON text. Unknown keys, wrong types and invalid values raise
// config_error with the key path and, when it can be located, the line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Re-validates after command-line overrides.
void check_run_config(const RunConfig& cfg);

// Fully resolved configuration (pretty JSON) and its FNV-1a hash.
std::string resolved_config_json(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace dltrack
