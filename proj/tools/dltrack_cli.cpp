// dltrack command-line driver: simulate, track, roc, bench, verify.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dltrack/config.hpp"
#include "dltrack/dl_engine.hpp"
#include "dltrack/errors.hpp"
#include "dltrack/evaluation.hpp"
#include "dltrack/io.hpp"
#include "dltrack/scenario.hpp"
#include "dltrack/track_manager.hpp"
#include "dltrack/verify.hpp"

namespace {

using namespace dltrack;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    int threads = 0;
    bool print_config = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "JSON run configuration (defaults apply when omitted)");
    sub->add_option("--seed", c.seed, "Override the configuration seed");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--threads", c.threads, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--print-config", c.print_config, "Print the resolved configuration and exit");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? parse_run_config("{}") : load_run_config(c.config_path);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.scenario.rng_seed = cfg.seed;
        cfg.dl.rng_seed = cfg.seed;
    }
    if (c.out) cfg.out_dir = *c.out;
    if (c.format) cfg.format = io::parse_format(*c.format);
    check_run_config(cfg);
    return cfg;
}

int thread_budget(const Common& c) {
    if (c.threads > 0) return c.threads;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct Output {
    std::filesystem::path dir;
    io::Format format;
    io::Provenance prov;

    std::string write(const std::string& stem, const io::Table& t) const {
        const auto path = dir / (stem + std::string(io::format_extension(format)));
        io::write_table_file(path.string(), t, format, prov);
        return path.string();
    }
};

Output make_output(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    return {cfg.out_dir, cfg.format, {config_hash(cfg), cfg.seed}};
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

int cmd_simulate(const RunConfig& cfg) {
    const Output out = make_output(cfg);
    const Scenario sc = generate(cfg.scenario);
    const std::string batch = out.write("batch", io::batch_table(sc.batch));
    out.write("truth", io::truth_table(sc.truth));
    out.write("truth_mapping", io::truth_mapping_table(sc.truth));
    const ScrReport scr = scr_report(cfg.scenario);
    std::printf("N=%zu scans=%d targets=%zu seed=%" PRIu64 " config_hash=%s\n", sc.batch.size(),
                cfg.scenario.num_scans, sc.truth.targets.size(), cfg.seed, hash_hex(out.prov.config_hash).c_str());
    if (!sc.truth.targets.empty()) {
        std::printf("S/C amplitude=%.3f (%.2f dB) doppler=%.3f (%.2f dB)\n", scr.amplitude, scr.amplitude_db,
                    scr.doppler, scr.doppler_db);
    }
    std::printf("wrote %s\n", batch.c_str());
    return kExitOk;
}

int cmd_track(const RunConfig& cfg, const std::string& batch_path, bool dump_association) {
    const MeasurementBounds bounds = scenario_bounds(cfg.scenario);
    std::optional<Scenario> sim;
    std::optional<Batch> loaded;
    if (batch_path.empty()) {
        sim = generate(cfg.scenario);
    } else {
        const auto ms = io::read_batch_csv_file(batch_path);
        loaded = validate_batch(ms, bounds);
    }
    const Batch& batch = sim ? sim->batch : *loaded;

    const DLResult res = run_dl(batch, bounds, cfg.dl);
    const DetectionReport rep = declare_detections(res.hypotheses, batch, bounds, cfg.llr_threshold, &cfg.dl);

    const Output out = make_output(cfg);
    out.write("detections", io::detection_table(rep, res.hypotheses));
    out.write("trace", io::trace_table(res.trace));
    out.write("trace_hypotheses", io::trace_hypotheses_table(res.trace));
    out.write("hypotheses", io::hypotheses_table(res.hypotheses));
    if (dump_association) out.write("association", io::association_table(res.association, res.hypotheses));

    const auto dets = rep.detections();
    std::printf("N=%zu iterations=%zu converged=%s loglik=%.6f detections=%zu (threshold %g)\n", batch.size(),
                res.trace.iterations(), res.trace.converged ? "yes" : "no", res.loglik, dets.size(),
                cfg.llr_threshold);
    for (const auto& d : dets) {
        const auto& h = res.hypotheses[d.column];
        std::printf("  track %" PRIu64 " llr=%.2f gate=%zu x0=%.2f y0=%.2f vx=%.3f vy=%.3f a=%.3f\n", d.track_id,
                    d.llr, d.gate.size(), h.x0, h.y0, h.vx, h.vy, h.amplitude);
    }
    for (const auto& msg : res.trace.diagnostics) std::fprintf(stderr, "diagnostic: %s\n", msg.c_str());
    return kExitOk;
}

int cmd_roc(const RunConfig& cfg, int threads) {
    const Output out = make_output(cfg);
    std::printf("%-8s %-7s %-10s %-10s\n", "clutter", "trials", "pd@pfa<=1", "threshold");
    for (int level : cfg.roc.clutter_levels) {
        ScenarioConfig s = cfg.scenario;
        s.clutter_per_scan = level;
        const auto outcomes = run_trials(s, cfg.dl, cfg.match, cfg.roc.trials, threads);
        std::vector<double> thresholds = cfg.roc.thresholds;
        if (thresholds.empty()) {
            // Every observed LLR is a breakpoint of the empirical curve.
            std::set<double> seen;
            for (const auto& o : outcomes) seen.insert(o.llr.begin(), o.llr.end());
            thresholds.assign(seen.begin(), seen.end());
            thresholds.insert(thresholds.begin(), seen.empty() ? 0.0 : *seen.begin() - 1.0);
        }
        const auto pts = roc_from_outcomes(outcomes, thresholds, s.area_width * s.area_height);
        out.write("roc_c" + std::to_string(level), io::roc_table(level, pts));
        double best_pd = 0.0, at = std::numeric_limits<double>::quiet_NaN();
        for (const auto& p : pts) {
            if (p.pfa_per_batch <= 1.0 && p.pd > best_pd) {
                best_pd = p.pd;
                at = p.llr_threshold;
            }
        }
        std::printf("%-8d %-7d %-10.3f %-10.2f\n", level, cfg.roc.trials, best_pd, at);
    }
    return kExitOk;
}

int cmd_bench(const RunConfig& cfg) {
    const Output out = make_output(cfg);
    const auto& b = cfg.bench;
    const ComplexityReport rep =
        complexity_probe(cfg.scenario, cfg.dl, b.n_values, b.h_values, b.h_fixed, b.n_fixed, b.iterations);
    out.write("complexity", io::complexity_table(rep));
    std::printf("%-7s %-3s %-6s %-14s %-10s\n", "N", "H", "iters", "ops_per_iter", "wall_ms");
    for (const auto* sweep : {&rep.n_sweep, &rep.h_sweep}) {
        for (const auto& r : *sweep) {
            std::printf("%-7zu %-3zu %-6d %-14.0f %-10.2f\n", r.n, r.h, r.iterations, r.ops_per_iter, r.wall_ms);
        }
    }
    std::printf("N sweep: slope=%.3f intercept=%.1f R2=%.5f\n", rep.n_fit.slope, rep.n_fit.intercept, rep.n_fit.r2);
    std::printf("H sweep: slope=%.1f intercept=%.1f R2=%.5f\n", rep.h_fit.slope, rep.h_fit.intercept, rep.h_fit.r2);
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& fault) {
    const VerifyReport rep =
        run_verification(cfg.verify.instances, cfg.verify.n, cfg.verify.h, cfg.seed, parse_fault(fault));
    for (const auto& c : rep.checks) {
        std::printf("%s: %s (%d instances, worst %.3g, tolerance %.0e)\n", c.passed() ? "PASS" : "FAIL",
                    c.name.c_str(), c.instances, c.worst, c.tolerance);
        if (!c.passed()) std::printf("  violated: %s; %s\n", c.name.c_str(), c.first_failure.c_str());
    }
    return rep.passed() ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic-logic joint detection and tracking in clutter"};
    app.require_subcommand(1);
    Common common;

    auto* simulate = app.add_subcommand("simulate", "Generate a scenario batch and ground truth");
    auto* track = app.add_subcommand("track", "Run the tracker on a batch file or a simulated batch");
    auto* roc = app.add_subcommand("roc", "Monte-Carlo ROC curves per clutter level");
    auto* bench = app.add_subcommand("bench", "Per-iteration cost over N and H");
    auto* verify = app.add_subcommand("verify", "Cross-check the engine against brute-force oracles");
    for (auto* sub : {simulate, track, roc, bench, verify}) add_common(sub, common);

    std::string batch_path;
    bool dump_association = false;
    track->add_option("--batch", batch_path, "Batch CSV (scan,t,x,y,amplitude,doppler); simulated when omitted");
    track->add_flag("--dump-association", dump_association, "Also write the N x H association matrix");
    std::string fault = "none";
    verify->add_option("--inject-fault", fault, "Corrupt one engine result (test hook)")
        ->check(CLI::IsMember({"none", "likelihood", "mstep", "gradient"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        const RunConfig cfg = resolve(common);
        if (common.print_config) {
            std::cout << resolved_config_json(cfg) << '\n';
            return kExitOk;
        }
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (track->parsed()) return cmd_track(cfg, batch_path, dump_association);
        if (roc->parsed()) return cmd_roc(cfg, thread_budget(common));
        if (bench->parsed()) return cmd_bench(cfg);
        if (verify->parsed()) return cmd_verify(cfg, fault);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const size_limit& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const degenerate_likelihood& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const invalid_bounds& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitOther;
    }
    return kExitOther;
}
