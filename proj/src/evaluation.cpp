#include "dltrack/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "dltrack/track_manager.hpp"

namespace dltrack {

void check_match_criteria(const MatchCriteria& c) {
    if (!(c.position_gate > 0.0)) throw config_error("match.position_gate: must be positive");
    if (!(c.velocity_gate > 0.0)) throw config_error("match.velocity_gate: must be positive");
    if (c.amplitude_gate && !(*c.amplitude_gate > 0.0)) throw config_error("match.amplitude_gate: must be positive");
}

MatchCriteria default_criteria(const ScenarioConfig& cfg) {
    MatchCriteria c;
    const double sp = cfg.sensor_sigma_x;
    const double duration = (cfg.num_scans - 1) * cfg.revisit;
    c.position_gate = 4.0 * sp;
    c.velocity_gate = duration > 0.0 ? 4.0 * sp / duration : 4.0 * sp;
    return c;
}

MatchResult match_tracks(std::span<const ScoredTrack> detections, std::span<const TargetSpec> truth,
                         const MatchCriteria& criteria, double t_mid) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (detections[a].llr != detections[b].llr) return detections[a].llr > detections[b].llr;
        return detections[a].track.id < detections[b].track.id;
    });

    MatchResult r;
    r.target_of_detection.assign(detections.size(), -1);
    std::vector<char> taken(truth.size(), 0);
    for (std::size_t i : order) {
        const TrackHypothesis& h = detections[i].track;
        const double hx = h.x0 + h.vx * t_mid;
        const double hy = h.y0 + h.vy * t_mid;
        double best = std::numeric_limits<double>::infinity();
        int pick = -1;
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (taken[j]) continue;
            const TargetSpec& g = truth[j];
            const double pos = std::hypot(hx - (g.x0 + g.vx * t_mid), hy - (g.y0 + g.vy * t_mid));
            const double vel = std::hypot(h.vx - g.vx, h.vy - g.vy);
            if (!(pos < criteria.position_gate) || !(vel < criteria.velocity_gate)) continue;
            if (criteria.amplitude_gate && !(std::abs(h.amplitude - g.amplitude) < *criteria.amplitude_gate)) continue;
            if (pos < best) {
                best = pos;
                pick = static_cast<int>(j);
            }
        }
        if (pick >= 0) {
            taken[pick] = 1;
            r.pairs.emplace_back(i, static_cast<std::size_t>(pick));
            r.target_of_detection[i] = pick;
        } else {
            r.unmatched_detections.push_back(i);
        }
    }
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!taken[j]) r.unmatched_targets.push_back(j);
    }
    return r;
}

TrialOutcome run_trial(const ScenarioConfig& scenario, const DLConfig& dl, const MatchCriteria& criteria) {
    const Scenario sc = generate(scenario);
    DLConfig cfg = dl;
    cfg.rng_seed = scenario.rng_seed;
    const DLResult res = run_dl(sc.batch, sc.bounds, cfg);
    const DetectionReport rep =
        declare_detections(res.hypotheses, sc.batch, sc.bounds, -std::numeric_limits<double>::infinity(), &cfg);

    std::vector<ScoredTrack> scored;
    for (const auto& d : rep.tracks) {
        if (d.candidate) scored.push_back({res.hypotheses[d.column], d.llr});
    }
    const double t_mid = 0.5 * (sc.batch.scan_times().front() + sc.batch.scan_times().back());
    const MatchResult m = match_tracks(scored, sc.truth.targets, criteria, t_mid);

    TrialOutcome out;
    out.seed = scenario.rng_seed;
    out.num_targets = sc.truth.targets.size();
    out.iterations = static_cast<int>(res.trace.iterations());
    out.converged = res.trace.converged;
    // rep.tracks is already in descending LLR order, which is the greedy order.
    for (std::size_t i = 0; i < scored.size(); ++i) {
        out.llr.push_back(scored[i].llr);
        out.matched.push_back(m.target_of_detection[i]);
    }
    return out;
}

std::vector<RocPoint> roc_from_outcomes(std::span<const TrialOutcome> outcomes, std::vector<double> thresholds,
                                        double area) {
    if (thresholds.empty()) throw config_error("roc: threshold list is empty");
    std::sort(thresholds.begin(), thresholds.end());
    std::vector<RocPoint> pts;
    const int trials = static_cast<int>(outcomes.size());
    for (double th : thresholds) {
        RocPoint p;
        p.llr_threshold = th;
        p.trials = trials;
        double pd_sum = 0.0, fa_sum = 0.0;
        for (const auto& o : outcomes) {
            std::size_t hits = 0, false_alarms = 0;
            for (std::size_t i = 0; i < o.llr.size(); ++i) {
                if (!(o.llr[i] > th)) continue;
                if (o.matched[i] >= 0) ++hits;
                else ++false_alarms;
            }
            if (o.num_targets > 0) pd_sum += static_cast<double>(hits) / static_cast<double>(o.num_targets);
            fa_sum += static_cast<double>(false_alarms);
        }
        if (trials > 0) {
            p.pd = pd_sum / trials;
            p.pfa_per_batch = fa_sum / trials;
            p.pfa_per_area = p.pfa_per_batch / area * 1e6;
        }
        pts.push_back(p);
    }
    return pts;
}

std::vector<TrialOutcome> run_trials(const ScenarioConfig& scenario, const DLConfig& dl,
                                     const MatchCriteria& criteria, int trials, int threads) {
    if (trials < 1) throw config_error("roc.trials: must be >= 1");
    std::vector<TrialOutcome> out(trials);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < trials; i = next++) {
            ScenarioConfig s = scenario;
            s.rng_seed = replica_seed(scenario.rng_seed, static_cast<std::uint64_t>(i));
            out[i] = run_trial(s, dl, criteria);
        }
    };
    const int nw = std::max(1, std::min(threads, trials));
    if (nw == 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

std::vector<RocPoint> roc_curve(const ScenarioConfig& scenario, const DLConfig& dl,
                                std::vector<double> thresholds, int trials, const MatchCriteria& criteria,
                                int threads) {
    if (thresholds.empty()) throw config_error("roc: threshold list is empty");
    const auto outcomes = run_trials(scenario, dl, criteria, trials, threads);
    return roc_from_outcomes(outcomes, std::move(thresholds), scenario.area_width * scenario.area_height);
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    const double n = static_cast<double>(x.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= n;
    ybar /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - xbar) * (y[i] - ybar);
        sxx += (x[i] - xbar) * (x[i] - xbar);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = ybar - fit.slope * xbar;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    for (std::size_t i = 1; i < y.size(); ++i) fit.doubling_ratios.push_back(y[i] / y[i - 1]);
    return fit;
}

namespace {

// Fixed roster: clutter plus h-1 active tracks spread over the area.
HypothesisSet probe_set(const MeasurementBounds& b, std::size_t h, const DLConfig& cfg) {
    HypothesisSet hs;
    hs.hypotheses.push_back(make_clutter_hypothesis(0.0));
    for (std::size_t k = 1; k < h; ++k) {
        TrackHypothesis t = make_vague_track(b, k);
        t.status = HypothesisStatus::active;
        const double frac = static_cast<double>(k) / static_cast<double>(h);
        t.x0 = b[Dim::x].min + frac * b[Dim::x].width();
        t.y0 = b[Dim::y].max - frac * b[Dim::y].width();
        for (std::size_t d = 0; d < kDims; ++d) t.sigma[d] = std::max(0.1 * b.dims[d].width(), cfg.sigma_floor[d]);
        hs.hypotheses.push_back(t);
    }
    for (auto& t : hs.hypotheses) t.prior = 1.0 / static_cast<double>(h);
    return hs;
}

ComplexityRow probe_one(const ScenarioConfig& base, const DLConfig& dl, std::size_t n, std::size_t h,
                        int iterations) {
    ScenarioConfig s = base;
    s.targets.clear();
    s.clutter_per_scan = static_cast<int>(n / static_cast<std::size_t>(s.num_scans));
    const Scenario sc = generate(s);
    DLConfig cfg = dl;
    cfg.lifecycle = false;
    cfg.max_iterations = iterations;
    cfg.loglik_rel_tolerance = std::numeric_limits<double>::min();
    const auto t0 = std::chrono::steady_clock::now();
    const DLResult res = run_dl_from(sc.batch, sc.bounds, cfg, probe_set(sc.bounds, h, cfg));
    const auto t1 = std::chrono::steady_clock::now();
    ComplexityRow row;
    row.n = sc.batch.size();
    row.h = h;
    row.iterations = static_cast<int>(res.trace.iterations());
    // Only iterations that ran both steps; a converged run ends on a bare E-step.
    double ops = 0.0;
    int full = 0;
    for (const auto& r : res.trace.records) {
        if (r.ops.update_ops == 0) continue;
        ops += static_cast<double>(r.ops.total());
        ++full;
    }
    row.ops_per_iter = ops / std::max(1, full);
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

}  // namespace

ComplexityReport complexity_probe(const ScenarioConfig& base, const DLConfig& dl,
                                  std::span<const std::size_t> n_values, std::span<const std::size_t> h_values,
                                  std::size_t h_fixed, std::size_t n_fixed, int iterations) {
    if (n_values.size() < 3 || h_values.size() < 3) {
        throw config_error("bench: need at least three N values and three H values");
    }
    ComplexityReport rep;
    std::vector<double> xs, ys, ws;
    for (std::size_t n : n_values) {
        rep.n_sweep.push_back(probe_one(base, dl, n, h_fixed, iterations));
        xs.push_back(static_cast<double>(rep.n_sweep.back().n));
        ys.push_back(rep.n_sweep.back().ops_per_iter);
        ws.push_back(rep.n_sweep.back().wall_ms / std::max(1, rep.n_sweep.back().iterations));
    }
    rep.n_fit = fit_linear(xs, ys);
    rep.n_fit_wall = fit_linear(xs, ws);
    xs.clear();
    ys.clear();
    for (std::size_t h : h_values) {
        rep.h_sweep.push_back(probe_one(base, dl, n_fixed, h, iterations));
        xs.push_back(static_cast<double>(h));
        ys.push_back(rep.h_sweep.back().ops_per_iter);
    }
    rep.h_fit = fit_linear(xs, ys);
    return rep;
}

}  // namespace dltrack
