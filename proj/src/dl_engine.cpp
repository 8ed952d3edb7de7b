#include "dltrack/dl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dltrack/likelihood.hpp"

namespace dltrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_size(std::span<const double> f, const Batch& batch) {
    if (f.size() != batch.size()) throw std::invalid_argument("association column length differs from batch size");
}

double support_mass(std::span<const double> f) {
    double s = 0.0;
    for (double w : f) s += w;
    return s;
}

HypothesisSnapshot snapshot(const TrackHypothesis& h) { return {h.id, h.status, h.prior, h.sigma}; }

std::uint64_t next_free_id(const HypothesisSet& hs) {
    std::uint64_t id = 0;
    for (const auto& h : hs.hypotheses) id = std::max(id, h.id);
    return id + 1;
}

}  // namespace

OpCounts IterationTrace::total_ops() const noexcept {
    OpCounts t;
    for (const auto& r : records) {
        t.pdf_evaluations += r.ops.pdf_evaluations;
        t.update_ops += r.ops.update_ops;
    }
    return t;
}

HypothesisSet init_hypotheses(const MeasurementBounds& bounds, const DLConfig& cfg) {
    check_bounds(bounds);
    HypothesisSet hs;
    hs.hypotheses.push_back(make_clutter_hypothesis(0.0));
    std::uint64_t id = 1;
    TrackHypothesis active = make_vague_track(bounds, id++);
    active.status = HypothesisStatus::active;
    hs.hypotheses.push_back(active);
    for (int k = 0; k < cfg.dormant_count; ++k) hs.hypotheses.push_back(make_vague_track(bounds, id++));
    const double r = 1.0 / static_cast<double>(hs.size());
    for (auto& h : hs.hypotheses) h.prior = r;
    return hs;
}

EStepResult e_step_full(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds) {
    const std::size_t N = batch.size();
    const std::size_t H = hs.size();
    const double log_c = log_clutter_pdf(bounds);

    std::vector<double> log_r(H);
    std::vector<GaussianKernel> kernels;
    kernels.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
        log_r[h] = hs[h].prior > 0.0 ? std::log(hs[h].prior) : kNegInf;
        if (h > 0) kernels.emplace_back(hs[h]);
    }

    EStepResult out{AssociationMatrix(N, H), 0.0, {}};
    std::vector<double> terms(H);
    for (std::size_t n = 0; n < N; ++n) {
        const Measurement& m = batch[n];
        double mx = kNegInf;
        for (std::size_t h = 0; h < H; ++h) {
            terms[h] = log_r[h] + (h == 0 ? log_c : kernels[h - 1].log_pdf(m));
            mx = std::max(mx, terms[h]);
        }
        if (!std::isfinite(mx)) {
            out.f(n, 0) = 1.0;
            out.underflow_rows.push_back(n);
            continue;
        }
        double s = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            terms[h] = std::exp(terms[h] - mx);
            s += terms[h];
        }
        const double inv = 1.0 / s;
        for (std::size_t h = 0; h < H; ++h) out.f(n, h) = terms[h] * inv;
        out.loglik += mx + std::log(s);
    }
    return out;
}

AssociationMatrix e_step(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds) {
    return e_step_full(batch, hs, bounds).f;
}

double weighted_moment(std::span<const double> f, std::span<const double> q) {
    if (f.size() != q.size()) throw std::invalid_argument("weighted_moment: length mismatch");
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += f[n] * q[n];
    return s;
}

std::vector<double> update_priors(const AssociationMatrix& f) {
    std::vector<double> r(f.cols(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(f.rows());
    for (std::size_t h = 0; h < f.cols(); ++h) r[h] = support_mass(f.column(h)) * inv_n;
    return r;
}

double update_amplitude(std::span<const double> f, const Batch& batch) {
    require_size(f, batch);
    double w = 0.0, wa = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        w += f[n];
        wa += f[n] * batch[n].amplitude;
    }
    if (!(w > 0.0)) throw empty_support("track has no support mass");
    return wa / w;
}

std::pair<double, double> update_y_motion(std::span<const double> f, const Batch& batch) {
    require_size(f, batch);
    double w = 0.0, wt = 0.0, wtt = 0.0, wy = 0.0, wyt = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const double t = batch[n].t;
        w += f[n];
        wt += f[n] * t;
        wtt += f[n] * t * t;
        wy += f[n] * batch[n].y;
        wyt += f[n] * batch[n].y * t;
    }
    if (!(w > 0.0)) throw empty_support("track has no support mass");
    const double det = w * wtt - wt * wt;
    if (!(det > 1e-12 * w * wtt)) throw degenerate_geometry("y-motion system is singular");
    return {(wy * wtt - wt * wyt) / det, (w * wyt - wt * wy) / det};
}

std::pair<double, double> update_x_motion(std::span<const double> f, const Batch& batch, double c) {
    require_size(f, batch);
    if (!(c >= 0.0)) throw std::invalid_argument("update_x_motion: c must be >= 0");
    double w = 0.0, wt = 0.0, wtt = 0.0, wx = 0.0, wxt = 0.0, wd = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const double t = batch[n].t;
        w += f[n];
        wt += f[n] * t;
        wtt += f[n] * t * t;
        wx += f[n] * batch[n].x;
        wxt += f[n] * batch[n].x * t;
        wd += f[n] * batch[n].doppler;
    }
    if (!(w > 0.0)) throw empty_support("track has no support mass");
    const double a22 = wtt + c * w;
    const double b2 = wxt + c * wd;
    const double det = w * a22 - wt * wt;
    if (!(det > 1e-12 * w * a22)) throw degenerate_geometry("x-motion system is singular");
    return {(wx * a22 - wt * b2) / det, (w * b2 - wt * wx) / det};
}

Vec4 update_sigmas(std::span<const double> f, const Batch& batch, const TrackHypothesis& h,
                   const DLConfig& cfg) {
    require_size(f, batch);
    double w = 0.0;
    Vec4 acc{};
    for (std::size_t n = 0; n < f.size(); ++n) {
        const Measurement& m = batch[n];
        const double e[kDims] = {m.x - (h.x0 + h.vx * m.t), m.y - (h.y0 + h.vy * m.t),
                                 m.amplitude - h.amplitude, m.doppler - h.doppler};
        w += f[n];
        for (std::size_t d = 0; d < kDims; ++d) acc[d] += f[n] * e[d] * e[d];
    }
    if (!(w > 0.0)) throw empty_support("track has no support mass");
    Vec4 var{};
    for (std::size_t d = 0; d < kDims; ++d) var[d] = acc[d] / w;
    Vec4 floor = cfg.sigma_floor;
    if (cfg.tie_sigma_x_d) {
        const double v = 0.5 * (var[0] + var[3]);
        var[0] = var[3] = v;
        floor[0] = floor[3] = std::max(floor[0], floor[3]);
    }
    Vec4 s{};
    for (std::size_t d = 0; d < kDims; ++d) s[d] = std::max(std::sqrt(var[d]), floor[d]);
    return s;
}

double compute_c(const TrackHypothesis& h, const DLConfig& cfg) {
    const double sx2 = h.sigma[0] * h.sigma[0];
    switch (cfg.c_mode) {
        case CMode::derived_xd: return sx2 / (h.sigma[3] * h.sigma[3]);
        case CMode::paper_xy: return sx2 / (h.sigma[1] * h.sigma[1]);
        case CMode::unity: return 1.0;
    }
    return 1.0;
}

void m_step(const Batch& batch, const AssociationMatrix& f, HypothesisSet& hs, const DLConfig& cfg,
            OpCounts* ops, std::vector<std::string>* diagnostics) {
    const std::size_t N = batch.size();
    const std::vector<double> r = update_priors(f);
    for (std::size_t h = 0; h < hs.size(); ++h) hs[h].prior = r[h];
    std::uint64_t work = static_cast<std::uint64_t>(N) * hs.size();

    for (std::size_t h = 1; h < hs.size(); ++h) {
        TrackHypothesis& tr = hs[h];
        if (!tr.is_active()) continue;
        const auto col = f.column(h);
        // amplitude, y, x and sigma passes over the column
        work += 4 * static_cast<std::uint64_t>(N);
        try {
            tr.amplitude = update_amplitude(col, batch);
        } catch (const empty_support&) {
            if (diagnostics) diagnostics->push_back("track " + std::to_string(tr.id) + ": empty support");
            continue;
        }
        try {
            std::tie(tr.y0, tr.vy) = update_y_motion(col, batch);
        } catch (const degenerate_geometry&) {
            if (diagnostics) {
                diagnostics->push_back("track " + std::to_string(tr.id) + ": y-motion kept (singular)");
            }
        }
        try {
            std::tie(tr.x0, tr.vx) = update_x_motion(col, batch, compute_c(tr, cfg));
            tr.doppler = tr.vx;
        } catch (const degenerate_geometry&) {
            if (diagnostics) {
                diagnostics->push_back("track " + std::to_string(tr.id) + ": x-motion kept (singular)");
            }
        }
        tr.sigma = update_sigmas(col, batch, tr, cfg);
    }
    if (ops) ops->update_ops += work;
}

DLResult run_dl(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg) {
    return run_dl_from(batch, bounds, cfg, init_hypotheses(bounds, cfg));
}

DLResult run_dl_from(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg,
                     HypothesisSet hs) {
    check_dl_config(cfg);
    check_hypothesis_set(hs, 1e-9);
    const std::size_t N = batch.size();

    DLResult out;
    SeedProposer proposer(batch, bounds, cfg);
    std::uint64_t next_id = next_free_id(hs);
    bool have_prev = false;
    double prev_ll = 0.0;
    bool prev_roster_changed = true;

    auto young_seeds = [&](const HypothesisSet& s) {
        return std::any_of(s.hypotheses.begin(), s.hypotheses.end(),
                           [](const TrackHypothesis& h) { return h.is_dormant() && h.anchored; });
    };
    auto add_seeds = [&](HypothesisSet& s, const AssociationMatrix& f, LifecycleEvents& ev) {
        if (!cfg.lifecycle || !cfg.spawn_seeds || cfg.spawn_pool == 0) return;
        auto seeds = proposer.propose(f, next_id);
        if (seeds.empty()) return;
        const double prior = cfg.seed_prior_support / static_cast<double>(N);
        for (auto& sd : seeds) {
            sd.prior = prior;
            s.hypotheses.push_back(sd);
        }
        s.normalize_priors();
        ev.spawned += static_cast<int>(seeds.size());
    };

    for (int it = 0; it < cfg.max_iterations; ++it) {
        IterationRecord rec;
        rec.iteration = it;
        EStepResult es = e_step_full(batch, hs, bounds);
        rec.ops.pdf_evaluations = static_cast<std::uint64_t>(N) * hs.size();
        rec.loglik = es.loglik;
        rec.num_active = hs.count(HypothesisStatus::active);
        rec.num_dormant = hs.count(HypothesisStatus::dormant);
        for (const auto& h : hs.hypotheses) rec.hypotheses.push_back(snapshot(h));
        if (!es.underflow_rows.empty()) {
            out.trace.diagnostics.push_back("iteration " + std::to_string(it) + ": " +
                                            std::to_string(es.underflow_rows.size()) +
                                            " rows underflowed and were assigned to clutter");
        }

        const bool quiet = have_prev && !prev_roster_changed &&
                           (es.loglik - prev_ll) < cfg.loglik_rel_tolerance * std::abs(prev_ll);
        if (quiet && !young_seeds(hs)) {
            LifecycleEvents ev;
            if (cfg.lifecycle) hs = drop_unjustified(hs, es.f, cfg, &ev);
            if (!ev.roster_changed()) add_seeds(hs, es.f, ev);
            if (!ev.roster_changed()) {
                out.trace.converged = true;
                out.trace.records.push_back(std::move(rec));
                out.association = std::move(es.f);
                out.loglik = es.loglik;
                break;
            }
            // The mixture changed: re-evaluate before any M-step.
            rec.events = ev;
            out.trace.records.push_back(std::move(rec));
            prev_roster_changed = true;
            have_prev = false;
            continue;
        }

        m_step(batch, es.f, hs, cfg, &rec.ops, &out.trace.diagnostics);
        if (cfg.lifecycle) {
            hs = lifecycle_step(hs, batch, bounds, cfg, &rec.events);
            hs = prune_duplicates(hs, batch, cfg, &rec.events);
            if (it == 0) add_seeds(hs, es.f, rec.events);
        }
        prev_roster_changed = rec.events.roster_changed();
        prev_ll = es.loglik;
        have_prev = true;
        out.trace.records.push_back(std::move(rec));

        if (it + 1 == cfg.max_iterations) {
            // Out of budget: leave state and association consistent.
            EStepResult last = e_step_full(batch, hs, bounds);
            out.association = std::move(last.f);
            out.loglik = last.loglik;
            out.trace.diagnostics.push_back("did not converge within max_iterations");
        }
    }
    out.hypotheses = std::move(hs);
    return out;
}

}  // namespace dltrack
