#include "dltrack/track_manager.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dltrack/likelihood.hpp"

namespace dltrack {

namespace {

std::uint64_t max_id(const HypothesisSet& hs) {
    std::uint64_t id = 0;
    for (const auto& h : hs.hypotheses) id = std::max(id, h.id);
    return id;
}

// Seeds use the floors as the measurement noise model.
double floor_log_ratio(const Vec4& e, const Vec4& floor, double log_clutter) {
    TrackHypothesis probe;
    probe.status = HypothesisStatus::active;
    probe.sigma = floor;
    return track_log_pdf({e[0], e[1], e[2], e[3]}, probe) - log_clutter;
}

}  // namespace

bool is_localized(const TrackHypothesis& h, const DLConfig& cfg) {
    // Footprint in the x-y plane against the sensor resolution cell.
    const double c = cfg.crisp_factor;
    return h.sigma[0] * h.sigma[1] < c * c * cfg.sigma_floor[0] * cfg.sigma_floor[1];
}

bool is_crisp(const TrackHypothesis& h, const DLConfig& cfg) {
    for (std::size_t d = 0; d < kDims; ++d) {
        if (!(h.sigma[d] < cfg.crisp_factor * cfg.sigma_floor[d])) return false;
    }
    return true;
}

TrackHypothesis make_vague_track(const MeasurementBounds& bounds, std::uint64_t id) {
    TrackHypothesis t;
    t.id = id;
    t.status = HypothesisStatus::dormant;
    t.x0 = bounds[Dim::x].mid();
    t.y0 = bounds[Dim::y].mid();
    t.amplitude = bounds[Dim::amplitude].mid();
    t.doppler = bounds[Dim::doppler].mid();
    t.vx = t.doppler;  // zero for symmetric Doppler bounds; keeps d_h = vx
    t.vy = 0.0;
    for (std::size_t d = 0; d < kDims; ++d) t.sigma[d] = 0.5 * bounds.dims[d].width();
    return t;
}

HypothesisSet lifecycle_step(const HypothesisSet& hs, const Batch& batch, const MeasurementBounds& bounds,
                             const DLConfig& cfg, LifecycleEvents* events) {
    LifecycleEvents ev;
    const std::size_t N = batch.size();
    const double act = cfg.activation_for(N);
    const double elim = cfg.elimination_for(N);

    HypothesisSet out;
    out.hypotheses.reserve(hs.size() + 1);
    out.hypotheses.push_back(hs[0]);
    for (std::size_t h = 1; h < hs.size(); ++h) {
        TrackHypothesis t = hs[h];
        ++t.age;
        if (t.is_dormant()) {
            if (t.prior > act) {
                t.status = HypothesisStatus::active;
                ++ev.activated;
            } else if (t.anchored && t.age >= cfg.dormant_patience) {
                ++ev.withdrawn;
                continue;
            }
        } else if (t.is_active() && t.prior < elim) {
            ++ev.eliminated;
            continue;
        }
        out.hypotheses.push_back(t);
    }
    if (out.count(HypothesisStatus::dormant) == 0) {
        TrackHypothesis fresh = make_vague_track(bounds, max_id(hs) + 1);
        fresh.prior = cfg.seed_prior_support / static_cast<double>(N);
        out.hypotheses.push_back(fresh);
        ++ev.spawned;
    }
    if (ev.roster_changed()) out.normalize_priors();
    if (events) {
        events->activated += ev.activated;
        events->eliminated += ev.eliminated;
        events->withdrawn += ev.withdrawn;
        events->spawned += ev.spawned;
    }
    return out;
}

HypothesisSet prune_duplicates(const HypothesisSet& hs, const Batch& batch, const DLConfig& cfg,
                               LifecycleEvents* events) {
    const double n = static_cast<double>(batch.size());
    std::vector<char> keep(hs.size(), 1);
    int pruned = 0;

    for (std::size_t h = 1; h < hs.size(); ++h) {
        if (hs[h].is_active() && is_crisp(hs[h], cfg) && hs[h].prior * n < cfg.collapse_support) {
            keep[h] = 0;
            ++pruned;
        }
    }

    // Stronger tracks first so the survivor of a duplicate pair is the one with larger prior.
    std::vector<std::size_t> order;
    for (std::size_t h = 1; h < hs.size(); ++h) {
        if (keep[h] && hs[h].is_active() && is_crisp(hs[h], cfg)) order.push_back(h);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return hs[a].prior > hs[b].prior; });
    const auto times = batch.scan_times();
    auto duplicates = [&](const TrackHypothesis& a, const TrackHypothesis& b) {
        for (double t : times) {
            const Vec4 pa = predict(a, t);
            const Vec4 pb = predict(b, t);
            for (std::size_t d = 0; d < kDims; ++d) {
                const double comb = std::sqrt(a.sigma[d] * a.sigma[d] + b.sigma[d] * b.sigma[d]);
                if (!(std::abs(pa[d] - pb[d]) < comb)) return false;
            }
        }
        return true;
    };
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!keep[order[i]]) continue;
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (keep[order[j]] && duplicates(hs[order[i]], hs[order[j]])) {
                keep[order[j]] = 0;
                ++pruned;
            }
        }
    }

    HypothesisSet out;
    for (std::size_t h = 0; h < hs.size(); ++h) {
        if (keep[h]) out.hypotheses.push_back(hs[h]);
    }
    if (pruned > 0) out.normalize_priors();
    if (events) events->pruned += pruned;
    return out;
}

std::vector<double> removal_cost(const HypothesisSet& hs, const AssociationMatrix& f) {
    if (f.cols() != hs.size()) throw std::invalid_argument("removal_cost: association width mismatch");
    std::vector<double> cost(hs.size(), 0.0);
    const double r0 = hs.clutter().prior;
    const auto c0 = f.column(0);
    for (std::size_t h = 1; h < hs.size(); ++h) {
        const double ratio = hs[h].prior / r0;
        const auto ch = f.column(h);
        double s = 0.0;
        for (std::size_t n = 0; n < f.rows(); ++n) s += std::log1p(ratio * c0[n] - ch[n]);
        cost[h] = -s;
    }
    return cost;
}

HypothesisSet drop_unjustified(const HypothesisSet& hs, const AssociationMatrix& f, const DLConfig& cfg,
                               LifecycleEvents* events) {
    if (f.cols() != hs.size()) throw std::invalid_argument("drop_unjustified: association width mismatch");
    HypothesisSet out = hs;
    std::vector<std::vector<double>> cols;
    for (std::size_t h = 0; h < f.cols(); ++h) cols.emplace_back(f.column(h).begin(), f.column(h).end());
    const std::size_t N = f.rows();
    std::vector<double> rho(N);
    for (;;) {
        const double r0 = out[0].prior;
        std::size_t worst = 0;
        double worst_cost = 0.0;
        for (std::size_t h = 1; h < out.size(); ++h) {
            if (!out[h].is_active()) continue;
            const double ratio = out[h].prior / r0;
            double s = 0.0;
            for (std::size_t n = 0; n < N; ++n) s += std::log1p(ratio * cols[0][n] - cols[h][n]);
            if (worst == 0 || -s < worst_cost) {
                worst = h;
                worst_cost = -s;
            }
        }
        if (worst == 0 || !(worst_cost <= cfg.min_track_gain)) break;
        // Same parameters, one fewer component: rescale the weights exactly.
        const double ratio = out[worst].prior / r0;
        for (std::size_t n = 0; n < N; ++n) rho[n] = 1.0 + ratio * cols[0][n] - cols[worst][n];
        for (std::size_t h = 0; h < cols.size(); ++h) {
            if (h == worst) continue;
            const double scale = h == 0 ? 1.0 + ratio : 1.0;
            for (std::size_t n = 0; n < N; ++n) cols[h][n] *= scale / rho[n];
        }
        out.hypotheses[0].prior += out.hypotheses[worst].prior;
        out.hypotheses.erase(out.hypotheses.begin() + static_cast<long>(worst));
        cols.erase(cols.begin() + static_cast<long>(worst));
        if (events) ++events->unjustified;
    }
    out.normalize_priors();
    return out;
}

SeedProposer::SeedProposer(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg)
    : batch_(batch), bounds_(bounds), cfg_(cfg), used_(batch.size(), 0), rng_(cfg.rng_seed) {
    log_clutter_ = log_clutter_pdf(bounds);
    vmax_ = std::max(std::abs(bounds[Dim::doppler].min), std::abs(bounds[Dim::doppler].max));
    by_x_.resize(batch.scans().size());
    for (std::size_t k = 0; k < by_x_.size(); ++k) {
        const auto members = batch.scan_members(k);
        by_x_[k].assign(members.begin(), members.end());
        std::sort(by_x_[k].begin(), by_x_[k].end(), [&](std::size_t a, std::size_t b) {
            return batch_[a].x < batch_[b].x || (batch_[a].x == batch_[b].x && a < b);
        });
    }
}

std::vector<std::size_t> SeedProposer::in_x_window(std::size_t slot, double lo, double hi) const {
    const auto& v = by_x_[slot];
    auto first = std::lower_bound(v.begin(), v.end(), lo,
                                  [&](std::size_t n, double x) { return batch_[n].x < x; });
    std::vector<std::size_t> out;
    for (auto it = first; it != v.end() && batch_[*it].x <= hi; ++it) out.push_back(*it);
    return out;
}

std::optional<SeedProposer::Candidate> SeedProposer::grow(std::size_t anchor,
                                                          const std::vector<char>& free) const {
    const Vec4& fl = cfg_.sigma_floor;
    const Measurement& a = batch_[anchor];
    const std::size_t slot = batch_.scan_slot(anchor);
    const std::size_t S = by_x_.size();
    const double kGate = 2.5;

    // Best partner in an adjacent scan: Doppler-predicted range, bounded
    // cross-range speed, similar amplitude and Doppler.
    double best = -std::numeric_limits<double>::infinity();
    std::size_t partner = batch_.size();
    for (std::size_t k : {slot + 1, slot - 1}) {
        if (k >= S) continue;  // wraps for slot 0
        const double dt = batch_.scan_times()[k] - a.t;
        if (dt == 0.0) continue;
        const double wx = kGate * std::sqrt(2.0) * (fl[0] + fl[3] * std::abs(dt));
        const double xc = a.x + a.doppler * dt;
        for (std::size_t m : in_x_window(k, xc - wx, xc + wx)) {
            if (!free[m]) continue;
            const Measurement& b = batch_[m];
            if (std::abs(b.y - a.y) > vmax_ * std::abs(dt) + kGate * fl[1]) continue;
            const double zx = (b.x - xc) / (std::sqrt(2.0) * (fl[0] + fl[3] * std::abs(dt)));
            const double za = (b.amplitude - a.amplitude) / (std::sqrt(2.0) * fl[2]);
            const double zd = (b.doppler - a.doppler) / (std::sqrt(2.0) * fl[3]);
            if (std::abs(za) > kGate || std::abs(zd) > kGate) continue;
            const double score = -0.5 * (zx * zx + za * za + zd * zd);
            if (score > best) {
                best = score;
                partner = m;
            }
        }
    }
    if (partner == batch_.size()) return std::nullopt;

    Candidate c;
    c.members = {anchor, partner};
    auto refit = [&]() {
        double n = 0, st = 0, stt = 0, sx = 0, sxt = 0, sy = 0, syt = 0, sa = 0, sd = 0;
        for (std::size_t m : c.members) {
            const Measurement& p = batch_[m];
            n += 1;
            st += p.t;
            stt += p.t * p.t;
            sx += p.x;
            sxt += p.x * p.t;
            sy += p.y;
            syt += p.y * p.t;
            sa += p.amplitude;
            sd += p.doppler;
        }
        TrackHypothesis& t = c.track;
        t.status = HypothesisStatus::dormant;
        t.anchored = true;
        t.amplitude = sa / n;
        const double dy = n * stt - st * st;
        if (dy > 1e-12 * n * stt) {
            t.vy = (n * syt - st * sy) / dy;
            t.y0 = (sy - t.vy * st) / n;
        } else {
            t.vy = 0.0;
            t.y0 = sy / n;
        }
        const double cc = (fl[0] * fl[0]) / (fl[3] * fl[3]);
        const double a22 = stt + cc * n;
        const double b2 = sxt + cc * sd;
        const double dx = n * a22 - st * st;
        t.vx = (n * b2 - st * sx) / dx;
        t.x0 = (sx - t.vx * st) / n;
        t.doppler = t.vx;
        for (std::size_t d = 0; d < kDims; ++d) t.sigma[d] = cfg_.seed_sigma_scale * fl[d];
    };
    refit();

    // Extend scan by scan, nearest scans first, refitting after each addition.
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t ps = batch_.scan_slot(partner);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        auto dist = [&](std::size_t k) {
            const std::size_t da = k > slot ? k - slot : slot - k;
            const std::size_t db = k > ps ? k - ps : ps - k;
            return std::min(da, db);
        };
        return dist(i) < dist(j);
    });
    for (std::size_t k : order) {
        if (k == slot || k == ps) continue;
        const double t = batch_.scan_times()[k];
        const Vec4 p = predict(c.track, t);
        const Vec4& sg = c.track.sigma;
        double best_q = kGate * kGate * kDims;
        std::size_t pick = batch_.size();
        for (std::size_t m : in_x_window(k, p[0] - kGate * sg[0], p[0] + kGate * sg[0])) {
            if (!free[m]) continue;
            const Vec4 v = batch_[m].values();
            double q = 0.0;
            bool inside = true;
            for (std::size_t d = 0; d < kDims; ++d) {
                const double z = (v[d] - p[d]) / sg[d];
                if (std::abs(z) > kGate) inside = false;
                q += z * z;
            }
            if (inside && q < best_q) {
                best_q = q;
                pick = m;
            }
        }
        if (pick != batch_.size()) {
            c.members.push_back(pick);
            refit();
        }
    }

    c.score = 0.0;
    for (std::size_t m : c.members) {
        const Measurement& p = batch_[m];
        const Vec4 pr = predict(c.track, p.t);
        const Vec4 e{p.x - pr[0], p.y - pr[1], p.amplitude - pr[2], p.doppler - pr[3]};
        c.score += floor_log_ratio(e, fl, log_clutter_);
    }
    return c;
}

std::vector<TrackHypothesis> SeedProposer::propose(const AssociationMatrix& f, std::uint64_t& next_id) {
    const std::size_t N = batch_.size();
    std::vector<char> free(N, 0);
    std::vector<std::size_t> anchors;
    for (std::size_t n = 0; n < N; ++n) {
        free[n] = f(n, 0) >= 0.5;
        if (free[n] && !used_[n]) anchors.push_back(n);
    }
    std::shuffle(anchors.begin(), anchors.end(), rng_);

    std::vector<Candidate> cands;
    for (std::size_t n : anchors) {
        auto c = grow(n, free);
        if (!c || c->score < cfg_.seed_min_score) {
            used_[n] = 1;  // nothing worth seeding here
            continue;
        }
        cands.push_back(std::move(*c));
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    std::vector<TrackHypothesis> out;
    std::vector<char> claimed(N, 0);
    for (auto& c : cands) {
        if (static_cast<int>(out.size()) >= cfg_.spawn_pool) break;
        if (std::any_of(c.members.begin(), c.members.end(), [&](std::size_t m) { return claimed[m]; })) {
            continue;
        }
        for (std::size_t m : c.members) {
            claimed[m] = 1;
            used_[m] = 1;
        }
        c.track.id = next_id++;
        out.push_back(c.track);
    }
    // Candidates that overlapped a chosen seed are spent as well.
    for (const auto& c : cands) {
        if (std::any_of(c.members.begin(), c.members.end(), [&](std::size_t m) { return claimed[m]; })) {
            used_[c.members.front()] = 1;
        }
    }
    return out;
}

std::vector<TrackDetection> DetectionReport::detections() const {
    std::vector<TrackDetection> out;
    for (const auto& t : tracks) {
        if (t.detected) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> gate_members(const TrackHypothesis& h, const Batch& batch) {
    std::vector<std::size_t> gate;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const Vec4 e = residual(batch[n], h).values();
        bool inside = true;
        for (std::size_t d = 0; d < kDims && inside; ++d) inside = std::abs(e[d]) <= 2.0 * h.sigma[d];
        if (inside) gate.push_back(n);
    }
    return gate;
}

double compute_llr(const TrackHypothesis& h, const Batch& batch, const MeasurementBounds& bounds,
                   std::vector<std::size_t>* gate) {
    const auto members = gate_members(h, batch);
    const double log_c = log_clutter_pdf(bounds);
    const GaussianKernel k(h);
    double llr = 0.0;
    for (std::size_t n : members) llr += k.log_pdf(batch[n]) - log_c;
    if (gate) *gate = members;
    return llr;
}

DetectionReport declare_detections(const HypothesisSet& hs, const Batch& batch,
                                   const MeasurementBounds& bounds, double llr_threshold,
                                   const DLConfig* crisp) {
    DetectionReport rep;
    rep.threshold = llr_threshold;
    for (std::size_t h = 1; h < hs.size(); ++h) {
        if (!hs[h].is_active()) continue;
        TrackDetection d;
        d.column = h;
        d.track_id = hs[h].id;
        d.llr = compute_llr(hs[h], batch, bounds, &d.gate);
        d.candidate = !(crisp && crisp->detect_crisp_only) || is_localized(hs[h], *crisp);
        d.detected = d.candidate && d.llr > llr_threshold;
        rep.tracks.push_back(std::move(d));
    }
    std::stable_sort(rep.tracks.begin(), rep.tracks.end(), [](const auto& a, const auto& b) {
        return a.llr > b.llr || (a.llr == b.llr && a.track_id < b.track_id);
    });
    return rep;
}

}  // namespace dltrack
