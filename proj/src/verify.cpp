#include "dltrack/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "dltrack/dl_engine.hpp"
#include "dltrack/errors.hpp"
#include "dltrack/likelihood.hpp"
#include "dltrack/oracle.hpp"
#include "dltrack/scenario.hpp"

namespace dltrack {

std::string_view fault_name(Fault f) {
    switch (f) {
        case Fault::none: return "none";
        case Fault::likelihood: return "likelihood";
        case Fault::mstep: return "mstep";
        case Fault::gradient: return "gradient";
    }
    return "none";
}

Fault parse_fault(std::string_view s) {
    for (Fault f : {Fault::none, Fault::likelihood, Fault::mstep, Fault::gradient}) {
        if (s == fault_name(f)) return f;
    }
    throw config_error("fault must be one of none, likelihood, mstep, gradient (got '" + std::string(s) + "')");
}

bool VerifyReport::passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

namespace {

const MeasurementBounds& verify_bounds() {
    static const MeasurementBounds b = make_bounds({0.0, 100.0}, {0.0, 100.0}, {0.0, 1.0}, {-10.0, 10.0});
    return b;
}

Batch random_batch(std::size_t n, int scans, double revisit, std::mt19937_64& rng) {
    const auto& b = verify_bounds();
    std::vector<Measurement> ms(n);
    for (std::size_t i = 0; i < n; ++i) {
        Measurement& m = ms[i];
        m.scan = static_cast<int>(i * static_cast<std::size_t>(scans) / n);
        m.t = m.scan * revisit;
        m.x = std::uniform_real_distribution<double>(b[Dim::x].min, b[Dim::x].max)(rng);
        m.y = std::uniform_real_distribution<double>(b[Dim::y].min, b[Dim::y].max)(rng);
        m.amplitude = std::uniform_real_distribution<double>(b[Dim::amplitude].min, b[Dim::amplitude].max)(rng);
        m.doppler = std::uniform_real_distribution<double>(b[Dim::doppler].min, b[Dim::doppler].max)(rng);
    }
    return validate_batch(ms, b);
}

TrackHypothesis random_track(std::uint64_t id, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrackHypothesis t;
    t.id = id;
    t.status = HypothesisStatus::active;
    t.x0 = 100.0 * u(rng);
    t.y0 = 100.0 * u(rng);
    t.vx = -5.0 + 10.0 * u(rng);
    t.vy = -5.0 + 10.0 * u(rng);
    t.doppler = t.vx;
    t.amplitude = u(rng);
    t.sigma = {1.0 + 30.0 * u(rng), 1.0 + 30.0 * u(rng), 0.05 + 0.5 * u(rng), 0.5 + 5.0 * u(rng)};
    return t;
}

// A noisy line plus uniform points, with weights that favour the line.
struct MstepInstance {
    Batch batch;
    std::vector<double> f;
    Vec4 sigma;
};

MstepInstance random_mstep_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto& b = verify_bounds();
    const int scans = 3 + static_cast<int>(u(rng) * 6.0);
    const double revisit = 0.5 + 3.0 * u(rng);
    const double dur = (scans - 1) * revisit;
    const double vx = -4.0 + 8.0 * u(rng);
    const double vy = -4.0 + 8.0 * u(rng);
    const double x0 = 30.0 + 40.0 * u(rng) - 0.5 * vx * dur;
    const double y0 = 30.0 + 40.0 * u(rng) - 0.5 * vy * dur;
    const double amp = 0.2 + 0.6 * u(rng);
    const int extra = static_cast<int>(u(rng) * 12.0);

    std::vector<Measurement> ms;
    std::vector<double> f;
    for (int k = 0; k < scans; ++k) {
        const double t = k * revisit;
        Measurement m;
        m.scan = k;
        m.t = t;
        m.x = std::clamp(x0 + vx * t + 2.0 * g(rng), 0.0, 100.0);
        m.y = std::clamp(y0 + vy * t + 2.0 * g(rng), 0.0, 100.0);
        m.amplitude = std::clamp(amp + 0.05 * g(rng), 0.0, 1.0);
        m.doppler = std::clamp(vx + 0.5 * g(rng), -10.0, 10.0);
        ms.push_back(m);
        f.push_back(0.5 + 0.5 * u(rng));
        for (int e = 0; e < extra / scans + (k < extra % scans ? 1 : 0); ++e) {
            Measurement c;
            c.scan = k;
            c.t = t;
            c.x = 100.0 * u(rng);
            c.y = 100.0 * u(rng);
            c.amplitude = u(rng);
            c.doppler = b[Dim::doppler].min + b[Dim::doppler].width() * u(rng);
            ms.push_back(c);
            f.push_back(0.2 * u(rng));
        }
    }
    const Vec4 sigma{1.0 + 10.0 * u(rng), 1.0 + 10.0 * u(rng), 0.03 + 0.2 * u(rng), 0.3 + 3.0 * u(rng)};
    return {validate_batch(ms, b), std::move(f), sigma};
}

oracle::TrackParams closed_form(const MstepInstance& in) {
    TrackHypothesis h;
    h.sigma = in.sigma;
    DLConfig cfg;
    cfg.c_mode = CMode::derived_xd;
    oracle::TrackParams p;
    p.a = update_amplitude(in.f, in.batch);
    std::tie(p.y0, p.vy) = update_y_motion(in.f, in.batch);
    std::tie(p.x0, p.vx) = update_x_motion(in.f, in.batch, compute_c(h, cfg));
    return p;
}

std::string describe(int instance, double err, double tol) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "instance %d: error %.3g exceeds %.3g", instance, err, tol);
    return buf;
}

void record(CheckResult& r, int instance, double err) {
    ++r.instances;
    if (!std::isfinite(err)) err = INFINITY;
    r.worst = std::max(r.worst, err);
    if (!(err <= r.tolerance)) {
        if (r.failures == 0) r.first_failure = describe(instance, err, r.tolerance);
        ++r.failures;
    }
}

}  // namespace

CheckResult check_exhaustive_likelihood(int instances, std::size_t n, std::size_t h, std::uint64_t seed,
                                        Fault fault) {
    CheckResult r;
    r.name = "batch log-likelihood equals exhaustive association sum";
    r.tolerance = 1e-10;
    if (n < 1 || h < 1) throw config_error("verify: n and h must be >= 1");
    if (n > oracle::kMaxN || h > oracle::kMaxH || std::pow(static_cast<double>(h), static_cast<double>(n)) > oracle::kMaxAssignments) {
        throw size_limit("verify: H^N enumeration exceeds the oracle limit (N <= 12, H <= 3, H^N <= 1e6)");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int i = 0; i < instances; ++i) {
        const int scans = 1 + static_cast<int>(std::min<std::size_t>(n, 4) * std::uniform_real_distribution<double>(0.0, 0.999)(rng));
        const Batch batch = random_batch(n, scans, 1.5, rng);
        HypothesisSet hs;
        hs.hypotheses.push_back(make_clutter_hypothesis(u(rng)));
        for (std::size_t k = 1; k < h; ++k) {
            TrackHypothesis t = random_track(k, rng);
            t.prior = u(rng);
            hs.hypotheses.push_back(t);
        }
        hs.normalize_priors();
        double engine = batch_log_likelihood(batch, hs, verify_bounds());
        if (fault == Fault::likelihood) engine *= 1.0 + 1e-8;
        const double truth = oracle::exhaustive_association_likelihood(batch, hs, verify_bounds());
        record(r, i, std::abs(engine - truth) / std::max(std::abs(truth), 1e-300));
    }
    return r;
}

CheckResult check_mstep_optimality(int instances, std::uint64_t seed, Fault fault) {
    CheckResult r;
    r.name = "closed-form M-step equals numeric maximizer";
    r.tolerance = 1e-6;
    std::mt19937_64 rng(seed ^ 0x6d73746570ULL);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < instances; ++i) {
        const MstepInstance in = random_mstep_instance(rng);
        oracle::TrackParams cf = closed_form(in);
        if (fault == Fault::mstep) cf.x0 += 1e-3;
        oracle::TrackParams start = closed_form(in);
        start.x0 += 5.0 * g(rng);
        start.y0 += 5.0 * g(rng);
        start.vx += 0.5 * g(rng);
        start.vy += 0.5 * g(rng);
        start.a += 0.1 * g(rng);
        const oracle::TrackParams num = oracle::numeric_mstep(in.batch, in.f, start, in.sigma);
        const auto a = cf.as_array();
        const auto b = num.as_array();
        double err = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            err = std::max(err, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(b[k])));
        }
        record(r, i, err);
    }
    return r;
}

CheckResult check_mstep_gradient(int instances, std::uint64_t seed, Fault fault) {
    CheckResult r;
    r.name = "weighted objective gradient vanishes at the closed-form update";
    r.tolerance = 1e-4;
    std::mt19937_64 rng(seed ^ 0x67726164ULL);
    for (int i = 0; i < instances; ++i) {
        const MstepInstance in = random_mstep_instance(rng);
        oracle::TrackParams cf = closed_form(in);
        if (fault == Fault::gradient) cf.vx += 1e-3;
        const auto obj = [&](std::span<const double> p) {
            return oracle::weighted_objective(in.batch, in.f, oracle::TrackParams::from_array(p), in.sigma);
        };
        const auto p = cf.as_array();
        const auto grad = oracle::finite_difference_gradient(obj, p, 1e-5);
        double err = 0.0;
        for (double gk : grad) err = std::max(err, std::abs(gk));
        record(r, i, err);
    }
    return r;
}

VerifyReport run_verification(int instances, std::size_t n, std::size_t h, std::uint64_t seed, Fault fault) {
    if (instances < 1) throw config_error("verify.instances: must be >= 1");
    VerifyReport rep;
    rep.checks.push_back(check_exhaustive_likelihood(instances, n, h, seed, fault));
    rep.checks.push_back(check_mstep_optimality(instances, seed, fault));
    rep.checks.push_back(check_mstep_gradient(instances, seed, fault));
    return rep;
}

}  // namespace dltrack
