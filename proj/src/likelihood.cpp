#include "dltrack/likelihood.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dltrack {

namespace {

constexpr double kLogTwoPiSq = -2.0 * 1.8378770664093453;  // log((2 pi)^-2)

void require_track(const TrackHypothesis& h) {
    if (h.is_clutter()) throw unsupported_hypothesis("clutter hypothesis has no motion model");
}

void require_sigmas(const TrackHypothesis& h) {
    for (double s : h.sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) throw invalid_covariance("track sigma must be positive");
    }
}

}  // namespace

Vec4 predict(const TrackHypothesis& h, double t) {
    require_track(h);
    return {h.x0 + h.vx * t, h.y0 + h.vy * t, h.amplitude, h.doppler};
}

Residual residual(const Measurement& m, const TrackHypothesis& h) {
    const Vec4 p = predict(h, m.t);
    return {m.x - p[0], m.y - p[1], m.amplitude - p[2], m.doppler - p[3]};
}

double clutter_pdf(const MeasurementBounds& bounds) { return 1.0 / measurement_volume(bounds); }

double log_clutter_pdf(const MeasurementBounds& bounds) { return -std::log(measurement_volume(bounds)); }

double track_log_pdf(const Residual& e, const TrackHypothesis& h) {
    require_sigmas(h);
    const Vec4 ev = e.values();
    double q = 0.0;
    double log_det_half = 0.0;
    for (std::size_t d = 0; d < kDims; ++d) {
        const double z = ev[d] / h.sigma[d];
        q += z * z;
        log_det_half += std::log(h.sigma[d]);
    }
    return kLogTwoPiSq - log_det_half - 0.5 * q;
}

double log_conditional_pdf(const Measurement& m, const TrackHypothesis& h,
                           const MeasurementBounds& bounds) {
    if (h.is_clutter()) return log_clutter_pdf(bounds);
    return track_log_pdf(residual(m, h), h);
}

double conditional_pdf(const Measurement& m, const TrackHypothesis& h, const MeasurementBounds& bounds) {
    if (h.is_clutter()) return clutter_pdf(bounds);
    return std::exp(log_conditional_pdf(m, h, bounds));
}

GaussianKernel::GaussianKernel(const TrackHypothesis& h)
    : x0_(h.x0), y0_(h.y0), vx_(h.vx), vy_(h.vy), a_(h.amplitude), d_(h.doppler) {
    require_track(h);
    require_sigmas(h);
    log_norm_ = kLogTwoPiSq;
    for (std::size_t d = 0; d < kDims; ++d) {
        inv_var_[d] = 1.0 / (h.sigma[d] * h.sigma[d]);
        log_norm_ -= std::log(h.sigma[d]);
    }
}

double GaussianKernel::log_pdf(const Measurement& m) const noexcept {
    const double ex = m.x - (x0_ + vx_ * m.t);
    const double ey = m.y - (y0_ + vy_ * m.t);
    const double ea = m.amplitude - a_;
    const double ed = m.doppler - d_;
    return log_norm_ -
           0.5 * (ex * ex * inv_var_[0] + ey * ey * inv_var_[1] + ea * ea * inv_var_[2] +
                  ed * ed * inv_var_[3]);
}

double batch_log_likelihood(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds) {
    const double log_c = log_clutter_pdf(bounds);
    const std::size_t H = hs.size();
    std::vector<double> log_r(H);
    std::vector<GaussianKernel> kernels;
    kernels.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
        log_r[h] = hs[h].prior > 0.0 ? std::log(hs[h].prior) : -std::numeric_limits<double>::infinity();
        if (h > 0) kernels.emplace_back(hs[h]);
    }
    std::vector<double> terms(H);
    double total = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const Measurement& m = batch[n];
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < H; ++h) {
            terms[h] = log_r[h] + (h == 0 ? log_c : kernels[h - 1].log_pdf(m));
            if (terms[h] > mx) mx = terms[h];
        }
        if (!std::isfinite(mx)) {
            throw degenerate_likelihood("every mixture term vanishes at measurement " + std::to_string(n));
        }
        double s = 0.0;
        for (std::size_t h = 0; h < H; ++h) s += std::exp(terms[h] - mx);
        total += mx + std::log(s);
    }
    return total;
}

}  // namespace dltrack
