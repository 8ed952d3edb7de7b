#pragma once

#include "dltrack/core_model.hpp"

namespace dltrack {

struct Residual {
    double ex = 0.0;
    double ey = 0.0;
    double ea = 0.0;
    double ed = 0.0;

    Vec4 values() const noexcept { return {ex, ey, ea, ed}; }
};

// Expected measurement of a track at time t: (x0 + vx t, y0 + vy t, a_h, d_h).
Vec4 predict(const TrackHypothesis& h, double t);
Residual residual(const Measurement& m, const TrackHypothesis& h);

double clutter_pdf(const MeasurementBounds& bounds);
double log_clutter_pdf(const MeasurementBounds& bounds);

// Diagonal-covariance 4-D Gaussian, evaluated in the log domain.
double track_log_pdf(const Residual& e, const TrackHypothesis& h);

double conditional_pdf(const Measurement& m, const TrackHypothesis& h, const MeasurementBounds& bounds);
double log_conditional_pdf(const Measurement& m, const TrackHypothesis& h,
                           const MeasurementBounds& bounds);

// Precomputed form of track_log_pdf for the inner loops; the constant and the
// inverse variances are computed once per hypothesis.
class GaussianKernel {
public:
    explicit GaussianKernel(const TrackHypothesis& h);
    double log_pdf(const Measurement& m) const noexcept;

private:
    double x0_, y0_, vx_, vy_, a_, d_;
    Vec4 inv_var_{};
    double log_norm_ = 0.0;
};

// Sum over measurements of log sum_h r(h) pdf(n|h), max-shifted per row.
double batch_log_likelihood(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds);

}  // namespace dltrack
