#pragma once

#include <vector>

#include "dltrack/core_model.hpp"

namespace dltrack::test {

inline MeasurementBounds box() { return make_bounds({0.0, 100.0}, {0.0, 100.0}, {0.0, 1.0}, {-10.0, 10.0}); }

inline Measurement meas(double x, double y, double a, double d, double t, int scan) {
    Measurement m;
    m.x = x;
    m.y = y;
    m.amplitude = a;
    m.doppler = d;
    m.t = t;
    m.scan = scan;
    return m;
}

inline TrackHypothesis track(std::uint64_t id, double x0, double y0, double vx, double vy, double a, Vec4 sigma,
                             double prior = 0.0) {
    TrackHypothesis h;
    h.id = id;
    h.x0 = x0;
    h.y0 = y0;
    h.vx = vx;
    h.vy = vy;
    h.amplitude = a;
    h.doppler = vx;
    h.sigma = sigma;
    h.prior = prior;
    h.status = HypothesisStatus::active;
    return h;
}

// Points on x = x0 + vx t, y = y0 + vy t at t = 0..k-1 with matching Doppler.
inline std::vector<Measurement> line(double x0, double y0, double vx, double vy, double a, int k) {
    std::vector<Measurement> ms;
    for (int i = 0; i < k; ++i) {
        const double t = i;
        ms.push_back(meas(x0 + vx * t, y0 + vy * t, a, vx, t, i));
    }
    return ms;
}

}  // namespace dltrack::test
