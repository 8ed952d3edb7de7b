#include "dltrack/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace dltrack {

std::string_view dim_name(std::size_t d) {
    static constexpr std::string_view names[kDims] = {"x", "y", "amplitude", "doppler"};
    if (d >= kDims) throw std::out_of_range("dimension index out of range");
    return names[d];
}

std::string_view status_name(HypothesisStatus s) {
    switch (s) {
        case HypothesisStatus::clutter: return "clutter";
        case HypothesisStatus::active: return "active";
        case HypothesisStatus::dormant: return "dormant";
    }
    return "unknown";
}

MeasurementBounds make_bounds(Interval x, Interval y, Interval amplitude, Interval doppler) {
    MeasurementBounds b;
    b.dims = {x, y, amplitude, doppler};
    check_bounds(b);
    return b;
}

void check_bounds(const MeasurementBounds& bounds) {
    for (std::size_t d = 0; d < kDims; ++d) {
        const auto& iv = bounds.dims[d];
        if (!std::isfinite(iv.min) || !std::isfinite(iv.max) || !(iv.max > iv.min)) {
            throw invalid_bounds("degenerate bounds in dimension '" + std::string(dim_name(d)) +
                                 "': max must exceed min");
        }
    }
}

double measurement_volume(const MeasurementBounds& bounds) {
    check_bounds(bounds);
    double v = 1.0;
    for (const auto& iv : bounds.dims) v *= iv.width();
    if (!(v > 0.0) || !std::isfinite(v)) throw invalid_bounds("measurement volume is not positive");
    return v;
}

TrackHypothesis make_clutter_hypothesis(double prior) {
    TrackHypothesis h;
    h.status = HypothesisStatus::clutter;
    h.prior = prior;
    return h;
}

std::size_t HypothesisSet::count(HypothesisStatus s) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        hypotheses.begin(), hypotheses.end(), [s](const auto& h) { return h.status == s; }));
}

double HypothesisSet::prior_sum() const noexcept {
    double s = 0.0;
    for (const auto& h : hypotheses) s += h.prior;
    return s;
}

void HypothesisSet::normalize_priors() {
    const double s = prior_sum();
    if (!(s > 0.0)) throw std::logic_error("cannot normalize priors with zero total mass");
    for (auto& h : hypotheses) h.prior /= s;
}

void check_hypothesis_set(const HypothesisSet& hs, double tol) {
    if (hs.size() == 0 || !hs[0].is_clutter()) {
        throw std::logic_error("hypothesis set must start with the clutter hypothesis");
    }
    if (hs.count(HypothesisStatus::clutter) != 1) {
        throw std::logic_error("hypothesis set must contain exactly one clutter hypothesis");
    }
    if (std::abs(hs.prior_sum() - 1.0) > tol) {
        throw std::logic_error("hypothesis priors do not sum to one");
    }
}

double AssociationMatrix::row_sum(std::size_t n) const {
    double s = 0.0;
    for (std::size_t h = 0; h < cols_; ++h) s += (*this)(n, h);
    return s;
}

double AssociationMatrix::max_row_deviation() const {
    double worst = 0.0;
    for (std::size_t n = 0; n < rows_; ++n) worst = std::max(worst, std::abs(row_sum(n) - 1.0));
    return worst;
}

double Batch::duration() const noexcept {
    if (scan_times_.empty()) return 0.0;
    return scan_times_.back() - scan_times_.front();
}

Batch validate_batch(std::span<const Measurement> measurements, const MeasurementBounds& bounds) {
    check_bounds(bounds);
    if (measurements.empty()) throw data_error("measurement batch is empty", 0);

    std::map<int, double> scan_time;
    for (std::size_t n = 0; n < measurements.size(); ++n) {
        const auto& m = measurements[n];
        if (m.scan < 0) throw data_error("measurement " + std::to_string(n) + ": negative scan index", n);
        if (!std::isfinite(m.t) || m.t < 0.0) {
            throw data_error("measurement " + std::to_string(n) + ": time must be finite and >= 0", n);
        }
        const auto v = m.values();
        for (std::size_t d = 0; d < kDims; ++d) {
            if (!std::isfinite(v[d]) || !bounds.dims[d].contains(v[d])) {
                throw data_error("measurement " + std::to_string(n) + ": " + std::string(dim_name(d)) +
                                     " out of bounds",
                                 n);
            }
        }
        auto [it, inserted] = scan_time.emplace(m.scan, m.t);
        if (!inserted && it->second != m.t) {
            throw data_error("measurement " + std::to_string(n) + ": scan " + std::to_string(m.scan) +
                                 " has inconsistent times",
                             n);
        }
    }

    Batch b;
    b.measurements_.assign(measurements.begin(), measurements.end());
    double prev = -1.0;
    std::map<int, std::size_t> slot_of;
    for (const auto& [scan, t] : scan_time) {
        if (t < prev) {
            throw data_error("time decreases at scan " + std::to_string(scan), 0);
        }
        prev = t;
        slot_of[scan] = b.scans_.size();
        b.scans_.push_back(scan);
        b.scan_times_.push_back(t);
    }
    b.members_.resize(b.scans_.size());
    b.slot_.resize(b.measurements_.size());
    for (std::size_t n = 0; n < b.measurements_.size(); ++n) {
        const std::size_t k = slot_of[b.measurements_[n].scan];
        b.slot_[n] = k;
        b.members_[k].push_back(n);
    }
    return b;
}

}  // namespace dltrack
