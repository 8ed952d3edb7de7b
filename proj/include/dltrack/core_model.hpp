#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dltrack/errors.hpp"

namespace dltrack {

// Measured dimensions, in storage order. Doppler shares units with range
// velocity so the Doppler/velocity tie is a plain equality.
enum class Dim : std::size_t { x = 0, y = 1, amplitude = 2, doppler = 3 };
inline constexpr std::size_t kDims = 4;
using Vec4 = std::array<double, kDims>;

constexpr std::size_t idx(Dim d) noexcept { return static_cast<std::size_t>(d); }
std::string_view dim_name(std::size_t d);

struct Measurement {
    double x = 0.0;          // range position
    double y = 0.0;          // cross-range position
    double amplitude = 0.0;  // normalized
    double doppler = 0.0;    // same units as range velocity
    double t = 0.0;          // time since first scan
    int scan = 0;

    Vec4 values() const noexcept { return {x, y, amplitude, doppler}; }
    bool operator==(const Measurement&) const = default;
};

struct Interval {
    double min = 0.0;
    double max = 0.0;
    double width() const noexcept { return max - min; }
    double mid() const noexcept { return 0.5 * (min + max); }
    bool contains(double v) const noexcept { return v >= min && v <= max; }
    bool operator==(const Interval&) const = default;
};

struct MeasurementBounds {
    std::array<Interval, kDims> dims{};

    const Interval& operator[](Dim d) const noexcept { return dims[idx(d)]; }
    Interval& operator[](Dim d) noexcept { return dims[idx(d)]; }
    bool operator==(const MeasurementBounds&) const = default;
};

MeasurementBounds make_bounds(Interval x, Interval y, Interval amplitude, Interval doppler);

// Throws invalid_bounds when any dimension has max <= min (or is not finite).
void check_bounds(const MeasurementBounds& bounds);

// Product of the four dimension widths: the support volume of the uniform
// clutter density.
double measurement_volume(const MeasurementBounds& bounds);

enum class HypothesisStatus { clutter, active, dormant };
std::string_view status_name(HypothesisStatus s);

struct TrackHypothesis {
    std::uint64_t id = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double amplitude = 0.0;
    double doppler = 0.0;  // tied to vx for every non-clutter hypothesis
    Vec4 sigma{1.0, 1.0, 1.0, 1.0};
    double prior = 0.0;
    HypothesisStatus status = HypothesisStatus::dormant;
    int age = 0;  // iterations since the hypothesis was created
    bool anchored = false;  // dormant seed built from data, withdrawn if it never activates

    bool is_clutter() const noexcept { return status == HypothesisStatus::clutter; }
    bool is_active() const noexcept { return status == HypothesisStatus::active; }
    bool is_dormant() const noexcept { return status == HypothesisStatus::dormant; }
};

TrackHypothesis make_clutter_hypothesis(double prior);

// Column 0 is always the clutter hypothesis; columns 1..H-1 are tracks in a
// stable order. Indices into `hypotheses` match AssociationMatrix columns.
struct HypothesisSet {
    std::vector<TrackHypothesis> hypotheses;

    std::size_t size() const noexcept { return hypotheses.size(); }
    TrackHypothesis& operator[](std::size_t h) { return hypotheses[h]; }
    const TrackHypothesis& operator[](std::size_t h) const { return hypotheses[h]; }
    const TrackHypothesis& clutter() const { return hypotheses.front(); }

    std::size_t count(HypothesisStatus s) const noexcept;
    double prior_sum() const noexcept;
    void normalize_priors();
};

// Throws std::logic_error when the set does not hold exactly one clutter
// hypothesis at index 0 or the priors do not sum to one within `tol`.
void check_hypothesis_set(const HypothesisSet& hs, double tol = 1e-12);

// N x H weights f(h|n), stored column-major so per-hypothesis moments read a
// contiguous span.
class AssociationMatrix {
public:
    AssociationMatrix() = default;
    AssociationMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t n, std::size_t h) { return data_[h * rows_ + n]; }
    double operator()(std::size_t n, std::size_t h) const { return data_[h * rows_ + n]; }

    std::span<double> column(std::size_t h) { return {data_.data() + h * rows_, rows_}; }
    std::span<const double> column(std::size_t h) const {
        return {data_.data() + h * rows_, rows_};
    }

    double row_sum(std::size_t n) const;
    // Largest |row_sum - 1| over all rows.
    double max_row_deviation() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// An immutable, validated measurement batch. Only validate_batch builds one.
class Batch {
public:
    std::size_t size() const noexcept { return measurements_.size(); }
    const Measurement& operator[](std::size_t n) const { return measurements_[n]; }
    std::span<const Measurement> measurements() const noexcept { return measurements_; }

    // Distinct scan indices in increasing order with their (common) times.
    std::span<const int> scans() const noexcept { return scans_; }
    std::span<const double> scan_times() const noexcept { return scan_times_; }
    // Measurement indices belonging to the k-th distinct scan.
    std::span<const std::size_t> scan_members(std::size_t k) const { return members_[k]; }
    // Position of measurement n's scan within scans().
    std::size_t scan_slot(std::size_t n) const { return slot_[n]; }
    double duration() const noexcept;

    bool operator==(const Batch& other) const { return measurements_ == other.measurements_; }

private:
    friend Batch validate_batch(std::span<const Measurement>, const MeasurementBounds&);

    std::vector<Measurement> measurements_;
    std::vector<int> scans_;
    std::vector<double> scan_times_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<std::size_t> slot_;
};

// Rejects an empty batch, negative scan indices or times, values outside the
// bounds (reporting index and dimension) and times that decrease with scan
// index. Measurement order is preserved.
Batch validate_batch(std::span<const Measurement> measurements, const MeasurementBounds& bounds);

}  // namespace dltrack
