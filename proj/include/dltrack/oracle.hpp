#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "dltrack/core_model.hpp"

// Brute-force reference computations for small instances. Nothing here calls
// into the likelihood or engine code paths; formulas are written out again
// with a different accumulation order on purpose.
namespace dltrack::oracle {

inline constexpr std::size_t kMaxN = 12;
inline constexpr std::size_t kMaxH = 3;
inline constexpr double kMaxAssignments = 1e6;

// log of sum over all H^N hard assignments of prod_n r(h_n) pdf(n|h_n).
double exhaustive_association_likelihood(const Batch& batch, const HypothesisSet& hs,
                                         const MeasurementBounds& bounds);

// Dense 4-D Gaussian log-density with a full covariance matrix (row-major),
// via elimination rather than the diagonal shortcut.
double dense_gaussian_log_pdf(const Vec4& e, const std::array<double, 16>& cov);

// Track parameters optimized by numeric_mstep; d_h is tied to vx.
struct TrackParams {
    double x0 = 0.0;
    double y0 = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double a = 0.0;

    std::array<double, 5> as_array() const { return {x0, y0, vx, vy, a}; }
    static TrackParams from_array(std::span<const double> p) { return {p[0], p[1], p[2], p[3], p[4]}; }
};

// sum_n f_n log pdf(n | params, sigma), written independently of the engine.
double weighted_objective(const Batch& batch, std::span<const double> f, const TrackParams& p,
                          const Vec4& sigma);

// Maximizes weighted_objective at fixed sigmas by cyclic golden-section line
// searches, finished with finite-difference Newton steps. Throws
// oracle_failure if the cycles do not settle. N <= 100.
TrackParams numeric_mstep(const Batch& batch, std::span<const double> f, const TrackParams& initial,
                          const Vec4& sigma, double tol = 1e-9);

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& objective,
                                               std::span<const double> params, double step);

// Weighted least-squares line fit y = y0 + v t in centered form.
std::pair<double, double> weighted_line_fit(std::span<const double> f, std::span<const double> t,
                                            std::span<const double> y);

// Two-pass weighted variance of residuals about zero: sum f e^2 / sum f.
double weighted_mean_square(std::span<const double> f, std::span<const double> e);

}  // namespace dltrack::oracle
