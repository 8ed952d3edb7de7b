#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dltrack/core_model.hpp"
#include "dltrack/dl_config.hpp"
#include "dltrack/track_manager.hpp"

namespace dltrack {

struct OpCounts {
    std::uint64_t pdf_evaluations = 0;
    std::uint64_t update_ops = 0;  // weighted accumulations in the M-step

    std::uint64_t total() const noexcept { return pdf_evaluations + update_ops; }
};

struct HypothesisSnapshot {
    std::uint64_t id = 0;
    HypothesisStatus status = HypothesisStatus::dormant;
    double prior = 0.0;
    Vec4 sigma{};
};

struct IterationRecord {
    int iteration = 0;
    double loglik = 0.0;  // at the parameters entering this iteration
    std::size_t num_active = 0;
    std::size_t num_dormant = 0;
    LifecycleEvents events;  // applied after this iteration's M-step
    OpCounts ops;
    std::vector<HypothesisSnapshot> hypotheses;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    std::vector<std::string> diagnostics;

    std::size_t iterations() const noexcept { return records.size(); }
    OpCounts total_ops() const noexcept;
};

struct EStepResult {
    AssociationMatrix f;
    double loglik = 0.0;
    std::vector<std::size_t> underflow_rows;  // rows forced to clutter
};

HypothesisSet init_hypotheses(const MeasurementBounds& bounds, const DLConfig& cfg);

EStepResult e_step_full(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds);
AssociationMatrix e_step(const Batch& batch, const HypothesisSet& hs, const MeasurementBounds& bounds);

double weighted_moment(std::span<const double> f, std::span<const double> q);
std::vector<double> update_priors(const AssociationMatrix& f);

double update_amplitude(std::span<const double> f, const Batch& batch);
// (y0, vy); throws degenerate_geometry when all weight sits at one time.
std::pair<double, double> update_y_motion(std::span<const double> f, const Batch& batch);
// (x0, vx); the caller sets d_h = vx.
std::pair<double, double> update_x_motion(std::span<const double> f, const Batch& batch, double c);
Vec4 update_sigmas(std::span<const double> f, const Batch& batch, const TrackHypothesis& h,
                   const DLConfig& cfg);
double compute_c(const TrackHypothesis& h, const DLConfig& cfg);

// One full M-step: priors for every hypothesis, parameters for active tracks.
void m_step(const Batch& batch, const AssociationMatrix& f, HypothesisSet& hs, const DLConfig& cfg,
            OpCounts* ops = nullptr, std::vector<std::string>* diagnostics = nullptr);

struct DLResult {
    HypothesisSet hypotheses;
    AssociationMatrix association;  // consistent with `hypotheses`
    IterationTrace trace;
    double loglik = 0.0;
};

DLResult run_dl(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg);
// Same loop from a caller-supplied starting set (tests, complexity probes).
DLResult run_dl_from(const Batch& batch, const MeasurementBounds& bounds, const DLConfig& cfg,
                     HypothesisSet start);

}  // namespace dltrack
