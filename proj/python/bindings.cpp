// Python bindings: simulate, track, verify and config resolution.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dltrack/config.hpp"
#include "dltrack/dl_engine.hpp"
#include "dltrack/likelihood.hpp"
#include "dltrack/scenario.hpp"
#include "dltrack/track_manager.hpp"
#include "dltrack/verify.hpp"

namespace py = pybind11;
using namespace dltrack;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RunConfig resolve(const std::string& config_json, std::optional<std::uint64_t> seed) {
    RunConfig cfg = parse_run_config(config_json);
    if (seed) {
        cfg.seed = *seed;
        cfg.scenario.rng_seed = *seed;
        cfg.dl.rng_seed = *seed;
    }
    check_run_config(cfg);
    return cfg;
}

Array to_array(const Batch& batch) {
    Array out({static_cast<py::ssize_t>(batch.size()), py::ssize_t{6}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const Measurement& m = batch[n];
        const auto i = static_cast<py::ssize_t>(n);
        v(i, 0) = m.scan;
        v(i, 1) = m.t;
        v(i, 2) = m.x;
        v(i, 3) = m.y;
        v(i, 4) = m.amplitude;
        v(i, 5) = m.doppler;
    }
    return out;
}

std::vector<Measurement> from_array(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 6) throw py::value_error("batch must be an N x 6 array (scan,t,x,y,amplitude,doppler)");
    auto v = a.unchecked<2>();
    std::vector<Measurement> ms(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        Measurement& m = ms[static_cast<std::size_t>(i)];
        m.scan = static_cast<int>(v(i, 0));
        if (static_cast<double>(m.scan) != v(i, 0)) throw py::value_error("scan column must hold integers");
        m.t = v(i, 1);
        m.x = v(i, 2);
        m.y = v(i, 3);
        m.amplitude = v(i, 4);
        m.doppler = v(i, 5);
    }
    return ms;
}

py::dict track_dict(const TrackHypothesis& h) {
    py::dict d;
    d["id"] = h.id;
    d["status"] = std::string(status_name(h.status));
    d["x0"] = h.x0;
    d["y0"] = h.y0;
    d["vx"] = h.vx;
    d["vy"] = h.vy;
    d["amplitude"] = h.amplitude;
    d["doppler"] = h.doppler;
    d["sigma"] = std::vector<double>(h.sigma.begin(), h.sigma.end());
    d["prior"] = h.prior;
    return d;
}

py::dict simulate(const std::string& config_json, std::optional<std::uint64_t> seed) {
    const RunConfig cfg = resolve(config_json, seed);
    const Scenario s = generate(cfg.scenario);
    py::dict out;
    out["batch"] = to_array(s.batch);
    out["target_of"] = s.truth.target_of;
    py::list targets;
    for (const auto& g : s.truth.targets) {
        py::dict t;
        t["x0"] = g.x0;
        t["y0"] = g.y0;
        t["vx"] = g.vx;
        t["vy"] = g.vy;
        t["amplitude"] = g.amplitude;
        targets.append(t);
    }
    out["targets"] = targets;
    return out;
}

py::dict track(const Array& batch_array, const std::string& config_json, std::optional<std::uint64_t> seed) {
    const RunConfig cfg = resolve(config_json, seed);
    const MeasurementBounds bounds = scenario_bounds(cfg.scenario);
    const Batch batch = validate_batch(from_array(batch_array), bounds);
    DLResult res;
    DetectionReport rep;
    {
        py::gil_scoped_release release;
        res = run_dl(batch, bounds, cfg.dl);
        rep = declare_detections(res.hypotheses, batch, bounds, cfg.llr_threshold, &cfg.dl);
    }
    py::list tracks;
    for (const auto& d : rep.tracks) {
        py::dict t = track_dict(res.hypotheses[d.column]);
        t["llr"] = d.llr;
        t["detected"] = d.detected;
        t["gate"] = d.gate;
        tracks.append(t);
    }
    py::list hyps;
    for (const auto& h : res.hypotheses.hypotheses) hyps.append(track_dict(h));

    const auto& f = res.association;
    Array assoc({static_cast<py::ssize_t>(f.rows()), static_cast<py::ssize_t>(f.cols())});
    auto v = assoc.mutable_unchecked<2>();
    for (std::size_t n = 0; n < f.rows(); ++n) {
        for (std::size_t h = 0; h < f.cols(); ++h) v(static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(h)) = f(n, h);
    }
    std::vector<double> trace;
    for (const auto& r : res.trace.records) trace.push_back(r.loglik);

    py::dict out;
    out["tracks"] = tracks;
    out["hypotheses"] = hyps;
    out["association"] = assoc;
    out["loglik"] = res.loglik;
    out["loglik_trace"] = trace;
    out["iterations"] = res.trace.iterations();
    out["converged"] = res.trace.converged;
    return out;
}

double log_likelihood(const Array& batch_array, const std::vector<py::dict>& hypotheses, const std::string& config_json) {
    const RunConfig cfg = resolve(config_json, std::nullopt);
    const MeasurementBounds bounds = scenario_bounds(cfg.scenario);
    const Batch batch = validate_batch(from_array(batch_array), bounds);
    HypothesisSet hs;
    hs.hypotheses.push_back(make_clutter_hypothesis(0.0));
    double track_mass = 0.0;
    std::uint64_t id = 1;
    for (const auto& d : hypotheses) {
        TrackHypothesis h;
        h.id = id++;
        h.status = HypothesisStatus::active;
        h.x0 = d["x0"].cast<double>();
        h.y0 = d["y0"].cast<double>();
        h.vx = d["vx"].cast<double>();
        h.vy = d["vy"].cast<double>();
        h.doppler = h.vx;
        h.amplitude = d["amplitude"].cast<double>();
        const auto sigma = d["sigma"].cast<std::vector<double>>();
        if (sigma.size() != kDims) throw py::value_error("sigma must have four entries");
        std::copy(sigma.begin(), sigma.end(), h.sigma.begin());
        h.prior = d["prior"].cast<double>();
        track_mass += h.prior;
        hs.hypotheses.push_back(h);
    }
    if (!(track_mass < 1.0)) throw py::value_error("track priors must sum to less than one");
    hs[0].prior = 1.0 - track_mass;
    return batch_log_likelihood(batch, hs, bounds);
}

py::list verify(int instances, std::size_t n, std::size_t h, std::uint64_t seed, const std::string& fault) {
    const VerifyReport rep = run_verification(instances, n, h, seed, parse_fault(fault));
    py::list out;
    for (const auto& c : rep.checks) {
        py::dict d;
        d["name"] = c.name;
        d["passed"] = c.passed();
        d["instances"] = c.instances;
        d["failures"] = c.failures;
        d["worst"] = c.worst;
        d["tolerance"] = c.tolerance;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_dltrack, m) {
    m.doc() = "Dynamic-logic joint detection and tracking in clutter";

    // Translators run newest first, so the base class goes in first.
    py::register_exception<error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<data_error>(m, "DataError", PyExc_ValueError);
    py::register_exception<size_limit>(m, "SizeLimitError", PyExc_ValueError);

    m.def("simulate", &simulate, py::arg("config_json") = "{}", py::arg("seed") = py::none(),
          "Generate a scenario; returns the N x 6 batch and its ground truth.");
    m.def("track", &track, py::arg("batch"), py::arg("config_json") = "{}", py::arg("seed") = py::none(),
          "Run the tracker on an N x 6 batch (scan,t,x,y,amplitude,doppler).");
    m.def("log_likelihood", &log_likelihood, py::arg("batch"), py::arg("tracks"), py::arg("config_json") = "{}",
          "Mixture log-likelihood with the given tracks; clutter takes the remaining prior.");
    m.def("verify", &verify, py::arg("instances") = 50, py::arg("n") = 6, py::arg("h") = 3, py::arg("seed") = 1,
          py::arg("fault") = "none", "Run the oracle cross-checks.");
    m.def("resolved_config", [](const std::string& text) { return resolved_config_json(resolve(text, std::nullopt)); },
          py::arg("config_json") = "{}");
    m.def("config_hash", [](const std::string& text) { return config_hash(resolve(text, std::nullopt)); },
          py::arg("config_json") = "{}");
}
