// Randomized invariants over many small seeded runs.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dltrack/dl_engine.hpp"
#include "dltrack/evaluation.hpp"
#include "dltrack/io.hpp"
#include "dltrack/likelihood.hpp"
#include "dltrack/scenario.hpp"
#include "helpers.hpp"

using namespace dltrack;

namespace {

ScenarioConfig small_scenario(std::uint64_t seed, int clutter) {
    ScenarioConfig sc;
    sc.area_width = sc.area_height = 200.0;
    sc.num_scans = 5;
    sc.clutter_per_scan = clutter;
    sc.targets = {{40, 50, 6, 2, 0.75}, {150, 150, -5, -3, 0.7}};
    sc.clutter_amplitude = {FeatureDist::uniform, 0, 1};
    sc.clutter_doppler = {FeatureDist::uniform, 0, 1};
    sc.rng_seed = seed;
    return sc;
}

DLConfig engine_config(const ScenarioConfig& sc) {
    DLConfig dl;
    dl.sigma_floor = sensor_sigmas(sc);
    dl.rng_seed = sc.rng_seed;
    return dl;
}

}  // namespace

TEST_CASE("structural invariants hold on every run") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        CAPTURE(seed);
        const ScenarioConfig sc = small_scenario(seed, static_cast<int>(10 + 15 * (seed % 4)));
        const Scenario s = generate(sc);
        const DLConfig dl = engine_config(sc);
        const DLResult res = run_dl(s.batch, s.bounds, dl);

        CHECK(res.association.rows() == s.batch.size());
        CHECK(res.association.cols() == res.hypotheses.size());
        CHECK(res.association.max_row_deviation() <= 1e-12);
        CHECK(std::abs(res.hypotheses.prior_sum() - 1.0) <= 1e-12);
        CHECK(res.hypotheses.count(HypothesisStatus::clutter) == 1);
        CHECK(res.hypotheses[0].is_clutter());
        CHECK(res.hypotheses.count(HypothesisStatus::dormant) >= 1);
        for (std::size_t h = 1; h < res.hypotheses.size(); ++h) {
            for (std::size_t d = 0; d < kDims; ++d) CHECK(res.hypotheses[h].sigma[d] >= dl.sigma_floor[d]);
            CHECK(res.hypotheses[h].doppler == res.hypotheses[h].vx);
        }
        for (const auto& rec : res.trace.records) {
            double sum = 0.0;
            for (const auto& snap : rec.hypotheses) sum += snap.prior;
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
        // The reported likelihood belongs to the final set.
        CHECK(res.loglik == doctest::Approx(batch_log_likelihood(s.batch, res.hypotheses, s.bounds)).epsilon(1e-12));
    }
}

TEST_CASE("likelihood never decreases while the roster is unchanged") {
    int pairs = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const ScenarioConfig sc = small_scenario(seed, static_cast<int>(20 + 20 * (seed % 3)));
        const Scenario s = generate(sc);
        const DLResult res = run_dl(s.batch, s.bounds, engine_config(sc));
        const auto& r = res.trace.records;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            if (r[i].events.roster_changed()) continue;
            CAPTURE(seed);
            CAPTURE(i);
            CHECK(r[i + 1].loglik >= r[i].loglik - 1e-9 * std::abs(r[i].loglik));
            ++pairs;
        }
    }
    CHECK(pairs > 50);
}

TEST_CASE("a fixed roster climbs monotonically from any start") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const ScenarioConfig sc = small_scenario(100 + rep, 30);
        const Scenario s = generate(sc);
        DLConfig dl = engine_config(sc);
        dl.lifecycle = false;
        dl.max_iterations = 15;
        HypothesisSet hs;
        hs.hypotheses.push_back(make_clutter_hypothesis(1.0));
        for (std::uint64_t j = 1; j <= 3; ++j) {
            hs.hypotheses.push_back(test::track(j, 200 * u(rng), 200 * u(rng), 0, 0, 0.5,
                                                {20 + 40 * u(rng), 20 + 40 * u(rng), 0.5, 10}, 1.0));
        }
        hs.normalize_priors();
        const DLResult res = run_dl_from(s.batch, s.bounds, dl, hs);
        const auto& r = res.trace.records;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            CHECK(r[i + 1].loglik >= r[i].loglik - 1e-9 * std::abs(r[i].loglik));
        }
    }
}

TEST_CASE("runs are deterministic down to the written bytes") {
    const ScenarioConfig sc = small_scenario(5, 40);
    const Scenario a = generate(sc);
    const Scenario b = generate(sc);
    const DLConfig dl = engine_config(sc);
    const DLResult ra = run_dl(a.batch, a.bounds, dl);
    const DLResult rb = run_dl(b.batch, b.bounds, dl);
    auto dump = [&](const DLResult& r, const Batch& batch) {
        std::ostringstream os;
        const auto rep = declare_detections(r.hypotheses, batch, a.bounds);
        io::write_table(os, io::detection_table(rep, r.hypotheses), io::Format::csv, {1, 5});
        io::write_table(os, io::trace_table(r.trace), io::Format::csv, {1, 5});
        io::write_table(os, io::hypotheses_table(r.hypotheses), io::Format::csv, {1, 5});
        io::write_table(os, io::association_table(r.association, r.hypotheses), io::Format::csv, {1, 5});
        return os.str();
    };
    CHECK(dump(ra, a.batch) == dump(rb, b.batch));
}

TEST_CASE("ROC points are non-increasing in the threshold") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-50.0, 200.0);
    std::uniform_int_distribution<int> pick(-1, 2);
    std::vector<TrialOutcome> outs(20);
    for (auto& o : outs) {
        o.num_targets = 3;
        const int k = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < k; ++i) {
            o.llr.push_back(u(rng));
            o.matched.push_back(pick(rng));
        }
    }
    std::vector<double> th;
    for (int i = 0; i < 40; ++i) th.push_back(u(rng));
    const auto pts = roc_from_outcomes(outs, th, 1e4);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        CHECK(pts[i].llr_threshold <= pts[i + 1].llr_threshold);
        CHECK(pts[i + 1].pd <= pts[i].pd);
        CHECK(pts[i + 1].pfa_per_batch <= pts[i].pfa_per_batch);
        CHECK(pts[i].pd >= 0.0);
        CHECK(pts[i].pd <= 1.0);
    }
}

TEST_CASE("matching ignores input order when LLRs are distinct") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<TargetSpec> truth{{100, 100, 5, 1, 0.6}, {110, 104, 5, 1, 0.6}, {300, 200, -4, 0, 0.6}};
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<ScoredTrack> dets;
        for (std::uint64_t i = 0; i < 5; ++i) {
            const auto& g = truth[i % 3];
            dets.push_back({test::track(i + 1, g.x0 + 12 * u(rng) - 6, g.y0 + 12 * u(rng) - 6,
                                        g.vx + 0.4 * u(rng) - 0.2, g.vy, 0.6, {2, 2, 0.05, 0.5}),
                            100 * u(rng)});
        }
        const MatchResult m0 = match_tracks(dets, truth, {8, 0.4, std::nullopt}, 10);
        std::vector<std::size_t> perm{0, 1, 2, 3, 4};
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<ScoredTrack> shuffled;
        for (std::size_t p : perm) shuffled.push_back(dets[p]);
        const MatchResult m1 = match_tracks(shuffled, truth, {8, 0.4, std::nullopt}, 10);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            CHECK(m1.target_of_detection[i] == m0.target_of_detection[perm[i]]);
        }
    }
}

TEST_CASE("e_step rows are stochastic for random mixtures") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<Measurement> ms;
        for (int k = 0; k < 4; ++k) {
            for (int j = 0; j < 5; ++j) ms.push_back(test::meas(100 * u(rng), 100 * u(rng), u(rng), 20 * u(rng) - 10, k, k));
        }
        const Batch b = validate_batch(ms, test::box());
        HypothesisSet hs;
        hs.hypotheses.push_back(make_clutter_hypothesis(u(rng) + 1e-3));
        for (std::uint64_t j = 1; j <= 4; ++j) {
            hs.hypotheses.push_back(test::track(j, 100 * u(rng), 100 * u(rng), 2 * u(rng) - 1, 2 * u(rng) - 1, u(rng),
                                                {0.5 + 10 * u(rng), 0.5 + 10 * u(rng), 0.02 + u(rng), 0.2 + 5 * u(rng)},
                                                u(rng)));
        }
        hs.normalize_priors();
        const AssociationMatrix f = e_step(b, hs, test::box());
        CHECK(f.max_row_deviation() <= 1e-12);
        const auto r = update_priors(f);
        double s = 0.0;
        for (double v : r) s += v;
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}
