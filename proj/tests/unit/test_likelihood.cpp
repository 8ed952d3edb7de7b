#include <doctest.h>

#include <cmath>

#include "dltrack/likelihood.hpp"
#include "dltrack/oracle.hpp"
#include "helpers.hpp"

using namespace dltrack;
using dltrack::test::meas;
using dltrack::test::track;

namespace {
const double kLogTwoPiSq = -3.6757541328186907;  // log((2 pi)^-2)
}

TEST_CASE("predict extrapolates linearly and ties Doppler to vx") {
    const auto h = track(1, 1, 2, 3, 4, 0.5, {1, 1, 1, 1});
    const Vec4 p0 = predict(h, 0.0);
    CHECK(p0 == Vec4{1, 2, 0.5, 3});
    const Vec4 p2 = predict(h, 2.0);
    CHECK(p2 == Vec4{7, 10, 0.5, 3});
    CHECK_THROWS_AS(predict(make_clutter_hypothesis(1.0), 1.0), unsupported_hypothesis);
}

TEST_CASE("residuals") {
    const auto h = track(1, 1, 2, 3, 4, 0.5, {1, 1, 1, 1});
    const Residual z = residual(meas(1, 2, 0.5, 3, 0, 0), h);
    CHECK(z.ex == 0.0);
    CHECK(z.ey == 0.0);
    CHECK(z.ea == 0.0);
    CHECK(z.ed == 0.0);
    const auto h2 = track(1, 1, 2, 0, 0, 0.5, {1, 1, 1, 1});
    CHECK(residual(meas(2, 2, 0.5, 0, 0, 0), h2).ex == 1.0);
    const Residual r1 = residual(meas(5, 7, 0.6, 2, 1, 0), h);
    CHECK(r1.ex == doctest::Approx(1.0));
    CHECK(r1.ey == doctest::Approx(1.0));
    CHECK(r1.ea == doctest::Approx(0.1));
    CHECK(r1.ed == doctest::Approx(-1.0));
}

TEST_CASE("clutter density is the reciprocal volume") {
    CHECK(clutter_pdf(make_bounds({0, 500}, {0, 500}, {0, 1}, {-10, 10})) == doctest::Approx(2.0e-7));
    CHECK(clutter_pdf(make_bounds({0, 1}, {0, 1}, {0, 1}, {0, 1})) == 1.0);
    CHECK(clutter_pdf(make_bounds({0, 10}, {0, 10}, {0, 4}, {0, 4})) == doctest::Approx(6.25e-4));
}

TEST_CASE("track log density") {
    auto h = track(1, 0, 0, 0, 0, 0, {1, 1, 1, 1});
    CHECK(track_log_pdf({0, 0, 0, 0}, h) == doctest::Approx(kLogTwoPiSq).epsilon(1e-14));
    CHECK(std::exp(track_log_pdf({0, 0, 0, 0}, h)) == doctest::Approx(0.0253303).epsilon(1e-6));
    CHECK(track_log_pdf({1, 0, 0, 0}, h) == doctest::Approx(kLogTwoPiSq - 0.5).epsilon(1e-14));

    // Frozen from the dense-covariance oracle: -4.81631622038459.
    h.sigma = {2, 2, 0.05, 1};
    const Residual e{1, 2, 0.1, 0.5};
    const double v = track_log_pdf(e, h);
    CHECK(v == doctest::Approx(-4.81631622038459).epsilon(1e-13));
    std::array<double, 16> cov{};
    for (int d = 0; d < 4; ++d) cov[5 * d] = h.sigma[d] * h.sigma[d];
    CHECK(v == doctest::Approx(oracle::dense_gaussian_log_pdf({1, 2, 0.1, 0.5}, cov)).epsilon(1e-13));
}

TEST_CASE("conditional densities") {
    const auto b = make_bounds({0, 500}, {0, 500}, {0, 1}, {-10, 10});
    CHECK(conditional_pdf(meas(1, 1, 0.5, 0, 0, 0), make_clutter_hypothesis(1.0), b) == doctest::Approx(2.0e-7));
    const auto h = track(1, 1, 1, 0, 0, 0.5, {1, 1, 1, 1});
    CHECK(conditional_pdf(meas(1, 1, 0.5, 0, 0, 0), h, b) == doctest::Approx(0.0253303).epsilon(1e-6));
    const auto far = meas(41, 1, 0.5, 0, 0, 0);  // 40 sigma away
    CHECK(conditional_pdf(far, h, b) == doctest::Approx(0.0));
    const double lp = log_conditional_pdf(far, h, b);
    CHECK(std::isfinite(lp));
    CHECK(lp == doctest::Approx(kLogTwoPiSq - 800.0));
}

TEST_CASE("kernel matches the direct density") {
    const auto h = track(3, 10, 20, 1.5, -2, 0.4, {3, 4, 0.1, 0.7});
    const GaussianKernel k(h);
    const auto m = meas(13, 15, 0.45, 1.2, 2, 1);
    CHECK(k.log_pdf(m) == doctest::Approx(track_log_pdf(residual(m, h), h)).epsilon(1e-14));
}

TEST_CASE("batch log-likelihood") {
    const auto b = test::box();
    const double V = measurement_volume(b);
    std::vector<Measurement> ms{meas(1, 1, 0.5, 0, 0, 0), meas(50, 60, 0.2, 3, 0, 0), meas(9, 9, 0.1, -1, 1, 1)};
    const Batch batch = validate_batch(ms, b);

    HypothesisSet only;
    only.hypotheses.push_back(make_clutter_hypothesis(1.0));
    CHECK(batch_log_likelihood(batch, only, b) == doctest::Approx(-3.0 * std::log(V)).epsilon(1e-14));

    HypothesisSet hs;
    hs.hypotheses.push_back(make_clutter_hypothesis(0.6));
    hs.hypotheses.push_back(track(1, 2, 1, 0.5, 0, 0.4, {3, 3, 0.2, 2}, 0.4));
    const Batch two = validate_batch(std::vector<Measurement>{ms[0], ms[1]}, b);
    // (a + b)(c + d) over the two rows equals the four-assignment sum.
    double expected = 0.0;
    for (std::size_t n = 0; n < 2; ++n) {
        double mix = 0.0;
        for (std::size_t h = 0; h < 2; ++h) mix += hs[h].prior * conditional_pdf(two[n], hs[h], b);
        expected += std::log(mix);
    }
    CHECK(batch_log_likelihood(two, hs, b) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(batch_log_likelihood(two, hs, b) ==
          doctest::Approx(oracle::exhaustive_association_likelihood(two, hs, b)).epsilon(1e-12));
}
