#include "dltrack/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace dltrack::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Per-dimension normal log-density summed over the four dimensions.
double diag_log_pdf(const Vec4& e, const Vec4& sigma) {
    double s = 0.0;
    for (std::size_t d = kDims; d-- > 0;) {
        const double v = sigma[d] * sigma[d];
        s += -0.5 * std::log(2.0 * kPi * v) - e[d] * e[d] / (2.0 * v);
    }
    return s;
}

double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double exhaustive_association_likelihood(const Batch& batch, const HypothesisSet& hs,
                                         const MeasurementBounds& bounds) {
    const std::size_t N = batch.size();
    const std::size_t H = hs.size();
    if (N > kMaxN || H > kMaxH || std::pow(static_cast<double>(H), static_cast<double>(N)) > kMaxAssignments) {
        throw size_limit("exhaustive enumeration limited to N <= 12, H <= 3, H^N <= 1e6 (got N=" +
                         std::to_string(N) + ", H=" + std::to_string(H) + ")");
    }
    double volume = 1.0;
    for (const auto& iv : bounds.dims) volume *= (iv.max - iv.min);

    // log r(h) + log pdf(n|h) table
    std::vector<double> w(N * H);
    for (std::size_t n = 0; n < N; ++n) {
        const Measurement& m = batch[n];
        for (std::size_t h = 0; h < H; ++h) {
            const TrackHypothesis& th = hs[h];
            const double lr = th.prior > 0.0 ? std::log(th.prior) : -INFINITY;
            double lp;
            if (th.is_clutter()) {
                lp = -std::log(volume);
            } else {
                const Vec4 e{m.x - th.x0 - th.vx * m.t, m.y - th.y0 - th.vy * m.t, m.amplitude - th.amplitude,
                             m.doppler - th.doppler};
                lp = diag_log_pdf(e, th.sigma);
            }
            w[n * H + h] = lr + lp;
        }
    }

    // Odometer over assignment vectors, last measurement fastest.
    std::vector<std::size_t> assign(N, 0);
    double total = -INFINITY;
    while (true) {
        double term = 0.0;
        for (std::size_t n = N; n-- > 0;) term += w[n * H + assign[n]];
        total = log_add(total, term);
        std::size_t k = N;
        while (k > 0) {
            --k;
            if (++assign[k] < H) break;
            assign[k] = 0;
            if (k == 0) return total;
        }
        if (N == 0) return total;
    }
}

double dense_gaussian_log_pdf(const Vec4& e, const std::array<double, 16>& cov) {
    // Gauss-Jordan on [C | e] gives C^{-1} e and det C from the pivots.
    double a[4][5];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] = cov[4 * i + j];
        a[i][4] = e[i];
    }
    double det = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        if (a[piv][c] == 0.0) throw invalid_covariance("singular covariance");
        if (piv != c) {
            for (int j = 0; j < 5; ++j) std::swap(a[piv][j], a[c][j]);
            det = -det;
        }
        det *= a[c][c];
        for (int r = 0; r < 4; ++r) {
            if (r == c) continue;
            const double k = a[r][c] / a[c][c];
            for (int j = c; j < 5; ++j) a[r][j] -= k * a[c][j];
        }
    }
    if (!(det > 0.0)) throw invalid_covariance("covariance is not positive definite");
    double quad = 0.0;
    for (int i = 0; i < 4; ++i) quad += e[i] * (a[i][4] / a[i][i]);
    return -2.0 * std::log(2.0 * kPi) - 0.5 * std::log(det) - 0.5 * quad;
}

double weighted_objective(const Batch& batch, std::span<const double> f, const TrackParams& p,
                          const Vec4& sigma) {
    double s = 0.0;
    for (std::size_t n = batch.size(); n-- > 0;) {
        if (f[n] == 0.0) continue;
        const Measurement& m = batch[n];
        const Vec4 e{m.x - (p.x0 + p.vx * m.t), m.y - (p.y0 + p.vy * m.t), m.amplitude - p.a, m.doppler - p.vx};
        s += f[n] * diag_log_pdf(e, sigma);
    }
    return s;
}

namespace {

// Minimizes g on a line starting at x with initial step s: expands a bracket
// then golden-section search down to the given absolute tolerance.
double golden_minimize(const std::function<double(double)>& g, double x, double s, double tol) {
    double fx = g(x);
    double lo = x - s, hi = x + s;
    double flo = g(lo), fhi = g(hi);
    int guard = 0;
    while (flo < fx && guard++ < 200) {
        hi = x;
        fhi = fx;
        x = lo;
        fx = flo;
        lo = x - 2.0 * (hi - x);
        flo = g(lo);
    }
    guard = 0;
    while (fhi < fx && guard++ < 200) {
        lo = x;
        flo = fx;
        x = hi;
        fx = fhi;
        hi = x + 2.0 * (x - lo);
        fhi = g(hi);
    }
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = g(c), fd = g(d);
    for (int i = 0; i < 400 && (b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = g(d);
        }
    }
    return 0.5 * (a + b);
}

// One Newton step from central-difference derivatives. The objective is
// quadratic in the parameters, so a single step lands on the optimum up to
// rounding; the golden-section cycles only need to get close.
bool newton_polish(const std::function<double(const std::array<double, 5>&)>& obj, std::array<double, 5>& p) {
    constexpr int K = 5;
    constexpr double h = 1e-3;
    double H[K][K + 1];
    const double f0 = obj(p);
    auto at = [&](int i, double di, int j, double dj) {
        std::array<double, 5> q = p;
        q[i] += di;
        q[j] += dj;
        return obj(q);
    };
    for (int i = 0; i < K; ++i) {
        H[i][K] = -(at(i, h, i, 0.0) - at(i, -h, i, 0.0)) / (2.0 * h);
        H[i][i] = (at(i, h, i, 0.0) - 2.0 * f0 + at(i, -h, i, 0.0)) / (h * h);
        for (int j = 0; j < i; ++j) {
            const double v = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
            H[i][j] = v;
            H[j][i] = v;
        }
    }
    for (int c = 0; c < K; ++c) {
        int piv = c;
        for (int r = c + 1; r < K; ++r) {
            if (std::abs(H[r][c]) > std::abs(H[piv][c])) piv = r;
        }
        if (H[piv][c] == 0.0) return false;
        if (piv != c) {
            for (int j = 0; j <= K; ++j) std::swap(H[piv][j], H[c][j]);
        }
        for (int r = 0; r < K; ++r) {
            if (r == c) continue;
            const double k = H[r][c] / H[c][c];
            for (int j = c; j <= K; ++j) H[r][j] -= k * H[c][j];
        }
    }
    std::array<double, 5> q = p;
    for (int i = 0; i < K; ++i) q[i] += H[i][K] / H[i][i];
    // Near the optimum the objective change is below rounding, so only reject
    // a step that makes things clearly worse.
    if (!(obj(q) <= f0 + 1e-12 * std::max(1.0, std::abs(f0)))) return false;
    p = q;
    return true;
}

}  // namespace

TrackParams numeric_mstep(const Batch& batch, std::span<const double> f, const TrackParams& initial,
                          const Vec4& sigma, double tol) {
    if (batch.size() > 100) throw size_limit("numeric_mstep is limited to N <= 100");
    if (f.size() != batch.size()) throw std::invalid_argument("numeric_mstep: weight length mismatch");
    std::array<double, 5> p = initial.as_array();
    auto obj = [&](const std::array<double, 5>& q) {
        return -weighted_objective(batch, f, TrackParams::from_array(q), sigma);
    };
    // The objective is a convex quadratic; a cyclic search over the coordinates
    // plus the (x0, vx) and (y0, vy) diagonals converges even when t is far
    // from zero and those pairs are strongly correlated.
    double tbar = 0.0, wsum = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        tbar += f[n] * batch[n].t;
        wsum += f[n];
    }
    tbar = wsum > 0.0 ? tbar / wsum : 0.0;
    // Moving v by 1 and the intercept by -tbar keeps the mid-time prediction fixed.
    const std::array<std::array<double, 5>, 7> dirs{{
        {1, 0, 0, 0, 0},
        {0, 1, 0, 0, 0},
        {0, 0, 1, 0, 0},
        {0, 0, 0, 1, 0},
        {0, 0, 0, 0, 1},
        {-tbar, 0, 1, 0, 0},
        {0, -tbar, 0, 1, 0},
    }};

    double current = obj(p);
    for (int cycle = 0; cycle < 5000; ++cycle) {
        const auto before = p;
        const double start = current;
        for (const auto& dir : dirs) {
            double scale = 0.0;
            for (std::size_t i = 0; i < 5; ++i) scale = std::max(scale, std::abs(p[i]) * std::abs(dir[i]));
            const double step = std::max(1.0, scale) * 0.5;
            auto g = [&](double s) {
                std::array<double, 5> q = p;
                for (std::size_t i = 0; i < 5; ++i) q[i] += s * dir[i];
                return obj(q);
            };
            const double s = golden_minimize(g, 0.0, step, tol * 1e-3);
            const double gs = g(s);
            if (gs < current) {  // line searches near the optimum only return rounding noise
                for (std::size_t i = 0; i < 5; ++i) p[i] += s * dir[i];
                current = gs;
            }
        }
        double change = 0.0;
        for (std::size_t i = 0; i < 5; ++i) change = std::max(change, std::abs(p[i] - before[i]));
        // Stop once the parameters stop moving or the objective stops improving
        // beyond what double rounding can resolve.
        if (change < tol || start - current <= 1e-14 * std::max(1.0, std::abs(start))) {
            for (int k = 0; k < 2 && newton_polish(obj, p); ++k) {
            }
            return TrackParams::from_array(p);
        }
    }
    throw oracle_failure("numeric_mstep: coordinate search did not settle");
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& objective,
                                               std::span<const double> params, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
    std::vector<double> x(params.begin(), params.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + step;
        const double up = objective(x);
        x[i] = keep - step;
        const double down = objective(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

std::pair<double, double> weighted_line_fit(std::span<const double> f, std::span<const double> t,
                                            std::span<const double> y) {
    double w = 0.0, tb = 0.0, yb = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        w += f[n];
        tb += f[n] * t[n];
        yb += f[n] * y[n];
    }
    tb /= w;
    yb /= w;
    double stt = 0.0, sty = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        stt += f[n] * (t[n] - tb) * (t[n] - tb);
        sty += f[n] * (t[n] - tb) * (y[n] - yb);
    }
    if (!(stt > 0.0)) throw degenerate_geometry("line fit needs two distinct times");
    const double v = sty / stt;
    return {yb - v * tb, v};
}

double weighted_mean_square(std::span<const double> f, std::span<const double> e) {
    double w = 0.0;
    for (double x : f) w += x;
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += (f[n] / w) * e[n] * e[n];
    return s;
}

}  // namespace dltrack::oracle
