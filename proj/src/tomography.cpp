#include "dfstomo/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "dfstomo/errors.hpp"
#include "dfstomo/numeric.hpp"

namespace dfstomo {

namespace {

constexpr double PI = std::numbers::pi;
constexpr double TWO_PI = 2.0 * PI;

} // namespace

// ---------------------------------------------------------------------------
// vacuum scaling

std::vector<double> scale_to_vacuum(std::span<const SampleRecord> records,
                                    std::span<const SampleRecord> vacuum_records) {
    if (vacuum_records.size() < 1000)
        throw CalibrationError("vacuum calibration needs at least 1000 records");
    double mean = 0.0;
    for (const auto& r : vacuum_records) mean += r.x_raw;
    mean /= static_cast<double>(vacuum_records.size());
    double ss = 0.0;
    for (const auto& r : vacuum_records) {
        const double d = r.x_raw - mean;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(vacuum_records.size() - 1));
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw CalibrationError("degenerate vacuum run: zero quadrature noise");
    const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
    std::vector<double> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].x_raw * scale;
    return out;
}

// ---------------------------------------------------------------------------
// phase assignment

namespace {

struct SinusoidFit {
    double a = 0.0, b = 0.0, c = 0.0;
    double sse = 0.0;
    double var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
};

// Least squares of y ~ a cos(omega t) + b sin(omega t) + c.
SinusoidFit fit_sinusoid(std::span<const double> t, std::span<const double> y, double omega) {
    double m[3][3] = {};
    double rhs[3] = {};
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double co = std::cos(omega * t[i]);
        const double si = std::sin(omega * t[i]);
        const double row[3] = {co, si, 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
            rhs[r] += row[r] * y[i];
        }
    }
    // solve 3x3 with the inverse kept for the parameter covariance
    double inv[3][3];
    {
        const double a = m[0][0], b = m[0][1], c = m[0][2];
        const double d = m[1][0], e = m[1][1], f = m[1][2];
        const double g = m[2][0], h = m[2][1], k = m[2][2];
        const double det =
            a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g);
        inv[0][0] = (e * k - f * h) / det;
        inv[0][1] = (c * h - b * k) / det;
        inv[0][2] = (b * f - c * e) / det;
        inv[1][0] = (f * g - d * k) / det;
        inv[1][1] = (a * k - c * g) / det;
        inv[1][2] = (c * d - a * f) / det;
        inv[2][0] = (d * h - e * g) / det;
        inv[2][1] = (b * g - a * h) / det;
        inv[2][2] = (a * e - b * d) / det;
    }
    SinusoidFit out;
    out.a = inv[0][0] * rhs[0] + inv[0][1] * rhs[1] + inv[0][2] * rhs[2];
    out.b = inv[1][0] * rhs[0] + inv[1][1] * rhs[1] + inv[1][2] * rhs[2];
    out.c = inv[2][0] * rhs[0] + inv[2][1] * rhs[1] + inv[2][2] * rhs[2];
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = out.a * std::cos(omega * t[i]) + out.b * std::sin(omega * t[i]) + out.c;
        const double r = y[i] - fit;
        out.sse += r * r;
    }
    const double dof = std::max<double>(1.0, static_cast<double>(n) - 4.0);
    const double s2 = out.sse / dof;
    out.var_a = s2 * inv[0][0];
    out.var_b = s2 * inv[1][1];
    out.cov_ab = s2 * inv[0][1];
    return out;
}

struct WindowedMeans {
    std::vector<double> t; // window centers, in sample index units
    std::vector<double> y;
};

WindowedMeans window_means(std::span<const double> x, std::size_t w) {
    WindowedMeans out;
    const std::size_t m = x.size() / w;
    out.t.resize(m);
    out.y.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i) s += x[i];
        out.y[k] = s / static_cast<double>(w);
        out.t[k] = static_cast<double>(k * w) + 0.5 * static_cast<double>(w - 1);
    }
    return out;
}

// Dominant nonzero DFT bin of the (centered) windowed means.
std::size_t dominant_bin(std::span<const double> y) {
    const std::size_t m = y.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(m);
    std::size_t best = 1;
    double best_power = -1.0;
    for (std::size_t f = 1; f <= m / 2; ++f) {
        std::complex<double> acc = 0.0;
        const double wf = TWO_PI * static_cast<double>(f) / static_cast<double>(m);
        for (std::size_t k = 0; k < m; ++k)
            acc += (y[k] - mean) * std::polar(1.0, -wf * static_cast<double>(k));
        const double p = std::norm(acc);
        if (p > best_power) {
            best_power = p;
            best = f;
        }
    }
    return best;
}

double refine_omega(std::span<const double> t, std::span<const double> y, double lo, double hi) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = fit_sinusoid(t, y, x1).sse;
    double f2 = fit_sinusoid(t, y, x2).sse;
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = fit_sinusoid(t, y, x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = fit_sinusoid(t, y, x2).sse;
        }
    }
    return 0.5 * (lo + hi);
}

void fill_fit(PhaseFit& out, const SinusoidFit& fit, double omega, std::size_t w) {
    out.omega = omega;
    out.offset = fit.c;
    out.amplitude = std::hypot(fit.a, fit.b);
    out.phi0 = std::atan2(-fit.b, fit.a); // a cos + b sin = A cos(omega t + phi0)
    out.window = w;
    out.amplitude_stderr = 0.0;
    if (out.amplitude > 0.0) {
        const double ca = fit.a / out.amplitude, cb = fit.b / out.amplitude;
        const double var =
            ca * ca * fit.var_a + cb * cb * fit.var_b + 2.0 * ca * cb * fit.cov_ab;
        out.amplitude_stderr = std::sqrt(std::max(0.0, var));
    }
}

PhaseFit ramp_pass(std::span<const double> scaled, std::size_t w) {
    const WindowedMeans wm = window_means(scaled, w);
    const std::size_t m = wm.y.size();
    const std::size_t bin = dominant_bin(wm.y);
    const double bin_width = TWO_PI / (static_cast<double>(m) * static_cast<double>(w));
    const double seed = static_cast<double>(bin) * bin_width;

    // Decide detectability at the seeded bin itself.  The dominant bin is the
    // maximum over ~m/2 scanned frequencies, so the 4-sigma amplitude rule is
    // applied with a Bonferroni correction for the scan; selection otherwise
    // promotes pure-noise spectra past a naive 4 x stderr cut.
    PhaseFit out;
    fill_fit(out, fit_sinusoid(wm.t, wm.y, seed), seed, w);
    const double scanned = std::max(1.0, 0.5 * static_cast<double>(m));
    out.scan_bins = scanned;
    const double threshold = std::sqrt(25.0 + 2.0 * std::log(scanned));
    out.determinate = out.amplitude_stderr > 0.0 &&
                      out.amplitude >= 4.0 * out.amplitude_stderr &&
                      out.amplitude >= threshold * out.amplitude_stderr;
    if (!out.determinate) return out;

    const double omega =
        refine_omega(wm.t, wm.y, std::max(0.25 * bin_width, seed - 1.2 * bin_width),
                     seed + 1.2 * bin_width);
    fill_fit(out, fit_sinusoid(wm.t, wm.y, omega), omega, w);
    out.scan_bins = scanned;
    out.determinate = true;
    return out;
}

} // namespace

PhaseFit fit_phase_ramp(std::span<const double> scaled, std::optional<std::size_t> period_hint) {
    if (scaled.size() < 64) throw PhaseIndeterminateError("too few samples for a ramp fit");
    std::size_t w;
    if (period_hint && *period_hint >= 32) {
        w = std::max<std::size_t>(8, *period_hint / 16);
    } else {
        // Cap the number of windows so that scanning the spectrum of pure
        // noise stays well below the 4-sigma detection threshold.
        w = std::max<std::size_t>(16, scaled.size() / 256);
    }
    w = std::min(w, scaled.size() / 4);
    PhaseFit fit = ramp_pass(scaled, w);
    if (!fit.determinate) return fit;
    // If the window spans a large phase interval the means are attenuated;
    // refit with a window matched to the detected period.
    if (fit.omega * static_cast<double>(w) > 0.5) {
        const std::size_t w2 = std::clamp<std::size_t>(
            static_cast<std::size_t>(0.5 / fit.omega), 8, scaled.size() / 8);
        if (w2 < w) {
            PhaseFit refined = ramp_pass(scaled, w2);
            if (refined.determinate) return refined;
        }
    }
    return fit;
}

CalibratedSamples assign_phases(std::span<const double> scaled,
                                std::optional<std::size_t> period_hint) {
    const PhaseFit fit = fit_phase_ramp(scaled, period_hint);
    if (!fit.determinate)
        throw PhaseIndeterminateError("no phase ramp detectable (amplitude below 4 sigma)");
    CalibratedSamples out;
    out.x.assign(scaled.begin(), scaled.end());
    out.theta.resize(scaled.size());
    for (std::size_t m = 0; m < scaled.size(); ++m) {
        double th = std::fmod(fit.omega * static_cast<double>(m) + fit.phi0, TWO_PI);
        if (th < 0.0) th += TWO_PI;
        out.theta[m] = th;
    }
    return out;
}

// ---------------------------------------------------------------------------
// filtered back-projection

double fbp_kernel(double x, double k_c) {
    if (!(k_c > 0.0)) throw std::invalid_argument("k_c must be positive");
    const double u = k_c * x;
    if (std::abs(u) < 0.25) {
        const double u2 = u * u;
        return k_c * k_c *
               (0.5 +
                u2 * (-1.0 / 8.0 +
                      u2 * (1.0 / 144.0 + u2 * (-1.0 / 5760.0 + u2 * (1.0 / 403200.0)))));
    }
    return (std::cos(u) + u * std::sin(u) - 1.0) / (x * x);
}

int GridSpec::count() const {
    if (!(step > 0.0) || !(max > min)) throw ConfigError("invalid grid spec");
    return static_cast<int>(std::floor((max - min) / step + 0.5)) + 1;
}

GridSpec GridSpec::parse(std::string_view text) {
    GridSpec g;
    const std::string s(text);
    char extra = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &g.min, &g.max, &g.step, &extra) != 3)
        throw ConfigError("grid spec must be min:max:step, got '" + s + "'");
    g.count(); // validates
    return g;
}

std::string GridSpec::format() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.10g:%.10g:%.10g", min, max, step);
    return buf;
}

void check_phase_coverage(std::span<const double> theta) {
    std::array<std::size_t, 10> hist{};
    for (double th : theta) {
        double t = std::fmod(th, PI);
        if (t < 0.0) t += PI;
        int bin = static_cast<int>(t / PI * 10.0);
        bin = std::clamp(bin, 0, 9);
        ++hist[static_cast<std::size_t>(bin)];
    }
    for (std::size_t b = 0; b < hist.size(); ++b)
        if (hist[b] == 0)
            throw PhaseCoverageError("phase decile " + std::to_string(b) +
                                     " of theta mod pi is empty");
}

namespace {

struct ProjectedSamples {
    std::vector<double> cos_t, sin_t, x;
};

ProjectedSamples project(const CalibratedSamples& s) {
    ProjectedSamples p;
    p.cos_t.resize(s.size());
    p.sin_t.resize(s.size());
    p.x.assign(s.x.begin(), s.x.end());
    for (std::size_t i = 0; i < s.size(); ++i) {
        p.cos_t[i] = std::cos(s.theta[i]);
        p.sin_t[i] = std::sin(s.theta[i]);
    }
    return p;
}

double fbp_node(const ProjectedSamples& p, double X, double P, double k_c) {
    const std::size_t n = p.x.size();
    const double sum = pairwise_sum(std::size_t{0}, n, [&](std::size_t i) {
        return fbp_kernel(X * p.cos_t[i] + P * p.sin_t[i] - p.x[i], k_c);
    });
    return sum / (TWO_PI * static_cast<double>(n));
}

} // namespace

WignerGrid reconstruct_wigner_fbp(const CalibratedSamples& samples, const GridSpec& x_axis,
                                  const GridSpec& p_axis, double k_c, int threads) {
    if (samples.size() == 0) throw std::invalid_argument("no samples");
    check_phase_coverage(samples.theta);
    const ProjectedSamples p = project(samples);

    WignerGrid grid;
    grid.x_axis = x_axis;
    grid.p_axis = p_axis;
    grid.k_c = k_c;
    grid.n_samples = samples.size();
    const int nx = x_axis.count();
    const int np = p_axis.count();
    grid.values.assign(static_cast<std::size_t>(nx) * np, 0.0);

    parallel_chunks(static_cast<std::size_t>(np), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ip = lo; ip < hi; ++ip) {
            const double P = p_axis.coord(static_cast<int>(ip));
            for (int ix = 0; ix < nx; ++ix)
                grid.values[ip * nx + ix] = fbp_node(p, x_axis.coord(ix), P, k_c);
        }
    });
    return grid;
}

double fbp_point(const CalibratedSamples& samples, double X, double P, double k_c) {
    if (samples.size() == 0) throw std::invalid_argument("no samples");
    return fbp_node(project(samples), X, P, k_c);
}

// ---------------------------------------------------------------------------
// inverse Abel reconstruction

namespace {

double silverman_bandwidth(std::span<const double> x) {
    const std::size_t n = x.size();
    const double sigma = std::sqrt(sample_variance(x));
    std::vector<double> tmp(x.begin(), x.end());
    const std::size_t q1 = n / 4, q3 = (3 * n) / 4;
    std::nth_element(tmp.begin(), tmp.begin() + q1, tmp.end());
    const double lo = tmp[q1];
    std::nth_element(tmp.begin(), tmp.begin() + q3, tmp.end());
    const double hi = tmp[q3];
    const double iqr = hi - lo;
    double spread = sigma;
    if (iqr > 0.0) spread = std::min(sigma, iqr / 1.349);
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    return std::max(h, 1e-6);
}

constexpr double INV_SQRT_2PI = 0.39894228040143267793994605993438;

double gauss_kernel(double z) { return INV_SQRT_2PI * std::exp(-0.5 * z * z); }

// Symmetrized KDE derivative table on t = j * dt, t in [0, t_max].
struct KdeDerivTable {
    std::vector<double> dp;
    double dt = 0.0;
    double h = 0.0;
    double t_max = 0.0;

    double operator()(double t) const {
        if (t <= 0.0 || t >= t_max) return 0.0;
        const double j = t / dt;
        const std::size_t j0 = static_cast<std::size_t>(j);
        if (j0 + 1 >= dp.size()) return 0.0;
        const double frac = j - static_cast<double>(j0);
        return dp[j0] * (1.0 - frac) + dp[j0 + 1] * frac;
    }
};

KdeDerivTable build_kde_deriv(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("no samples");
    KdeDerivTable tab;
    tab.h = silverman_bandwidth(x);
    double amax = 0.0;
    for (double v : x) amax = std::max(amax, std::abs(v));
    tab.t_max = amax + 6.0 * tab.h + 0.5;
    tab.dt = std::clamp(tab.h / 5.0, 5e-4, 5e-3);
    const std::size_t nodes = static_cast<std::size_t>(tab.t_max / tab.dt) + 2;
    tab.dp.assign(nodes, 0.0);
    const double inv_nh2 =
        1.0 / (static_cast<double>(x.size()) * tab.h * tab.h);

    // sorted copy: deterministic deposit order regardless of input permutation
    std::vector<double> xs(x.begin(), x.end());
    std::sort(xs.begin(), xs.end());

    auto deposit = [&](double center, double weight) {
        const double lo = center - 6.0 * tab.h;
        const double hi = center + 6.0 * tab.h;
        if (hi < 0.0) return;
        std::size_t j0 = lo <= 0.0 ? 0 : static_cast<std::size_t>(lo / tab.dt);
        std::size_t j1 = std::min(nodes - 1, static_cast<std::size_t>(std::max(0.0, hi) / tab.dt) + 1);
        for (std::size_t j = j0; j <= j1; ++j) {
            const double z = (static_cast<double>(j) * tab.dt - center) / tab.h;
            tab.dp[j] += weight * (-z) * gauss_kernel(z) * inv_nh2;
        }
    };
    for (double xi : xs) {
        deposit(xi, 0.5);
        deposit(-xi, 0.5);
    }
    return tab;
}

double abel_value(const KdeDerivTable& tab, double r) {
    if (r <= 0.0) {
        // W(0) = -(1/pi) Integral dp(t)/t dt; the integrand tends to p''(0).
        std::vector<double> g(tab.dp.size());
        g[0] = tab.dp[1] / tab.dt;
        for (std::size_t j = 1; j < g.size(); ++j)
            g[j] = tab.dp[j] / (static_cast<double>(j) * tab.dt);
        return -simpson_table(g, tab.dt) / PI;
    }
    if (r >= tab.t_max) return 0.0;
    const double u_max = std::acosh(tab.t_max / r);
    const int n_u = 257;
    const double du = u_max / (n_u - 1);
    std::vector<double> g(static_cast<std::size_t>(n_u));
    for (int j = 0; j < n_u; ++j) g[j] = tab(r * std::cosh(j * du));
    return -simpson_table(g, du) / PI;
}

} // namespace

RadialProfile reconstruct_wigner_abel(std::span<const double> scaled, double r_max,
                                      double r_step) {
    const KdeDerivTable tab = build_kde_deriv(scaled);
    RadialProfile prof;
    prof.r_step = r_step;
    prof.n_samples = scaled.size();
    const int nk = static_cast<int>(std::floor(r_max / r_step + 0.5)) + 1;
    prof.w.resize(static_cast<std::size_t>(nk));
    for (int k = 0; k < nk; ++k) prof.w[k] = abel_value(tab, k * r_step);
    return prof;
}

std::vector<double> abel_point_weights(std::span<const double> scaled, double r0,
                                       double table_step) {
    const double h = silverman_bandwidth(scaled);
    double amax = 0.0;
    for (double v : scaled) amax = std::max(amax, std::abs(v));
    const double x_max = amax + 1e-9;
    const double t_max = amax + 6.0 * h + 0.5;

    // per-sample kernel: psi(t, x) = -(1/(2h^2)) [z1 phi(z1) + z2 phi(z2)],
    // z1 = (t-x)/h, z2 = (t+x)/h; weight w(x) = -(1/pi) Integral psi(t(u), x) du
    auto psi = [&](double t, double x) {
        const double z1 = (t - x) / h;
        const double z2 = (t + x) / h;
        return -0.5 / (h * h) * (z1 * gauss_kernel(z1) + z2 * gauss_kernel(z2));
    };

    const std::size_t nodes = static_cast<std::size_t>(x_max / table_step) + 2;
    std::vector<double> wtab(nodes, 0.0);
    if (r0 <= 0.0) {
        const double dt = std::clamp(h / 5.0, 5e-4, 5e-3);
        const std::size_t nt = static_cast<std::size_t>(t_max / dt) + 2;
        for (std::size_t jx = 0; jx < nodes; ++jx) {
            const double xv = static_cast<double>(jx) * table_step;
            std::vector<double> g(nt);
            const double dpsi0 = (psi(dt, xv) - psi(0.0, xv)) / dt; // psi(0,x)=0
            g[0] = dpsi0;
            for (std::size_t j = 1; j < nt; ++j)
                g[j] = psi(static_cast<double>(j) * dt, xv) / (static_cast<double>(j) * dt);
            wtab[jx] = -simpson_table(g, dt) / PI;
        }
    } else {
        const double u_max = std::acosh(std::max(1.0 + 1e-12, t_max / r0));
        const int n_u = 257;
        const double du = u_max / (n_u - 1);
        for (std::size_t jx = 0; jx < nodes; ++jx) {
            const double xv = static_cast<double>(jx) * table_step;
            std::vector<double> g(static_cast<std::size_t>(n_u));
            for (int j = 0; j < n_u; ++j) g[j] = psi(r0 * std::cosh(j * du), xv);
            wtab[jx] = -simpson_table(g, du) / PI;
        }
    }

    std::vector<double> out(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double xv = std::abs(scaled[i]);
        const double j = xv / table_step;
        std::size_t j0 = static_cast<std::size_t>(j);
        j0 = std::min(j0, nodes - 2);
        const double frac = j - static_cast<double>(j0);
        out[i] = wtab[j0] * (1.0 - frac) + wtab[j0 + 1] * frac;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pattern functions

namespace {

constexpr int PATTERN_N_MAX = 10;
constexpr double PATTERN_X_MAX = 8.0;
constexpr double PATTERN_DX = 1.0 / 512.0;

struct PatternTable {
    std::vector<double> f;  // f_nn on x = j * PATTERN_DX
    std::vector<double> fp; // df/dx on the same nodes
};

// Irregular solution phi'' = (x^2 - 2n - 1) phi integrated outward by RK4,
// opposite parity to psi_n so that f_nn is even.  The overall constant is
// fixed afterwards by the delta_mn sampling contract.
PatternTable build_pattern_table(int n) {
    const std::size_t nodes = static_cast<std::size_t>(PATTERN_X_MAX / PATTERN_DX) + 1;
    const int sub = 8;
    const double h = PATTERN_DX / sub;

    std::vector<double> phi(nodes), dphi(nodes);
    double y = (n % 2 == 0) ? 0.0 : 1.0;
    double dy = (n % 2 == 0) ? 1.0 : 0.0;
    auto acc = [&](double x, double yy) { return (x * x - 2.0 * n - 1.0) * yy; };
    phi[0] = y;
    dphi[0] = dy;
    double x = 0.0;
    for (std::size_t j = 1; j < nodes; ++j) {
        for (int s = 0; s < sub; ++s) {
            const double k1y = dy, k1d = acc(x, y);
            const double k2y = dy + 0.5 * h * k1d, k2d = acc(x + 0.5 * h, y + 0.5 * h * k1y);
            const double k3y = dy + 0.5 * h * k2d, k3d = acc(x + 0.5 * h, y + 0.5 * h * k2y);
            const double k4y = dy + h * k3d, k4d = acc(x + h, y + h * k3y);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            x += h;
        }
        phi[j] = y;
        dphi[j] = dy;
    }

    PatternTable tab;
    tab.f.resize(nodes);
    tab.fp.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const double xj = static_cast<double>(j) * PATTERN_DX;
        const double psi = fock_wavefunction(n, xj);
        const double dpsi = fock_wavefunction_derivative(n, xj);
        tab.f[j] = dpsi * phi[j] + psi * dphi[j];
        tab.fp[j] = 2.0 * ((xj * xj - 2.0 * n - 1.0) * psi * phi[j] + dpsi * dphi[j]);
    }

    // normalize: Integral p_n f_nn dx = 1 (both factors are even in x)
    std::vector<double> g(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const double xj = static_cast<double>(j) * PATTERN_DX;
        const double psi = fock_wavefunction(n, xj);
        g[j] = psi * psi * tab.f[j];
    }
    const double c = 2.0 * simpson_table(g, PATTERN_DX);
    for (std::size_t j = 0; j < nodes; ++j) {
        tab.f[j] /= c;
        tab.fp[j] /= c;
    }
    return tab;
}

const PatternTable& pattern_table(int n) {
    static std::array<std::unique_ptr<PatternTable>, PATTERN_N_MAX + 1> tables;
    static std::array<std::once_flag, PATTERN_N_MAX + 1> flags;
    std::call_once(flags[static_cast<std::size_t>(n)], [n] {
        tables[static_cast<std::size_t>(n)] = std::make_unique<PatternTable>(build_pattern_table(n));
    });
    return *tables[static_cast<std::size_t>(n)];
}

} // namespace

double pattern_function(int n, double x) {
    if (n < 0 || n > PATTERN_N_MAX)
        throw std::invalid_argument("pattern functions are tabulated for n <= 10");
    const double ax = std::abs(x); // f_nn is even
    if (!(ax <= PATTERN_X_MAX))
        throw std::out_of_range("pattern function argument outside the tabulated |x| <= 8");
    const PatternTable& tab = pattern_table(n);
    const double j = ax / PATTERN_DX;
    std::size_t j0 = static_cast<std::size_t>(j);
    if (j0 + 1 >= tab.f.size()) j0 = tab.f.size() - 2;
    const double t = j - static_cast<double>(j0);
    // cubic Hermite on [x0, x1]
    const double f0 = tab.f[j0], f1 = tab.f[j0 + 1];
    const double d0 = tab.fp[j0] * PATTERN_DX, d1 = tab.fp[j0 + 1] * PATTERN_DX;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * d0 +
           (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * d1;
}

// ---------------------------------------------------------------------------
// diagonal estimation

namespace {

constexpr std::uint64_t STREAM_BOOTSTRAP = 0xD1A60000ull;

std::vector<DiagonalEstimate> diagonals_core(std::span<const double> x, int n_max,
                                             int bootstrap_reps, std::uint64_t seed) {
    if (n_max < 0 || n_max > PATTERN_N_MAX)
        throw std::invalid_argument("n_max must lie in [0, 10]");
    if (x.empty()) throw std::invalid_argument("no samples");
    const std::size_t n_samp = x.size();
    const std::size_t rows = static_cast<std::size_t>(n_max) + 1;

    std::vector<std::vector<double>> f(rows);
    for (std::size_t n = 0; n < rows; ++n) {
        f[n].resize(n_samp);
        for (std::size_t i = 0; i < n_samp; ++i)
            f[n][i] = pattern_function(static_cast<int>(n), x[i]);
    }

    std::vector<DiagonalEstimate> out(rows);
    for (std::size_t n = 0; n < rows; ++n) {
        out[n].n = static_cast<int>(n);
        out[n].rho = sample_mean(f[n]);
    }

    if (bootstrap_reps >= 2) {
        std::vector<std::vector<double>> means(rows,
                                               std::vector<double>(bootstrap_reps, 0.0));
        std::vector<std::size_t> idx(n_samp);
        for (int rep = 0; rep < bootstrap_reps; ++rep) {
            RandomStream rng = RandomStream::split(seed, STREAM_BOOTSTRAP,
                                                   static_cast<std::uint64_t>(rep));
            for (std::size_t i = 0; i < n_samp; ++i)
                idx[i] = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_samp));
            for (std::size_t n = 0; n < rows; ++n) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_samp; ++i) s += f[n][idx[i]];
                means[n][static_cast<std::size_t>(rep)] = s / static_cast<double>(n_samp);
            }
        }
        for (std::size_t n = 0; n < rows; ++n)
            out[n].std_error = std::sqrt(sample_variance(means[n]));
    }
    return out;
}

} // namespace

std::vector<DiagonalEstimate> estimate_diagonals(const CalibratedSamples& samples, int n_max,
                                                 int bootstrap_reps, std::uint64_t seed) {
    check_phase_coverage(samples.theta);
    return diagonals_core(samples.x, n_max, bootstrap_reps, seed);
}

std::vector<DiagonalEstimate> estimate_diagonals(std::span<const double> x, int n_max,
                                                 int bootstrap_reps, std::uint64_t seed) {
    return diagonals_core(x, n_max, bootstrap_reps, seed);
}

} // namespace dfstomo
