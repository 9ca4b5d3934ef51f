#include "dfstomo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dfstomo/errors.hpp"
#include "dfstomo/numeric.hpp"
#include "dfstomo/random.hpp"

namespace dfstomo {

namespace {

constexpr double SQRT2 = std::numbers::sqrt2;
constexpr std::uint64_t STREAM_ETA_BOOT = 0xE7A0ull;
constexpr std::uint64_t STREAM_NEG_BOOT = 0x9E60ull;

} // namespace

AlphaFit fit_alpha(const CalibratedSamples& samples) {
    const std::size_t n = samples.size();
    if (n < 64) throw std::invalid_argument("too few samples for an amplitude fit");
    const std::size_t w = std::max<std::size_t>(16, n / 2000);
    const std::size_t m = n / w;

    // windowed means of the value and of the regressors, so phase wrapping
    // inside a window is harmless
    std::vector<double> yb(m), cb(m), sb(m);
    for (std::size_t k = 0; k < m; ++k) {
        double sy = 0.0, sc = 0.0, ss = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i) {
            sy += samples.x[i];
            sc += std::cos(samples.theta[i]);
            ss += std::sin(samples.theta[i]);
        }
        yb[k] = sy / static_cast<double>(w);
        cb[k] = sc / static_cast<double>(w);
        sb[k] = ss / static_cast<double>(w);
    }

    // least squares y ~ a c + b s + c0
    double mtx[3][3] = {};
    double rhs[3] = {};
    for (std::size_t k = 0; k < m; ++k) {
        const double row[3] = {cb[k], sb[k], 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) mtx[r][c] += row[r] * row[c];
            rhs[r] += row[r] * yb[k];
        }
    }
    double inv[3][3];
    {
        const double a = mtx[0][0], b = mtx[0][1], c = mtx[0][2];
        const double d = mtx[1][0], e = mtx[1][1], f = mtx[1][2];
        const double g = mtx[2][0], h = mtx[2][1], k2 = mtx[2][2];
        const double det =
            a * (e * k2 - f * h) - b * (d * k2 - f * g) + c * (d * h - e * g);
        if (std::abs(det) < 1e-12)
            throw std::invalid_argument("amplitude fit is indeterminate for these phases");
        inv[0][0] = (e * k2 - f * h) / det;
        inv[0][1] = (c * h - b * k2) / det;
        inv[0][2] = (b * f - c * e) / det;
        inv[1][0] = (f * g - d * k2) / det;
        inv[1][1] = (a * k2 - c * g) / det;
        inv[1][2] = (c * d - a * f) / det;
        inv[2][0] = (d * h - e * g) / det;
        inv[2][1] = (b * g - a * h) / det;
        inv[2][2] = (a * e - b * d) / det;
    }
    const double a = inv[0][0] * rhs[0] + inv[0][1] * rhs[1] + inv[0][2] * rhs[2];
    const double b = inv[1][0] * rhs[0] + inv[1][1] * rhs[1] + inv[1][2] * rhs[2];
    const double c0 = inv[2][0] * rhs[0] + inv[2][1] * rhs[1] + inv[2][2] * rhs[2];

    double sse = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = yb[k] - (a * cb[k] + b * sb[k] + c0);
        sse += r * r;
    }
    const double s2 = sse / std::max<double>(1.0, static_cast<double>(m) - 3.0);
    const double var_a = s2 * inv[0][0];
    const double var_b = s2 * inv[1][1];
    const double cov_ab = s2 * inv[0][1];

    AlphaFit out;
    const double amp = std::hypot(a, b); // = sqrt(2) |alpha|
    out.alpha_abs = amp / SQRT2;
    out.alpha_phase = std::atan2(b, a);
    if (amp > 0.0) {
        const double ca = a / amp, cb2 = b / amp;
        const double var_amp =
            ca * ca * var_a + cb2 * cb2 * var_b + 2.0 * ca * cb2 * cov_ab;
        out.alpha_abs_stderr = std::sqrt(std::max(0.0, var_amp)) / SQRT2;
        const double var_ph = (b * b * var_a + a * a * var_b - 2.0 * a * b * cov_ab) /
                              (amp * amp * amp * amp);
        out.alpha_phase_stderr = std::sqrt(std::max(0.0, var_ph));
    }
    return out;
}

EtaFit fit_eta(const CalibratedSamples& samples, double alpha_abs, double alpha_phase,
               int bootstrap_reps, std::uint64_t seed) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("too few samples");
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i)
        resid[i] = samples.x[i] - SQRT2 * alpha_abs * std::cos(samples.theta[i] - alpha_phase);

    EtaFit out;
    out.eta = sample_variance(resid) - 0.5;
    if (bootstrap_reps >= 2) {
        std::vector<double> etas(static_cast<std::size_t>(bootstrap_reps));
        std::vector<double> draw(n);
        for (int rep = 0; rep < bootstrap_reps; ++rep) {
            RandomStream rng =
                RandomStream::split(seed, STREAM_ETA_BOOT, static_cast<std::uint64_t>(rep));
            for (std::size_t i = 0; i < n; ++i)
                draw[i] = resid[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
            etas[static_cast<std::size_t>(rep)] = sample_variance(draw) - 0.5;
        }
        out.std_error = std::sqrt(sample_variance(etas));
    }
    return out;
}

namespace {

NegativityReport finish_report(double min_value, double loc_x, double loc_p,
                               std::span<const double> boot_values) {
    NegativityReport rep;
    rep.min_value = min_value;
    rep.loc_x = loc_x;
    rep.loc_p = loc_p;
    rep.boot_std = std::sqrt(sample_variance(boot_values));
    rep.z = rep.boot_std > 0.0 ? min_value / rep.boot_std : 0.0;
    rep.significant = min_value < 0.0 && rep.z <= -3.0;
    return rep;
}

} // namespace

NegativityReport negativity_report(const WignerGrid& grid, const CalibratedSamples& samples,
                                   int bootstrap_reps, std::uint64_t seed,
                                   std::optional<NegativityCenter> center) {
    if (grid.values.empty() || samples.size() == 0)
        throw std::invalid_argument("empty grid or samples");
    bootstrap_reps = std::max(bootstrap_reps, 100);

    const int nx = grid.x_axis.count();
    std::size_t arg = grid.values.size();
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (center) {
            const double gx = grid.x_axis.coord(static_cast<int>(i) % nx);
            const double gp = grid.p_axis.coord(static_cast<int>(i) / nx);
            if (std::hypot(gx - center->x, gp - center->p) > center->radius) continue;
        }
        if (arg == grid.values.size() || grid.values[i] < grid.values[arg]) arg = i;
    }
    if (arg == grid.values.size())
        throw std::invalid_argument("no grid node inside the negativity search region");
    const int ip = static_cast<int>(arg) / nx;
    const int ix = static_cast<int>(arg) % nx;
    const double X = grid.x_axis.coord(ix);
    const double P = grid.p_axis.coord(ip);

    // kernel contributions at the argmin, resampled with replacement
    const std::size_t n = samples.size();
    std::vector<double> contrib(n);
    for (std::size_t i = 0; i < n; ++i)
        contrib[i] = fbp_kernel(X * std::cos(samples.theta[i]) + P * std::sin(samples.theta[i]) -
                                    samples.x[i],
                                grid.k_c);
    const double norm = 1.0 / (2.0 * std::numbers::pi * static_cast<double>(n));
    std::vector<double> boot(static_cast<std::size_t>(bootstrap_reps));
    for (int rep = 0; rep < bootstrap_reps; ++rep) {
        RandomStream rng =
            RandomStream::split(seed, STREAM_NEG_BOOT, static_cast<std::uint64_t>(rep));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += contrib[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
        boot[static_cast<std::size_t>(rep)] = s * norm;
    }
    return finish_report(grid.values[arg], X, P, boot);
}

NegativityReport negativity_report_radial(const RadialProfile& profile,
                                          std::span<const double> scaled, int bootstrap_reps,
                                          std::uint64_t seed, double search_radius) {
    if (profile.w.empty() || scaled.empty())
        throw std::invalid_argument("empty profile or samples");
    bootstrap_reps = std::max(bootstrap_reps, 100);

    std::size_t arg = 0;
    for (std::size_t k = 1; k < profile.w.size(); ++k) {
        if (profile.r(static_cast<int>(k)) > search_radius) break;
        if (profile.w[k] < profile.w[arg]) arg = k;
    }
    const double r0 = profile.r(static_cast<int>(arg));

    const std::vector<double> weights = abel_point_weights(scaled, r0);
    const std::size_t n = weights.size();
    std::vector<double> boot(static_cast<std::size_t>(bootstrap_reps));
    for (int rep = 0; rep < bootstrap_reps; ++rep) {
        RandomStream rng =
            RandomStream::split(seed, STREAM_NEG_BOOT, static_cast<std::uint64_t>(rep));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += weights[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
        boot[static_cast<std::size_t>(rep)] = s / static_cast<double>(n);
    }
    return finish_report(profile.w[arg], r0, 0.0, boot);
}

PeakReport peak_report(std::span<const DiagonalEstimate> diagonals) {
    PeakReport rep;
    const std::size_t n = diagonals.size();
    auto comb = [&](std::size_t i, std::size_t j) {
        return std::hypot(diagonals[i].std_error, diagonals[j].std_error);
    };
    for (std::size_t i = 0; i < n; ++i) {
        // m = 0 is a physical boundary and counts with a one-sided test; the
        // high end is a truncation edge where a maximum cannot be verified
        if (i + 1 == n) continue;
        const bool up_left =
            i == 0 || diagonals[i].rho > diagonals[i - 1].rho + comb(i, i - 1);
        const bool up_right = diagonals[i].rho > diagonals[i + 1].rho + comb(i, i + 1);
        const bool down_left =
            i > 0 && diagonals[i].rho < diagonals[i - 1].rho - comb(i, i - 1);
        const bool down_right = diagonals[i].rho < diagonals[i + 1].rho - comb(i, i + 1);
        if (up_left && up_right) rep.peaks.push_back(diagonals[i].n);
        if (down_left && down_right) rep.dips.push_back(diagonals[i].n);
    }
    return rep;
}

} // namespace dfstomo
