#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "dfstomo/errors.hpp"
#include "dfstomo/numeric.hpp"
#include "dfstomo/sim.hpp"
#include "oracles.hpp"

using namespace dfstomo;
constexpr double PI = std::numbers::pi;

namespace {

std::vector<double> draw_many(const StateModel& s, double theta, std::size_t n,
                              std::uint64_t seed) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::split(seed, 77, i);
        out[i] = sample_quadrature(s, theta, rng);
    }
    return out;
}

} // namespace

TEST_CASE("vacuum draw moments") {
    const auto x = draw_many(StateModel::vacuum(), 0.0, 100000, 11);
    const double n = static_cast<double>(x.size());
    const double mean = sample_mean(x);
    const double var = sample_variance(x);
    const double sigma = std::sqrt(0.5);
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(n));
    CHECK(std::abs(var - 0.5) < 4.0 * std::sqrt(2.0) * 0.5 / std::sqrt(n));
}

TEST_CASE("displaced Fock draw mean at theta = arg alpha") {
    const StateModel dfs = StateModel::displaced_fock({0.60, 0.0}, 1);
    const auto x = draw_many(dfs, 0.0, 100000, 12);
    const double n = static_cast<double>(x.size());
    // Fock(1) marginal variance is 3/2
    CHECK(std::abs(sample_mean(x) - std::numbers::sqrt2 * 0.60) <
          4.0 * std::sqrt(1.5) / std::sqrt(n));
}

TEST_CASE("draws match the analytic marginals (KS at the 1% level)") {
    const StateModel states[] = {
        StateModel::vacuum(),
        StateModel::coherent({0.60, 0.0}),
        StateModel::fock(1),
        StateModel::displaced_fock({0.60, 0.0}, 1),
        StateModel::displaced_mix({0.60, 0.0}, 0.62),
    };
    const std::size_t n = 100000;
    const double crit = 1.6276 / std::sqrt(static_cast<double>(n)); // alpha = 0.01
    std::uint64_t seed = 100;
    for (const auto& s : states) {
        for (int k = 0; k < 8; ++k) {
            const double theta = 2.0 * PI * k / 8.0;
            const auto cdf = oracles::marginal_cdf(s, theta);
            const double d = oracles::ks_statistic(draw_many(s, theta, n, ++seed), cdf);
            CHECK(d < crit);
        }
    }
}

TEST_CASE("mixture branch proportion") {
    const StateModel mix = StateModel::displaced_mix({0.60, 0.0}, 0.62);
    // count draws that fall where only one branch has support: use the
    // variance identity instead; Var = 1/2 + eta for the undisplaced mixture
    const StateModel undisplaced = StateModel::displaced_mix({0.0, 0.0}, 0.62);
    const std::size_t n = 100000;
    const auto x = draw_many(undisplaced, 0.3, n, 21);
    const double eta_hat = sample_variance(x) - 0.5;
    CHECK(std::abs(eta_hat - 0.62) < 4.0 * std::sqrt(0.62 * 0.38 / static_cast<double>(n)) +
                                         4.0 * std::sqrt(2.0) / std::sqrt(static_cast<double>(n)));
    // direct Bernoulli-ratio check: classify draws by distance from the mean,
    // where the two branch distributions differ most
    const auto y = draw_many(mix, 0.0, n, 22);
    const double d0 = std::numbers::sqrt2 * 0.60;
    const double cut = 0.2;
    const auto cdf_fock = oracles::marginal_cdf(StateModel::fock(1), 0.0);
    const auto cdf_vac = oracles::marginal_cdf(StateModel::vacuum(), 0.0);
    const double p_f = 1.0 - (cdf_fock(cut) - cdf_fock(-cut)); // P(|x-d| > cut | Fock branch)
    const double p_c = 1.0 - (cdf_vac(cut) - cdf_vac(-cut));
    std::size_t outside = 0;
    for (double v : y)
        if (std::abs(v - d0) > cut) ++outside;
    const double f = static_cast<double>(outside) / static_cast<double>(n);
    const double eta_from_ratio = (f - p_c) / (p_f - p_c);
    const double se_f = std::sqrt(f * (1.0 - f) / static_cast<double>(n));
    CHECK(std::abs(eta_from_ratio - 0.62) < 4.0 * se_f / (p_f - p_c));
}

TEST_CASE("run_acquisition basics") {
    AcquisitionConfig cfg;
    cfg.state = StateModel::coherent({0.60, 0.0});
    cfg.n_samples = 1000;
    cfg.theta_step = 2.0 * PI / 200.0;
    cfg.seed = 5;
    const AcquisitionRun run = run_acquisition(cfg);
    REQUIRE(run.records.size() == 1000);
    for (std::size_t i = 0; i < run.records.size(); ++i) CHECK(run.records[i].m == i);

    // determinism
    const AcquisitionRun again = run_acquisition(cfg);
    for (std::size_t i = 0; i < run.records.size(); ++i)
        CHECK(run.records[i].x_raw == again.records[i].x_raw);

    // exact phase ramp in the sidecar
    for (std::size_t i = 0; i < run.truth.theta.size(); ++i)
        CHECK(run.truth.theta[i] == cfg.theta_start + static_cast<double>(i) * cfg.theta_step);
}

TEST_CASE("windowed means of a swept coherent run trace the sinusoid") {
    AcquisitionConfig cfg;
    cfg.state = StateModel::coherent({0.60, 0.0});
    cfg.n_samples = 80000;
    cfg.theta_step = 4.0 * PI / static_cast<double>(cfg.n_samples) * 10.0; // 20 periods
    cfg.raw_scale = 3.0;
    cfg.seed = 9;
    const AcquisitionRun run = run_acquisition(cfg);
    // least squares of windowed means onto the known ramp frequency:
    // amplitude ~ raw_scale * sqrt(2) * 0.6
    const std::size_t w = 200;
    const std::size_t m = cfg.n_samples / w;
    double sc2 = 0.0, ss2 = 0.0, yc = 0.0, ys = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i) s += run.records[i].x_raw;
        s /= static_cast<double>(w);
        const double t = (static_cast<double>(k) + 0.5) * static_cast<double>(w) - 0.5;
        const double co = std::cos(cfg.theta_step * t);
        const double si = std::sin(cfg.theta_step * t);
        sc2 += co * co;
        ss2 += si * si;
        yc += s * co;
        ys += s * si;
    }
    const double amp = std::hypot(yc / sc2, ys / ss2);
    const double expect = 3.0 * std::numbers::sqrt2 * 0.60;
    CHECK(amp == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("vacuum calibration run") {
    AcquisitionConfig cfg;
    cfg.state = StateModel::displaced_mix({0.60, 0.0}, 0.62); // ignored: forced to vacuum
    cfg.n_samples = 100000;
    cfg.raw_scale = 2.5;
    cfg.electronic_noise = 0.3;
    cfg.seed = 31;
    const auto rec = vacuum_calibration_run(cfg);
    std::vector<double> v(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) v[i] = rec[i].x_raw;
    const double expect = cfg.raw_scale * cfg.raw_scale * (0.5 + 0.3 * 0.3);
    CHECK(sample_variance(v) ==
          doctest::Approx(expect).epsilon(5.0 * std::sqrt(2.0 / static_cast<double>(rec.size()))));

    cfg.electronic_noise = 0.0;
    cfg.raw_scale = 1.0;
    const auto plain = vacuum_calibration_run(cfg);
    std::vector<double> p(plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i) p[i] = plain[i].x_raw;
    CHECK(sample_variance(p) == doctest::Approx(0.5).epsilon(0.02));

    const auto rerun = vacuum_calibration_run(cfg);
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(plain[i].x_raw == rerun[i].x_raw);
}

TEST_CASE("free-running phase when theta_step = 0") {
    AcquisitionConfig cfg;
    cfg.state = StateModel::vacuum();
    cfg.n_samples = 20000;
    cfg.theta_step = 0.0;
    cfg.seed = 8;
    const AcquisitionRun run = run_acquisition(cfg);
    // thetas cover [0, 2pi) uniformly
    std::array<int, 8> hist{};
    for (double th : run.truth.theta) {
        CHECK(th >= 0.0);
        CHECK(th < 2.0 * PI);
        ++hist[static_cast<std::size_t>(th / (2.0 * PI) * 8.0)];
    }
    for (int h : hist) CHECK(h > 2000);
}

TEST_CASE("config validation") {
    AcquisitionConfig cfg;
    cfg.n_samples = 0;
    CHECK_THROWS_AS(run_acquisition(cfg), ConfigError);
    cfg.n_samples = 10;
    cfg.raw_scale = -1.0;
    CHECK_THROWS_AS(run_acquisition(cfg), ConfigError);
}
