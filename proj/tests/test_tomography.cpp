#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dfstomo/analysis.hpp"
#include "dfstomo/errors.hpp"
#include "dfstomo/numeric.hpp"
#include "dfstomo/sim.hpp"
#include "dfstomo/tomography.hpp"
#include "oracles.hpp"

using namespace dfstomo;
constexpr double PI = std::numbers::pi;
constexpr double SQRT2 = std::numbers::sqrt2;

namespace {

AcquisitionRun make_run(const StateModel& state, std::size_t n, std::uint64_t seed,
                        double theta_step = 2.0 * PI / 4000.0, double raw_scale = 1.0) {
    AcquisitionConfig cfg;
    cfg.state = state;
    cfg.n_samples = n;
    cfg.theta_step = theta_step;
    cfg.raw_scale = raw_scale;
    cfg.seed = seed;
    return run_acquisition(cfg);
}

std::vector<double> calibrated_values(const AcquisitionRun& run, std::size_t n_vac = 50000) {
    AcquisitionConfig vc = run.truth.config;
    vc.n_samples = n_vac;
    const auto vac = vacuum_calibration_run(vc);
    return scale_to_vacuum(run.records, vac);
}

CalibratedSamples with_truth_phases(const AcquisitionRun& run, std::vector<double> scaled) {
    CalibratedSamples cal;
    cal.x = std::move(scaled);
    cal.theta.resize(run.truth.theta.size());
    for (std::size_t i = 0; i < cal.theta.size(); ++i) {
        double th = std::fmod(run.truth.theta[i], 2.0 * PI);
        if (th < 0.0) th += 2.0 * PI;
        cal.theta[i] = th;
    }
    return cal;
}

} // namespace

TEST_CASE("vacuum scaling") {
    AcquisitionConfig cfg;
    cfg.state = StateModel::vacuum();
    cfg.n_samples = 50000;
    cfg.raw_scale = 3.7;
    cfg.electronic_noise = 0.25;
    cfg.seed = 3;
    const AcquisitionRun run = run_acquisition(cfg);
    const auto vac = vacuum_calibration_run(cfg);

    SUBCASE("vacuum calibrated by itself has variance 1/2") {
        const auto x = scale_to_vacuum(run.records, run.records);
        CHECK(sample_variance(x) == doctest::Approx(0.5).epsilon(1e-12));
        const auto y = scale_to_vacuum(run.records, vac);
        CHECK(sample_variance(y) == doctest::Approx(0.5).epsilon(0.03));
    }

    SUBCASE("scale invariance") {
        auto scaled_recs = run.records;
        auto scaled_vac = vac;
        for (auto& r : scaled_recs) r.x_raw *= 4.0; // power of two: bit-exact
        for (auto& r : scaled_vac) r.x_raw *= 4.0;
        const auto a = scale_to_vacuum(run.records, vac);
        const auto b = scale_to_vacuum(scaled_recs, scaled_vac);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

        for (auto& r : scaled_recs) r.x_raw *= 0.75; // now c = 3
        for (auto& r : scaled_vac) r.x_raw *= 0.75;
        const auto c = scale_to_vacuum(scaled_recs, scaled_vac);
        for (std::size_t i = 0; i < a.size(); i += 997)
            CHECK(c[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }

    SUBCASE("degenerate and short vacuum runs") {
        auto flat = vac;
        for (auto& r : flat) r.x_raw = 1.0;
        CHECK_THROWS_AS(scale_to_vacuum(run.records, flat), CalibrationError);
        const std::vector<SampleRecord> few(vac.begin(), vac.begin() + 100);
        CHECK_THROWS_AS(scale_to_vacuum(run.records, few), CalibrationError);
    }
}

TEST_CASE("coherent run keeps its sinusoid amplitude after scaling") {
    const AcquisitionRun run =
        make_run(StateModel::coherent({0.60, 0.0}), 50000, 17, 2.0 * PI / 4000.0, 5.0);
    const auto x = calibrated_values(run);
    const PhaseFit fit = fit_phase_ramp(x);
    REQUIRE(fit.determinate);
    CHECK(fit.amplitude == doctest::Approx(SQRT2 * 0.60).epsilon(0.03));
}

TEST_CASE("phase assignment") {
    SUBCASE("noiseless windowed sinusoid is recovered exactly") {
        const double omega = 2.0 * PI / 1777.0;
        const double phi0 = 0.83;
        std::vector<double> x(60000);
        for (std::size_t m = 0; m < x.size(); ++m)
            x[m] = 1.3 * std::cos(omega * static_cast<double>(m) + phi0) + 0.2;
        const PhaseFit fit = fit_phase_ramp(x);
        REQUIRE(fit.determinate);
        CHECK(fit.omega == doctest::Approx(omega).epsilon(1e-9));
        CHECK(fit.phi0 == doctest::Approx(phi0).epsilon(1e-7));
        CHECK(fit.offset == doctest::Approx(0.2).epsilon(1e-7));
    }

    SUBCASE("round trip against the truth sidecar") {
        const AcquisitionRun run =
            make_run(StateModel::displaced_mix({0.60, 0.0}, 0.62), 50000, 23);
        const auto scaled = calibrated_values(run);
        const CalibratedSamples cal = assign_phases(scaled);
        double ss = 0.0;
        for (std::size_t m = 0; m < cal.theta.size(); ++m) {
            double d = cal.theta[m] - std::fmod(run.truth.theta[m], 2.0 * PI);
            d = std::remainder(d, 2.0 * PI);
            ss += d * d;
        }
        const double rms = std::sqrt(ss / static_cast<double>(cal.theta.size()));
        CHECK(rms < 0.05);
    }

    SUBCASE("vacuum input is phase-indeterminate") {
        const AcquisitionRun run = make_run(StateModel::vacuum(), 50000, 29, 0.0);
        const auto scaled = calibrated_values(run);
        CHECK_THROWS_AS(assign_phases(scaled), PhaseIndeterminateError);
    }

    SUBCASE("undisplaced mixture is phase-indeterminate") {
        const AcquisitionRun run =
            make_run(StateModel::displaced_mix({0.0, 0.0}, 0.62), 200000, 31, 0.0);
        const auto scaled = calibrated_values(run);
        CHECK_THROWS_AS(assign_phases(scaled), PhaseIndeterminateError);
    }
}

TEST_CASE("fbp kernel") {
    CHECK(fbp_kernel(0.0, 6.4) == doctest::Approx(20.48).epsilon(1e-12));
    CHECK(fbp_kernel(1.0, 6.4) == fbp_kernel(-1.0, 6.4));
    CHECK(fbp_kernel(PI / 6.4, 6.4) ==
          doctest::Approx(-2.0 / ((PI / 6.4) * (PI / 6.4))).epsilon(1e-9));

    SUBCASE("matches the band-limited ramp integral") {
        // K(x) = Integral_0^kc k cos(k x) dk = (1/2) Integral_{-kc}^{kc} |k| e^{ikx} dk
        const double kc = 6.4;
        for (double x : {0.0, 1e-5, 0.003, 0.0391, 0.12345, 0.5, 1.0, 1.7, 2.5, 3.9}) {
            const double quad = integrate(
                [&](double k) { return k * std::cos(k * x); }, 0.0, kc, 1e-12);
            CHECK(fbp_kernel(x, kc) == doctest::Approx(quad).epsilon(1e-10).scale(1.0));
            if (x > 0.0)
                CHECK(fbp_kernel(-x, kc) == doctest::Approx(quad).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("grid spec parsing") {
    const GridSpec g = GridSpec::parse("-4:4:0.125");
    CHECK(g.count() == 65);
    CHECK(g.coord(32) == doctest::Approx(0.0));
    CHECK_THROWS_AS(GridSpec::parse("4:-4:0.1"), ConfigError);
    CHECK_THROWS_AS(GridSpec::parse("nonsense"), ConfigError);
}

TEST_CASE("phase coverage check") {
    std::vector<double> half(1000);
    for (std::size_t i = 0; i < half.size(); ++i)
        half[i] = 0.45 * PI * static_cast<double>(i) / static_cast<double>(half.size());
    CHECK_THROWS_AS(check_phase_coverage(half), PhaseCoverageError);
    std::vector<double> full(1000);
    for (std::size_t i = 0; i < full.size(); ++i)
        full[i] = 2.0 * PI * static_cast<double>(i) / static_cast<double>(full.size());
    CHECK_NOTHROW(check_phase_coverage(full));
}

TEST_CASE("fbp point estimates against closed forms") {
    SUBCASE("vacuum at the origin") {
        const AcquisitionRun run = make_run(StateModel::vacuum(), 1000000, 41);
        const CalibratedSamples cal =
            with_truth_phases(run, calibrated_values(run, 100000));
        const double w = fbp_point(cal, 0.0, 0.0, 6.4);
        CHECK(std::abs(w - 1.0 / PI) < 0.010);
    }
    SUBCASE("mixture at the displacement center is negative") {
        const AcquisitionRun run =
            make_run(StateModel::displaced_mix({0.60, 0.0}, 0.62), 200000, 43);
        const auto scaled = calibrated_values(run);
        const CalibratedSamples cal = assign_phases(scaled);
        const double w = fbp_point(cal, SQRT2 * 0.60, 0.0, 6.4);
        CHECK(std::abs(w - (1.0 - 2.0 * 0.62) / PI) < 0.02);
        CHECK(w < 0.0);
    }
}

TEST_CASE("fbp grid reconstruction") {
    SUBCASE("displaced Fock reconstruction equals the translated Fock reconstruction") {
        const std::size_t n = 300000;
        const AcquisitionRun dfs_run = make_run(StateModel::displaced_fock({0.60, 0.0}, 1), n, 47);
        const CalibratedSamples dfs_cal =
            with_truth_phases(dfs_run, calibrated_values(dfs_run));

        const AcquisitionRun fock_run = make_run(StateModel::fock(1), n, 47, 0.0);
        const CalibratedSamples fock_cal =
            with_truth_phases(fock_run, calibrated_values(fock_run));

        const double shift = SQRT2 * 0.60;
        GridSpec on{-2.0 + shift, 2.0 + shift, 0.25};
        GridSpec off{-2.0, 2.0, 0.25};
        const WignerGrid a = reconstruct_wigner_fbp(dfs_cal, on, off, 6.4);
        const WignerGrid b = reconstruct_wigner_fbp(fock_cal, off, off, 6.4);
        double ss = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double d = a.values[i] - b.values[i];
            ss += d * d;
        }
        CHECK(std::sqrt(ss / static_cast<double>(a.values.size())) < 0.02);
    }

    SUBCASE("threads do not change the values") {
        const AcquisitionRun run = make_run(StateModel::coherent({0.60, 0.0}), 20000, 53);
        const CalibratedSamples cal = assign_phases(calibrated_values(run));
        const GridSpec g{-2.0, 2.0, 0.5};
        const WignerGrid w1 = reconstruct_wigner_fbp(cal, g, g, 6.4, 1);
        const WignerGrid w2 = reconstruct_wigner_fbp(cal, g, g, 6.4, 2);
        for (std::size_t i = 0; i < w1.values.size(); ++i)
            CHECK(w1.values[i] == w2.values[i]);
    }

    SUBCASE("insufficient coverage raises") {
        CalibratedSamples cal;
        cal.x.assign(5000, 0.1);
        cal.theta.assign(5000, 0.3);
        const GridSpec g{-1.0, 1.0, 0.5};
        CHECK_THROWS_AS(reconstruct_wigner_fbp(cal, g, g, 6.4), PhaseCoverageError);
    }
}

TEST_CASE("abel reconstruction") {
    SUBCASE("vacuum") {
        const AcquisitionRun run = make_run(StateModel::vacuum(), 1000000, 59, 0.0);
        const auto scaled = calibrated_values(run, 100000);
        const RadialProfile prof = reconstruct_wigner_abel(scaled);
        CHECK(std::abs(prof.w[0] - 1.0 / PI) < 0.010);
        // normalization: Integral W(r) 2 pi r dr = 1
        double norm = 0.0;
        for (std::size_t k = 1; k < prof.w.size(); ++k)
            norm += prof.w[k] * 2.0 * PI * prof.r(static_cast<int>(k)) * prof.r_step;
        CHECK(norm == doctest::Approx(1.0).epsilon(0.03));
    }
    SUBCASE("undisplaced mixture is negative at the origin") {
        const AcquisitionRun run =
            make_run(StateModel::displaced_mix({0.0, 0.0}, 0.62), 200000, 61, 0.0);
        const auto scaled = calibrated_values(run);
        const RadialProfile prof = reconstruct_wigner_abel(scaled);
        CHECK(std::abs(prof.w[0] + 0.24 / PI) < 0.02);
        CHECK(prof.w[0] < 0.0);
    }
    SUBCASE("point weights reproduce the profile value") {
        const AcquisitionRun run = make_run(StateModel::vacuum(), 50000, 67, 0.0);
        const auto scaled = calibrated_values(run);
        const RadialProfile prof = reconstruct_wigner_abel(scaled);
        for (double r0 : {0.0, 0.5, 1.0}) {
            const auto w = abel_point_weights(scaled, r0);
            const double mean = sample_mean(w);
            const int k = static_cast<int>(r0 / prof.r_step + 0.5);
            CHECK(std::abs(mean - prof.w[static_cast<std::size_t>(k)]) < 0.004);
        }
    }
}

TEST_CASE("azimuthally averaged FBP matches Abel") {
    const AcquisitionRun run =
        make_run(StateModel::displaced_mix({0.0, 0.0}, 0.62), 1000000, 71, 0.0);
    const auto scaled = calibrated_values(run, 100000);
    const RadialProfile abel = reconstruct_wigner_abel(scaled, 2.5, 0.25);
    // symmetric state: any uniform phase assignment is as good as the truth
    const CalibratedSamples cal = with_truth_phases(run, scaled);
    double ss = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < abel.w.size(); ++k) {
        const double r = abel.r(static_cast<int>(k));
        double avg = 0.0;
        const int n_az = 8;
        for (int j = 0; j < n_az; ++j) {
            const double ang = PI * j / n_az;
            avg += fbp_point(cal, r * std::cos(ang), r * std::sin(ang), 6.4);
        }
        avg /= n_az;
        const double d = avg - abel.w[k];
        ss += d * d;
        ++count;
    }
    CHECK(std::sqrt(ss / count) <= 0.02);
}

TEST_CASE("pattern functions") {
    SUBCASE("orthogonality contract: 11x11 overlap matrix is the identity") {
        double worst = 0.0;
        for (int m = 0; m <= 10; ++m) {
            for (int n = 0; n <= 10; ++n) {
                const double overlap = integrate(
                    [&](double x) {
                        const double psi = fock_wavefunction(m, x);
                        return psi * psi * pattern_function(n, x);
                    },
                    -8.0, 8.0, 1e-10);
                const double expect = (m == n) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(overlap - expect));
            }
        }
        CHECK(worst < 1e-6);
    }
    SUBCASE("parity and range errors") {
        for (int n : {0, 1, 4, 9})
            for (double x : {0.3, 1.7, 5.5})
                CHECK(pattern_function(n, x) == pattern_function(n, -x));
        CHECK_THROWS_AS(pattern_function(0, 8.5), std::out_of_range);
        CHECK_THROWS_AS(pattern_function(11, 0.0), std::invalid_argument);
    }
}

TEST_CASE("diagonal estimation") {
    SUBCASE("vacuum gives rho_00 = 1") {
        const AcquisitionRun run = make_run(StateModel::vacuum(), 100000, 73, 0.0);
        const auto scaled = calibrated_values(run);
        const auto diag = estimate_diagonals(std::span<const double>(scaled), 4, 100, 7);
        CHECK(std::abs(diag[0].rho - 1.0) < 4.0 * diag[0].std_error);
        for (int n : {1, 2, 3, 4})
            CHECK(std::abs(diag[static_cast<std::size_t>(n)].rho) <
                  4.0 * diag[static_cast<std::size_t>(n)].std_error + 1e-3);
    }
    SUBCASE("undisplaced mixture gives rho_11 = eta") {
        const AcquisitionRun run =
            make_run(StateModel::displaced_mix({0.0, 0.0}, 0.62), 100000, 79, 0.0);
        const auto scaled = calibrated_values(run);
        const auto diag = estimate_diagonals(std::span<const double>(scaled), 4, 100, 7);
        CHECK(std::abs(diag[1].rho - 0.62) < 4.0 * diag[1].std_error);
    }
    SUBCASE("displaced mixture matches theory componentwise") {
        const StateModel state = StateModel::displaced_mix({1.3, 0.0}, 0.60);
        const AcquisitionRun run = make_run(state, 200000, 83);
        const auto scaled = calibrated_values(run);
        const CalibratedSamples cal = assign_phases(scaled);
        const auto diag = estimate_diagonals(cal, 10, 100, 7);
        const auto theory = photon_statistics(state, 10);
        for (const auto& d : diag)
            CHECK(std::abs(d.rho - theory[static_cast<std::size_t>(d.n)]) <
                  4.0 * d.std_error);
    }
    SUBCASE("phase coverage is enforced on the phased overload") {
        CalibratedSamples cal;
        cal.x.assign(2000, 0.0);
        cal.theta.assign(2000, 1.0);
        CHECK_THROWS_AS(estimate_diagonals(cal, 2, 10, 7), PhaseCoverageError);
    }
}

TEST_CASE("estimator error scales as 1/sqrt(N)") {
    const StateModel state = StateModel::displaced_mix({0.0, 0.0}, 0.62);
    const std::vector<std::size_t> sizes = {1000, 10000, 100000};
    std::vector<double> log_n, log_rmse;
    for (std::size_t n : sizes) {
        double ss = 0.0;
        const int reps = 24;
        for (int rep = 0; rep < reps; ++rep) {
            AcquisitionConfig cfg;
            cfg.state = state;
            cfg.n_samples = n;
            cfg.theta_step = 0.0;
            cfg.seed = 1000 + static_cast<std::uint64_t>(rep);
            const AcquisitionRun run = run_acquisition(cfg);
            std::vector<double> scaled(run.records.size());
            // scale against an independent vacuum run
            AcquisitionConfig vc = cfg;
            vc.n_samples = 20000;
            const auto vac = vacuum_calibration_run(vc);
            scaled = scale_to_vacuum(run.records, vac);
            const auto diag = estimate_diagonals(std::span<const double>(scaled), 1, 0, 7);
            const double err = diag[1].rho - 0.62;
            ss += err * err;
        }
        log_n.push_back(std::log(static_cast<double>(n)));
        log_rmse.push_back(0.5 * std::log(ss / reps));
    }
    // least-squares slope
    const double mx = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
    const double my = (log_rmse[0] + log_rmse[1] + log_rmse[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += (log_n[i] - mx) * (log_rmse[i] - my);
        den += (log_n[i] - mx) * (log_n[i] - mx);
    }
    const double slope = num / den;
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}
