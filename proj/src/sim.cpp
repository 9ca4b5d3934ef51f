#include "dfstomo/sim.hpp"

#include <cmath>
#include <numbers>

#include "dfstomo/errors.hpp"

namespace dfstomo {

namespace {

constexpr double TWO_PI = 2.0 * std::numbers::pi;
constexpr double INV_SQRT2 = std::numbers::sqrt2 / 2.0;

// Stream ids under one run seed.
constexpr std::uint64_t STREAM_ACQUISITION = 0;
constexpr std::uint64_t STREAM_VACUUM = 1;

double fock1_draw(RandomStream& rng) {
    const double g = rng.gamma_three_halves();
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    return sign * std::sqrt(g);
}

double fock_draw(int n, RandomStream& rng) {
    if (n == 0) return rng.normal() * INV_SQRT2;
    return fock1_draw(rng);
}

} // namespace

void AcquisitionConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (!(raw_scale > 0.0) || !std::isfinite(raw_scale))
        throw ConfigError("raw_scale must be positive");
    if (electronic_noise < 0.0 || !std::isfinite(electronic_noise))
        throw ConfigError("electronic_noise must be >= 0");
    if (!std::isfinite(theta_start) || !std::isfinite(theta_step))
        throw ConfigError("theta ramp parameters must be finite");
}

double sample_quadrature(const StateModel& state, double theta, RandomStream& rng) {
    switch (state.kind()) {
    case StateKind::Vacuum:
        return rng.normal() * INV_SQRT2;
    case StateKind::Coherent:
        return state.marginal_mean(theta) + rng.normal() * INV_SQRT2;
    case StateKind::Fock:
        return fock_draw(state.n(), rng);
    case StateKind::DisplacedFock:
        return state.marginal_mean(theta) + fock_draw(state.n(), rng);
    case StateKind::DisplacedMix: {
        const double d = state.marginal_mean(theta);
        if (rng.bernoulli(state.eta())) return d + fock1_draw(rng);
        return d + rng.normal() * INV_SQRT2;
    }
    }
    throw std::logic_error("unreachable");
}

namespace {

std::vector<SampleRecord> generate(const AcquisitionConfig& cfg, const StateModel& state,
                                   std::uint64_t stream, std::vector<double>* theta_out) {
    std::vector<SampleRecord> records(cfg.n_samples);
    if (theta_out) theta_out->resize(cfg.n_samples);
    for (std::size_t m = 0; m < cfg.n_samples; ++m) {
        RandomStream rng = RandomStream::split(cfg.seed, stream, m);
        double theta;
        if (cfg.theta_step == 0.0) {
            theta = TWO_PI * rng.uniform();
        } else {
            theta = cfg.theta_start + static_cast<double>(m) * cfg.theta_step;
        }
        double x = sample_quadrature(state, theta, rng);
        if (cfg.electronic_noise > 0.0) x += cfg.electronic_noise * rng.normal();
        records[m] = SampleRecord{m, cfg.raw_scale * x};
        if (theta_out) (*theta_out)[m] = theta;
    }
    return records;
}

} // namespace

AcquisitionRun run_acquisition(const AcquisitionConfig& config) {
    config.validate();
    AcquisitionRun run;
    run.truth.config = config;
    run.records = generate(config, config.state, STREAM_ACQUISITION, &run.truth.theta);
    return run;
}

std::vector<SampleRecord> vacuum_calibration_run(const AcquisitionConfig& config) {
    config.validate();
    return generate(config, StateModel::vacuum(), STREAM_VACUUM, nullptr);
}

} // namespace dfstomo
