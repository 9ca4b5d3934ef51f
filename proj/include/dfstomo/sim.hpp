#ifndef DFSTOMO_SIM_HPP
#define DFSTOMO_SIM_HPP

#include <cstdint>
#include <vector>

#include "dfstomo/random.hpp"
#include "dfstomo/states.hpp"

namespace dfstomo {

// Balanced-homodyne acquisition settings.  theta_step == 0 emulates a
// free-running local-oscillator phase (uniform random theta per sample);
// otherwise the phase follows the linear ramp theta_start + m * theta_step.
struct AcquisitionConfig {
    StateModel state = StateModel::vacuum();
    std::size_t n_samples = 0;
    double theta_start = 0.0;
    double theta_step = 0.0;
    double raw_scale = 1.0;       // volts per quadrature unit
    double electronic_noise = 0.0; // additive Gaussian std-dev, quadrature units
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError
};

// One raw homodyne reading; indices are contiguous from 0.
struct SampleRecord {
    std::size_t m = 0;
    double x_raw = 0.0;
};

// Ground truth kept alongside a synthetic run for round-trip tests.
struct TruthSidecar {
    AcquisitionConfig config;
    std::vector<double> theta; // true phase per sample
};

struct AcquisitionRun {
    std::vector<SampleRecord> records;
    TruthSidecar truth;
};

// One draw from marginal_pdf(state, theta, .).  Gaussian components are
// sampled directly; the Fock(1) component as sign * sqrt(Gamma(3/2, 1)).
double sample_quadrature(const StateModel& state, double theta, RandomStream& rng);

AcquisitionRun run_acquisition(const AcquisitionConfig& config);

// Companion vacuum record set taken with the same raw_scale / electronic
// noise, used downstream for vacuum calibration.
std::vector<SampleRecord> vacuum_calibration_run(const AcquisitionConfig& config);

} // namespace dfstomo

#endif
