#ifndef DFSTOMO_ANALYSIS_HPP
#define DFSTOMO_ANALYSIS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dfstomo/tomography.hpp"

namespace dfstomo {

struct AlphaFit {
    double alpha_abs = 0.0;
    double alpha_phase = 0.0;
    double alpha_abs_stderr = 0.0;
    double alpha_phase_stderr = 0.0;
};

// Least-squares fit of windowed means to sqrt(2) |alpha| cos(theta - phi).
AlphaFit fit_alpha(const CalibratedSamples& samples);

struct EtaFit {
    double eta = 0.0;         // reported raw; may fall slightly outside [0, 1]
    double std_error = 0.0;
};

// De-displaces each sample by sqrt(2)|alpha| cos(theta - phi); the residual
// ensemble eta|1><1| + (1-eta)|0><0| has variance 1/2 + eta.
EtaFit fit_eta(const CalibratedSamples& samples, double alpha_abs, double alpha_phase,
               int bootstrap_reps = 200, std::uint64_t seed = 1);

struct NegativityReport {
    double min_value = 0.0;
    double loc_x = 0.0;
    double loc_p = 0.0;
    double boot_std = 0.0;
    double z = 0.0; // min_value / boot_std
    bool significant = false; // min < 0 and z <= -3
};

// Region the state is expected to be negative in: the displacement point for
// displaced ensembles, the origin for phase-averaged ones.  Restricting the
// minimum search to this neighborhood keeps the z-score free of the
// select-the-deepest-noise-dip bias a whole-grid scan would carry.
struct NegativityCenter {
    double x = 0.0;
    double p = 0.0;
    double radius = 0.5; // about half the kernel correlation scale 2 pi / k_c
};

// Locates the (optionally center-restricted) grid minimum, then
// bootstrap-resamples the records re-evaluating W only at that location.
NegativityReport negativity_report(const WignerGrid& grid, const CalibratedSamples& samples,
                                   int bootstrap_reps = 100, std::uint64_t seed = 1,
                                   std::optional<NegativityCenter> center = {});

// Same decision applied to a phase-averaged radial profile (feature at the
// origin); the location is reported as (r_min, 0).
NegativityReport negativity_report_radial(const RadialProfile& profile,
                                          std::span<const double> scaled,
                                          int bootstrap_reps = 100, std::uint64_t seed = 1,
                                          double search_radius = 0.5);

struct PeakReport {
    std::vector<int> peaks; // strict local maxima exceeding both neighbors by
                            // more than the combined stderr
    std::vector<int> dips;  // same rule inverted
};

PeakReport peak_report(std::span<const DiagonalEstimate> diagonals);

} // namespace dfstomo

#endif
