#ifndef DFSTOMO_TOMOGRAPHY_HPP
#define DFSTOMO_TOMOGRAPHY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfstomo/sim.hpp"

namespace dfstomo {

// Vacuum-scaled quadrature values paired with assigned phases in [0, 2pi).
struct CalibratedSamples {
    std::vector<double> x;
    std::vector<double> theta;
    std::size_t size() const { return x.size(); }
};

// x = raw / (sqrt(2) sigma_vac): a vacuum run calibrated by itself has
// variance 1/2.  Requires >= 1000 vacuum records.
std::vector<double> scale_to_vacuum(std::span<const SampleRecord> records,
                                    std::span<const SampleRecord> vacuum_records);

// Linear phase-ramp fit from windowed means: A cos(omega m + phi0) + c.
struct PhaseFit {
    double omega = 0.0;      // radians per sample
    double phi0 = 0.0;
    double amplitude = 0.0;  // >= 0
    double offset = 0.0;
    double amplitude_stderr = 0.0;
    double scan_bins = 1.0;  // frequencies scanned when seeding omega
    std::size_t window = 0;
    bool determinate = false; // amplitude >= 4 x its standard error
};

PhaseFit fit_phase_ramp(std::span<const double> scaled,
                        std::optional<std::size_t> period_hint = {});

// Assigns theta_m = omega m + phi0 (mod 2pi).  Throws PhaseIndeterminateError
// when the fitted amplitude is below 4 x its standard error.
CalibratedSamples assign_phases(std::span<const double> scaled,
                                std::optional<std::size_t> period_hint = {});

// Band-limited ramp-filter kernel
// K(x) = [cos(k_c x) + k_c x sin(k_c x) - 1] / x^2, K(0) = k_c^2 / 2.
double fbp_kernel(double x, double k_c);

struct GridSpec {
    double min = -4.0;
    double max = 4.0;
    double step = 0.125;

    int count() const;
    double coord(int i) const { return min + i * step; }
    static GridSpec parse(std::string_view text); // "min:max:step"
    std::string format() const;
    bool operator==(const GridSpec&) const = default;
};

struct WignerGrid {
    GridSpec x_axis;
    GridSpec p_axis;
    std::vector<double> values; // P-major: values[ip * nx + ix]
    double k_c = 6.4;
    std::size_t n_samples = 0;
    std::string state_label;

    double& at(int ip, int ix) { return values[static_cast<std::size_t>(ip) * x_axis.count() + ix]; }
    double at(int ip, int ix) const {
        return values[static_cast<std::size_t>(ip) * x_axis.count() + ix];
    }
};

// Throws PhaseCoverageError unless the histogram of theta mod pi has no
// empty decile.
void check_phase_coverage(std::span<const double> theta);

// Filtered back-projection applied directly to the samples (no binning):
// W(X,P) = (1/(2 pi N)) sum_m K(X cos theta_m + P sin theta_m - x_m) with
// theta_m spanning [0, 2pi).  Per-node pairwise summation keeps the result
// independent of the worker count.
WignerGrid reconstruct_wigner_fbp(const CalibratedSamples& samples, const GridSpec& x_axis,
                                  const GridSpec& p_axis, double k_c, int threads = 1);

// Single-point evaluation of the same estimator.
double fbp_point(const CalibratedSamples& samples, double X, double P, double k_c);

struct RadialProfile {
    double r_step = 0.05;
    std::vector<double> w; // w[k] = W(k * r_step)
    std::size_t n_samples = 0;
    std::string state_label;

    double r(int k) const { return k * r_step; }
};

// Phase-averaged reconstruction: Gaussian KDE of the marginal (Silverman
// bandwidth), symmetrized, then the inverse Abel integral
// W(r) = -(1/pi) Integral_r^inf p'(x)/sqrt(x^2-r^2) dx evaluated with the
// substitution x = r cosh u.
RadialProfile reconstruct_wigner_abel(std::span<const double> scaled, double r_max = 4.0,
                                      double r_step = 0.05);

// Per-sample weight w(|x|) such that the Abel estimate at radius r0 equals
// mean_i w(|x_i|); used for bootstrap resampling of profile values.
std::vector<double> abel_point_weights(std::span<const double> scaled, double r0,
                                       double table_step = 0.002);

// Diagonal pattern function f_nn(x) = d/dx [psi_n(x) phi_n(x)], with phi_n
// the irregular oscillator solution at energy n + 1/2, normalized so that
// Integral p_m(x) f_nn(x) dx = delta_mn for m, n <= 10.  Table-backed for
// |x| <= 8; throws std::out_of_range beyond the table.
double pattern_function(int n, double x);

struct DiagonalEstimate {
    int n = 0;
    double rho = 0.0;
    double std_error = 0.0;
};

// rho_nn = mean_m f_nn(x_m); stderr from a nonparametric bootstrap with
// shared resamples across n.  The phased overload enforces phase coverage.
std::vector<DiagonalEstimate> estimate_diagonals(const CalibratedSamples& samples, int n_max,
                                                 int bootstrap_reps, std::uint64_t seed = 1);
std::vector<DiagonalEstimate> estimate_diagonals(std::span<const double> x, int n_max,
                                                 int bootstrap_reps, std::uint64_t seed = 1);

} // namespace dfstomo

#endif
