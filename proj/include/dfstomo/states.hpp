#ifndef DFSTOMO_STATES_HPP
#define DFSTOMO_STATES_HPP

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfstomo {

using Complex = std::complex<double>;

// Quadrature convention used throughout: x_theta = (a e^{-i theta} + a^+ e^{i theta})/sqrt(2),
// vacuum variance 1/2, Wigner normalized to unit integral with the vacuum
// W(X,P) = exp(-X^2-P^2)/pi, and a displacement alpha centered at
// (X0, P0) = (sqrt(2) Re alpha, sqrt(2) Im alpha).

enum class StateKind { Vacuum, Coherent, Fock, DisplacedFock, DisplacedMix };

// Symbolic description of the optical ensemble under test.  Immutable after
// construction; factories validate their arguments.
class StateModel {
public:
    static StateModel vacuum();
    static StateModel coherent(Complex alpha);
    static StateModel fock(int n);
    static StateModel displaced_fock(Complex alpha, int n);
    // eta * D|1><1|D^+ + (1-eta) |alpha><alpha|  (lossy displaced Fock ensemble)
    static StateModel displaced_mix(Complex alpha, double eta);

    // Canonical text form, e.g. "displaced_mix alpha=0.6+0i eta=0.62".
    static StateModel parse(std::string_view text);
    std::string format() const;

    StateKind kind() const { return kind_; }
    Complex alpha() const { return alpha_; }
    int n() const { return n_; }
    double eta() const { return eta_; }

    // Phase-space displacement of the ensemble center.
    double center_x() const;
    double center_p() const;
    // Marginal mean d(theta) = sqrt(2)|alpha| cos(theta - arg alpha).
    double marginal_mean(double theta) const;
    // True phase-space symmetry (no recoverable phase information).
    bool phase_symmetric() const;

    bool operator==(const StateModel&) const = default;

private:
    StateModel(StateKind k, Complex a, int n, double eta);
    StateKind kind_;
    Complex alpha_;
    int n_;
    double eta_;
};

// Harmonic-oscillator eigenfunction psi_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)),
// evaluated by the normalized three-term recurrence.  n <= 64.
double fock_wavefunction(int n, double x);

// d/dx of fock_wavefunction: psi_n' = sqrt(2n) psi_{n-1} - x psi_n.
double fock_wavefunction_derivative(int n, double x);

// Quadrature probability density p(x | theta) of the given state.
double marginal_pdf(const StateModel& state, double theta, double x);

// Closed-form Wigner function at (X, P).
double wigner_analytic(const StateModel& state, double X, double P);

// Photon-number probabilities P(0..m_max).  Warns on stderr if the truncated
// tail mass exceeds 1e-6.  m_max <= 64.
std::vector<double> photon_statistics(const StateModel& state, int m_max);

// Dense complex matrix in the truncated Fock basis, row/column indexed by
// photon number.
class FockMatrix {
public:
    explicit FockMatrix(int dim);
    static FockMatrix identity(int dim);

    int dim() const { return dim_; }
    Complex& at(int m, int n) { return a_[static_cast<std::size_t>(m) * dim_ + n]; }
    const Complex& at(int m, int n) const { return a_[static_cast<std::size_t>(m) * dim_ + n]; }

    FockMatrix adjoint() const;
    FockMatrix operator*(const FockMatrix& rhs) const;
    Complex trace() const;
    // <v| M |v>
    Complex expectation(std::span<const Complex> v) const;

private:
    int dim_;
    std::vector<Complex> a_;
};

// <m| D(alpha) |n> in the truncated basis, from the closed-form Laguerre
// matrix elements.  Requires dim >= 4 (1 + |alpha|^2).
FockMatrix displacement_matrix(Complex alpha, int dim);

// Column D(alpha)|n> truncated to dim amplitudes.
std::vector<Complex> displaced_fock_vector(Complex alpha, int n, int dim);

// Exact reduced state of the reflected output port for the input
// |n> (x) |alpha_in> on a lossless beamsplitter of transmission T, computed
// in the truncated two-mode Fock basis with the transmitted port traced out.
// Requires T in (0, 0.5), n in {0, 1}.  Throws TruncationError if more than
// 1e-8 of the joint-state mass falls outside the kept basis.
FockMatrix beamsplitter_reduced_state(double transmission, Complex alpha_in, int n, int dim);

// <psi| rho |psi> for a pure reference state.
double state_fidelity(std::span<const Complex> pure, const FockMatrix& rho);

} // namespace dfstomo

#endif
