#include "dfstomo/states.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dfstomo/errors.hpp"

namespace dfstomo {

namespace {

constexpr double PI = std::numbers::pi;
constexpr double SQRT2 = std::numbers::sqrt2;
constexpr int MAX_FOCK_ORDER = 64;
constexpr double MAX_ALPHA_ABS = 16.0; // truncation safety bound

double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
    return v;
}

void validate_alpha(Complex a) {
    require_finite(a.real(), "alpha.re");
    require_finite(a.imag(), "alpha.im");
    if (std::abs(a) > MAX_ALPHA_ABS)
        throw std::invalid_argument("|alpha| exceeds the truncation safety bound of 16");
}

void validate_small_n(int n) {
    if (n < 0) throw std::invalid_argument("photon number must be nonnegative");
    if (n > 1) throw std::invalid_argument("Fock inputs with n >= 2 are not supported");
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Generalized Laguerre L_k^{(a)}(x) by the degree recurrence.
double laguerre(int k, double a, double x) {
    if (k == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 + a - x;
    for (int j = 1; j < k; ++j) {
        const double lp1 = ((2.0 * j + 1.0 + a - x) * l - (j + a) * lm1) / (j + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

// Closed-form <m| D(alpha) |n>.
Complex displacement_element(int m, int n, Complex alpha) {
    const double u = std::norm(alpha);
    if (u == 0.0) return m == n ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    const double la = std::log(std::abs(alpha));
    const double ph = std::arg(alpha);
    if (m >= n) {
        const int k = m - n;
        const double mag =
            std::exp(0.5 * (log_factorial(n) - log_factorial(m)) + k * la - 0.5 * u);
        const double val = mag * laguerre(n, static_cast<double>(k), u);
        return val * std::polar(1.0, k * ph);
    }
    const int k = n - m;
    const double mag = std::exp(0.5 * (log_factorial(m) - log_factorial(n)) + k * la - 0.5 * u);
    // (-conj(alpha))^k = (-1)^k |alpha|^k e^{-i k phase}
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double val = mag * laguerre(m, static_cast<double>(k), u) * sign;
    return val * std::polar(1.0, -k * ph);
}

} // namespace

StateModel::StateModel(StateKind k, Complex a, int n, double eta)
    : kind_(k), alpha_(a), n_(n), eta_(eta) {}

StateModel StateModel::vacuum() { return StateModel(StateKind::Vacuum, {0.0, 0.0}, 0, 0.0); }

StateModel StateModel::coherent(Complex alpha) {
    validate_alpha(alpha);
    return StateModel(StateKind::Coherent, alpha, 0, 0.0);
}

StateModel StateModel::fock(int n) {
    validate_small_n(n);
    return StateModel(StateKind::Fock, {0.0, 0.0}, n, 0.0);
}

StateModel StateModel::displaced_fock(Complex alpha, int n) {
    validate_alpha(alpha);
    validate_small_n(n);
    return StateModel(StateKind::DisplacedFock, alpha, n, 0.0);
}

StateModel StateModel::displaced_mix(Complex alpha, double eta) {
    validate_alpha(alpha);
    require_finite(eta, "eta");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must lie in [0, 1]");
    return StateModel(StateKind::DisplacedMix, alpha, 1, eta);
}

double StateModel::center_x() const { return SQRT2 * alpha_.real(); }
double StateModel::center_p() const { return SQRT2 * alpha_.imag(); }

double StateModel::marginal_mean(double theta) const {
    switch (kind_) {
    case StateKind::Vacuum:
    case StateKind::Fock:
        return 0.0;
    default:
        return SQRT2 * std::abs(alpha_) * std::cos(theta - std::arg(alpha_));
    }
}

bool StateModel::phase_symmetric() const {
    switch (kind_) {
    case StateKind::Vacuum:
    case StateKind::Fock:
        return true;
    default:
        return std::abs(alpha_) == 0.0;
    }
}

namespace {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_alpha(Complex a) {
    std::string s = "alpha=" + format_real(a.real());
    if (a.imag() >= 0.0 || std::isnan(a.imag())) s += "+";
    s += format_real(a.imag()) + "i";
    return s;
}

Complex parse_alpha_token(std::string_view tok) {
    // "alpha=<re>[+-]<im>i" or "alpha=<re>"
    if (tok.substr(0, 6) != "alpha=") throw ConfigError("expected alpha=... in state text");
    std::string body(tok.substr(6));
    if (!body.empty() && body.back() == 'i') {
        body.pop_back();
        // split at the last +/- that is not an exponent sign or leading sign
        std::size_t split = std::string::npos;
        for (std::size_t i = body.size(); i-- > 1;) {
            const char c = body[i];
            if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
                split = i;
                break;
            }
        }
        if (split == std::string::npos) throw ConfigError("malformed complex amplitude: " + body);
        const double re = std::stod(body.substr(0, split));
        const double im = std::stod(body.substr(split));
        return {re, im};
    }
    return {std::stod(body), 0.0};
}

double parse_kv_real(std::string_view tok, std::string_view key) {
    if (tok.substr(0, key.size()) != key)
        throw ConfigError("expected " + std::string(key) + "... in state text");
    return std::stod(std::string(tok.substr(key.size())));
}

} // namespace

std::string StateModel::format() const {
    switch (kind_) {
    case StateKind::Vacuum:
        return "vacuum";
    case StateKind::Coherent:
        return "coherent " + format_alpha(alpha_);
    case StateKind::Fock:
        return "fock n=" + std::to_string(n_);
    case StateKind::DisplacedFock:
        return "displaced_fock " + format_alpha(alpha_) + " n=" + std::to_string(n_);
    case StateKind::DisplacedMix:
        return "displaced_mix " + format_alpha(alpha_) + " eta=" + format_real(eta_);
    }
    throw std::logic_error("unreachable");
}

StateModel StateModel::parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string head;
    is >> head;
    std::vector<std::string> toks;
    for (std::string t; is >> t;) toks.push_back(t);
    try {
        if (head == "vacuum") {
            if (!toks.empty()) throw ConfigError("vacuum takes no parameters");
            return vacuum();
        }
        if (head == "coherent") {
            if (toks.size() != 1) throw ConfigError("coherent needs alpha=...");
            return coherent(parse_alpha_token(toks[0]));
        }
        if (head == "fock") {
            if (toks.size() != 1) throw ConfigError("fock needs n=...");
            return fock(static_cast<int>(parse_kv_real(toks[0], "n=")));
        }
        if (head == "displaced_fock") {
            if (toks.size() != 2) throw ConfigError("displaced_fock needs alpha=... n=...");
            return displaced_fock(parse_alpha_token(toks[0]),
                                  static_cast<int>(parse_kv_real(toks[1], "n=")));
        }
        if (head == "displaced_mix") {
            if (toks.size() != 2) throw ConfigError("displaced_mix needs alpha=... eta=...");
            return displaced_mix(parse_alpha_token(toks[0]), parse_kv_real(toks[1], "eta="));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("invalid state '" + std::string(text) + "': " + e.what());
    }
    throw ConfigError("unknown state kind: " + head);
}

double fock_wavefunction(int n, double x) {
    if (n < 0) throw std::invalid_argument("photon number must be nonnegative");
    if (n > MAX_FOCK_ORDER) throw std::invalid_argument("unsupported order: n > 64");
    require_finite(x, "x");
    const double g = std::exp(-0.5 * x * x) * std::pow(PI, -0.25);
    if (n == 0) return g;
    double pm1 = g;
    double p = SQRT2 * x * g;
    for (int k = 1; k < n; ++k) {
        const double pp1 =
            std::sqrt(2.0 / (k + 1.0)) * x * p - std::sqrt(k / (k + 1.0)) * pm1;
        pm1 = p;
        p = pp1;
    }
    return p;
}

double fock_wavefunction_derivative(int n, double x) {
    const double psi = fock_wavefunction(n, x);
    if (n == 0) return -x * psi;
    return std::sqrt(2.0 * n) * fock_wavefunction(n - 1, x) - x * psi;
}

namespace {

double fock_marginal(int n, double x) {
    const double psi = fock_wavefunction(n, x);
    return psi * psi;
}

double gaussian_marginal(double x) { return std::exp(-x * x) / std::sqrt(PI); }

} // namespace

double marginal_pdf(const StateModel& state, double theta, double x) {
    require_finite(theta, "theta");
    require_finite(x, "x");
    switch (state.kind()) {
    case StateKind::Vacuum:
        return gaussian_marginal(x);
    case StateKind::Coherent:
        return gaussian_marginal(x - state.marginal_mean(theta));
    case StateKind::Fock:
        return fock_marginal(state.n(), x);
    case StateKind::DisplacedFock:
        return fock_marginal(state.n(), x - state.marginal_mean(theta));
    case StateKind::DisplacedMix: {
        const double d = state.marginal_mean(theta);
        return state.eta() * fock_marginal(1, x - d) +
               (1.0 - state.eta()) * gaussian_marginal(x - d);
    }
    }
    throw std::logic_error("unreachable");
}

namespace {

// W_n(r^2) = (-1)^n L_n(2 r^2) e^{-r^2} / pi
double fock_wigner(int n, double r2) {
    const double l = laguerre(n, 0.0, 2.0 * r2);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * l * std::exp(-r2) / PI;
}

} // namespace

double wigner_analytic(const StateModel& state, double X, double P) {
    require_finite(X, "X");
    require_finite(P, "P");
    const double dx = X - state.center_x();
    const double dp = P - state.center_p();
    const double r2 = dx * dx + dp * dp;
    switch (state.kind()) {
    case StateKind::Vacuum:
    case StateKind::Coherent:
        return fock_wigner(0, r2);
    case StateKind::Fock:
    case StateKind::DisplacedFock:
        return fock_wigner(state.n(), r2);
    case StateKind::DisplacedMix:
        return state.eta() * fock_wigner(1, r2) + (1.0 - state.eta()) * fock_wigner(0, r2);
    }
    throw std::logic_error("unreachable");
}

namespace {

// P(m) for D(alpha)|1>: e^{-u} u^{m-1} (m-u)^2 / m!, u = |alpha|^2.
double dfs1_pn(int m, double u) {
    if (u == 0.0) return m == 1 ? 1.0 : 0.0;
    const double lg = -u + (m - 1.0) * std::log(u) - log_factorial(m);
    const double d = m - u;
    return std::exp(lg) * d * d;
}

double poisson_pn(int m, double u) {
    if (u == 0.0) return m == 0 ? 1.0 : 0.0;
    return std::exp(-u + m * std::log(u) - log_factorial(m));
}

} // namespace

std::vector<double> photon_statistics(const StateModel& state, int m_max) {
    if (m_max < 0 || m_max > MAX_FOCK_ORDER)
        throw std::invalid_argument("m_max must lie in [0, 64]");
    const double u = std::norm(state.alpha());
    std::vector<double> p(static_cast<std::size_t>(m_max) + 1, 0.0);
    for (int m = 0; m <= m_max; ++m) {
        switch (state.kind()) {
        case StateKind::Vacuum:
            p[m] = (m == 0) ? 1.0 : 0.0;
            break;
        case StateKind::Fock:
            p[m] = (m == state.n()) ? 1.0 : 0.0;
            break;
        case StateKind::Coherent:
            p[m] = poisson_pn(m, u);
            break;
        case StateKind::DisplacedFock:
            p[m] = (state.n() == 0) ? poisson_pn(m, u) : dfs1_pn(m, u);
            break;
        case StateKind::DisplacedMix:
            p[m] = state.eta() * dfs1_pn(m, u) + (1.0 - state.eta()) * poisson_pn(m, u);
            break;
        }
    }
    double total = 0.0;
    for (double v : p) total += v;
    if (1.0 - total > 1e-6)
        std::cerr << "photon_statistics: truncation loses " << (1.0 - total)
                  << " of probability at m_max=" << m_max << "\n";
    return p;
}

FockMatrix::FockMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim) {
    if (dim <= 0) throw std::invalid_argument("matrix dimension must be positive");
}

FockMatrix FockMatrix::identity(int dim) {
    FockMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

FockMatrix FockMatrix::adjoint() const {
    FockMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) r.at(j, i) = std::conj(at(i, j));
    return r;
}

FockMatrix FockMatrix::operator*(const FockMatrix& rhs) const {
    if (rhs.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
    FockMatrix r(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int k = 0; k < dim_; ++k) {
            const Complex aik = at(i, k);
            if (aik == Complex{}) continue;
            for (int j = 0; j < dim_; ++j) r.at(i, j) += aik * rhs.at(k, j);
        }
    }
    return r;
}

Complex FockMatrix::trace() const {
    Complex t = 0.0;
    for (int i = 0; i < dim_; ++i) t += at(i, i);
    return t;
}

Complex FockMatrix::expectation(std::span<const Complex> v) const {
    if (static_cast<int>(v.size()) != dim_) throw std::invalid_argument("vector length mismatch");
    Complex s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        Complex row = 0.0;
        for (int j = 0; j < dim_; ++j) row += at(i, j) * v[j];
        s += std::conj(v[i]) * row;
    }
    return s;
}

FockMatrix displacement_matrix(Complex alpha, int dim) {
    validate_alpha(alpha);
    const double u = std::norm(alpha);
    if (dim < 4.0 * (1.0 + u))
        throw TruncationError("displacement_matrix: dim < 4 (1 + |alpha|^2)");
    FockMatrix d(dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) d.at(m, n) = displacement_element(m, n, alpha);
    return d;
}

std::vector<Complex> displaced_fock_vector(Complex alpha, int n, int dim) {
    validate_alpha(alpha);
    if (n < 0 || n >= dim) throw std::invalid_argument("n must lie in [0, dim)");
    std::vector<Complex> v(static_cast<std::size_t>(dim));
    for (int m = 0; m < dim; ++m) v[m] = displacement_element(m, n, alpha);
    return v;
}

FockMatrix beamsplitter_reduced_state(double transmission, Complex alpha_in, int n, int dim) {
    require_finite(alpha_in.real(), "alpha_in.re");
    require_finite(alpha_in.imag(), "alpha_in.im");
    if (!(transmission > 0.0 && transmission < 0.5))
        throw std::invalid_argument("transmission must lie in (0, 0.5)");
    if (n != 0 && n != 1) throw std::invalid_argument("input Fock order must be 0 or 1");
    // the |alpha| <= 16 safety bound applies to the resulting displacement
    if (std::sqrt(transmission) * std::abs(alpha_in) > MAX_ALPHA_ABS)
        throw std::invalid_argument("sqrt(T) |alpha_in| exceeds the truncation safety bound");
    const double u = std::norm(alpha_in);
    if (dim < 4.0 * (1.0 + transmission * u) + 2.0 * n)
        throw TruncationError("beamsplitter_reduced_state: output dim inadequate");

    const double c = std::sqrt(1.0 - transmission);
    const double s = std::sqrt(transmission);
    const double ln_c = std::log(c);
    const double ln_s = std::log(s);
    const double phase = std::arg(alpha_in);
    const double ln_abs = (u > 0.0) ? std::log(std::abs(alpha_in)) : 0.0;

    // Coherent expansion of mode b, cut where the Poisson tail is < 1e-12.
    int k_max = 8;
    if (u > 0.0) k_max = static_cast<int>(u + 12.0 * std::sqrt(u) + 30.0);
    const int n_blocks = k_max + n; // total photon number of the largest kept block

    // Joint output amplitudes psi[j][l] = <j, l | B | n, alpha>, kept for j < dim.
    std::vector<Complex> psi(static_cast<std::size_t>(dim) * (n_blocks + 1));
    auto at = [&](int j, int l) -> Complex& {
        return psi[static_cast<std::size_t>(j) * (n_blocks + 1) + l];
    };

    std::vector<double> lg(static_cast<std::size_t>(n_blocks) + 2);
    for (std::size_t i = 0; i < lg.size(); ++i) lg[i] = std::lgamma(static_cast<double>(i) + 1.0);
    auto lgf = [&](int k) { return lg[static_cast<std::size_t>(k)]; };

    // log-magnitude of the coherent amplitude <k|alpha>
    auto coh_log = [&](int k) { return -0.5 * u + k * ln_abs - 0.5 * lgf(k); };

    double input_mass = 0.0;
    for (int kb = 0; kb <= k_max; ++kb) {
        const double lm = coh_log(kb);
        if (u == 0.0 && kb > 0) break;
        const double mag = std::exp(lm);
        input_mass += mag * mag;
        const Complex amp = std::polar(mag, kb * phase);
        const int N = kb + n;
        const int j_hi = std::min(N, dim - 1);
        if (n == 0) {
            // B |0,N> -> sum_j sqrt(C(N,j)) s^j c^{N-j} |j, N-j>
            for (int j = 0; j <= j_hi; ++j) {
                const double lb = 0.5 * (lgf(N) - lgf(j) - lgf(N - j)) + j * ln_s + (N - j) * ln_c;
                at(j, N - j) = amp * std::exp(lb);
            }
        } else {
            // B |1,N-1> from (c a+ - s b+)(s a+ + c b+)^{N-1} |0,0> / sqrt((N-1)!)
            for (int j = 0; j <= j_hi; ++j) {
                const double pref = 0.5 * (lgf(j) + lgf(N - j) - lgf(N - 1));
                double beta = 0.0;
                if (j >= 1)
                    beta += std::exp(lgf(N - 1) - lgf(j - 1) - lgf(N - j) + (j - 1) * ln_s +
                                     (N - j + 1) * ln_c + pref);
                if (j <= N - 1)
                    beta -= std::exp(lgf(N - 1) - lgf(j) - lgf(N - 1 - j) + (j + 1) * ln_s +
                                     (N - 1 - j) * ln_c + pref);
                at(j, N - j) = amp * beta;
            }
        }
    }

    FockMatrix rho(dim);
    double captured = 0.0;
    for (int m = 0; m < dim; ++m) {
        for (int mp = m; mp < dim; ++mp) {
            Complex acc = 0.0;
            for (int l = 0; l <= n_blocks; ++l) acc += at(m, l) * std::conj(at(mp, l));
            rho.at(m, mp) = acc;
            rho.at(mp, m) = std::conj(acc);
        }
        captured += rho.at(m, m).real();
    }
    const double loss = 1.0 - captured;
    if (loss > 1e-8)
        throw TruncationError("beamsplitter_reduced_state: joint-state tail mass " +
                              std::to_string(loss) + " exceeds 1e-8");
    return rho;
}

double state_fidelity(std::span<const Complex> pure, const FockMatrix& rho) {
    return rho.expectation(pure).real();
}

} // namespace dfstomo
