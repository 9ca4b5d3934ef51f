#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfstomo/analysis.hpp"
#include "dfstomo/scenarios.hpp"
#include "dfstomo/sim.hpp"
#include "dfstomo/states.hpp"
#include "dfstomo/tomography.hpp"

namespace py = pybind11;
using namespace dfstomo;

namespace {

py::array_t<std::complex<double>> matrix_to_numpy(const FockMatrix& m) {
    py::array_t<std::complex<double>> out({m.dim(), m.dim()});
    auto r = out.mutable_unchecked<2>();
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) r(i, j) = m.at(i, j);
    return out;
}

CalibratedSamples make_calibrated(std::vector<double> x, std::vector<double> theta) {
    if (x.size() != theta.size())
        throw std::invalid_argument("x and theta must have the same length");
    CalibratedSamples c;
    c.x = std::move(x);
    c.theta = std::move(theta);
    return c;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "homodyne tomography of displaced Fock states";

    py::class_<StateModel>(m, "StateModel")
        .def_static("vacuum", &StateModel::vacuum)
        .def_static("coherent", &StateModel::coherent, py::arg("alpha"))
        .def_static("fock", &StateModel::fock, py::arg("n"))
        .def_static("displaced_fock", &StateModel::displaced_fock, py::arg("alpha"),
                    py::arg("n"))
        .def_static("displaced_mix", &StateModel::displaced_mix, py::arg("alpha"),
                    py::arg("eta"))
        .def_static("parse", &StateModel::parse, py::arg("text"))
        .def("format", &StateModel::format)
        .def_property_readonly("alpha", &StateModel::alpha)
        .def_property_readonly("n", &StateModel::n)
        .def_property_readonly("eta", &StateModel::eta)
        .def_property_readonly("center_x", &StateModel::center_x)
        .def_property_readonly("center_p", &StateModel::center_p)
        .def("marginal_mean", &StateModel::marginal_mean, py::arg("theta"))
        .def("phase_symmetric", &StateModel::phase_symmetric)
        .def("__repr__", [](const StateModel& s) { return "StateModel('" + s.format() + "')"; })
        .def("__eq__", [](const StateModel& a, const StateModel& b) { return a == b; });

    m.def("fock_wavefunction", py::vectorize(&fock_wavefunction), py::arg("n"), py::arg("x"));
    m.def(
        "marginal_pdf",
        [](const StateModel& s, double theta, py::array_t<double> x) {
            py::array_t<double> out(x.size());
            auto xi = x.unchecked<1>();
            auto oi = out.mutable_unchecked<1>();
            for (py::ssize_t i = 0; i < xi.shape(0); ++i)
                oi(i) = marginal_pdf(s, theta, xi(i));
            return out;
        },
        py::arg("state"), py::arg("theta"), py::arg("x"));
    m.def(
        "wigner_analytic",
        [](const StateModel& s, double X, double P) { return wigner_analytic(s, X, P); },
        py::arg("state"), py::arg("X"), py::arg("P"));
    m.def(
        "photon_statistics",
        [](const StateModel& s, int m_max) {
            const auto p = photon_statistics(s, m_max);
            return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
        },
        py::arg("state"), py::arg("m_max"));

    m.def(
        "displacement_matrix",
        [](std::complex<double> alpha, int dim) {
            return matrix_to_numpy(displacement_matrix(alpha, dim));
        },
        py::arg("alpha"), py::arg("dim"));
    m.def(
        "beamsplitter_reduced_state",
        [](double t, std::complex<double> a, int n, int dim) {
            return matrix_to_numpy(beamsplitter_reduced_state(t, a, n, dim));
        },
        py::arg("transmission"), py::arg("alpha_in"), py::arg("n"), py::arg("dim"));
    m.def(
        "displaced_fock_fidelity",
        [](double t, std::complex<double> a_in, std::complex<double> a_target, int n, int dim) {
            const FockMatrix rho = beamsplitter_reduced_state(t, a_in, n, dim);
            return state_fidelity(displaced_fock_vector(a_target, n, dim), rho);
        },
        py::arg("transmission"), py::arg("alpha_in"), py::arg("alpha_target"), py::arg("n"),
        py::arg("dim"));

    py::class_<AcquisitionConfig>(m, "AcquisitionConfig")
        .def(py::init<>())
        .def_readwrite("state", &AcquisitionConfig::state)
        .def_readwrite("n_samples", &AcquisitionConfig::n_samples)
        .def_readwrite("theta_start", &AcquisitionConfig::theta_start)
        .def_readwrite("theta_step", &AcquisitionConfig::theta_step)
        .def_readwrite("raw_scale", &AcquisitionConfig::raw_scale)
        .def_readwrite("electronic_noise", &AcquisitionConfig::electronic_noise)
        .def_readwrite("seed", &AcquisitionConfig::seed);

    m.def(
        "run_acquisition",
        [](const AcquisitionConfig& cfg) {
            const AcquisitionRun run = run_acquisition(cfg);
            std::vector<double> raw(run.records.size());
            for (std::size_t i = 0; i < run.records.size(); ++i) raw[i] = run.records[i].x_raw;
            return py::make_tuple(
                py::array_t<double>(static_cast<py::ssize_t>(raw.size()), raw.data()),
                py::array_t<double>(static_cast<py::ssize_t>(run.truth.theta.size()),
                                    run.truth.theta.data()));
        },
        py::arg("config"), "returns (x_raw, true_theta)");
    m.def(
        "vacuum_calibration_run",
        [](const AcquisitionConfig& cfg) {
            const auto rec = vacuum_calibration_run(cfg);
            std::vector<double> raw(rec.size());
            for (std::size_t i = 0; i < rec.size(); ++i) raw[i] = rec[i].x_raw;
            return py::array_t<double>(static_cast<py::ssize_t>(raw.size()), raw.data());
        },
        py::arg("config"));
    m.def(
        "scale_to_vacuum",
        [](std::vector<double> raw, std::vector<double> vac_raw) {
            std::vector<SampleRecord> rec(raw.size()), vac(vac_raw.size());
            for (std::size_t i = 0; i < raw.size(); ++i) rec[i] = {i, raw[i]};
            for (std::size_t i = 0; i < vac_raw.size(); ++i) vac[i] = {i, vac_raw[i]};
            const auto s = scale_to_vacuum(rec, vac);
            return py::array_t<double>(static_cast<py::ssize_t>(s.size()), s.data());
        },
        py::arg("raw"), py::arg("vacuum_raw"));
    m.def(
        "assign_phases",
        [](std::vector<double> scaled) {
            const CalibratedSamples cal = assign_phases(scaled);
            return py::make_tuple(
                py::array_t<double>(static_cast<py::ssize_t>(cal.x.size()), cal.x.data()),
                py::array_t<double>(static_cast<py::ssize_t>(cal.theta.size()),
                                    cal.theta.data()));
        },
        py::arg("scaled"), "returns (x, assigned_theta)");

    m.def("fbp_kernel", py::vectorize(&fbp_kernel), py::arg("x"), py::arg("k_c"));
    m.def(
        "reconstruct_wigner_fbp",
        [](std::vector<double> x, std::vector<double> theta, double gmin, double gmax,
           double gstep, double k_c, int threads) {
            const CalibratedSamples cal = make_calibrated(std::move(x), std::move(theta));
            const GridSpec g{gmin, gmax, gstep};
            const WignerGrid grid = reconstruct_wigner_fbp(cal, g, g, k_c, threads);
            const int n = g.count();
            py::array_t<double> vals({n, n});
            auto vi = vals.mutable_unchecked<2>();
            for (int ip = 0; ip < n; ++ip)
                for (int ix = 0; ix < n; ++ix) vi(ip, ix) = grid.at(ip, ix);
            std::vector<double> axis(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) axis[static_cast<std::size_t>(i)] = g.coord(i);
            return py::make_tuple(
                vals, py::array_t<double>(static_cast<py::ssize_t>(axis.size()), axis.data()));
        },
        py::arg("x"), py::arg("theta"), py::arg("grid_min") = -4.0, py::arg("grid_max") = 4.0,
        py::arg("grid_step") = 0.125, py::arg("k_c") = 6.4, py::arg("threads") = 1,
        "returns (W[ip, ix], axis)");
    m.def(
        "reconstruct_wigner_abel",
        [](std::vector<double> scaled, double r_max, double r_step) {
            const RadialProfile prof = reconstruct_wigner_abel(scaled, r_max, r_step);
            std::vector<double> r(prof.w.size());
            for (std::size_t k = 0; k < prof.w.size(); ++k) r[k] = prof.r(static_cast<int>(k));
            return py::make_tuple(
                py::array_t<double>(static_cast<py::ssize_t>(r.size()), r.data()),
                py::array_t<double>(static_cast<py::ssize_t>(prof.w.size()), prof.w.data()));
        },
        py::arg("scaled"), py::arg("r_max") = 4.0, py::arg("r_step") = 0.05,
        "returns (r, W)");

    m.def("pattern_function", py::vectorize(&pattern_function), py::arg("n"), py::arg("x"));
    m.def(
        "estimate_diagonals",
        [](std::vector<double> x, std::optional<std::vector<double>> theta, int n_max,
           int bootstrap_reps, std::uint64_t seed) {
            std::vector<DiagonalEstimate> d;
            if (theta) {
                d = estimate_diagonals(make_calibrated(std::move(x), std::move(*theta)), n_max,
                                       bootstrap_reps, seed);
            } else {
                d = estimate_diagonals(std::span<const double>(x), n_max, bootstrap_reps, seed);
            }
            py::array_t<double> rho(static_cast<py::ssize_t>(d.size()));
            py::array_t<double> se(static_cast<py::ssize_t>(d.size()));
            auto ri = rho.mutable_unchecked<1>();
            auto si = se.mutable_unchecked<1>();
            for (std::size_t i = 0; i < d.size(); ++i) {
                ri(static_cast<py::ssize_t>(i)) = d[i].rho;
                si(static_cast<py::ssize_t>(i)) = d[i].std_error;
            }
            return py::make_tuple(rho, se);
        },
        py::arg("x"), py::arg("theta") = std::nullopt, py::arg("n_max") = 10,
        py::arg("bootstrap_reps") = 200, py::arg("seed") = 1, "returns (rho_nn, stderr)");

    py::class_<AlphaFit>(m, "AlphaFit")
        .def_readonly("alpha_abs", &AlphaFit::alpha_abs)
        .def_readonly("alpha_phase", &AlphaFit::alpha_phase)
        .def_readonly("alpha_abs_stderr", &AlphaFit::alpha_abs_stderr)
        .def_readonly("alpha_phase_stderr", &AlphaFit::alpha_phase_stderr);
    m.def(
        "fit_alpha",
        [](std::vector<double> x, std::vector<double> theta) {
            return fit_alpha(make_calibrated(std::move(x), std::move(theta)));
        },
        py::arg("x"), py::arg("theta"));

    py::class_<EtaFit>(m, "EtaFit")
        .def_readonly("eta", &EtaFit::eta)
        .def_readonly("stderr", &EtaFit::std_error);
    m.def(
        "fit_eta",
        [](std::vector<double> x, std::vector<double> theta, double alpha_abs,
           double alpha_phase, int reps, std::uint64_t seed) {
            return fit_eta(make_calibrated(std::move(x), std::move(theta)), alpha_abs,
                           alpha_phase, reps, seed);
        },
        py::arg("x"), py::arg("theta"), py::arg("alpha_abs"), py::arg("alpha_phase"),
        py::arg("bootstrap_reps") = 200, py::arg("seed") = 1);

    py::class_<PeakReport>(m, "PeakReport")
        .def_readonly("peaks", &PeakReport::peaks)
        .def_readonly("dips", &PeakReport::dips);
    m.def(
        "peak_report",
        [](std::vector<double> rho, std::optional<std::vector<double>> stderrs) {
            std::vector<DiagonalEstimate> d(rho.size());
            for (std::size_t i = 0; i < rho.size(); ++i) {
                d[i].n = static_cast<int>(i);
                d[i].rho = rho[i];
                d[i].std_error = stderrs ? (*stderrs)[i] : 0.0;
            }
            return peak_report(d);
        },
        py::arg("rho"), py::arg("stderr") = std::nullopt);

    m.def("scenario_names", [] {
        std::vector<std::string> names;
        for (const auto& s : all_scenarios()) names.push_back(s.name);
        return names;
    });
    m.def(
        "scenario_state",
        [](const std::string& name) {
            const auto sc = find_scenario(name);
            if (!sc) throw std::invalid_argument("unknown scenario: " + name);
            return py::make_tuple(sc->state, sc->theta_step);
        },
        py::arg("name"), "returns (state, theta_step)");
}
