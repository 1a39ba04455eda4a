#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/lyapunov.hpp"
#include "levdyn/measure.hpp"
#include "levdyn/simulator.hpp"
#include "levdyn/workbench.hpp"

namespace py = pybind11;
using namespace levdyn;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw DomainError("expected a one-dimensional series");
    return {a.data(), a.data() + a.size()};
}

py::dict estimate_dict(const LyapunovEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["std_error"] = e.std_error;
    d["near_critical_hits"] = e.near_critical_hits;
    return d;
}

py::dict verdict_dict(const ChaosVerdict& v) {
    py::dict d;
    d["label"] = to_string(v.label);
    d["K"] = v.K ? py::object(py::float_(*v.K)) : py::object(py::none());
    d["pe"] = v.pe_original;
    d["aaft_band"] = py::make_tuple(v.surrogate_band_aaft.lo, v.surrogate_band_aaft.hi);
    d["cpp_band"] = v.surrogate_band_cpp ? py::object(py::make_tuple(v.surrogate_band_cpp->lo, v.surrogate_band_cpp->hi))
                                         : py::object(py::none());
    d["exactly_periodic"] = v.exactly_periodic;
    d["denoised"] = v.denoised;
    d["downsample_factor"] = v.downsample_factor;
    d["cutoff"] = v.cutoff_used;
    d["length_tested"] = v.length_tested;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic leverage map workbench";
    m.attr("__version__") = version();

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<InadmissibleError>(m, "InadmissibleError", error.ptr());
    py::register_exception<SingularError>(m, "SingularError", error.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
    py::register_exception<DegenerateError>(m, "DegenerateError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<TooShortError>(m, "TooShortError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
    py::register_exception<EmptyAfterFilterError>(m, "EmptyAfterFilterError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());

    // map core
    py::class_<MapParams>(m, "MapParams")
        .def(py::init(&make_params), py::arg("phi_star"), py::arg("omega"), py::arg("n") = 1.0,
             py::arg("gamma_liq") = std::nullopt)
        .def_property_readonly("phi_star", &MapParams::phi_star)
        .def_property_readonly("omega", &MapParams::omega)
        .def_property_readonly("n", &MapParams::n_rebalance)
        .def_property_readonly("b", &MapParams::b)
        .def_property_readonly("critical", &MapParams::critical)
        .def_property_readonly("delta", &MapParams::delta)
        .def_property_readonly("gap", &MapParams::gap)
        .def_property_readonly("gamma_liq", &MapParams::gamma_liq)
        .def_property_readonly("noiseless", &MapParams::noiseless)
        .def("with_n", &MapParams::with_n, py::arg("n"))
        .def("__repr__", [](const MapParams& p) {
            return "MapParams(phi_star=" + std::to_string(p.phi_star()) + ", omega=" + std::to_string(p.omega()) +
                   ", n=" + std::to_string(p.n_rebalance()) + ")";
        });

    m.def("admissible", &admissible, py::arg("phi_star"), py::arg("omega"));
    m.def("eval_T", &eval_T, py::arg("params"), py::arg("x"));
    m.def("eval_T_prime", &eval_T_prime, py::arg("params"), py::arg("x"));
    m.def("iterate_T", &iterate_T, py::arg("params"), py::arg("x0"), py::arg("steps"));
    m.def("schwarzian", &schwarzian, py::arg("params"), py::arg("x"));

    py::class_<RegimeLabel>(m, "RegimeLabel")
        .def_property_readonly("regime", [](const RegimeLabel& l) { return to_string(l.regime); })
        .def_property_readonly("tag", [](const RegimeLabel& l) { return regime_tag(l); })
        .def_readonly("periodic_attractor", &RegimeLabel::periodic_attractor)
        .def_readonly("period", &RegimeLabel::period)
        .def_property_readonly("in_dynamical_core", &RegimeLabel::in_dynamical_core)
        .def_property_readonly("periodic", &RegimeLabel::periodic)
        .def("__repr__", [](const RegimeLabel& l) { return "RegimeLabel('" + regime_tag(l) + "')"; });
    m.def("classify", [](const MapParams& p) { return classify(p); }, py::arg("params"));

    // noise kernel
    py::class_<NoiseKernel>(m, "NoiseKernel")
        .def(py::init<MapParams, double>(), py::arg("params"), py::arg("bump_eps") = NoiseKernel::kDefaultBumpEps)
        .def_property_readonly("params", &NoiseKernel::params)
        .def_property_readonly("bump_eps", &NoiseKernel::bump_eps)
        .def_property_readonly("standard_radius", &NoiseKernel::standard_radius)
        .def("sigma_n", &NoiseKernel::sigma_n, py::arg("x"))
        .def("support_radius", &NoiseKernel::support_radius, py::arg("x"))
        .def("density", &NoiseKernel::kernel_density, py::arg("x"), py::arg("y"))
        .def("cdf", &NoiseKernel::kernel_cdf, py::arg("x"), py::arg("y"))
        .def("quantile", &NoiseKernel::quantile, py::arg("eta"))
        .def("random_map", &NoiseKernel::random_map_eval, py::arg("eta"), py::arg("x"))
        .def("random_map_derivative", &NoiseKernel::random_map_derivative, py::arg("eta"), py::arg("x"));

    // simulator
    m.def(
        "simulate",
        [](const NoiseKernel& k, double x0, long steps, int stride, std::uint64_t seed, long transient) {
            std::vector<double> v;
            {
                py::gil_scoped_release release;
                v = simulate_reduced(k, x0, steps, stride, seed, transient).values;
            }
            return to_array(v);
        },
        py::arg("kernel"), py::arg("x0"), py::arg("steps"), py::arg("stride") = 1, py::arg("seed") = 0,
        py::arg("transient") = 0);

    // lyapunov lab
    m.def("lyap_deterministic", py::overload_cast<const MapParams&>(&lyap_deterministic), py::arg("params"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "lyap_average",
        [](const NoiseKernel& k, int realizations, long steps, long transient, std::uint64_t seed) {
            LyapunovEstimate e;
            {
                py::gil_scoped_release release;
                e = lyap_average_estimate(k, {realizations, steps, transient}, seed);
            }
            return estimate_dict(e);
        },
        py::arg("kernel"), py::arg("realizations") = 128, py::arg("steps") = 10'000, py::arg("transient") = 1'000,
        py::arg("seed") = 0);
    m.def(
        "lyap_random",
        [](const NoiseKernel& k, int realizations, long steps, long transient, std::uint64_t seed) {
            LyapunovEstimate e;
            {
                py::gil_scoped_release release;
                e = lyap_random_estimate(k, {realizations, steps, transient}, seed);
            }
            return estimate_dict(e);
        },
        py::arg("kernel"), py::arg("realizations") = 128, py::arg("steps") = 10'000, py::arg("transient") = 1'000,
        py::arg("seed") = 0);

    // measure lab
    m.def(
        "stationary_density",
        [](const NoiseKernel& k, int bins, int sub_points, double tol) {
            StationaryResult r;
            double residual = 0.0;
            {
                py::gil_scoped_release release;
                const UlamMatrix mat = ulam_matrix(k, bins, sub_points);
                r = stationary_solve(mat, tol);
                residual = invariance_residual(mat, r.density);
            }
            py::dict d;
            d["weights"] = to_array(r.density.weights());
            d["iterations"] = r.iterations;
            d["residual"] = residual;
            return d;
        },
        py::arg("kernel"), py::arg("bins") = 2048, py::arg("sub_points") = 1, py::arg("tol") = 1e-12);
    m.def(
        "confining_interval",
        [](const NoiseKernel& k) {
            const ConfiningInterval ci = confining_interval(k);
            return py::make_tuple(ci.epsilon, ci.upper);
        },
        py::arg("kernel"));

    // chaos detection
    m.def(
        "permutation_entropy",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s, int order, int lag) {
            return permutation_entropy(to_vector(s), order, lag);
        },
        py::arg("series"), py::arg("order") = 5, py::arg("lag") = 1);
    m.def(
        "zero_one_test",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s, std::uint64_t seed) {
            return zero_one_test(to_vector(s), {}, seed);
        },
        py::arg("series"), py::arg("seed") = 0);
    m.def("k_cutoff", &k_cutoff, py::arg("length"));
    m.def(
        "cdta_classify",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s, int n_surrogates,
           std::uint64_t seed) {
            const std::vector<double> series = to_vector(s);
            CdtaConfig cfg;
            cfg.n_surrogates = n_surrogates;
            cfg.seed = seed;
            ChaosVerdict v;
            {
                py::gil_scoped_release release;
                v = cdta_classify(series, cfg);
            }
            return verdict_dict(v);
        },
        py::arg("series"), py::arg("n_surrogates") = 100, py::arg("seed") = 0);
    m.def("logistic_orbit", [](double r, double x0, long length, long transient) {
        return to_array(logistic_orbit(r, x0, length, transient));
    }, py::arg("r"), py::arg("x0"), py::arg("length"), py::arg("transient") = 1000);

    // workbench data contracts
    m.def(
        "gen_training_set",
        [](const std::filesystem::path& path, long count, int length, std::vector<int> k_set, double n_lo,
           double n_hi, std::uint64_t seed) {
            TrainingSetConfig cfg{count, length, std::move(k_set), n_lo, n_hi, seed};
            py::gil_scoped_release release;
            gen_training_set(cfg, path);
        },
        py::arg("path"), py::arg("count"), py::arg("length") = 59, py::arg("k_set") = std::vector<int>{1, 2, 3},
        py::arg("n_lo") = 1.0, py::arg("n_hi") = 1e4, py::arg("seed") = 0);
    m.def(
        "read_predictions",
        [](const std::filesystem::path& path) {
            py::list out;
            for (const Prediction& p : read_predictions(path))
                out.append(py::make_tuple(p.row_id, p.k_hat, p.phi_star_hat, p.omega_hat));
            return out;
        },
        py::arg("path"));
    m.def(
        "estimate_n",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s, double phi_star, double omega,
           int k, double n_lo, double n_hi) {
            const NoiseEstimate e = estimate_n(to_vector(s), phi_star, omega, k, n_lo, n_hi);
            py::dict d;
            d["n"] = e.n;
            d["observed"] = e.observed;
            d["predicted"] = e.predicted;
            d["at_lower_bound"] = e.at_lower_bound;
            d["at_upper_bound"] = e.at_upper_bound;
            return d;
        },
        py::arg("series"), py::arg("phi_star"), py::arg("omega"), py::arg("k") = 1, py::arg("n_lo") = 1.0,
        py::arg("n_hi") = 1e9);
}
