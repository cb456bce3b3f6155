#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gplab/check.hpp"
#include "gplab/concentration.hpp"
#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/experiment.hpp"
#include "gplab/fractional.hpp"
#include "gplab/models.hpp"
#include "gplab/process.hpp"
#include "gplab/report.hpp"
#include "gplab/rkhs.hpp"
#include "gplab/seed.hpp"
#include "gplab/version.hpp"

namespace py = pybind11;
using namespace gplab;

namespace {

GridFunction on_unit_grid(const std::vector<double>& values) {
  if (values.size() < 3) throw DomainError("need at least 3 grid values");
  return GridFunction(Grid(1, values.size() - 1), values);
}

py::dict entry_dict(const SmallBallEntry& e) {
  py::dict d;
  d["eps"] = e.eps;
  d["hits"] = e.hits;
  d["p_hat"] = e.p_hat;
  d["exponent"] = e.exponent;
  d["exponent_ci"] = py::make_tuple(e.exponent_ci.lo, e.exponent_ci.hi);
  d["censored"] = e.censored;
  return d;
}

py::object json_to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian process priors: sampling, small-ball and concentration estimates, posterior models";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "GplabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<PriorSpec>(m, "PriorSpec")
      .def_static("bm", &PriorSpec::bm)
      .def_static("released_bm", &PriorSpec::released_bm)
      .def_static("integrated_bm", &PriorSpec::integrated_bm, py::arg("k"))
      .def_static("rl_plus_poly", &PriorSpec::rl_plus_poly, py::arg("alpha"))
      .def_static("riemann_liouville", &PriorSpec::riemann_liouville, py::arg("alpha"))
      .def_static("random_polynomial", &PriorSpec::random_polynomial, py::arg("degree"),
                  py::arg("factorial_scaled") = false)
      .def_static("fbm", &PriorSpec::fbm, py::arg("alpha"))
      .def_static("wavelet", &PriorSpec::wavelet, py::arg("d"), py::arg("a"), py::arg("J"))
      .def_static("scaled", &PriorSpec::scaled, py::arg("base"), py::arg("a"))
      .def_static("scaled_uniform", &PriorSpec::scaled_uniform, py::arg("base"), py::arg("lo"), py::arg("hi"))
      .def_static("sum", &PriorSpec::sum, py::arg("components"))
      .def("describe", &PriorSpec::describe)
      .def("to_config", [](const PriorSpec& p) { return prior_to_config(p); })
      .def("__repr__", [](const PriorSpec& p) { return "PriorSpec(" + p.describe() + ")"; });

  m.def("prior_from_config", [](const std::string& text) {
    Config cfg = Config::parse(text);
    PriorSpec p = prior_from_config(cfg);
    cfg.reject_unknown();
    return p;
  });

  m.def("child_seed", &child_seed, py::arg("master"), py::arg("tag"), py::arg("index"));

  m.def(
      "kernel",
      [](const PriorSpec& p, double s, double t) { return kernel_of(p)(s, t); }, py::arg("prior"), py::arg("s"),
      py::arg("t"));
  m.def(
      "gram",
      [](const PriorSpec& p, const std::vector<double>& pts) { return kernel_of(p).gram(pts); }, py::arg("prior"),
      py::arg("points"));

  m.def(
      "sample_path",
      [](const PriorSpec& p, std::size_t m_, std::uint64_t seed, int d) {
        return sample_path(p, Grid(d, m_), seed).vector();
      },
      py::arg("prior"), py::arg("m"), py::arg("seed"), py::arg("d") = 1,
      "Prior draw on the grid {i/m}; flat node order ix*(m+1)+iy for d = 2.");

  m.def(
      "small_ball",
      [](const PriorSpec& p, std::size_t m_, std::vector<double> eps, std::size_t reps, std::uint64_t seed,
         const std::string& norm, int threads) {
        auto est = small_ball(p, Grid(p.is<WaveletSeries>() ? p.as<WaveletSeries>().d : 1, m_),
                              parse_norm_kind(norm), std::move(eps), reps, seed, threads);
        py::list out;
        for (const auto& e : est.entries) out.append(entry_dict(e));
        return out;
      },
      py::arg("prior"), py::arg("m"), py::arg("eps"), py::arg("reps"), py::arg("seed"), py::arg("norm") = "sup",
      py::arg("threads") = 1);

  m.def(
      "frac_integral", [](const std::vector<double>& f, double alpha) { return frac_integral(on_unit_grid(f), alpha).vector(); },
      py::arg("values"), py::arg("alpha"));
  m.def(
      "frac_derivative",
      [](const std::vector<double>& f, double alpha) {
        auto r = frac_derivative(on_unit_grid(f), alpha);
        return py::make_tuple(r.value.vector(), r.precondition_violated);
      },
      py::arg("values"), py::arg("alpha"), "Returns (values, precondition_violated).");

  m.def(
      "decentering",
      [](const std::vector<double>& w0, const PriorSpec& p, double eps, const std::string& norm) {
        auto r = decentering(on_unit_grid(w0), p, eps, parse_norm_kind(norm));
        py::dict d;
        d["eps"] = r.eps;
        d["value"] = r.value;
        d["constraint_achieved"] = r.constraint_achieved;
        d["provenance"] = r.provenance;
        return d;
      },
      py::arg("w0"), py::arg("prior"), py::arg("eps"), py::arg("norm") = "sup");

  m.def(
      "solve_rate",
      [](const std::function<double(double)>& phi, double lo, double hi, const std::vector<double>& ladder,
         double tol) {
        auto sol = solve_rate(phi, lo, hi, ladder, tol);
        py::list eps;
        for (const auto& p : sol.points) eps.append(p.eps_n ? py::cast(*p.eps_n) : py::none());
        return py::make_tuple(eps, sol.fit ? py::cast(sol.fit->slope) : py::none());
      },
      py::arg("phi"), py::arg("eps_lo"), py::arg("eps_hi"), py::arg("n"), py::arg("tol") = 1e-3,
      "Returns ([eps_n], fitted slope).");

  m.def(
      "density_distances",
      [](const std::vector<double>& v, const std::vector<double>& w) {
        auto d = density_distances(on_unit_grid(v), on_unit_grid(w));
        py::dict out;
        out["hellinger"] = d.hellinger;
        out["kl"] = d.kl;
        out["v_div"] = d.v_div;
        return out;
      },
      py::arg("v"), py::arg("w"));

  m.def(
      "whitenoise_posterior",
      [](const std::vector<double>& y, double n, double a, int J, int levels) {
        WhiteNoiseObservation obs{n, WaveletCoefficients(WaveletBasis(1, levels), y)};
        auto post = whitenoise_posterior(obs, WaveletSeries{1, a, J});
        return py::make_tuple(post.mean, post.variance);
      },
      py::arg("y"), py::arg("n"), py::arg("a"), py::arg("J"), py::arg("levels"),
      "Coefficientwise normal posterior; y holds levels 1..levels flattened. Returns (mean, variance).");

  m.def(
      "regression_posterior",
      [](const std::vector<double>& design, const std::vector<double>& y, const PriorSpec& p, double sigma_lo,
         double sigma_hi) {
        RegressionModel model;
        model.design = design;
        model.sigma_lo = sigma_lo;
        model.sigma_hi = sigma_hi;
        model.sigma0 = sigma_lo;
        auto r = regression_posterior(model, y, p);
        return py::make_tuple(r.mean, r.covariance);
      },
      py::arg("design"), py::arg("y"), py::arg("prior"), py::arg("sigma_lo"), py::arg("sigma_hi"),
      "σ-mixture posterior at the design points. Returns (mean, covariance).");

  m.def(
      "run_experiment",
      [](const std::string& text, int threads) {
        Config cfg = Config::parse(text);
        ExperimentSpec spec = experiment_from_config(cfg);
        cfg.reject_unknown();
        spec.threads = threads;
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = contraction_experiment(spec);
        }
        return json_to_py(to_json(rep));
      },
      py::arg("config"), py::arg("threads") = 1, "Runs a contraction experiment from config text; returns the report.");

  m.def(
      "run_checks",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_checks(CheckTolerances{}, seed)) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["threshold"] = c.threshold;
          d["pass"] = c.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0);
}
