#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "kaslib/benchmarks.hpp"
#include "kaslib/error.hpp"
#include "kaslib/pipeline.hpp"

namespace py = pybind11;
using namespace kas;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

GradientDataset make_dataset(const Matrix& x, const Matrix& y, const std::vector<Matrix>& gradients,
                             const std::optional<Matrix>& metric, const std::optional<std::vector<double>>& lower,
                             const std::optional<std::vector<double>>& upper) {
  GradientDataset ds;
  ds.X = x;
  ds.Y = y;
  ds.dY = gradients;
  ds.metric = metric;
  if (lower.has_value() != upper.has_value()) throw ArgumentError("give both lower and upper bounds or neither");
  ds.spec = lower ? InputSpec::uniform_box(*lower, *upper) : InputSpec::standard_normal(x.cols());
  ds.validate();
  return ds;
}

TuneConfig make_config(const std::vector<std::vector<double>>& grid, int folds, double tol, Index features, int r,
                       std::optional<double> sigma_f, std::uint64_t seed, int threads) {
  TuneConfig cfg;
  cfg.grid = grid;
  cfg.folds = folds;
  cfg.tol = tol;
  cfg.features = features;
  cfg.r = r;
  cfg.sigma_f = sigma_f;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

SpectralMeasure gaussian_measure(double variance) { return GaussianMeasure{variance}; }

}  // namespace

PYBIND11_MODULE(_kaslib, m) {
  m.doc() = "Active subspaces and kernel-based active subspaces";

  static py::exception<Error> base(m, "KaslibError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const RangeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ArgumentError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<GradientDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("X"), py::arg("Y"), py::arg("gradients"), py::arg("metric") = py::none(),
           py::arg("lower") = py::none(), py::arg("upper") = py::none())
      .def_readonly("X", &GradientDataset::X)
      .def_readonly("Y", &GradientDataset::Y)
      .def_readonly("gradients", &GradientDataset::dY)
      .def_readonly("metric", &GradientDataset::metric)
      .def_property_readonly("size", &GradientDataset::size)
      .def("subset", &GradientDataset::subset);

  m.def("benchmark_names", &benchmark_names);
  m.def(
      "generate_dataset",
      [](const std::string& name, Index samples, std::uint64_t seed) {
        return generate_dataset(make_benchmark(name, seed), samples, seed);
      },
      py::arg("name"), py::arg("samples"), py::arg("seed") = 0);

  py::class_<FeatureMap>(m, "FeatureMap")
      .def_static(
          "random_fourier",
          [](Index input_dim, Index features, double sigma_f, double variance, std::uint64_t seed) {
            return FeatureMap::random_fourier(input_dim, features, sigma_f, gaussian_measure(variance), seed);
          },
          py::arg("input_dim"), py::arg("features"), py::arg("sigma_f") = 1.0, py::arg("variance") = 1.0,
          py::arg("seed") = 0)
      .def_static("from_json", [](const py::object& o) { return feature_map_from_json(from_python(o)); })
      .def("to_json", [](const FeatureMap& fm) { return to_python(to_json(fm)); })
      .def_property_readonly("input_dim", &FeatureMap::input_dim)
      .def_property_readonly("features", &FeatureMap::features)
      .def_property_readonly("projection", &FeatureMap::projection)
      .def_property_readonly("bias", &FeatureMap::bias)
      .def("apply", &FeatureMap::apply)
      .def("apply_rows", &FeatureMap::apply_rows)
      .def("jacobian", &FeatureMap::jacobian)
      .def("lift_gradient", &FeatureMap::lift_gradient)
      .def("kernel_estimate", &FeatureMap::kernel_estimate);

  py::class_<SubspaceResult>(m, "Subspace")
      .def_readonly("eigvals", &SubspaceResult::eigvals)
      .def_readonly("W1", &SubspaceResult::W1)
      .def_readonly("W2", &SubspaceResult::W2)
      .def_readonly("r", &SubspaceResult::r)
      .def_property_readonly("kind", [](const SubspaceResult& s) { return s.kind == SubspaceKind::as ? "AS" : "KAS"; })
      .def("project", [](const SubspaceResult& s, const Matrix& x) { return project(s, x); })
      .def("gaps", [](const SubspaceResult& s) { return eigenvalue_gaps(s); })
      .def("to_json", [](const SubspaceResult& s) { return to_python(to_json(s)); });

  m.def("active_subspace", &active_subspace, py::arg("dataset"), py::arg("r"));
  m.def("kernel_active_subspace", &kernel_active_subspace, py::arg("dataset"), py::arg("feature_map"), py::arg("r"));

  py::class_<GpModel>(m, "GpModel")
      .def(
          "predict",
          [](const GpModel& gp, const Matrix& x) {
            GpBatchPrediction p = gp.predict(x);
            return py::make_tuple(p.means, p.variances);
          },
          py::arg("X"))
      .def_property_readonly("lengthscale", [](const GpModel& gp) { return gp.config().lengthscale; })
      .def_property_readonly("signal_variance", [](const GpModel& gp) { return gp.config().signal_variance; })
      .def_property_readonly("noise_variance", [](const GpModel& gp) { return gp.config().noise_variance; })
      .def_property_readonly("nll", &GpModel::nll)
      .def("to_json", [](const GpModel& gp) { return to_python(to_json(gp)); });

  m.def(
      "gp_fit",
      [](const Matrix& x, const Matrix& y, double lengthscale, double signal_variance, double noise_variance,
         int budget) {
        GpFitOptions opt;
        opt.budget = budget;
        return gp_fit(x, y, KernelConfig{lengthscale, signal_variance, noise_variance}, opt);
      },
      py::arg("X"), py::arg("Y"), py::arg("lengthscale") = 1.0, py::arg("signal_variance") = 1.0,
      py::arg("noise_variance") = 0.0, py::arg("budget") = 500);

  m.def(
      "rrmse", [](const Matrix& targets, const Matrix& preds) { return rrmse(targets, preds); }, py::arg("targets"),
      py::arg("preds"));

  py::class_<Surrogate>(m, "Surrogate")
      .def_readonly("subspace", &Surrogate::subspace)
      .def_readonly("gp", &Surrogate::gp)
      .def(
          "predict",
          [](const Surrogate& s, const Matrix& x) {
            GpBatchPrediction p = predict(s, x);
            return py::make_tuple(p.means, p.variances);
          },
          py::arg("X"))
      .def("reduced_coordinates", [](const Surrogate& s, const Matrix& x) { return reduced_coordinates(s, x); })
      .def("to_json", [](const Surrogate& s) { return to_python(to_json(s)); })
      .def_static("from_json", [](const py::object& o) { return surrogate_from_json(from_python(o)); });

  m.def(
      "fit_surrogate",
      [](const GradientDataset& ds, const std::string& method, int r, const std::optional<FeatureMap>& fm) {
        return fit_surrogate(ds, parse_method(method), r, fm);
      },
      py::arg("dataset"), py::arg("method") = "as", py::arg("r") = 1, py::arg("feature_map") = py::none());

  m.def(
      "grid_search",
      [](const GradientDataset& ds, const std::string& measure, std::optional<std::vector<std::vector<double>>> grid,
         int folds, double tol, Index features, int r, std::optional<double> sigma_f, std::uint64_t seed,
         int threads) {
        const MeasureTemplate t{parse_measure_family(measure), {}};
        TuneConfig cfg = make_config(grid ? *grid : default_grid(t.family), folds, tol, features, r, sigma_f, seed,
                                     threads);
        TuneReport rep;
        {
          py::gil_scoped_release release;
          rep = grid_search(ds, cfg, t);
        }
        py::object fm = rep.best ? py::cast(rep.best->feature_map) : py::none();
        return py::make_tuple(to_python(to_json(rep, false)), fm);
      },
      py::arg("dataset"), py::arg("measure") = "gaussian", py::arg("grid") = py::none(), py::arg("folds") = 5,
      py::arg("tol") = 0.8, py::arg("features") = 1000, py::arg("r") = 1, py::arg("sigma_f") = py::none(),
      py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "compare",
      [](const GradientDataset& ds, const std::vector<int>& rs, const std::string& measure,
         std::optional<std::vector<std::vector<double>>> grid, int folds, double tol, Index features,
         std::optional<double> sigma_f, std::uint64_t seed, int threads, const std::optional<GradientDataset>& test) {
        const MeasureTemplate t{parse_measure_family(measure), {}};
        TuneConfig cfg = make_config(grid ? *grid : default_grid(t.family), folds, tol, features, 1, sigma_f, seed,
                                     threads);
        ComparisonReport rep;
        {
          py::gil_scoped_release release;
          rep = compare(ds, cfg, t, rs, test);
        }
        return to_python(to_json(rep));
      },
      py::arg("dataset"), py::arg("rs") = std::vector<int>{1}, py::arg("measure") = "gaussian",
      py::arg("grid") = py::none(), py::arg("folds") = 5, py::arg("tol") = 0.8, py::arg("features") = 1000,
      py::arg("sigma_f") = py::none(), py::arg("seed") = 0, py::arg("threads") = 1, py::arg("test") = py::none());
}
