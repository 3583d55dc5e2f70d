#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "dswater/belief.hpp"
#include "dswater/error.hpp"
#include "dswater/fusion.hpp"
#include "dswater/raster.hpp"
#include "dswater/scene_gen.hpp"
#include "dswater/spectral_model.hpp"
#include "dswater/supervised_model.hpp"

namespace py = pybind11;
using namespace dswater;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Grid<double> grid_from(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  return Grid<double>(w, h, std::vector<double>(a.data(), a.data() + w * h));
}

template <class T, class U = T>
py::array_t<U> array_from(const Grid<T>& g) {
  py::array_t<U> out({g.height(), g.width()});
  auto* dst = out.mutable_data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] = static_cast<U>(g[i]);
  return out;
}

MultiBandRaster raster_from(const py::dict& bands) {
  MultiBandRaster raster(1, 1);
  bool first = true;
  for (const auto& [key, value] : bands) {
    auto g = grid_from(value.cast<F64Array>());
    if (first) {
      raster = MultiBandRaster(g.width(), g.height());
      first = false;
    }
    raster.add_band(key.cast<std::string>(), std::move(g));
  }
  if (first) throw py::value_error("no bands given");
  return raster;
}

py::dict bands_of(const MultiBandRaster& raster) {
  py::dict out;
  for (const auto& name : raster.band_names()) out[py::str(name)] = array_from(raster.band(name));
  return out;
}

Grid<Label> labels_from(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D label array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  Grid<Label> g(w, h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a.data()[i] > 2) throw py::value_error("labels must be 0 (water), 1 (non-water) or 2 (ignorance)");
    g[i] = static_cast<Label>(a.data()[i]);
  }
  return g;
}

Grid<Truth> truth_from(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D truth array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  Grid<Truth> g(w, h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a.data()[i] > 2) throw py::value_error("truth must be 0 (water), 1 (land) or 2 (confuser)");
    g[i] = static_cast<Truth>(a.data()[i]);
  }
  return g;
}

py::dict threshold_dict(const ThresholdAnalysis& an) {
  py::dict d;
  d["t"] = an.params.t;
  d["n_min"] = an.params.n_min;
  d["n_max"] = an.params.n_max;
  d["peak_bins"] = py::make_tuple(an.peaks.first, an.peaks.second);
  d["bin_width"] = an.histogram.bin_width();
  std::vector<double> counts(an.histogram.counts.begin(), an.histogram.counts.end());
  d["counts"] = counts;
  d["edges"] = an.histogram.edges;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Evidential water detection on multi-spectral rasters";

  static py::exception<Error> error_type(m, "DswaterError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string code(to_string(e.code()));
      py::object err = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      err.attr("code") = code;
      err.attr("stage") = e.stage();
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  m.def(
      "pignistic",
      [](double water, double non_water, double ignorance) {
        const auto mf = to_mass_function({water, non_water, ignorance});
        return py::make_tuple(pignistic(mf, kWater), pignistic(mf, kNonWater));
      },
      py::arg("water"), py::arg("non_water"), py::arg("ignorance"),
      "Pignistic probabilities of water and non-water.");

  m.def(
      "decide",
      [](double water, double non_water, double ignorance, double r, double k_d, double lambda_) {
        DecisionParams p;
        p.r = r;
        p.k_d = k_d;
        p.lambda.assign(4, lambda_);
        p.validate(2);
        return std::string(to_string(decide_masses({water, non_water, ignorance}, p)));
      },
      py::arg("water"), py::arg("non_water"), py::arg("ignorance"), py::arg("r") = 0.1,
      py::arg("k_d") = 1.0, py::arg("lambda_") = 1.0, "Appriou decision for one pixel.");

  m.def(
      "analyze_threshold",
      [](const F64Array& values, std::size_t nbins) {
        ThresholdConfig cfg;
        cfg.nbins = nbins;
        std::span<const double> v(values.data(), static_cast<std::size_t>(values.size()));
        return threshold_dict(analyze_threshold(v, cfg));
      },
      py::arg("values"), py::arg("nbins") = 256, "Histogram valley threshold of a band.");

  m.def(
      "spectral_masses",
      [](double n, double t, double n_min, double n_max, double gamma, double alpha) {
        auto p = SpectralModelParams::from_threshold(t, n_min, n_max);
        p.alpha_water = alpha;
        p.alpha_nonwater = alpha;
        const auto mt = spectral_masses(n, p, gamma);
        return py::make_tuple(mt.water, mt.non_water, mt.ignorance);
      },
      py::arg("n"), py::arg("t"), py::arg("n_min"), py::arg("n_max"), py::arg("gamma") = 1.0,
      py::arg("alpha") = 1.0, "Spectral masses (water, non-water, ignorance) of one pixel.");

  m.def("supervised_singleton_mass", &supervised_singleton_mass, py::arg("d2"), py::arg("dprime"),
        py::arg("alpha") = 0.95, "Singleton mass of the nearest class.");

  m.def(
      "generate_scene",
      [](const std::string& spec_json) {
        const SceneSpec spec = spec_json.empty() ? SceneSpec{} : scene_spec_from_json(spec_json);
        const auto scene = generate(spec);
        return py::make_tuple(bands_of(scene.raster), array_from<Truth, std::uint8_t>(scene.truth),
                              scene.warnings);
      },
      py::arg("spec_json") = std::string(),
      "Synthetic scene: (bands, truth, warnings). Truth codes: 0 water, 1 land, 2 confuser.");

  m.def("default_scene_spec", [] { return scene_spec_to_json(SceneSpec{}); });
  m.def("default_pipeline_config", [] { return pipeline_config_to_json(PipelineConfig{}); });

  m.def(
      "run_pipeline",
      [](const py::dict& bands, const std::string& config_json) {
        const auto raster = raster_from(bands);
        const PipelineConfig cfg =
            config_json.empty() ? PipelineConfig{} : pipeline_config_from_json(config_json);
        PipelineResult result;
        {
          py::gil_scoped_release release;
          result = run_pipeline(raster, cfg);
        }
        const auto& masses = *result.classmap.masses;
        py::array_t<double> mass_array({masses.height(), masses.width(), std::size_t{3}});
        auto* dst = mass_array.mutable_data();
        for (std::size_t i = 0; i < masses.size(); ++i) {
          dst[3 * i] = masses[i].water;
          dst[3 * i + 1] = masses[i].non_water;
          dst[3 * i + 2] = masses[i].ignorance;
        }
        return py::make_tuple(array_from<Label, std::uint8_t>(result.classmap.labels), mass_array,
                              pipeline_report_json(result));
      },
      py::arg("bands"), py::arg("config_json") = std::string(),
      "Full pipeline: (labels, masses, report_json). Label codes: 0 water, 1 non-water, 2 ignorance.");

  m.def(
      "score",
      [](const U8Array& labels, const U8Array& truth) {
        return to_json(score(labels_from(labels), truth_from(truth)));
      },
      py::arg("labels"), py::arg("truth"), "Scene metrics as JSON.");

  m.def(
      "load_raster", [](const std::string& path) { return bands_of(load_raster(path)); },
      py::arg("path"));
  m.def(
      "save_raster",
      [](const py::dict& bands, const std::string& path) { save_raster(raster_from(bands), path); },
      py::arg("bands"), py::arg("path"));
}
