#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dswater/error.hpp"
#include "dswater/fusion.hpp"
#include "dswater/indices.hpp"
#include "dswater/raster.hpp"
#include "dswater/scene_gen.hpp"
#include "dswater/spectral_model.hpp"

namespace fs = std::filesystem;
using namespace dswater;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Bad flag or config values; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_failure, "failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, "cannot create " + dir.string() + ": " + ec.message());
}

// Runs a validation step, turning its range errors into usage errors.
template <class F>
void validated(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
}

template <class F>
auto at_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.in_stage(stage);
  }
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

// detect -------------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string config;
  std::string out;
  PipelineConfig cfg;
  double lambda = 1.0;
};

void add_pipeline_flags(CLI::App* cmd, DetectArgs& a) {
  auto& c = a.cfg;
  cmd->add_option("--nbins", c.threshold.nbins, "NIR histogram bins (>= 8)")->capture_default_str();
  cmd->add_option("--window", c.gamma.window, "Neighbourhood window s, odd")->capture_default_str();
  cmd->add_option("--harvest-threshold", c.harvest.threshold,
                  "Spectral mass a pixel must exceed to become a training sample, in [0, 1)")
      ->capture_default_str();
  cmd->add_option("--per-class", c.harvest.per_class, "Training samples per class")
      ->capture_default_str();
  cmd->add_option("--min-samples", c.harvest.min_samples,
                  "Fewest eligible pixels per class before training fails")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for sample harvesting and training order")
      ->capture_default_str();
  cmd->add_option("--r", c.decision.r, "Appriou decision parameter r, in [0, 1]")
      ->capture_default_str();
  cmd->add_option("--k-d", c.decision.k_d, "Appriou weight k_d, > 0")->capture_default_str();
  cmd->add_option("--lambda", a.lambda, "Appriou weight lambda for every subset, > 0")
      ->capture_default_str();
  cmd->add_option("--epochs", c.train.epochs, "Classifier training epochs")->capture_default_str();
  cmd->add_option("--reg", c.train.reg, "Classifier L2 regularisation, > 0")->capture_default_str();
  cmd->add_option("--learning-rate", c.train.learning_rate, "Classifier base step size, > 0")
      ->capture_default_str();
  cmd->add_option("--alpha", c.train.alpha, "Supervised mass scale alpha, in (0, 1]")
      ->capture_default_str();
}

// Config file first, then every flag given on the command line on top.
PipelineConfig resolve_config(CLI::App* cmd, const DetectArgs& a) {
  PipelineConfig cfg;
  if (!a.config.empty()) {
    std::string text;
    try {
      text = read_text(a.config);
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
    validated([&] { cfg = pipeline_config_from_json(text, cfg); });
  }
  const auto given = [&](const char* flag) { return cmd->get_option(flag)->count() > 0; };
  const auto& f = a.cfg;
  if (given("--nbins")) cfg.threshold.nbins = f.threshold.nbins;
  if (given("--window")) cfg.gamma.window = f.gamma.window;
  if (given("--harvest-threshold")) cfg.harvest.threshold = f.harvest.threshold;
  if (given("--per-class")) cfg.harvest.per_class = f.harvest.per_class;
  if (given("--min-samples")) cfg.harvest.min_samples = f.harvest.min_samples;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--r")) cfg.decision.r = f.decision.r;
  if (given("--k-d")) cfg.decision.k_d = f.decision.k_d;
  if (given("--lambda")) cfg.decision.lambda.assign(4, a.lambda);
  if (given("--epochs")) cfg.train.epochs = f.train.epochs;
  if (given("--reg")) cfg.train.reg = f.train.reg;
  if (given("--learning-rate")) cfg.train.learning_rate = f.train.learning_rate;
  if (given("--alpha")) cfg.train.alpha = f.train.alpha;
  validated([&] { cfg.validate(); });
  return cfg;
}

int run_detect(CLI::App* cmd, const DetectArgs& a) {
  const PipelineConfig cfg = resolve_config(cmd, a);
  const MultiBandRaster raster = at_stage("input", [&] { return load_raster(a.input); });
  const PipelineResult result = run_pipeline(raster, cfg);

  const fs::path out(a.out);
  at_stage("output", [&] {
    ensure_dir(out);
    render_classmap(result.classmap, out / "classmap.ppm");
    const std::array<std::string, 3> names{"mass_water.pgm", "mass_nonwater.pgm",
                                           "mass_ignorance.pgm"};
    render_mass_channel(result.classmap, MassChannel::water, out / names[0]);
    render_mass_channel(result.classmap, MassChannel::non_water, out / names[1]);
    render_mass_channel(result.classmap, MassChannel::ignorance, out / names[2]);
    write_text(out / "report.json", pipeline_report_json(result, names));
  });
  const auto& s = result.fused_shares;
  std::cout << "t = " << format_number(result.threshold.params.t) << "\n"
            << "water " << std::fixed << std::setprecision(2) << s.water << "%, non-water "
            << s.non_water << "%, ignorance " << s.ignorance << "%\n";
  return kExitOk;
}

// threshold ----------------------------------------------------------------

struct ThresholdArgs {
  std::string input;
  std::string band{dswater::band::nir};
  std::string out;
  ThresholdConfig cfg;
};

int run_threshold(const ThresholdArgs& a) {
  validated([&] { a.cfg.validate(); });
  const MultiBandRaster raster = at_stage("input", [&] { return load_raster(a.input); });
  const Grid<double>& values = at_stage("input", [&]() -> const Grid<double>& { return raster.band(a.band); });
  const ThresholdAnalysis an =
      at_stage("threshold", [&] { return analyze_threshold(values.values(), a.cfg); });
  const auto& h = an.histogram;
  std::cout << "t = " << format_number(an.params.t) << "\n"
            << "peaks = " << format_number(h.center(an.peaks.first)) << ", "
            << format_number(h.center(an.peaks.second)) << " (bins " << an.peaks.first << ", "
            << an.peaks.second << ")\n"
            << "range = " << format_number(an.params.n_min) << " .. " << format_number(an.params.n_max)
            << "\n";
  if (!a.out.empty()) {
    at_stage("output", [&] {
      const fs::path out(a.out);
      ensure_dir(out);
      std::ostringstream hist;
      hist << std::setprecision(17) << "bin,lo,hi,center,count,smoothed\n";
      for (std::size_t i = 0; i < h.bins(); ++i) {
        hist << i << ',' << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.center(i) << ','
             << h.counts[i] << ',' << an.smoothed[i] << '\n';
      }
      write_text(out / "histogram.csv", hist.str());
      std::ostringstream fit;
      fit << std::setprecision(17) << "bin,center,sqrt_count,fit,refined_fit\n";
      for (std::size_t i = an.peaks.first; i <= an.peaks.second; ++i) {
        fit << i << ',' << h.center(i) << ',' << std::sqrt(static_cast<double>(h.counts[i])) << ','
            << an.fit.polynomial(h.center(i)) << ',';
        if (i >= an.refined_first && i <= an.refined_last) fit << an.refined_fit.polynomial(h.center(i));
        fit << '\n';
      }
      write_text(out / "fit.csv", fit.str());
    });
  }
  return kExitOk;
}

// indices ------------------------------------------------------------------

struct IndicesArgs {
  std::string input;
  std::string out;
};

int run_indices(const IndicesArgs& a) {
  const MultiBandRaster raster = at_stage("input", [&] { return load_raster(a.input); });
  const Grid<FeatureVector> features = at_stage("indices", [&] { return feature_raster(raster); });
  const MultiBandRaster planes = feature_planes(features);
  at_stage("output", [&] {
    const fs::path out(a.out);
    ensure_dir(out);
    for (const auto& b : planes.bands()) {
      write_pgm(out / (b.name + ".pgm"), stretch_to_bytes(b.values, -1.0, 1.0));
    }
    save_raster(planes, out / "indices.json");
  });
  return kExitOk;
}

// synth --------------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out;
  std::uint64_t seed = 42;
};

int run_synth(CLI::App* cmd, const SynthArgs& a) {
  SceneSpec spec;
  if (!a.spec.empty()) {
    std::string text;
    try {
      text = read_text(a.spec);
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
    validated([&] { spec = scene_spec_from_json(text); });
  }
  if (cmd->get_option("--seed")->count() > 0) spec.seed = a.seed;
  validated([&] { spec.validate(); });

  const GeneratedScene scene = at_stage("synth", [&] { return generate(spec); });
  for (const auto& w : scene.warnings) std::cerr << "warning: " << w << "\n";
  at_stage("output", [&] {
    fs::path header(a.out);
    if (header.extension() != ".json") header += ".json";
    if (header.has_parent_path()) ensure_dir(header.parent_path());
    save_raster(scene.raster, header);
    write_truth(scene.truth, header.parent_path() / "truth.pgm");
  });
  return kExitOk;
}

// render -------------------------------------------------------------------

struct RenderArgs {
  std::string input;
  std::vector<std::string> bands;
  std::string out;
  std::optional<double> lo;
  std::optional<double> hi;
};

int run_render(const RenderArgs& a) {
  if (a.bands.size() != 1 && a.bands.size() != 3) {
    throw UsageError("--band takes one band (grey) or three bands (red, green, blue order)");
  }
  const MultiBandRaster raster = at_stage("input", [&] { return load_raster(a.input); });
  std::vector<Grid<std::uint8_t>> channels;
  at_stage("render", [&] {
    for (const auto& name : a.bands) {
      const Grid<double>& g = raster.band(name);
      const auto [mn, mx] = std::minmax_element(g.values().begin(), g.values().end());
      const double lo = a.lo.value_or(*mn);
      double hi = a.hi.value_or(*mx);
      if (!(hi > lo)) hi = lo + 1.0;
      channels.push_back(stretch_to_bytes(g, lo, hi));
    }
  });
  at_stage("output", [&] {
    const fs::path out(a.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    if (channels.size() == 1) {
      write_pgm(out, channels[0]);
    } else {
      Grid<Rgb> rgb(raster.width(), raster.height());
      for (std::size_t i = 0; i < rgb.size(); ++i) {
        rgb[i] = Rgb{channels[0][i], channels[1][i], channels[2][i]};
      }
      write_ppm(out, rgb);
    }
  });
  return kExitOk;
}

// score --------------------------------------------------------------------

struct ScoreArgs {
  std::string classmap;
  std::string truth;
  std::string out;
};

int run_score(const ScoreArgs& a) {
  const ClassMap map = at_stage("input", [&] { return read_classmap(a.classmap); });
  const Grid<Truth> truth = at_stage("input", [&] { return read_truth(a.truth); });
  const SceneScore s = at_stage("score", [&] { return score(map.labels, truth); });
  const std::string text = to_json(s) + "\n";
  std::cout << text;
  if (!a.out.empty()) at_stage("output", [&] { write_text(a.out, text); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Water detection on multi-spectral rasters by evidence fusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dswater 0.1.0");

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Run the full detection pipeline on a raster");
  detect_cmd->add_option("--input", detect.input, "Raster header (JSON)")->required()->check(CLI::ExistingFile);
  detect_cmd->add_option("--config", detect.config, "Pipeline config (JSON); flags override it");
  detect_cmd->add_option("--out", detect.out, "Output directory")->required();
  add_pipeline_flags(detect_cmd, detect);

  ThresholdArgs threshold;
  auto* threshold_cmd = app.add_subcommand("threshold", "Find the water/non-water split of a band");
  threshold_cmd->add_option("--input", threshold.input, "Raster header (JSON)")->required()->check(CLI::ExistingFile);
  threshold_cmd->add_option("--band", threshold.band, "Band to analyse")->capture_default_str();
  threshold_cmd->add_option("--nbins", threshold.cfg.nbins, "Histogram bins (>= 8)")->capture_default_str();
  threshold_cmd->add_option("--out", threshold.out,
                            "Directory for histogram.csv and fit.csv (optional)");

  IndicesArgs indices;
  auto* indices_cmd = app.add_subcommand("indices", "Compute NDVI, NDWI and RE-NDWI planes");
  indices_cmd->add_option("--input", indices.input, "Raster header (JSON)")->required()->check(CLI::ExistingFile);
  indices_cmd->add_option("--out", indices.out, "Output directory")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  synth_cmd->add_option("--spec", synth.spec, "Scene spec (JSON); built-in default when omitted");
  synth_cmd->add_option("--out", synth.out,
                        "Output prefix; writes <prefix>.json, <prefix>.band and truth.pgm beside them")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Scene seed, overrides the spec")->capture_default_str();

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render one band to PGM or three bands to PPM");
  render_cmd->add_option("--input", render.input, "Raster header (JSON)")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--band", render.bands, "Band name; give three for a colour image")->required();
  render_cmd->add_option("--out", render.out, "Output image path")->required();
  render_cmd->add_option("--lo", render.lo, "Value mapped to 0 (default: band minimum)");
  render_cmd->add_option("--hi", render.hi, "Value mapped to 255 (default: band maximum)");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score a class map against a truth map");
  score_cmd->add_option("--classmap", score_args.classmap, "Class map (PPM)")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--truth", score_args.truth, "Truth map (PGM)")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--out", score_args.out, "Also write the metrics JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  const std::string prog = "dswater " + app.get_subcommands().front()->get_name();
  try {
    if (detect_cmd->parsed()) return run_detect(detect_cmd, detect);
    if (threshold_cmd->parsed()) return run_threshold(threshold);
    if (indices_cmd->parsed()) return run_indices(indices);
    if (synth_cmd->parsed()) return run_synth(synth_cmd, synth);
    if (render_cmd->parsed()) return run_render(render);
    if (score_cmd->parsed()) return run_score(score_args);
  } catch (const UsageError& e) {
    std::cerr << prog << ": usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << prog << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << prog << ": " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
