#include "dswater/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <utility>

#include "dswater/error.hpp"

namespace dswater {

namespace {

/// A scalar when every weight is equal (or unset), the full list otherwise.
nlohmann::ordered_json lambda_json(const std::vector<double>& lambda) {
  if (lambda.empty()) return 1.0;
  if (std::all_of(lambda.begin(), lambda.end(), [&](double v) { return v == lambda.front(); })) {
    return lambda.front();
  }
  return lambda;
}

std::size_t label_index(Label label) {
  if (label == Label::ignorance) {
    throw Error(Errc::invalid_argument, "confusion matrix takes water/non-water labels only");
  }
  return static_cast<std::size_t>(label);
}

Label label_of(Subset s) {
  switch (s) {
    case kWater:
      return Label::water;
    case kNonWater:
      return Label::non_water;
    default:
      return Label::ignorance;
  }
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.in_stage(stage);
  }
}

}  // namespace

std::size_t ConfusionMatrix::total() const noexcept {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix confusion(const Grid<Label>& spectral, const Grid<Label>& supervised) {
  if (!spectral.same_shape(supervised)) {
    throw Error(Errc::dimension_mismatch, "label grids differ in shape");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    ++cm.counts[label_index(spectral[i])][label_index(supervised[i])];
  }
  return cm;
}

DiscountCoefficients discount_coefficients(const ConfusionMatrix& cm) {
  const auto& c = cm.counts;
  const std::size_t w = 0;
  const std::size_t nw = 1;
  DiscountCoefficients a;
  const std::size_t col_nw = c[w][nw] + c[nw][nw];
  const std::size_t col_w = c[w][w] + c[nw][w];
  a.water = col_nw == 0 ? 0.0 : static_cast<double>(c[w][nw]) / static_cast<double>(col_nw);
  a.non_water = col_w == 0 ? 0.0 : static_cast<double>(c[nw][w]) / static_cast<double>(col_w);
  return a;
}

SpectralEvidence spectral_evidence(const Grid<double>& nir, const SpectralModelParams& params,
                                   const GammaConfig& cfg) {
  params.validate();
  SpectralEvidence ev;
  ev.nir = nir;
  ev.params = params;
  ev.labels = spectral_labels(nir, params);
  ev.gamma = gamma_map(ev.labels, cfg);
  ev.masses = Grid<MassTriple>(nir.width(), nir.height());
  for (std::size_t i = 0; i < nir.size(); ++i) {
    ev.masses[i] = spectral_masses(nir[i], params, ev.gamma[i]);
  }
  return ev;
}

Grid<MassTriple> apply_discounts(const SpectralEvidence& evidence,
                                 const Grid<Label>& supervised_labels,
                                 const DiscountCoefficients& alphas) {
  if (!evidence.labels.same_shape(supervised_labels) ||
      !evidence.masses.same_shape(supervised_labels)) {
    throw Error(Errc::dimension_mismatch, "spectral and supervised grids differ in shape");
  }
  SpectralModelParams discounted = evidence.params;
  discounted.alpha_water = alphas.water;
  discounted.alpha_nonwater = alphas.non_water;
  discounted.validate();

  Grid<MassTriple> out = evidence.masses;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (evidence.labels[i] != supervised_labels[i]) {
      out[i] = spectral_masses(evidence.nir[i], discounted, evidence.gamma[i]);
    }
  }
  return out;
}

MassFunction fuse_pixel(const MassFunction& m1, const MassFunction& m2) {
  const std::array<MassFunction, 2> sources{m1, m2};
  return combine_average(sources);
}

MassTriple fuse_masses(const MassTriple& m1, const MassTriple& m2) noexcept {
  MassTriple m;
  m.water = 0.5 * (m1.water + m2.water);
  m.non_water = 0.5 * (m1.non_water + m2.non_water);
  m.ignorance = 0.5 * (m1.ignorance + m2.ignorance);
  return m;
}

Label decide_pixel(const MassFunction& m, const DecisionParams& params) {
  if (m.frame().size() != 2) {
    throw Error(Errc::frame_mismatch, "pixel decisions need the water/non-water frame");
  }
  return label_of(appriou_decide(m, params));
}

Label decide_masses(const MassTriple& m, const DecisionParams& params) {
  return decide_pixel(to_mass_function(m), params);
}

Grid<Label> decide_all(const Grid<MassTriple>& masses, const DecisionParams& params) {
  params.validate(2);
  Grid<Label> out(masses.width(), masses.height());
  for (std::size_t i = 0; i < masses.size(); ++i) out[i] = decide_masses(masses[i], params);
  return out;
}

void PipelineConfig::validate() const {
  threshold.validate();
  gamma.validate();
  harvest.validate();
  train.validate();
  decision.validate(2);
}

PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_argument, "config must be a JSON object");

  PipelineConfig cfg = std::move(base);
  const auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw Error(Errc::invalid_argument, "config key '" + key + "' must be a number");
    return v.get<double>();
  };
  const auto count = [](const nlohmann::json& v, const std::string& key) -> std::uint64_t {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(Errc::invalid_argument,
                  "config key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };

  for (const auto& [key, v] : j.items()) {
    if (key == "nbins") {
      cfg.threshold.nbins = count(v, key);
    } else if (key == "window") {
      cfg.gamma.window = count(v, key);
    } else if (key == "harvest_threshold") {
      cfg.harvest.threshold = number(v, key);
    } else if (key == "per_class") {
      cfg.harvest.per_class = count(v, key);
    } else if (key == "min_samples") {
      cfg.harvest.min_samples = count(v, key);
    } else if (key == "seed") {
      cfg.seed = count(v, key);
    } else if (key == "r") {
      cfg.decision.r = number(v, key);
    } else if (key == "k_d") {
      cfg.decision.k_d = number(v, key);
    } else if (key == "lambda") {
      if (v.is_number()) {
        cfg.decision.lambda.assign(4, v.get<double>());
      } else if (v.is_array()) {
        cfg.decision.lambda.clear();
        for (const auto& x : v) cfg.decision.lambda.push_back(number(x, key));
      } else {
        throw Error(Errc::invalid_argument, "config key 'lambda' must be a number or an array");
      }
    } else if (key == "epochs") {
      cfg.train.epochs = count(v, key);
    } else if (key == "reg") {
      cfg.train.reg = number(v, key);
    } else if (key == "learning_rate") {
      cfg.train.learning_rate = number(v, key);
    } else if (key == "alpha") {
      cfg.train.alpha = number(v, key);
    } else {
      throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["nbins"] = cfg.threshold.nbins;
  j["window"] = cfg.gamma.window;
  j["harvest_threshold"] = cfg.harvest.threshold;
  j["per_class"] = cfg.harvest.per_class;
  j["min_samples"] = cfg.harvest.min_samples;
  j["seed"] = cfg.seed;
  j["r"] = cfg.decision.r;
  j["k_d"] = cfg.decision.k_d;
  j["lambda"] = lambda_json(cfg.decision.lambda);
  j["epochs"] = cfg.train.epochs;
  j["reg"] = cfg.train.reg;
  j["learning_rate"] = cfg.train.learning_rate;
  j["alpha"] = cfg.train.alpha;
  return j.dump(2);
}

ClassShares class_shares(const Grid<Label>& labels) {
  std::array<std::size_t, 3> n{};
  for (Label l : labels.values()) ++n[static_cast<std::size_t>(l)];
  ClassShares s;
  if (labels.size() == 0) return s;
  const auto total = static_cast<double>(labels.size());
  s.water = 100.0 * static_cast<double>(n[0]) / total;
  s.non_water = 100.0 * static_cast<double>(n[1]) / total;
  s.ignorance = 100.0 * static_cast<double>(n[2]) / total;
  return s;
}

PipelineResult run_pipeline(const MultiBandRaster& raster, const PipelineConfig& cfg) {
  staged("config", [&] { cfg.validate(); });
  PipelineResult res;
  res.config = cfg;

  const Grid<double>& nir = staged("input", [&]() -> const Grid<double>& {
    for (auto name : {band::green, band::red, band::rededge, band::nir}) raster.band(name);
    return raster.band(band::nir);
  });

  // 1. Threshold on the NIR histogram.
  res.threshold = staged("threshold", [&] { return analyze_threshold(nir.values(), cfg.threshold); });

  // 2. Spectral labels, neighbourhood coefficients and undiscounted masses.
  const SpectralEvidence evidence =
      staged("spectral-mass", [&] { return spectral_evidence(nir, res.threshold.params, cfg.gamma); });
  res.spectral_labels = evidence.labels;

  // 3. Training samples from confident spectral pixels.
  const Grid<FeatureVector> features = staged("indices", [&] { return feature_raster(raster); });
  HarvestConfig harvest = cfg.harvest;
  harvest.seed = cfg.seed;
  res.training =
      staged("harvest", [&] { return harvest_training_samples(evidence.masses, features, harvest); });

  // 4. Classifier and per-pixel supervised labels.
  res.model = staged("train", [&] { return train(res.training, features, cfg.train); });
  res.supervised_labels = predict_all(res.model, features);

  // 5. Supervised masses.
  Grid<MassTriple> m2(features.width(), features.height());
  staged("supervised-mass", [&] {
    for (std::size_t i = 0; i < features.size(); ++i) m2[i] = supervised_masses(res.model, features[i]);
  });

  // 6. Confusion matrix and discounting of disagreeing pixels.
  Grid<MassTriple> m1;
  staged("discount", [&] {
    res.confusion = confusion(res.spectral_labels, res.supervised_labels);
    res.alphas = discount_coefficients(res.confusion);
    m1 = apply_discounts(evidence, res.supervised_labels, res.alphas);
  });

  // 7. Average fusion.
  Grid<MassTriple> fused(features.width(), features.height());
  for (std::size_t i = 0; i < fused.size(); ++i) fused[i] = fuse_masses(m1[i], m2[i]);

  // 8-9. Pignistic transform and Appriou decision.
  res.classmap.labels = staged("decision", [&] { return decide_all(fused, cfg.decision); });
  res.classmap.masses = std::move(fused);

  res.spectral_shares = class_shares(res.spectral_labels);
  res.supervised_shares = class_shares(res.supervised_labels);
  res.fused_shares = class_shares(res.classmap.labels);
  return res;
}

std::string pipeline_report_json(const PipelineResult& result,
                                 const std::array<std::string, 3>& mass_images) {
  const auto shares = [](const ClassShares& s, bool with_ignorance) {
    nlohmann::ordered_json j;
    j["water"] = round2(s.water);
    j["non_water"] = round2(s.non_water);
    if (with_ignorance) j["ignorance"] = round2(s.ignorance);
    return j;
  };
  const auto& th = result.threshold;
  const auto& cm = result.confusion.counts;

  nlohmann::ordered_json j;
  j["width"] = result.classmap.width();
  j["height"] = result.classmap.height();
  j["threshold"] = {
      {"t", th.params.t},
      {"n_min", th.params.n_min},
      {"n_max", th.params.n_max},
      {"d_water", th.params.d_water},
      {"d_nonwater", th.params.d_nonwater},
      {"peak_bins", {th.peaks.first, th.peaks.second}},
      {"peak_values", {th.histogram.center(th.peaks.first), th.histogram.center(th.peaks.second)}},
      {"refit_bins", {th.refined_first, th.refined_last}},
      {"bin_width", th.histogram.bin_width()},
  };
  j["training_samples"] = {{"water", result.training.count(Label::water)},
                           {"non_water", result.training.count(Label::non_water)}};
  j["model"] = nlohmann::ordered_json::parse(to_json(result.model));
  j["confusion"] = {
      {"rows", "spectral"},
      {"columns", "supervised"},
      {"water", {{"water", cm[0][0]}, {"non_water", cm[0][1]}}},
      {"non_water", {{"water", cm[1][0]}, {"non_water", cm[1][1]}}},
  };
  j["discount"] = {{"alpha_water", result.alphas.water},
                   {"alpha_nonwater", result.alphas.non_water}};
  j["percent"] = {
      {"spectral", shares(result.spectral_shares, false)},
      {"supervised", shares(result.supervised_shares, false)},
      {"fused", shares(result.fused_shares, true)},
  };
  nlohmann::ordered_json decision;
  decision["r"] = result.config.decision.r;
  decision["k_d"] = result.config.decision.k_d;
  decision["lambda"] = lambda_json(result.config.decision.lambda);
  j["decision"] = decision;
  j["config"] = nlohmann::ordered_json::parse(pipeline_config_to_json(result.config));
  if (!mass_images[0].empty()) {
    j["mass_images"] = {{"water", mass_images[0]},
                        {"non_water", mass_images[1]},
                        {"ignorance", mass_images[2]}};
  }
  return j.dump(2) + "\n";
}

}  // namespace dswater
