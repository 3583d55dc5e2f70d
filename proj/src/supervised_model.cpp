#include "dswater/supervised_model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "dswater/error.hpp"
#include "dswater/random.hpp"
#include "dswater/spectral_model.hpp"

namespace dswater {

namespace {

std::array<double, 3> as_array(const FeatureVector& f) { return {f.ndvi, f.ndwi, f.re_ndwi}; }

FeatureVector from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

std::size_t TrainingSet::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [&](const TrainingSample& s) { return s.label == label; }));
}

void HarvestConfig::validate() const {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw Error(Errc::invalid_argument, "harvest threshold must lie in [0, 1)");
  }
  if (per_class == 0) throw Error(Errc::invalid_argument, "per_class must be positive");
  if (min_samples == 0) throw Error(Errc::invalid_argument, "min_samples must be positive");
}

TrainingSet harvest_training_samples(const Grid<MassTriple>& spectral_masses,
                                     const Grid<FeatureVector>& features, const HarvestConfig& cfg) {
  cfg.validate();
  if (!spectral_masses.same_shape(features)) {
    throw Error(Errc::dimension_mismatch, "mass grid and feature grid differ in shape");
  }
  std::vector<std::size_t> water;
  std::vector<std::size_t> non_water;
  for (std::size_t i = 0; i < spectral_masses.size(); ++i) {
    if (spectral_masses[i].water > cfg.threshold) water.push_back(i);
    if (spectral_masses[i].non_water > cfg.threshold) non_water.push_back(i);
  }
  if (water.size() < cfg.min_samples || non_water.size() < cfg.min_samples) {
    throw Error(Errc::insufficient_training_data,
                "eligible pixels above mass " + std::to_string(cfg.threshold) +
                    ": water=" + std::to_string(water.size()) +
                    ", non-water=" + std::to_string(non_water.size()) +
                    ", need at least " + std::to_string(cfg.min_samples) + " each");
  }

  Rng rng(cfg.seed);
  TrainingSet set;
  set.seed = cfg.seed;
  const auto draw = [&](std::vector<std::size_t>& pool, Label label) {
    const std::size_t take = std::min(cfg.per_class, pool.size());
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    for (std::size_t i = 0; i < take; ++i) {
      set.samples.push_back(TrainingSample{features[pool[i]], label, pool[i]});
    }
  };
  draw(water, Label::water);
  draw(non_water, Label::non_water);
  return set;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw Error(Errc::invalid_argument, "epochs must be positive");
  if (!(reg > 0.0) || !std::isfinite(reg)) throw Error(Errc::invalid_argument, "reg must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::invalid_argument, "learning rate must be positive");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0, 1]");
}

double LinearClassifier::decision(const FeatureVector& f) const noexcept {
  const auto x = as_array(f);
  double s = bias;
  for (std::size_t k = 0; k < 3; ++k) s += weights[k] * (x[k] - means[k]) / scales[k];
  return s;
}

Label LinearClassifier::predict(const FeatureVector& f) const noexcept {
  return decision(f) > 0.0 ? Label::water : Label::non_water;
}

LinearClassifier fit_linear_svm(const TrainingSet& set, const TrainConfig& cfg) {
  cfg.validate();
  if (set.count(Label::water) == 0 || set.count(Label::non_water) == 0) {
    throw Error(Errc::untrainable, "training set must contain both classes");
  }
  const std::size_t n = set.samples.size();
  LinearClassifier clf;

  // Standardisation over the training set (population variance).
  for (const auto& s : set.samples) {
    const auto x = as_array(s.features);
    for (std::size_t k = 0; k < 3; ++k) clf.means[k] += x[k];
  }
  for (double& m : clf.means) m /= static_cast<double>(n);
  std::array<double, 3> var{};
  for (const auto& s : set.samples) {
    const auto x = as_array(s.features);
    for (std::size_t k = 0; k < 3; ++k) var[k] += (x[k] - clf.means[k]) * (x[k] - clf.means[k]);
  }
  bool any_spread = false;
  for (std::size_t k = 0; k < 3; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(n));
    if (sd > 0.0) {
      clf.scales[k] = sd;
      any_spread = true;
    } else {
      clf.scales[k] = 1.0;
    }
  }
  if (!any_spread) throw Error(Errc::untrainable, "all training features are constant");

  std::vector<std::array<double, 3>> z(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = as_array(set.samples[i].features);
    for (std::size_t k = 0; k < 3; ++k) z[i][k] = (x[k] - clf.means[k]) / clf.scales[k];
    y[i] = set.samples[i].label == Label::water ? 1.0 : -1.0;
  }

  Rng rng(set.seed);
  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double eta = cfg.learning_rate / (1.0 + cfg.learning_rate * cfg.reg * static_cast<double>(step));
      ++step;
      double score = clf.bias;
      for (std::size_t k = 0; k < 3; ++k) score += clf.weights[k] * z[i][k];
      const double margin = y[i] * score;
      for (double& w : clf.weights) w *= 1.0 - eta * cfg.reg;
      if (margin < 1.0) {
        for (std::size_t k = 0; k < 3; ++k) clf.weights[k] += eta * y[i] * z[i][k];
        clf.bias += eta * y[i];
      }
    }
  }
  return clf;
}

DPrime compute_dprime(const FeatureVector& c_water, const FeatureVector& c_nonwater,
                      const Grid<FeatureVector>& features) {
  if (c_water == c_nonwater) {
    throw Error(Errc::degenerate_centers, "water and non-water centres coincide");
  }
  double max_water = 0.0;
  double max_nonwater = 0.0;
  for (const FeatureVector& f : features.values()) {
    const double d1 = squared_distance(c_water, f);
    const double d2 = squared_distance(c_nonwater, f);
    if (d1 <= d2) {
      max_water = std::max(max_water, d1);
    } else {
      max_nonwater = std::max(max_nonwater, d2);
    }
  }
  return DPrime{max_water > 0.0 ? max_water : kDPrimeFloor,
                max_nonwater > 0.0 ? max_nonwater : kDPrimeFloor};
}

SupervisedModel train(const TrainingSet& set, const Grid<FeatureVector>& image_features,
                      const TrainConfig& cfg) {
  SupervisedModel model;
  model.classifier = fit_linear_svm(set, cfg);
  model.alpha = cfg.alpha;
  model.seed = set.seed;
  model.epochs = cfg.epochs;
  model.reg = cfg.reg;
  model.learning_rate = cfg.learning_rate;

  std::array<double, 3> sum_water{};
  std::array<double, 3> sum_nonwater{};
  for (const auto& s : set.samples) {
    auto& sum = s.label == Label::water ? sum_water : sum_nonwater;
    const auto x = as_array(s.features);
    for (std::size_t k = 0; k < 3; ++k) sum[k] += x[k];
  }
  const auto n_water = static_cast<double>(set.count(Label::water));
  const auto n_nonwater = static_cast<double>(set.count(Label::non_water));
  for (std::size_t k = 0; k < 3; ++k) {
    sum_water[k] /= n_water;
    sum_nonwater[k] /= n_nonwater;
  }
  model.c_water = from_array(sum_water);
  model.c_nonwater = from_array(sum_nonwater);
  model.dprime = compute_dprime(model.c_water, model.c_nonwater, image_features);
  return model;
}

Grid<Label> predict_all(const SupervisedModel& model, const Grid<FeatureVector>& features) {
  Grid<Label> out(features.width(), features.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = model.predict(features[i]);
  return out;
}

double supervised_singleton_mass(double d2, double dprime, double alpha) {
  if (!(dprime > 0.0)) throw Error(Errc::invalid_argument, "D' must be positive");
  if (!(d2 >= 0.0)) throw Error(Errc::invalid_argument, "squared distance must be >= 0");
  // alpha * (e^-q - e^-1) / N rewritten as alpha * (1 - (1 - e^-q) / N), exact at q = 0 and q = 1.
  const double q = d2 / dprime;
  const double m = alpha * (1.0 - (-std::expm1(-q)) / SpectralModelParams::kN);
  return std::clamp(m, 0.0, alpha);
}

MassTriple supervised_masses(const SupervisedModel& model, const FeatureVector& f) {
  const double d1 = squared_distance(model.c_water, f);
  const double d2 = squared_distance(model.c_nonwater, f);
  MassTriple m{0.0, 0.0, 1.0};
  if (d1 <= d2) {
    m.water = supervised_singleton_mass(d1, model.dprime.water, model.alpha);
  } else {
    m.non_water = supervised_singleton_mass(d2, model.dprime.non_water, model.alpha);
  }
  m.ignorance = 1.0 - m.water - m.non_water;
  return m;
}

MassFunction supervised_mass(const SupervisedModel& model, const FeatureVector& f) {
  return to_mass_function(supervised_masses(model, f));
}

std::string to_json(const SupervisedModel& model) {
  const auto& c = model.classifier;
  nlohmann::ordered_json j;
  j["kind"] = "linear-svm";
  j["weights"] = c.weights;
  j["bias"] = c.bias;
  j["feature_means"] = c.means;
  j["feature_scales"] = c.scales;
  j["c_water"] = as_array(model.c_water);
  j["c_nonwater"] = as_array(model.c_nonwater);
  j["dprime_water"] = model.dprime.water;
  j["dprime_nonwater"] = model.dprime.non_water;
  j["alpha"] = model.alpha;
  j["seed"] = model.seed;
  j["epochs"] = model.epochs;
  j["reg"] = model.reg;
  j["learning_rate"] = model.learning_rate;
  return j.dump(2);
}

SupervisedModel supervised_model_from_json(std::string_view text) {
  SupervisedModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "linear-svm") {
      throw Error(Errc::malformed_header, "unsupported model kind");
    }
    model.classifier.weights = j.at("weights").get<std::array<double, 3>>();
    model.classifier.bias = j.at("bias").get<double>();
    model.classifier.means = j.at("feature_means").get<std::array<double, 3>>();
    model.classifier.scales = j.at("feature_scales").get<std::array<double, 3>>();
    model.c_water = from_array(j.at("c_water").get<std::array<double, 3>>());
    model.c_nonwater = from_array(j.at("c_nonwater").get<std::array<double, 3>>());
    model.dprime = DPrime{j.at("dprime_water").get<double>(), j.at("dprime_nonwater").get<double>()};
    model.alpha = j.at("alpha").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.epochs = j.at("epochs").get<std::size_t>();
    model.reg = j.at("reg").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_header, std::string("model JSON: ") + e.what());
  }
  for (double s : model.classifier.scales) {
    if (!(s > 0.0)) throw Error(Errc::malformed_header, "model JSON: feature scales must be positive");
  }
  if (!(model.dprime.water > 0.0 && model.dprime.non_water > 0.0)) {
    throw Error(Errc::malformed_header, "model JSON: D' must be positive");
  }
  if (!(model.alpha > 0.0 && model.alpha <= 1.0)) {
    throw Error(Errc::malformed_header, "model JSON: alpha must lie in (0, 1]");
  }
  return model;
}

}  // namespace dswater
