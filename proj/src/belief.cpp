#include "dswater/belief.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "dswater/error.hpp"

namespace dswater {

namespace {

constexpr double kRenormTolerance = 1e-6;
constexpr double kZeroTolerance = 1e-12;
constexpr double kTieTolerance = 1e-12;

void require_subset(const MassFunction& m, Subset a) {
  if (!m.frame().contains(a)) {
    throw Error(Errc::invalid_argument,
                "subset " + std::to_string(a) + " lies outside a frame of size " +
                    std::to_string(m.frame().size()));
  }
}

void require_same_frame(const MassFunction& a, const MassFunction& b) {
  if (a.frame_ptr() != b.frame_ptr() && a.frame() != b.frame()) {
    throw Error(Errc::frame_mismatch, "mass functions are defined on different frames");
  }
}

}  // namespace

int cardinality(Subset a) noexcept { return std::popcount(a); }

Frame::Frame(std::vector<std::string> singleton_names) : names_(std::move(singleton_names)) {
  if (names_.empty() || names_.size() > kMaxFrameSize) {
    throw Error(Errc::invalid_argument, "frame size must be between 1 and 16, got " +
                                            std::to_string(names_.size()));
  }
  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      throw Error(Errc::invalid_argument, "duplicate singleton name '" + name + "'");
    }
  }
}

Subset Frame::singleton(std::size_t index) const {
  if (index >= names_.size()) {
    throw Error(Errc::invalid_argument, "singleton index out of range");
  }
  return Subset{1} << index;
}

Subset Frame::singleton(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(Errc::invalid_argument, "unknown singleton '" + std::string(name) + "'");
  }
  return Subset{1} << static_cast<std::size_t>(it - names_.begin());
}

FramePtr make_frame(std::vector<std::string> singleton_names) {
  return std::make_shared<const Frame>(std::move(singleton_names));
}

const FramePtr& water_frame() {
  static const FramePtr frame = make_frame({"water", "non-water"});
  return frame;
}

MassFunction::MassFunction(FramePtr frame, std::vector<double> masses)
    : MassFunction(std::move(frame), std::move(masses), World::closed) {}

MassFunction::MassFunction(FramePtr frame, std::vector<double> masses, World world)
    : frame_(std::move(frame)), masses_(std::move(masses)) {
  if (!frame_) throw Error(Errc::invalid_argument, "null frame");
  if (masses_.size() != frame_->power_set_size()) {
    throw Error(Errc::invalid_argument, "expected " + std::to_string(frame_->power_set_size()) +
                                            " masses, got " + std::to_string(masses_.size()));
  }
  double total = 0.0;
  for (double& v : masses_) {
    if (!std::isfinite(v)) throw Error(Errc::invalid_argument, "non-finite mass");
    if (v < 0.0) {
      if (v < -kZeroTolerance) {
        throw Error(Errc::invalid_argument, "negative mass " + std::to_string(v));
      }
      v = 0.0;
    }
    total += v;
  }
  if (world == World::closed) {
    if (masses_[0] > kZeroTolerance) {
      throw Error(Errc::invalid_argument,
                  "closed-world mass function with m(empty) = " + std::to_string(masses_[0]));
    }
    total -= masses_[0];
    masses_[0] = 0.0;
  }
  if (std::abs(total - 1.0) > kRenormTolerance) {
    throw Error(Errc::invalid_argument, "masses sum to " + std::to_string(total));
  }
  if (total != 1.0) {
    for (double& v : masses_) v /= total;
  }
}

MassFunction MassFunction::open_world(FramePtr frame, std::vector<double> masses) {
  return MassFunction(std::move(frame), std::move(masses), World::open);
}

MassFunction MassFunction::vacuous(FramePtr frame) {
  const Subset omega = frame->omega();
  return categorical(std::move(frame), omega);
}

MassFunction MassFunction::categorical(FramePtr frame, Subset focal) {
  if (!frame) throw Error(Errc::invalid_argument, "null frame");
  if (focal == 0 || !frame->contains(focal)) {
    throw Error(Errc::invalid_argument, "categorical focal set must be a non-empty subset");
  }
  std::vector<double> masses(frame->power_set_size(), 0.0);
  masses[focal] = 1.0;
  return MassFunction(std::move(frame), std::move(masses));
}

MassFunction MassFunction::from_focal(FramePtr frame,
                                      std::initializer_list<std::pair<Subset, double>> focal) {
  if (!frame) throw Error(Errc::invalid_argument, "null frame");
  std::vector<double> masses(frame->power_set_size(), 0.0);
  for (const auto& [subset, value] : focal) {
    if (!frame->contains(subset)) {
      throw Error(Errc::invalid_argument, "focal set outside the frame");
    }
    masses[subset] += value;
  }
  return MassFunction(std::move(frame), std::move(masses));
}

double MassFunction::mass(Subset a) const {
  require_subset(*this, a);
  return masses_[a];
}

double belief(const MassFunction& m, Subset a) {
  require_subset(m, a);
  double sum = 0.0;
  // Enumerate the non-empty subsets of a.
  for (Subset x = a; x != 0; x = (x - 1) & a) sum += m[x];
  return sum;
}

double plausibility(const MassFunction& m, Subset a) {
  require_subset(m, a);
  double sum = 0.0;
  const Subset omega = m.frame().omega();
  for (Subset x = 1; x <= omega; ++x) {
    if ((x & a) != 0) sum += m[x];
  }
  return sum;
}

MassFunction combine_conjunctive(const MassFunction& m1, const MassFunction& m2) {
  require_same_frame(m1, m2);
  const std::size_t n = m1.frame().power_set_size();
  std::vector<double> out(n, 0.0);
  for (Subset x = 0; x < n; ++x) {
    const double a = m1[x];
    if (a == 0.0) continue;
    for (Subset y = 0; y < n; ++y) {
      const double b = m2[y];
      if (b == 0.0) continue;
      out[x & y] += a * b;
    }
  }
  return MassFunction::open_world(m1.frame_ptr(), std::move(out));
}

MassFunction combine_average(std::span<const MassFunction> sources) {
  if (sources.empty()) {
    throw Error(Errc::invalid_argument, "average rule needs at least one source");
  }
  const MassFunction& first = sources.front();
  std::vector<double> out(first.frame().power_set_size(), 0.0);
  for (const MassFunction& m : sources) {
    require_same_frame(first, m);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[static_cast<Subset>(i)];
  }
  const double scale = 1.0 / static_cast<double>(sources.size());
  for (double& v : out) v *= scale;
  return MassFunction::open_world(first.frame_ptr(), std::move(out));
}

namespace {

double non_conflict(const MassFunction& m) {
  const double rest = 1.0 - m.conflict();
  if (rest <= 0.0) {
    throw Error(Errc::undefined_distribution, "m(empty) = 1, pignistic transform undefined");
  }
  return rest;
}

// betP of every singleton, in frame order.
std::vector<double> singleton_pignistic(const MassFunction& m) {
  const double rest = non_conflict(m);
  const std::size_t n = m.frame().size();
  std::vector<double> bet(n, 0.0);
  const Subset omega = m.frame().omega();
  for (Subset b = 1; b <= omega; ++b) {
    const double v = m[b];
    if (v == 0.0) continue;
    const double share = v / cardinality(b);
    for (std::size_t i = 0; i < n; ++i) {
      if (b & (Subset{1} << i)) bet[i] += share;
    }
  }
  for (double& v : bet) v /= rest;
  return bet;
}

}  // namespace

double pignistic(const MassFunction& m, Subset a) {
  require_subset(m, a);
  const double rest = non_conflict(m);
  double sum = 0.0;
  const Subset omega = m.frame().omega();
  for (Subset b = 1; b <= omega; ++b) {
    const int common = cardinality(b & a);
    if (common == 0) continue;
    sum += static_cast<double>(common) / cardinality(b) * m[b];
  }
  return sum / rest;
}

void DecisionParams::validate(std::size_t frame_size) const {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(Errc::invalid_argument, "decision parameter r must lie in [0, 1]");
  }
  if (!(k_d > 0.0) || !std::isfinite(k_d)) {
    throw Error(Errc::invalid_argument, "decision parameter k_d must be positive");
  }
  if (!lambda.empty()) {
    if (lambda.size() != (std::size_t{1} << frame_size)) {
      throw Error(Errc::invalid_argument, "lambda must hold one weight per subset");
    }
    for (std::size_t i = 1; i < lambda.size(); ++i) {
      if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
        throw Error(Errc::invalid_argument, "lambda weights must be positive");
      }
    }
  }
}

namespace {

double utility(Subset x, const DecisionParams& p) {
  const double lambda = p.lambda.empty() ? 1.0 : p.lambda[x];
  return p.k_d * lambda / std::pow(static_cast<double>(cardinality(x)), p.r);
}

}  // namespace

double appriou_score(const MassFunction& m, Subset x, const DecisionParams& params) {
  if (x == 0) throw Error(Errc::invalid_argument, "the empty set cannot be decided");
  params.validate(m.frame().size());
  return utility(x, params) * pignistic(m, x);
}

Subset appriou_decide(const MassFunction& m, const DecisionParams& params) {
  params.validate(m.frame().size());
  const std::vector<double> bet = singleton_pignistic(m);
  const Subset omega = m.frame().omega();

  std::vector<double> scores(static_cast<std::size_t>(omega) + 1, 0.0);
  double best = -1.0;
  for (Subset x = 1; x <= omega; ++x) {
    double p = 0.0;
    for (std::size_t i = 0; i < bet.size(); ++i) {
      if (x & (Subset{1} << i)) p += bet[i];
    }
    scores[x] = utility(x, params) * p;
    best = std::max(best, scores[x]);
  }

  const double tie = kTieTolerance * std::max(1.0, best);
  Subset chosen = 0;
  for (Subset x = 1; x <= omega; ++x) {
    if (scores[x] < best - tie) continue;
    if (chosen == 0 || cardinality(x) > cardinality(chosen)) chosen = x;
  }
  return chosen;
}

}  // namespace dswater
