#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dswater {

/// A subset of a frame of discernment, one bit per singleton.
using Subset = std::uint32_t;

inline constexpr std::size_t kMaxFrameSize = 16;

int cardinality(Subset a) noexcept;

/// Ordered set of mutually exclusive hypotheses (at most 16).
class Frame {
 public:
  explicit Frame(std::vector<std::string> singleton_names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Number of subsets, 2^n.
  std::size_t power_set_size() const noexcept { return std::size_t{1} << names_.size(); }
  Subset omega() const noexcept { return static_cast<Subset>(power_set_size() - 1); }
  bool contains(Subset a) const noexcept { return (a & ~omega()) == 0; }

  Subset singleton(std::size_t index) const;
  Subset singleton(std::string_view name) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::vector<std::string> names_;
};

using FramePtr = std::shared_ptr<const Frame>;

FramePtr make_frame(std::vector<std::string> singleton_names);

/// The two-hypothesis frame used by the detection pipeline: {water, non-water}.
const FramePtr& water_frame();
inline constexpr Subset kWater = 0b01;
inline constexpr Subset kNonWater = 0b10;
inline constexpr Subset kWaterOrNot = 0b11;

/// Basic belief assignment over a frame, stored densely (2^n entries indexed
/// by subset bitmask). Values are immutable after construction.
///
/// The public constructor enforces the closed world: m(empty) = 0, every mass
/// non-negative, total 1. Totals within 1e-6 of one are renormalised; anything
/// further off is rejected. Only the conjunctive rule produces open-world
/// values (mass on the empty set), through `open_world`.
class MassFunction {
 public:
  MassFunction(FramePtr frame, std::vector<double> masses);

  static MassFunction open_world(FramePtr frame, std::vector<double> masses);
  static MassFunction vacuous(FramePtr frame);
  static MassFunction categorical(FramePtr frame, Subset focal);
  /// Builds from (subset, mass) pairs; unlisted subsets get zero.
  static MassFunction from_focal(FramePtr frame,
                                 std::initializer_list<std::pair<Subset, double>> focal);

  const Frame& frame() const noexcept { return *frame_; }
  const FramePtr& frame_ptr() const noexcept { return frame_; }

  /// Mass of `a`; throws invalid-argument when `a` lies outside the frame.
  double mass(Subset a) const;
  double operator[](Subset a) const noexcept { return masses_[a]; }
  std::span<const double> masses() const noexcept { return masses_; }
  double conflict() const noexcept { return masses_[0]; }

 private:
  enum class World { closed, open };
  MassFunction(FramePtr frame, std::vector<double> masses, World world);

  FramePtr frame_;
  std::vector<double> masses_;
};

/// Bel(a): total mass of the non-empty subsets of `a`.
double belief(const MassFunction& m, Subset a);

/// Pl(a): total mass of the subsets intersecting `a`.
double plausibility(const MassFunction& m, Subset a);

/// Unnormalised conjunctive rule; conflict stays on the empty set.
MassFunction combine_conjunctive(const MassFunction& m1, const MassFunction& m2);

/// Per-subset arithmetic mean of the inputs (idempotent).
MassFunction combine_average(std::span<const MassFunction> sources);

/// Pignistic probability of `a`, with each focal mass spread evenly over its
/// singletons and the conflict renormalised away:
///   betP(a) = sum_B |B & a| / |B| * m(B) / (1 - m(empty)).
/// Throws undefined-distribution when m(empty) = 1.
double pignistic(const MassFunction& m, Subset a);

/// Parameters of the Appriou rule. `lambda` is indexed by subset; empty means
/// lambda = 1 for every subset.
struct DecisionParams {
  double r = 0.1;
  double k_d = 1.0;
  std::vector<double> lambda;

  /// Throws invalid-argument when out of range for a frame of `frame_size`.
  void validate(std::size_t frame_size) const;
};

/// Weighted score k_d * lambda_X / |X|^r * betP(X) of a non-empty subset.
double appriou_score(const MassFunction& m, Subset x, const DecisionParams& params);

/// Appriou decision: the non-empty subset maximising `appriou_score`. Scores
/// within 1e-12 of each other are ties, resolved toward the larger subset and
/// then the lowest bitmask.
Subset appriou_decide(const MassFunction& m, const DecisionParams& params);

}  // namespace dswater
