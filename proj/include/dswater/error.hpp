#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dswater {

enum class Errc {
  invalid_argument,
  undefined_distribution,
  frame_mismatch,
  io_failure,
  missing_file,
  malformed_header,
  payload_size,
  non_finite_value,
  dimension_mismatch,
  missing_band,
  degenerate_band,
  unimodal_histogram,
  insufficient_separation,
  insufficient_training_data,
  untrainable,
  degenerate_centers,
};

/// Stable kebab-case identifier, e.g. "degenerate-band".
std::string_view to_string(Errc code) noexcept;

/// The single exception type thrown by the library. The code identifies the
/// failure class; the message carries detail and, when raised from the
/// pipeline, the stage that failed.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Same error, annotated with the pipeline stage it surfaced from.
  Error in_stage(std::string stage) const;

 private:
  Error(Errc code, std::string detail, std::string stage);

  Errc code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace dswater
