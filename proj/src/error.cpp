#include "dswater/error.hpp"

namespace dswater {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::undefined_distribution: return "undefined-distribution";
    case Errc::frame_mismatch: return "frame-mismatch";
    case Errc::io_failure: return "io-failure";
    case Errc::missing_file: return "missing-file";
    case Errc::malformed_header: return "malformed-header";
    case Errc::payload_size: return "payload-size";
    case Errc::non_finite_value: return "non-finite-value";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::missing_band: return "missing-band";
    case Errc::degenerate_band: return "degenerate-band";
    case Errc::unimodal_histogram: return "unimodal-histogram";
    case Errc::insufficient_separation: return "insufficient-separation";
    case Errc::insufficient_training_data: return "insufficient-training-data";
    case Errc::untrainable: return "untrainable";
    case Errc::degenerate_centers: return "degenerate-centers";
  }
  return "unknown";
}

namespace {

std::string compose(Errc code, const std::string& detail, const std::string& stage) {
  std::string what;
  if (!stage.empty()) {
    what += stage;
    what += ": ";
  }
  what += to_string(code);
  if (!detail.empty()) {
    what += ": ";
    what += detail;
  }
  return what;
}

}  // namespace

Error::Error(Errc code, const std::string& message) : Error(code, message, std::string{}) {}

Error::Error(Errc code, std::string detail, std::string stage)
    : std::runtime_error(compose(code, detail, stage)),
      code_(code),
      detail_(std::move(detail)),
      stage_(std::move(stage)) {}

Error Error::in_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

}  // namespace dswater
