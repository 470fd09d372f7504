#ifndef THERMORPH_ERROR_HPP
#define THERMORPH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermorph {

enum class ErrorCode {
  invalid_grid,
  invalid_argument,
  dimension_mismatch,
  marker_above_mask,
  non_positive_contrast,
  negative_residual,
  insufficient_distinct_values,
  unsupported_k,
  blob_out_of_bounds,
  parse_error,
  ragged_rows,
  non_finite_value,
  unsupported_depth,
  io_error,
  config_error,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_grid: return "InvalidGrid";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::marker_above_mask: return "MarkerAboveMask";
    case ErrorCode::non_positive_contrast: return "NonPositiveContrast";
    case ErrorCode::negative_residual: return "NegativeResidual";
    case ErrorCode::insufficient_distinct_values: return "InsufficientDistinctValues";
    case ErrorCode::unsupported_k: return "UnsupportedK";
    case ErrorCode::blob_out_of_bounds: return "BlobOutOfBounds";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::ragged_rows: return "RaggedRows";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::unsupported_depth: return "UnsupportedDepth";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "Unknown";
}

/// Configuration problems (bad parameters, unknown keys) as opposed to bad data.
constexpr bool is_config_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::non_positive_contrast:
    case ErrorCode::unsupported_k:
    case ErrorCode::blob_out_of_bounds:
    case ErrorCode::config_error:
      return true;
    default:
      return false;
  }
}

/// The one exception type thrown by the library. The code is the stable,
/// machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thermorph

#endif  // THERMORPH_ERROR_HPP
