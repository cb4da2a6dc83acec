#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace peic {

enum class Errc {
  invalid_params,
  empty_element,
  bad_magic,
  version_mismatch,
  truncated_image,
  checksum_mismatch,
  trailing_data,
  unsupported_link_type,
  truncated_record,
  duplicate_id,
  bad_hex,
  pattern_length_out_of_range,
  malformed_line,
  empty_set,
  candidate_out_of_bounds,
  link_type_mismatch,
  empty_signature_set,
  invalid_spec,
  invalid_grid,
  zero_total,
  inconsistent_filters,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_params: return "invalid-params";
    case Errc::empty_element: return "empty-element";
    case Errc::bad_magic: return "bad-magic";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::truncated_image: return "truncated-image";
    case Errc::checksum_mismatch: return "checksum-mismatch";
    case Errc::trailing_data: return "trailing-data";
    case Errc::unsupported_link_type: return "unsupported-link-type";
    case Errc::truncated_record: return "truncated-record";
    case Errc::duplicate_id: return "duplicate-id";
    case Errc::bad_hex: return "bad-hex";
    case Errc::pattern_length_out_of_range: return "pattern-length-out-of-range";
    case Errc::malformed_line: return "malformed-line";
    case Errc::empty_set: return "empty-set";
    case Errc::candidate_out_of_bounds: return "candidate-out-of-bounds";
    case Errc::link_type_mismatch: return "link-type-mismatch";
    case Errc::empty_signature_set: return "empty-signature-set";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::invalid_grid: return "invalid-grid";
    case Errc::zero_total: return "zero-total";
    case Errc::inconsistent_filters: return "inconsistent-filters";
  }
  return "unknown";
}

/// Every failure raised by the library. Rule-file errors also carry the
/// 1-based line number they were found on.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, what, line)), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(Errc code, const std::string& what, std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " at line " + std::to_string(*line);
    if (!what.empty()) out += ": " + what;
    return out;
  }

  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace peic
