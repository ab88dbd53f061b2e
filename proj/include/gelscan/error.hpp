#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gelscan {

enum class ErrorCode {
  FileNotFound,
  UnsupportedFormat,
  CorruptData,
  IoFailure,
  DegenerateGeometry,
  FlatProfile,
  NoPeaks,
  ConstantImage,
  NegativeResult,
  BadWindow,
  ZeroArea,
  ZeroMigration,
  UnknownBand,
  SpecOverflow,
  InvalidArgument,
};

/// Stable identifier used in CLI messages, service error bodies and reports.
std::string_view error_code_name(ErrorCode code) noexcept;

/// Process exit status the CLI returns for each error. Zero is never used.
int exit_code_for(ErrorCode code) noexcept;

/// The single exception type thrown by the library. `stage()` names the
/// pipeline stage that failed when the error surfaced inside run_pipeline.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Copy of this error attributed to `stage` (keeps an existing attribution).
  Error at_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace gelscan
