#include "gelscan/error.hpp"

namespace gelscan {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptData: return "CorruptData";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::FlatProfile: return "FlatProfile";
    case ErrorCode::NoPeaks: return "NoPeaks";
    case ErrorCode::ConstantImage: return "ConstantImage";
    case ErrorCode::NegativeResult: return "NegativeResult";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::ZeroArea: return "ZeroArea";
    case ErrorCode::ZeroMigration: return "ZeroMigration";
    case ErrorCode::UnknownBand: return "UnknownBand";
    case ErrorCode::SpecOverflow: return "SpecOverflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return 3;
    case ErrorCode::UnsupportedFormat: return 4;
    case ErrorCode::CorruptData: return 5;
    case ErrorCode::IoFailure: return 6;
    case ErrorCode::DegenerateGeometry: return 10;
    case ErrorCode::FlatProfile: return 11;
    case ErrorCode::NoPeaks: return 12;
    case ErrorCode::ConstantImage: return 13;
    case ErrorCode::NegativeResult: return 14;
    case ErrorCode::BadWindow: return 15;
    case ErrorCode::ZeroArea: return 20;
    case ErrorCode::ZeroMigration: return 21;
    case ErrorCode::UnknownBand: return 22;
    case ErrorCode::SpecOverflow: return 30;
    case ErrorCode::InvalidArgument: return 2;
  }
  return 1;
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out(error_code_name(code));
  if (!stage.empty()) out += " at stage '" + stage + "'";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::at_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(code_, detail_, std::move(stage));
}

}  // namespace gelscan
