#ifndef EMPA_ERROR_HPP_
#define EMPA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace empa {

// Every failure the engine reports carries one of these codes. The CLI maps
// them onto exit statuses (see docs/cli.md).
enum class ErrorCode {
  kZeroResistance,
  kUnknownIndicator,
  kMissingIndicator,
  kDuplicateIndicator,
  kInvalidLevel,
  kMissingChannel,
  kMissingEvidence,
  kDegenerateSpec,
  kEmptyTrajectory,
  kDegenerateScenario,
  kSteppedAfterDone,
  kInvalidDirectorAction,
  kBackendFailure,
  kMalformedJudgeOutput,
  kProgramExhausted,
  kAuthMissing,
  kTimeout,
  kRateLimited,
  kMalformedResponse,
  kGeneratorFailure,
  kSchemaIncomplete,
  kInfeasibleStrata,
  kNoHighPriority,
  kMultipleHighPriorities,
  kInsufficientData,
  kEmptyStore,
  kIncompleteStore,
  kCorruptLog,
  kConfigError,
  kIoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroResistance: return "ZeroResistance";
    case ErrorCode::kUnknownIndicator: return "UnknownIndicator";
    case ErrorCode::kMissingIndicator: return "MissingIndicator";
    case ErrorCode::kDuplicateIndicator: return "DuplicateIndicator";
    case ErrorCode::kInvalidLevel: return "InvalidLevel";
    case ErrorCode::kMissingChannel: return "MissingChannel";
    case ErrorCode::kMissingEvidence: return "MissingEvidence";
    case ErrorCode::kDegenerateSpec: return "DegenerateSpec";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kDegenerateScenario: return "DegenerateScenario";
    case ErrorCode::kSteppedAfterDone: return "SteppedAfterDone";
    case ErrorCode::kInvalidDirectorAction: return "InvalidDirectorAction";
    case ErrorCode::kBackendFailure: return "BackendFailure";
    case ErrorCode::kMalformedJudgeOutput: return "MalformedJudgeOutput";
    case ErrorCode::kProgramExhausted: return "ProgramExhausted";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kGeneratorFailure: return "GeneratorFailure";
    case ErrorCode::kSchemaIncomplete: return "SchemaIncomplete";
    case ErrorCode::kInfeasibleStrata: return "InfeasibleStrata";
    case ErrorCode::kNoHighPriority: return "NoHighPriority";
    case ErrorCode::kMultipleHighPriorities: return "MultipleHighPriorities";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kIncompleteStore: return "IncompleteStore";
    case ErrorCode::kCorruptLog: return "CorruptLog";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace empa

#endif  // EMPA_ERROR_HPP_
