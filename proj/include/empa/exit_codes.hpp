#ifndef EMPA_EXIT_CODES_HPP_
#define EMPA_EXIT_CODES_HPP_

// Process exit codes of the command-line tool. docs/cli.md lists them.

#include "empa/error.hpp"
#include "empa/json.hpp"

namespace empa {

enum ExitCode : int {
  kExitOk = 0,
  kExitGeneric = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitValidation = 4,
  kExitIncompleteStore = 5,
  kExitInfeasibleStrata = 6,
  kExitBackend = 7,
  kExitIo = 8,
};

constexpr int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kConfigError:
    case ErrorCode::kDegenerateSpec:
      return kExitConfig;
    case ErrorCode::kUnknownIndicator:
    case ErrorCode::kMissingIndicator:
    case ErrorCode::kDuplicateIndicator:
    case ErrorCode::kInvalidLevel:
    case ErrorCode::kMissingChannel:
    case ErrorCode::kMissingEvidence:
    case ErrorCode::kSchemaIncomplete:
    case ErrorCode::kCorruptLog:
    case ErrorCode::kDegenerateScenario:
    case ErrorCode::kZeroResistance:
      return kExitValidation;
    case ErrorCode::kEmptyStore:
    case ErrorCode::kIncompleteStore:
      return kExitIncompleteStore;
    case ErrorCode::kInfeasibleStrata:
      return kExitInfeasibleStrata;
    case ErrorCode::kBackendFailure:
    case ErrorCode::kMalformedJudgeOutput:
    case ErrorCode::kInvalidDirectorAction:
    case ErrorCode::kProgramExhausted:
    case ErrorCode::kAuthMissing:
    case ErrorCode::kTimeout:
    case ErrorCode::kRateLimited:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kGeneratorFailure:
      return kExitBackend;
    case ErrorCode::kIoError:
      return kExitIo;
    default:
      return kExitGeneric;
  }
}

// Machine-readable error record printed on stderr.
inline json error_record(const Error& e) {
  return json{{"error", std::string(to_string(e.code()))},
              {"message", e.detail()},
              {"exit_code", exit_code_for(e.code())}};
}

}  // namespace empa

#endif  // EMPA_EXIT_CODES_HPP_
