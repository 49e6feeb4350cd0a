// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace qcsv {

enum class ErrorCode {
  // calibration model
  MalformedDocument,
  InvalidField,
  DanglingRef,
  UnparsableName,
  // versioned store
  UnknownBranch,
  UnknownCommit,
  AmbiguousPrefix,
  NoChanges,
  ConcurrentUpdate,
  BranchExists,
  InvalidName,
  UnknownSource,
  ConfirmationMismatch,
  LastBranch,
  NotOnBranch,
  SameBranch,
  UnresolvedConflicts,
  InvalidMerge,
  // persistence
  FormatVersionMismatch,
  CorruptLayout,
  IoFailure,
  CasMismatch,
  UnknownRef,
  // characterization / charts
  BadFilename,
  BadDatetime,
  UnknownChip,
  UnknownQubit,
  UnknownProperty,
  NoData,
  // service
  BadRequest,
  NotFound,
  MethodNotAllowed,
  PortInUse,
  RepositoryError,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// HTTP status the API reports for a given error code.
int http_status(ErrorCode code);

/// The one exception type thrown by the library. `detail` carries a
/// structured payload when there is one (e.g. a merge conflict report).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, nlohmann::json detail = nullptr)
      : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace qcsv
