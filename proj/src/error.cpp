// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/error.hpp"

namespace qcsv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::DanglingRef: return "DanglingRef";
    case ErrorCode::UnparsableName: return "UnparsableName";
    case ErrorCode::UnknownBranch: return "UnknownBranch";
    case ErrorCode::UnknownCommit: return "UnknownCommit";
    case ErrorCode::AmbiguousPrefix: return "AmbiguousPrefix";
    case ErrorCode::NoChanges: return "NoChanges";
    case ErrorCode::ConcurrentUpdate: return "ConcurrentUpdate";
    case ErrorCode::BranchExists: return "BranchExists";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::ConfirmationMismatch: return "ConfirmationMismatch";
    case ErrorCode::LastBranch: return "LastBranch";
    case ErrorCode::NotOnBranch: return "NotOnBranch";
    case ErrorCode::SameBranch: return "SameBranch";
    case ErrorCode::UnresolvedConflicts: return "UnresolvedConflicts";
    case ErrorCode::InvalidMerge: return "InvalidMerge";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::CorruptLayout: return "CorruptLayout";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::CasMismatch: return "CasMismatch";
    case ErrorCode::UnknownRef: return "UnknownRef";
    case ErrorCode::BadFilename: return "BadFilename";
    case ErrorCode::BadDatetime: return "BadDatetime";
    case ErrorCode::UnknownChip: return "UnknownChip";
    case ErrorCode::UnknownQubit: return "UnknownQubit";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::MethodNotAllowed: return "MethodNotAllowed";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::RepositoryError: return "RepositoryError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument:
    case ErrorCode::InvalidField:
    case ErrorCode::DanglingRef:
    case ErrorCode::UnparsableName:
    case ErrorCode::AmbiguousPrefix:
    case ErrorCode::InvalidName:
    case ErrorCode::ConfirmationMismatch:
    case ErrorCode::NotOnBranch:
    case ErrorCode::SameBranch:
    case ErrorCode::BadFilename:
    case ErrorCode::BadDatetime:
    case ErrorCode::BadRequest:
      return 400;
    case ErrorCode::UnknownBranch:
    case ErrorCode::UnknownCommit:
    case ErrorCode::UnknownSource:
    case ErrorCode::UnknownRef:
    case ErrorCode::UnknownChip:
    case ErrorCode::UnknownQubit:
    case ErrorCode::UnknownProperty:
    case ErrorCode::NoData:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::MethodNotAllowed:
      return 405;
    case ErrorCode::ConcurrentUpdate:
    case ErrorCode::CasMismatch:
    case ErrorCode::BranchExists:
    case ErrorCode::LastBranch:
    case ErrorCode::UnresolvedConflicts:
    case ErrorCode::InvalidMerge:
      return 409;
    case ErrorCode::NoChanges:
      return 422;
    case ErrorCode::FormatVersionMismatch:
    case ErrorCode::CorruptLayout:
    case ErrorCode::IoFailure:
    case ErrorCode::PortInUse:
    case ErrorCode::RepositoryError:
    case ErrorCode::Internal:
      return 500;
  }
  return 500;
}

}  // namespace qcsv
