#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/tuple.hpp"

namespace rbac {

enum class ErrorCode {
  NestedTransaction,
  NoTransaction,
  UnknownRelation,
  ArityMismatch,
  DanglingReference,
  ConstraintViolation,
  DuplicateEntity,
  UnknownEntity,
  DuplicateAssignment,
  MissingAssignment,
  SessionOwnerMismatch,
  NotAuthorized,
  UnknownSession,
  CycleDetected,
  DuplicateEdge,
  MissingEdge,
  BadCardinality,
  UnboundHeadVariable,
  EdbHead,
  CapExceeded,
  NoPlan,
  DepthExceeded,
  InvalidName,
  UnknownVersion,
  ParseError,
  AssertFailed,
  IoError,
  OracleMismatch,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view text);

/// Every code, in declaration order.
const std::vector<ErrorCode>& all_error_codes();

// Witness of a rejected commit. For separation-of-duty violations `subject`
// is the user (SSD) or session (DSD) and `roles` the member roles it holds.
struct Violation {
  std::string constraint;
  std::vector<Tuple> witness;
  std::string subject;
  std::vector<std::string> roles;
  std::size_t cardinality = 0;
};

class RbacError : public std::runtime_error {
 public:
  RbacError(ErrorCode code, std::string detail);
  RbacError(ErrorCode code, std::string detail, Violation violation);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::optional<Violation>& violation() const noexcept { return violation_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<Violation> violation_;
};

}  // namespace rbac
