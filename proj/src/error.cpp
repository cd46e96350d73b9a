#include "rbac/error.hpp"

#include <array>
#include <utility>

namespace rbac {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 28> kNames{{
    {ErrorCode::NestedTransaction, "NESTED_TRANSACTION"},
    {ErrorCode::NoTransaction, "NO_TRANSACTION"},
    {ErrorCode::UnknownRelation, "UNKNOWN_RELATION"},
    {ErrorCode::ArityMismatch, "ARITY_MISMATCH"},
    {ErrorCode::DanglingReference, "DANGLING_REFERENCE"},
    {ErrorCode::ConstraintViolation, "CONSTRAINT_VIOLATION"},
    {ErrorCode::DuplicateEntity, "DUPLICATE_ENTITY"},
    {ErrorCode::UnknownEntity, "UNKNOWN_ENTITY"},
    {ErrorCode::DuplicateAssignment, "DUPLICATE_ASSIGNMENT"},
    {ErrorCode::MissingAssignment, "MISSING_ASSIGNMENT"},
    {ErrorCode::SessionOwnerMismatch, "SESSION_OWNER_MISMATCH"},
    {ErrorCode::NotAuthorized, "NOT_AUTHORIZED"},
    {ErrorCode::UnknownSession, "UNKNOWN_SESSION"},
    {ErrorCode::CycleDetected, "CYCLE_DETECTED"},
    {ErrorCode::DuplicateEdge, "DUPLICATE_EDGE"},
    {ErrorCode::MissingEdge, "MISSING_EDGE"},
    {ErrorCode::BadCardinality, "BAD_CARDINALITY"},
    {ErrorCode::UnboundHeadVariable, "UNBOUND_HEAD_VARIABLE"},
    {ErrorCode::EdbHead, "EDB_HEAD"},
    {ErrorCode::CapExceeded, "CAP_EXCEEDED"},
    {ErrorCode::NoPlan, "NO_PLAN"},
    {ErrorCode::DepthExceeded, "DEPTH_EXCEEDED"},
    {ErrorCode::InvalidName, "INVALID_NAME"},
    {ErrorCode::UnknownVersion, "UNKNOWN_VERSION"},
    {ErrorCode::ParseError, "PARSE_ERROR"},
    {ErrorCode::AssertFailed, "ASSERT_FAILED"},
    {ErrorCode::IoError, "IO_ERROR"},
    {ErrorCode::OracleMismatch, "ORACLE_MISMATCH"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "UNKNOWN_ERROR";
}

std::optional<ErrorCode> error_code_from_string(std::string_view text) {
  for (const auto& [c, name] : kNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

const std::vector<ErrorCode>& all_error_codes() {
  static const std::vector<ErrorCode> codes = [] {
    std::vector<ErrorCode> out;
    for (const auto& entry : kNames) out.push_back(entry.first);
    return out;
  }();
  return codes;
}

RbacError::RbacError(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

RbacError::RbacError(ErrorCode code, std::string detail, Violation violation)
    : RbacError(code, std::move(detail)) {
  violation_ = std::move(violation);
}

}  // namespace rbac
