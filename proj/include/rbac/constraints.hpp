#pragma once

#include <optional>

#include "rbac/error.hpp"
#include "rbac/fact_store.hpp"

namespace rbac::constraints {

// Pure commit-time checks over a candidate post-state. Each returns the first
// violation in (constraint name, subject) order, or nullopt.

/// No user holds `n` or more roles of an SSD set: assigned roles under core,
/// authorized roles when the hierarchy component is enabled.
std::optional<Violation> check_ssd(const Snapshot& post);

/// No session has `n` or more roles of a DSD set active.
std::optional<Violation> check_dsd(const Snapshot& post);

/// Every SoD set keeps 2 <= n <= |roles|.
std::optional<Violation> check_sod_cardinality(const Snapshot& post);

/// Every active role is activation-eligible for the session's user.
std::optional<Violation> check_session_soundness(const Snapshot& post);

/// A disabled component leaves no tuples of its own behind.
std::optional<Violation> check_components(const Snapshot& post);

/// Registers all of the above as commit hooks.
void register_checks(FactStore& store);

}  // namespace rbac::constraints
