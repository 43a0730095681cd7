#pragma once

#include "cid/factor.hpp"
#include "cid/limits.hpp"
#include "cid/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace cid {

/// Throws QueryError unless `decisions` binds every decision (and nothing
/// else) to one of its alternatives.
void require_decision_instance(const Diagram& d, const Assignment& decisions);

/// One factor per chance or deterministic node in `nodes`.
///
/// With `decisions` bound, decision values are substituted and decisions
/// leave the scope; otherwise decisions stay in the scope as variables. A set
/// decision at "set=k" forces its target to k; "do_nothing" defers to the
/// target's own table.
std::vector<Factor> local_factors(const Diagram& d, std::span<const std::string> nodes,
                                  const Assignment* decisions);

/// Greedy min-fill elimination order, ties broken by variable name.
std::vector<std::string> elimination_order(const std::vector<Factor>& factors,
                                           const NameSet& eliminate);

/// Sums every variable outside `keep` out of the product of `factors`.
/// The result's scope is exactly `keep`, in that order.
Factor sum_product(std::vector<Factor> factors, std::span<const std::string> keep,
                   const Limits& limits = {});

/// P(U | decisions) by full enumeration, U = chance and deterministic nodes in
/// declaration order.
Factor joint(const Diagram& d, const Assignment& decisions, const Limits& limits = {});

/// P(query | decisions, evidence) by variable elimination over the ancestors
/// of query and evidence. Throws ZeroProbabilityEvidence.
Factor posterior(const Diagram& d, const Assignment& decisions, const Assignment& evidence,
                 std::span<const std::string> query, const Limits& limits = {});

/// Same contract as posterior, computed from the full joint.
Factor posterior_by_enumeration(const Diagram& d, const Assignment& decisions,
                                const Assignment& evidence, std::span<const std::string> query,
                                const Limits& limits = {});

}  // namespace cid
