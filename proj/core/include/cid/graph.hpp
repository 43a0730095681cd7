#pragma once

#include "cid/limits.hpp"
#include "cid/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cid {

/// C blocks D from x when every directed path from a node of D to x
/// passes through C.
struct BlockingQuery {
    NameSet candidate;
    /// nullopt means every decision of the diagram.
    std::optional<NameSet> decisions;
    std::string target;
};

enum class CauseMethod { graphical, oracle };

std::string_view to_string(CauseMethod method);

struct CauseReport {
    std::string target;
    /// Inclusion-minimal, ordered by size then lexicographically.
    std::vector<NameSet> cause_sets;
    CauseMethod method = CauseMethod::graphical;
    /// Why the report is empty, when it is.
    std::string reason;
    std::vector<std::string> warnings;
};

/// Follows relevance and information arcs. A path whose source decision is
/// itself in C counts as blocked, so C may mix decisions and chance nodes.
bool blocks(const Diagram& d, const BlockingQuery& q);

/// Every inclusion-minimal C ⊆ (U ∪ D) \ ({x} ∪ exclude) that blocks
/// `decisions` from x, by size then lexicographic order. Only nodes lying on
/// some directed path from `decisions` to x can belong to a minimal set, so
/// the candidate pool (capped by limits.set_candidates) is restricted to them.
std::vector<NameSet> minimal_blocking_sets(const Diagram& d, const NameSet& decisions,
                                           const std::string& x, const NameSet& exclude = {},
                                           const Limits& limits = {});

/// d-separation on the relevance-arc graph; decisions act as parentless roots
/// and information arcs are ignored. Throws QueryError when the sets overlap.
bool d_separated(const Diagram& d, const NameSet& x, const NameSet& y, const NameSet& z);

struct FixedSetResult {
    NameSet members;
    /// The diagram is not annotated causal, so blocking only suggests membership.
    bool claim_only = false;
};

/// {x : C blocks D from x}; members of C that are chance nodes are included
/// trivially.
FixedSetResult graphical_fixed_set(const Diagram& d, const NameSet& given = {});

/// Nodes reachable from any decision along relevance and information arcs.
NameSet decision_descendants(const Diagram& d);

NameSet ancestors(const Diagram& d, const NameSet& of, bool include_self = false);

/// Graphical causes of x: empty with reason "x ∈ F(D)" when no decision
/// reaches x; otherwise all minimal sets blocking every decision from x.
/// The result is only guaranteed to be a cause set on causal diagrams that are
/// also D-maps, so a warning is attached unless the caller vouches for both.
CauseReport graphical_causes(const Diagram& d, const std::string& x,
                             bool d_map_verified = false, const Limits& limits = {});

/// Relevance arcs a -> x whose removal leaves x's table unchanged: rows equal
/// (within the normalization tolerance) across every state of a.
std::vector<Arc> removable_arcs(const Diagram& d);

bool is_set_decision(const Diagram& d, const std::string& s, const std::string& x);

struct Certification {
    bool certified = false;
    std::vector<std::string> reasons;
};

/// Certified when the diagram is annotated causal, minimal, and every nonleaf
/// uncertain variable has a set decision.
Certification certify_causal_network(const Diagram& d);

}  // namespace cid
