#pragma once

#include "cid/limits.hpp"
#include "cid/model.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cid {

/// A response function: mapping[i] is the target state index at the i-th
/// domain instance (domain instances in lexicographic order).
using Mapping = std::vector<std::size_t>;

/// All r^q mappings from instances of `domain` to states of `x`, ordered
/// lexicographically by value (the first domain instance is most significant).
/// An empty domain has one instance, giving r constant mappings.
std::vector<Mapping> enumerate_mechanism_states(const Variable& x,
                                                std::span<const Variable> domain,
                                                const Limits& limits = {});

/// State label of a mechanism node: target states joined by '/', in domain
/// instance order. "no/yes" maps the first instance to no and the second to yes.
std::string mapping_label(const Variable& x, const Mapping& f);

/// Name of the mechanism node for x over `domain`, e.g. "lung cancer(smoke)".
std::string mechanism_name(std::string_view x, std::span<const std::string> domain);

struct MechanismSpec {
    /// Name of the mechanism node.
    std::string node;
    std::string target;
    /// Parents of the target outside the fixed set (set decision excluded).
    std::vector<std::string> domain;
    /// Parents of the target inside the fixed set; they become parents of the mechanism.
    std::vector<std::string> fixed_parents;
    std::vector<Mapping> mappings;
    /// Prior over mappings, one row per fixed-parent instance.
    ConditionalTable prior;
};

/// Graph non-descendants of the decisions (chance and deterministic nodes),
/// plus declared_fixed names that are nodes of the diagram.
NameSet structural_fixed_set(const Diagram& d);

/// Product prior: P(f | z) = prod over domain instances y of P(x = f(y) | y, z).
/// Throws QueryError when x has no parent outside the fixed set.
MechanismSpec canonical_mechanism_prior(const Diagram& d, const std::string& x,
                                        const Limits& limits = {});

struct HcfOptions {
    /// Proceed on a diagram that is not annotated causal.
    bool assume_causal = false;
    /// Replacement priors keyed by target name. The parent order may name
    /// other targets' mechanism nodes, which declares a dependency.
    std::map<std::string, ConditionalTable> priors;
    /// (from, to): the mechanism of `from` is a parent of the mechanism of `to`.
    /// `to` must then have an entry in `priors`.
    std::vector<std::pair<std::string, std::string>> mechanism_dependencies;
    Limits limits;
};

/// A diagram in Howard Canonical Form together with its mechanism provenance.
struct HcfDiagram {
    Diagram diagram;
    std::vector<MechanismSpec> mechanisms;
    /// Mechanism node -> target node.
    std::map<std::string, std::string> provenance;
    std::vector<std::string> warnings;

    const MechanismSpec* mechanism_for(std::string_view target) const;
    bool is_mechanism(std::string_view node) const { return provenance.count(std::string(node)) > 0; }
};

/// Extracts a mechanism for every chance node outside the fixed set and makes
/// that node a deterministic function of its non-fixed parents and the
/// mechanism; fixed parents move onto the mechanism. Deterministic and
/// utility nodes are left alone.
///
/// Throws NotCausal, ReassessmentRequired (an arc from a non-fixed node into
/// a declared-fixed node), or DependentMechanismsUnassessed.
HcfDiagram to_hcf(const Diagram& d, const HcfOptions& options = {});

/// Wraps a diagram that is already in HCF (no mechanisms recorded).
HcfDiagram as_hcf(Diagram d);

/// Structural HCF invariants: annotated causal, decision descendants
/// deterministic, mechanisms outside the reach of every decision.
std::vector<std::string> hcf_violations(const HcfDiagram& h);

struct MarginalReport {
    std::vector<std::string> violations;
    double max_abs_error = 0.0;

    bool passed() const { return violations.empty(); }
};

/// For each mechanism, every domain instance y, fixed-parent instance z and
/// target state k: sum of P(f | z) over f with f(y) = k must equal the
/// original P(x = k | y, z) within the normalization tolerance.
MarginalReport check_marginal_reproduction(const Diagram& original, const HcfDiagram& hcf,
                                           const Limits& limits = {});

}  // namespace cid
