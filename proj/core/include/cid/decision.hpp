#pragma once

#include "cid/factor.hpp"
#include "cid/functional.hpp"
#include "cid/limits.hpp"
#include "cid/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cid {

/// Decision rule for one decision: choice[i] is the alternative picked at the
/// i-th instance of `observed` (lexicographic, first observed most significant).
struct DecisionRule {
    std::string decision;
    std::vector<std::string> observed;
    std::vector<std::string> choice;
};

struct Policy {
    /// One rule per decision, in decision order.
    std::vector<DecisionRule> rules;

    const DecisionRule* rule_for(std::string_view decision) const;
};

struct PolicyResult {
    Policy policy;
    double expected_utility = 0.0;
    std::size_t policies_evaluated = 0;
};

/// Checks that `policy` has a total, legal rule for every decision.
void require_policy(const Diagram& d, const Policy& policy);

/// EU(policy) by variable elimination with policy indicator factors.
double expected_utility(const Diagram& d, const Policy& policy, const Limits& limits = {});

/// Same value from the definition: sum over decision instances and joint
/// outcomes of P(outcome | decisions) * [policy picks those decisions] * utility.
double expected_utility_by_enumeration(const Diagram& d, const Policy& policy,
                                       const Limits& limits = {});

/// Exhaustive search in canonical order (decisions in decision order, each
/// rule's choices as digits, first entry most significant). A later policy
/// replaces the incumbent only when strictly better by more than 1e-12.
///
/// Throws NoUtilityNode, NoDecisionOrder (more than one decision and no
/// order), PolicySpaceExceeded.
PolicyResult optimal_policy(const Diagram& d, const Limits& limits = {});

struct VoiOptions {
    /// Also add the observation to every decision after `dec` in decision order.
    bool no_forgetting = false;
    Limits limits;
};

struct VoiResult {
    double value = 0.0;
    double eu_without = 0.0;
    double eu_with = 0.0;
};

/// EU* with x observed before dec minus EU* without. x must be in the fixed
/// set; observing anything a decision can influence is meaningless, so
/// NotObservable is raised otherwise.
VoiResult value_of_information(const Diagram& d, const std::string& x, const std::string& dec,
                               const VoiOptions& options = {});

inline std::string counterfactual_name(std::string_view name) { return std::string(name) + "'"; }

struct TwinDiagram {
    /// Shared layer and both copies of every non-fixed decision, chance and
    /// deterministic node. Copy 1 keeps the original names.
    Diagram diagram;
    NameSet shared;
    /// Original name -> copy-2 name (shared nodes map to themselves).
    std::map<std::string, std::string> counterfactual;
    /// Both utility copies; kept outside `diagram`, which allows one utility node.
    std::optional<Node> utility;
    std::optional<Node> counterfactual_utility;

    std::size_t node_count() const;
    const std::string& resolve(std::string_view name) const;
};

/// Throws NotInHcf.
TwinDiagram build_twin(const HcfDiagram& h);

struct CounterfactualQuery {
    Assignment factual_decisions;
    /// Copy-1 or shared chance nodes.
    Assignment evidence;
    Assignment counterfactual_decisions;
    /// Original names; resolved in copy 2.
    std::vector<std::string> query;
};

/// Distribution over the copy-2 query variables (primed names, shared names
/// unchanged). Throws ZeroProbabilityEvidence, UnknownVariable.
Factor counterfactual(const HcfDiagram& h, const CounterfactualQuery& q, const Limits& limits = {});

/// Expected value of the counterfactual utility copy given the query's
/// decisions and evidence; `q.query` is ignored. Throws NoUtilityNode.
double counterfactual_expected_utility(const HcfDiagram& h, const CounterfactualQuery& q,
                                       const Limits& limits = {});

}  // namespace cid
