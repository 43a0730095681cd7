#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cid {

using NameSet = std::set<std::string>;

/// One state label per bound variable.
using Assignment = std::map<std::string, std::string>;

/// Alternatives of a set decision that leaves its target alone.
inline constexpr std::string_view do_nothing_state = "do_nothing";

/// "set=" + k, the alternative of a set decision that forces its target to k.
std::string set_state(std::string_view target_state);

struct Variable {
    std::string name;
    /// Ordered; the order is significant for tables and enumeration.
    std::vector<std::string> states;

    std::size_t cardinality() const { return states.size(); }
    std::optional<std::size_t> state_index(std::string_view label) const;
    /// Like state_index but throws ValidationError naming the variable.
    std::size_t require_state(std::string_view label) const;
};

enum class NodeKind { chance, deterministic, decision, utility };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

/// P(x | parents). Rows are indexed by parent instance in lexicographic
/// order over parent_order (first parent most significant); each row is a
/// distribution aligned with the child's state order.
struct ConditionalTable {
    std::vector<std::string> parent_order;
    std::vector<std::vector<double>> rows;

    bool operator==(const ConditionalTable&) const = default;
};

/// Utility for each instance of parent_order (same row indexing as above).
struct UtilityTable {
    std::vector<std::string> parent_order;
    std::vector<double> values;

    bool operator==(const UtilityTable&) const = default;
};

struct Node {
    Variable variable;
    NodeKind kind = NodeKind::chance;
    /// Chance and deterministic nodes.
    ConditionalTable table;
    /// Utility node only.
    UtilityTable utility;
    /// Decision only: the variable this decision can set.
    std::optional<std::string> set_decision_for;

    const std::string& name() const { return variable.name; }
    bool is_uncertain() const {
        return kind == NodeKind::chance || kind == NodeKind::deterministic;
    }
};

struct Arc {
    std::string from;
    std::string to;

    auto operator<=>(const Arc&) const = default;
};

struct Annotations {
    bool causal = false;
    /// Variables asserted to be in the fixed set. Names that are not nodes
    /// of the diagram stand for fixed variables that were left out of it.
    NameSet declared_fixed;

    bool operator==(const Annotations&) const = default;
};

/// An influence diagram. Plain data: build it, validate it, then treat it
/// as immutable.
struct Diagram {
    std::vector<Node> nodes;
    std::vector<Arc> relevance_arcs;
    std::vector<Arc> information_arcs;
    std::optional<std::vector<std::string>> decision_order;
    Annotations annotations;

    const Node* find(std::string_view name) const;
    /// Throws UnknownVariable.
    const Node& node(std::string_view name) const;
    Node& node(std::string_view name);
    bool contains(std::string_view name) const { return find(name) != nullptr; }

    /// Sources of all arcs (relevance and information) into `name`, in arc order.
    std::vector<std::string> parents(std::string_view name) const;
    std::vector<std::string> children(std::string_view name) const;
    /// The set decision targeting `name`, if any.
    const Node* set_decision_of(std::string_view name) const;

    std::vector<std::string> decisions() const;
    /// Chance and deterministic nodes, in declaration order.
    std::vector<std::string> uncertain_nodes() const;
    const Node* utility_node() const;

    // Builders. Parents are connected with relevance arcs (information arcs
    // for decisions); rows follow ConditionalTable's indexing.
    Node& add_chance(std::string name, std::vector<std::string> states,
                     std::vector<std::string> parents,
                     std::vector<std::vector<double>> rows);
    Node& add_deterministic(std::string name, std::vector<std::string> states,
                            std::vector<std::string> parents,
                            std::vector<std::vector<double>> rows);
    Node& add_decision(std::string name, std::vector<std::string> states,
                       std::vector<std::string> observed = {});
    /// Adds decision `name` (default "s_" + target) with alternatives
    /// do_nothing, set=k..., and a relevance arc into `target`.
    Node& add_set_decision(std::string_view target, std::string name = {});
    Node& add_utility(std::string name, std::vector<std::string> parents,
                      std::vector<double> values);
};

/// Structural equality (probabilities compared within `tolerance`).
bool structurally_equal(const Diagram& a, const Diagram& b, double tolerance = 0.0);

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

inline constexpr double normalization_tolerance = 1e-9;

ValidationReport validate_diagram(const Diagram& d);
/// Throws ValidationError listing every violation.
void require_valid(const Diagram& d);

/// Nodes in a topological order of relevance plus information arcs,
/// stable with respect to declaration order. Throws ValidationError on a cycle.
std::vector<std::string> topological_order(const Diagram& d);

/// Number of joint instances, saturating at SIZE_MAX.
std::size_t instance_count(std::span<const std::size_t> cardinalities);

/// Mixed-radix decomposition of `index` (first digit most significant).
std::vector<std::size_t> instance_digits(std::size_t index,
                                         std::span<const std::size_t> cardinalities);

/// All instances of `vars`, lexicographic by variable order then state order.
std::vector<Assignment> enumerate_instances(std::span<const Variable> vars);

/// Row index of a table with `parent_order` for the parent states in `a`.
std::size_t row_index(const Diagram& d, std::span<const std::string> parent_order,
                      const Assignment& a);

/// "|"-joined state labels of the row at `index`; the file format's row key.
std::string row_key(const Diagram& d, std::span<const std::string> parent_order,
                    std::size_t index);

std::vector<std::size_t> cardinalities(const Diagram& d,
                                       std::span<const std::string> names);

}  // namespace cid
