#pragma once

#include "cid/functional.hpp"
#include "cid/graph.hpp"
#include "cid/limits.hpp"
#include "cid/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace cid {

/// One joint state of the fixed nodes (fixed chance nodes and mechanisms)
/// with its prior probability.
struct FunctionalWorld {
    std::vector<std::size_t> states;  // aligned with WorldTable::world_nodes()
    double weight = 0.0;
};

/// Functional worlds of an HCF diagram and the value every tracked node takes
/// in each world under each decision instance.
///
/// Only nodes relevant to `focus` (the focus and its ancestors) are tracked;
/// an empty focus tracks the whole diagram. Worlds of probability zero are
/// skipped. Values are state indices, except for the utility node, whose
/// value is its utility.
class WorldTable {
public:
    WorldTable(const HcfDiagram& h, const NameSet& focus = {}, const Limits& limits = {});

    const std::vector<std::string>& world_nodes() const { return world_nodes_; }
    const std::vector<std::string>& decisions() const { return decisions_; }
    const std::vector<FunctionalWorld>& worlds() const { return worlds_; }
    std::size_t decision_instance_count() const { return decision_instances_; }

    bool tracks(std::string_view node) const;
    bool is_fixed(std::string_view node) const;
    /// Decision states of instance k, aligned with decisions().
    std::vector<std::size_t> decision_instance(std::size_t k) const;
    double value(std::size_t world, std::size_t decision_instance, std::string_view node) const;

    /// Per world: any two decision instances that agree on `given` agree on x.
    bool fixed_given(const std::string& x, const NameSet& given) const;

private:
    std::size_t slot(std::string_view node) const;

    NameSet fixed_;
    std::vector<std::string> world_nodes_;
    std::vector<std::string> decisions_;
    std::vector<std::size_t> decision_cards_;
    std::vector<std::string> tracked_;  // world nodes, decisions, then propagated nodes
    std::map<std::string, std::size_t, std::less<>> slots_;
    std::vector<FunctionalWorld> worlds_;
    std::size_t decision_instances_ = 1;
    std::vector<double> values_;  // [world][decision instance][tracked slot]
};

/// x ∈ F(D | C): in every positive-probability world, decision instances that
/// give C the same instance give x the same value. C = ∅ tests x ∈ F(D).
bool oracle_fixed_set_member(const HcfDiagram& h, const std::string& x, const NameSet& given,
                             const Limits& limits = {});

/// Every inclusion-minimal C ⊆ (D ∪ U) \ {x} with x ∈ F(D | C), or an empty
/// report when x ∈ F(D). Fixed nodes never belong to a minimal set (they are
/// constant within a world), so the search ranges over decisions and
/// non-fixed chance nodes.
CauseReport oracle_causes(const HcfDiagram& h, const std::string& x, const Limits& limits = {});

struct DMapReport {
    bool holds = true;
    std::size_t statements_checked = 0;
    std::vector<std::string> counterexamples;
};

inline constexpr double independence_tolerance = 1e-9;

/// Every numerical independence a ⟂ b | Z (|Z| <= max_conditioning) among
/// chance and decision variables must be a d-separation. Decisions are given a
/// uniform distribution so statements about them are testable.
DMapReport oracle_is_d_map(const Diagram& d, std::size_t max_conditioning,
                           const Limits& limits = {});

}  // namespace cid
