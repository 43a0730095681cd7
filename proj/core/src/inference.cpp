#include "cid/inference.hpp"

#include "cid/errors.hpp"
#include "cid/graph.hpp"

#include <algorithm>
#include <map>

namespace cid {

void require_decision_instance(const Diagram& d, const Assignment& decisions) {
    for (const auto& dec : d.decisions()) {
        auto it = decisions.find(dec);
        if (it == decisions.end()) {
            throw QueryError("missing decision binding for '" + dec + "'");
        }
        if (!d.node(dec).variable.state_index(it->second)) {
            throw QueryError("'" + it->second + "' is not an alternative of decision '" + dec + "'");
        }
    }
    for (const auto& [name, state] : decisions) {
        if (d.node(name).kind != NodeKind::decision) {
            throw QueryError("'" + name + "' is bound as a decision but is not one");
        }
    }
}

namespace {

// Value of x's local distribution at child state `state` given a full
// assignment of state indices for x's table parents and set decision.
double local_entry(const Node& x, const Node* setter, std::size_t setter_state,
                   std::size_t row, std::size_t state) {
    if (setter) {
        // Alternatives are do_nothing plus set=k in any declared order.
        const std::string& alt = setter->variable.states[setter_state];
        if (alt != do_nothing_state) {
            auto k = x.variable.require_state(std::string_view(alt).substr(4));
            return k == state ? 1.0 : 0.0;
        }
    }
    return x.table.rows[row][state];
}

}  // namespace

std::vector<Factor> local_factors(const Diagram& d, std::span<const std::string> nodes,
                                  const Assignment* decisions) {
    std::vector<Factor> out;
    out.reserve(nodes.size());
    for (const auto& name : nodes) {
        const Node& x = d.node(name);
        if (!x.is_uncertain()) continue;
        const Node* setter = d.set_decision_of(name);

        // Table parents first, then the set decision, then x.
        std::vector<const Node*> inputs;
        for (const auto& p : x.table.parent_order) inputs.push_back(&d.node(p));
        if (setter) inputs.push_back(setter);

        std::vector<std::size_t> fixed_state(inputs.size(), 0);
        std::vector<bool> bound(inputs.size(), false);
        std::vector<Variable> scope;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Node* in = inputs[i];
            if (decisions && in->kind == NodeKind::decision) {
                fixed_state[i] = in->variable.require_state(decisions->at(in->name()));
                bound[i] = true;
            } else {
                scope.push_back(in->variable);
            }
        }
        scope.push_back(x.variable);

        std::vector<std::size_t> cards;
        for (const auto& v : scope) cards.push_back(v.cardinality());
        std::vector<double> values(instance_count(cards));
        std::vector<std::size_t> digits(scope.size(), 0);
        std::vector<std::size_t> state(inputs.size());
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
            std::size_t s = 0;
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                state[i] = bound[i] ? fixed_state[i] : digits[s++];
            }
            std::size_t row = 0;
            for (std::size_t i = 0; i < x.table.parent_order.size(); ++i) {
                row = row * inputs[i]->variable.cardinality() + state[i];
            }
            const std::size_t setter_state = setter ? state.back() : 0;
            values[idx] = local_entry(x, setter, setter_state, row, digits.back());
            for (std::size_t i = digits.size(); i-- > 0;) {
                if (++digits[i] < cards[i]) break;
                digits[i] = 0;
            }
        }
        out.emplace_back(std::move(scope), std::move(values));
    }
    return out;
}

std::vector<std::string> elimination_order(const std::vector<Factor>& factors,
                                           const NameSet& eliminate) {
    std::map<std::string, NameSet> adjacent;
    for (const auto& f : factors) {
        for (const auto& a : f.scope()) {
            adjacent[a.name];
            for (const auto& b : f.scope()) {
                if (a.name != b.name) adjacent[a.name].insert(b.name);
            }
        }
    }
    NameSet remaining;
    for (const auto& n : eliminate) {
        if (adjacent.count(n)) remaining.insert(n);
    }
    std::vector<std::string> order;
    while (!remaining.empty()) {
        std::string best;
        std::size_t best_fill = SIZE_MAX;
        for (const auto& v : remaining) {  // NameSet iterates by name: ties go to the smallest
            const auto& nb = adjacent[v];
            std::size_t fill = 0;
            for (auto i = nb.begin(); i != nb.end(); ++i) {
                for (auto j = std::next(i); j != nb.end(); ++j) {
                    if (!adjacent[*i].count(*j)) ++fill;
                }
            }
            if (fill < best_fill) {
                best_fill = fill;
                best = v;
            }
        }
        const NameSet nb = adjacent[best];
        for (const auto& a : nb) {
            for (const auto& b : nb) {
                if (a != b) adjacent[a].insert(b);
            }
            adjacent[a].erase(best);
        }
        adjacent.erase(best);
        remaining.erase(best);
        order.push_back(best);
    }
    return order;
}

Factor sum_product(std::vector<Factor> factors, std::span<const std::string> keep,
                   const Limits& limits) {
    NameSet keep_set(keep.begin(), keep.end());
    NameSet eliminate;
    for (const auto& f : factors) {
        for (const auto& v : f.scope()) {
            if (!keep_set.count(v.name)) eliminate.insert(v.name);
        }
    }
    auto check_size = [&](const Factor& f) {
        if (f.size() > limits.factor_entries) {
            throw StateSpaceExceeded("intermediate factor has " + std::to_string(f.size()) +
                                     " entries (cap " + std::to_string(limits.factor_entries) + ")");
        }
    };
    for (const auto& var : elimination_order(factors, eliminate)) {
        Factor merged;
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (f.has(var)) {
                merged = product(merged, f);
                check_size(merged);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(merged.marginalize(var));
        factors = std::move(rest);
    }
    Factor result;
    for (const auto& f : factors) {
        result = product(result, f);
        check_size(result);
    }
    for (const auto& name : keep) {
        if (!result.has(name)) {
            throw QueryError("variable '" + name + "' does not appear in any factor");
        }
    }
    return result.reordered(keep);
}

namespace {

void check_evidence_and_query(const Diagram& d, const Assignment& evidence,
                              std::span<const std::string> query) {
    for (const auto& [name, state] : evidence) {
        const Node& n = d.node(name);
        if (!n.is_uncertain()) {
            throw QueryError("evidence on '" + name + "' must name a chance node");
        }
        if (!n.variable.state_index(state)) {
            throw QueryError("evidence state '" + state + "' is not a state of '" + name + "'");
        }
    }
    NameSet seen;
    for (const auto& q : query) {
        if (!d.node(q).is_uncertain()) {
            throw QueryError("query variable '" + q + "' must be a chance node");
        }
        if (!seen.insert(q).second) throw QueryError("query lists '" + q + "' twice");
    }
}

Factor indicator(const Variable& v, std::size_t state) {
    std::vector<double> values(v.cardinality(), 0.0);
    values[state] = 1.0;
    return Factor({v}, std::move(values));
}

}  // namespace

Factor joint(const Diagram& d, const Assignment& decisions, const Limits& limits) {
    require_decision_instance(d, decisions);
    const auto names = d.uncertain_nodes();
    std::vector<Variable> scope;
    std::map<std::string, std::size_t> slot;
    for (const auto& n : names) {
        slot[n] = scope.size();
        scope.push_back(d.node(n).variable);
    }
    auto cards = cardinalities(d, names);
    const std::size_t total = instance_count(cards);
    if (total > limits.joint_entries) {
        throw StateSpaceExceeded("joint distribution has " + std::to_string(total) +
                                 " entries (cap " + std::to_string(limits.joint_entries) + ")");
    }

    struct Local {
        const Node* node;
        std::vector<std::size_t> parent_slots;  // into scope
        std::vector<std::size_t> parent_cards;
        std::vector<std::size_t> decision_states;  // for decision parents, else npos
        const Node* setter;
        std::size_t setter_state;
        std::size_t own_slot;
    };
    std::vector<Local> locals;
    for (const auto& n : names) {
        const Node& x = d.node(n);
        Local l{&x, {}, {}, {}, d.set_decision_of(n), 0, slot[n]};
        for (const auto& p : x.table.parent_order) {
            const Node& pn = d.node(p);
            l.parent_cards.push_back(pn.variable.cardinality());
            if (pn.kind == NodeKind::decision) {
                l.parent_slots.push_back(SIZE_MAX);
                l.decision_states.push_back(pn.variable.require_state(decisions.at(p)));
            } else {
                l.parent_slots.push_back(slot.at(p));
                l.decision_states.push_back(SIZE_MAX);
            }
        }
        if (l.setter) l.setter_state = l.setter->variable.require_state(decisions.at(l.setter->name()));
        locals.push_back(std::move(l));
    }

    std::vector<double> values(total);
    std::vector<std::size_t> digits(cards.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        double p = 1.0;
        for (const auto& l : locals) {
            std::size_t row = 0;
            for (std::size_t i = 0; i < l.parent_slots.size(); ++i) {
                const std::size_t s =
                    l.parent_slots[i] == SIZE_MAX ? l.decision_states[i] : digits[l.parent_slots[i]];
                row = row * l.parent_cards[i] + s;
            }
            p *= local_entry(*l.node, l.setter, l.setter_state, row, digits[l.own_slot]);
            if (p == 0.0) break;
        }
        values[idx] = p;
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < cards[i]) break;
            digits[i] = 0;
        }
    }
    return Factor(std::move(scope), std::move(values));
}

Factor posterior(const Diagram& d, const Assignment& decisions, const Assignment& evidence,
                 std::span<const std::string> query, const Limits& limits) {
    require_decision_instance(d, decisions);
    check_evidence_and_query(d, evidence, query);

    NameSet targets(query.begin(), query.end());
    for (const auto& [name, state] : evidence) targets.insert(name);
    NameSet relevant = ancestors(d, targets, true);
    std::vector<std::string> nodes;
    for (const auto& n : d.nodes) {
        if (n.is_uncertain() && relevant.count(n.name())) nodes.push_back(n.name());
    }
    auto factors = local_factors(d, nodes, &decisions);
    for (const auto& [name, state] : evidence) {
        const Variable& v = d.node(name).variable;
        factors.push_back(indicator(v, v.require_state(state)));
    }
    Factor result = sum_product(std::move(factors), query, limits);
    if (!(result.sum() > 0.0)) {
        throw ZeroProbabilityEvidence("evidence has zero probability under the given decisions");
    }
    return result.normalized();
}

Factor posterior_by_enumeration(const Diagram& d, const Assignment& decisions,
                                const Assignment& evidence, std::span<const std::string> query,
                                const Limits& limits) {
    check_evidence_and_query(d, evidence, query);
    Factor full = joint(d, decisions, limits);
    auto cards = full.cardinalities();
    std::vector<std::size_t> digits(cards.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> required;
    for (const auto& [name, state] : evidence) {
        for (std::size_t i = 0; i < full.scope().size(); ++i) {
            if (full.scope()[i].name == name) {
                required.emplace_back(i, full.scope()[i].require_state(state));
            }
        }
    }
    for (std::size_t idx = 0; idx < full.size(); ++idx) {
        for (auto [i, s] : required) {
            if (digits[i] != s) full.values()[idx] = 0.0;
        }
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < cards[i]) break;
            digits[i] = 0;
        }
    }
    Factor result = full.marginal(query);
    if (!(result.sum() > 0.0)) {
        throw ZeroProbabilityEvidence("evidence has zero probability under the given decisions");
    }
    return result.normalized();
}

}  // namespace cid
