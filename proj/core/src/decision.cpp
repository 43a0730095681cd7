#include "cid/decision.hpp"

#include "cid/errors.hpp"
#include "cid/graph.hpp"
#include "cid/inference.hpp"

#include <algorithm>

namespace cid {

const DecisionRule* Policy::rule_for(std::string_view decision) const {
    for (const auto& r : rules) {
        if (r.decision == decision) return &r;
    }
    return nullptr;
}

namespace {

std::vector<std::string> information_parents(const Diagram& d, const std::string& dec) {
    std::vector<std::string> out;
    for (const auto& a : d.information_arcs) {
        if (a.to == dec) out.push_back(a.from);
    }
    return out;
}

std::vector<std::string> ordered_decisions(const Diagram& d) {
    if (d.decision_order) return *d.decision_order;
    auto decs = d.decisions();
    if (decs.size() > 1) {
        throw NoDecisionOrder("diagram has " + std::to_string(decs.size()) +
                              " decisions but no decision_order");
    }
    return decs;
}

const Node& require_utility(const Diagram& d) {
    const Node* u = d.utility_node();
    if (!u) throw NoUtilityNode("diagram has no utility node");
    return *u;
}

Factor policy_factor(const Diagram& d, const DecisionRule& r) {
    std::vector<Variable> scope;
    for (const auto& o : r.observed) scope.push_back(d.node(o).variable);
    const Variable& dv = d.node(r.decision).variable;
    scope.push_back(dv);
    const std::size_t a = dv.cardinality();
    std::vector<double> values(r.choice.size() * a, 0.0);
    for (std::size_t i = 0; i < r.choice.size(); ++i) {
        values[i * a + dv.require_state(r.choice[i])] = 1.0;
    }
    return Factor(std::move(scope), std::move(values));
}

// Expected utility from precomputed chance factors plus the policy.
double evaluate(const Diagram& d, const Node& u, const std::vector<Factor>& base,
                const Policy& policy, const NameSet& relevant, const Limits& limits) {
    std::vector<Factor> factors = base;
    for (const auto& r : policy.rules) {
        if (relevant.count(r.decision)) factors.push_back(policy_factor(d, r));
    }
    Factor f = sum_product(std::move(factors), u.utility.parent_order, limits);
    double eu = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) eu += f.values()[i] * u.utility.values[i];
    return eu;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > SIZE_MAX / a) return SIZE_MAX;
    return a * b;
}

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) out = saturating_mul(out, base);
    return out;
}

}  // namespace

void require_policy(const Diagram& d, const Policy& policy) {
    for (const auto& dec : d.decisions()) {
        const DecisionRule* r = policy.rule_for(dec);
        if (!r) throw QueryError("policy has no rule for decision '" + dec + "'");
        if (r->observed != information_parents(d, dec)) {
            throw QueryError("rule for '" + dec + "' does not observe its information parents");
        }
        const std::size_t n = instance_count(cardinalities(d, r->observed));
        if (r->choice.size() != n) {
            throw QueryError("rule for '" + dec + "' has " + std::to_string(r->choice.size()) +
                             " choices, expected " + std::to_string(n));
        }
        const Variable& v = d.node(dec).variable;
        for (const auto& c : r->choice) {
            if (!v.state_index(c)) {
                throw QueryError("'" + c + "' is not an alternative of decision '" + dec + "'");
            }
        }
    }
    for (const auto& r : policy.rules) {
        if (d.node(r.decision).kind != NodeKind::decision) {
            throw QueryError("policy rule names '" + r.decision + "', which is not a decision");
        }
    }
}

double expected_utility(const Diagram& d, const Policy& policy, const Limits& limits) {
    require_valid(d);
    const Node& u = require_utility(d);
    require_policy(d, policy);
    const NameSet relevant = ancestors(d, {u.name()}, true);
    std::vector<std::string> nodes;
    for (const auto& n : d.nodes) {
        if (n.is_uncertain() && relevant.count(n.name())) nodes.push_back(n.name());
    }
    return evaluate(d, u, local_factors(d, nodes, nullptr), policy, relevant, limits);
}

double expected_utility_by_enumeration(const Diagram& d, const Policy& policy,
                                       const Limits& limits) {
    require_valid(d);
    const Node& u = require_utility(d);
    require_policy(d, policy);
    const auto decisions = d.decisions();
    const auto dcards = cardinalities(d, decisions);
    const auto uncertain = d.uncertain_nodes();
    const auto ucards = cardinalities(d, uncertain);

    // Position of every name in either the decision instance or the joint.
    auto locate = [&](const std::string& name) -> std::pair<bool, std::size_t> {
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            if (decisions[i] == name) return {true, i};
        }
        for (std::size_t i = 0; i < uncertain.size(); ++i) {
            if (uncertain[i] == name) return {false, i};
        }
        throw UnknownVariable("unknown variable '" + name + "'");
    };
    struct Check {
        std::size_t decision;
        std::vector<std::pair<bool, std::size_t>> observed;
        std::vector<std::size_t> observed_cards;
        std::vector<std::size_t> choice;
    };
    std::vector<Check> checks;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const DecisionRule& r = *policy.rule_for(decisions[i]);
        Check c{i, {}, cardinalities(d, r.observed), {}};
        for (const auto& o : r.observed) c.observed.push_back(locate(o));
        for (const auto& ch : r.choice) c.choice.push_back(d.node(decisions[i]).variable.require_state(ch));
        checks.push_back(std::move(c));
    }
    std::vector<std::pair<bool, std::size_t>> uparents;
    for (const auto& p : u.utility.parent_order) uparents.push_back(locate(p));
    const auto upcards = cardinalities(d, u.utility.parent_order);

    double eu = 0.0;
    for (std::size_t k = 0; k < instance_count(dcards); ++k) {
        const auto dd = instance_digits(k, dcards);
        Assignment inst;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            inst[decisions[i]] = d.node(decisions[i]).variable.states[dd[i]];
        }
        const Factor j = joint(d, inst, limits);
        for (std::size_t idx = 0; idx < j.size(); ++idx) {
            const double p = j.values()[idx];
            if (p == 0.0) continue;
            const auto ud = instance_digits(idx, ucards);
            auto value_of = [&](std::pair<bool, std::size_t> loc) {
                return loc.first ? dd[loc.second] : ud[loc.second];
            };
            bool consistent = true;
            for (const auto& c : checks) {
                std::size_t row = 0;
                for (std::size_t i = 0; i < c.observed.size(); ++i) {
                    row = row * c.observed_cards[i] + value_of(c.observed[i]);
                }
                if (c.choice[row] != dd[c.decision]) {
                    consistent = false;
                    break;
                }
            }
            if (!consistent) continue;
            std::size_t urow = 0;
            for (std::size_t i = 0; i < uparents.size(); ++i) urow = urow * upcards[i] + value_of(uparents[i]);
            eu += p * u.utility.values[urow];
        }
    }
    return eu;
}

PolicyResult optimal_policy(const Diagram& d, const Limits& limits) {
    require_valid(d);
    const Node& u = require_utility(d);
    const auto order = ordered_decisions(d);

    Policy policy;
    std::vector<std::size_t> radix;  // one digit per choice entry
    std::vector<std::pair<std::size_t, std::size_t>> digit_owner;  // (rule, entry)
    std::size_t space = 1;
    for (const auto& dec : order) {
        DecisionRule r{dec, information_parents(d, dec), {}};
        const std::size_t n = instance_count(cardinalities(d, r.observed));
        const Variable& v = d.node(dec).variable;
        r.choice.assign(n, v.states.front());
        space = saturating_mul(space, saturating_pow(v.cardinality(), n));
        for (std::size_t i = 0; i < n; ++i) {
            radix.push_back(v.cardinality());
            digit_owner.emplace_back(policy.rules.size(), i);
        }
        policy.rules.push_back(std::move(r));
    }
    if (space > limits.policy_space) {
        throw PolicySpaceExceeded("policy space has " +
                                  (space == SIZE_MAX ? std::string("more than 2^64")
                                                     : std::to_string(space)) +
                                  " policies (cap " + std::to_string(limits.policy_space) + ")");
    }

    const NameSet relevant = ancestors(d, {u.name()}, true);
    std::vector<std::string> nodes;
    for (const auto& n : d.nodes) {
        if (n.is_uncertain() && relevant.count(n.name())) nodes.push_back(n.name());
    }
    const auto base = local_factors(d, nodes, nullptr);

    PolicyResult best;
    std::vector<std::size_t> digits(radix.size(), 0);
    for (std::size_t count = 0; count < space; ++count) {
        for (std::size_t i = 0; i < digits.size(); ++i) {
            auto [r, e] = digit_owner[i];
            policy.rules[r].choice[e] = d.node(policy.rules[r].decision).variable.states[digits[i]];
        }
        const double eu = evaluate(d, u, base, policy, relevant, limits);
        if (count == 0 || eu > best.expected_utility + 1e-12) {
            best.policy = policy;
            best.expected_utility = eu;
        }
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < radix[i]) break;
            digits[i] = 0;
        }
    }
    best.policies_evaluated = space;
    return best;
}

VoiResult value_of_information(const Diagram& d, const std::string& x, const std::string& dec,
                               const VoiOptions& options) {
    require_valid(d);
    if (d.node(dec).kind != NodeKind::decision) {
        throw QueryError("'" + dec + "' is not a decision");
    }
    if (!d.node(x).is_uncertain()) {
        throw QueryError("'" + x + "' is not a chance node and cannot be observed");
    }
    if (!structural_fixed_set(d).count(x)) {
        throw NotObservable("'" + x + "' is not in the fixed set F(D): a variable the decisions "
                            "can affect cannot be observed before deciding (fixed-set "
                            "observation); convert to canonical form to observe its mechanism");
    }
    std::vector<std::string> targets{dec};
    if (options.no_forgetting) {
        const auto order = ordered_decisions(d);
        auto it = std::find(order.begin(), order.end(), dec);
        if (it != order.end()) targets.insert(targets.end(), std::next(it), order.end());
    }
    Diagram with = d;
    for (const auto& t : targets) {
        if (ancestors(d, {x}).count(t)) {
            throw QueryError("observing '" + x + "' before '" + t + "' creates a cycle");
        }
        if (std::find(with.information_arcs.begin(), with.information_arcs.end(), Arc{x, t}) ==
            with.information_arcs.end()) {
            with.information_arcs.push_back({x, t});
        }
    }
    VoiResult r;
    r.eu_without = optimal_policy(d, options.limits).expected_utility;
    r.eu_with = optimal_policy(with, options.limits).expected_utility;
    r.value = r.eu_with - r.eu_without;
    return r;
}

std::size_t TwinDiagram::node_count() const {
    return diagram.nodes.size() + (utility ? 1 : 0) + (counterfactual_utility ? 1 : 0);
}

const std::string& TwinDiagram::resolve(std::string_view name) const {
    auto it = counterfactual.find(std::string(name));
    if (it == counterfactual.end()) {
        throw UnknownVariable("unknown variable '" + std::string(name) + "'");
    }
    return it->second;
}

TwinDiagram build_twin(const HcfDiagram& h) {
    if (auto v = hcf_violations(h); !v.empty()) {
        throw NotInHcf("diagram is not in Howard Canonical Form: " + v.front());
    }
    const Diagram& d = h.diagram;
    TwinDiagram t;
    t.shared = structural_fixed_set(d);
    for (const auto& n : d.nodes) {
        t.counterfactual[n.name()] = t.shared.count(n.name()) ? n.name() : counterfactual_name(n.name());
    }
    auto map_names = [&](std::vector<std::string> names) {
        for (auto& s : names) s = t.counterfactual.at(s);
        return names;
    };

    std::vector<Node> copies;
    for (const auto& n : d.nodes) {
        if (n.kind == NodeKind::utility) {
            t.utility = n;
            Node c = n;
            c.variable.name = t.counterfactual.at(n.name());
            c.utility.parent_order = map_names(n.utility.parent_order);
            t.counterfactual_utility = std::move(c);
            continue;
        }
        t.diagram.nodes.push_back(n);
        if (t.shared.count(n.name())) continue;
        Node c = n;
        c.variable.name = t.counterfactual.at(n.name());
        c.table.parent_order = map_names(n.table.parent_order);
        if (c.set_decision_for) c.set_decision_for = t.counterfactual.at(*c.set_decision_for);
        copies.push_back(std::move(c));
    }
    for (auto& c : copies) t.diagram.nodes.push_back(std::move(c));

    auto mirror = [&](const std::vector<Arc>& arcs, std::vector<Arc>& out) {
        for (const auto& a : arcs) {
            if (d.node(a.to).kind == NodeKind::utility) continue;
            out.push_back(a);
            if (!t.shared.count(a.to)) out.push_back({t.counterfactual.at(a.from), t.counterfactual.at(a.to)});
        }
    };
    mirror(d.relevance_arcs, t.diagram.relevance_arcs);
    mirror(d.information_arcs, t.diagram.information_arcs);
    if (d.decision_order) {
        auto order = *d.decision_order;
        for (const auto& s : *d.decision_order) order.push_back(t.counterfactual.at(s));
        t.diagram.decision_order = std::move(order);
    }
    t.diagram.annotations.causal = d.annotations.causal;
    for (const auto& f : d.annotations.declared_fixed) {
        if (t.shared.count(f)) t.diagram.annotations.declared_fixed.insert(f);
    }
    require_valid(t.diagram);
    return t;
}

namespace {

struct TwinBinding {
    Assignment decisions;
    Assignment evidence;
};

TwinBinding bind_twin(const HcfDiagram& h, const TwinDiagram& t, const CounterfactualQuery& q) {
    const Diagram& d = h.diagram;
    require_decision_instance(d, q.factual_decisions);
    require_decision_instance(d, q.counterfactual_decisions);
    TwinBinding b;
    for (const auto& [name, state] : q.factual_decisions) b.decisions[name] = state;
    for (const auto& [name, state] : q.counterfactual_decisions) b.decisions[t.resolve(name)] = state;
    for (const auto& [name, state] : q.evidence) {
        const Node& n = d.node(name);
        if (!n.is_uncertain()) {
            throw QueryError("evidence on '" + name + "' must name a chance node");
        }
        b.evidence[name] = state;
    }
    return b;
}

}  // namespace

Factor counterfactual(const HcfDiagram& h, const CounterfactualQuery& q, const Limits& limits) {
    const TwinDiagram t = build_twin(h);
    const TwinBinding b = bind_twin(h, t, q);
    std::vector<std::string> query;
    for (const auto& name : q.query) {
        if (!h.diagram.node(name).is_uncertain()) {
            throw QueryError("query variable '" + name + "' must be a chance node");
        }
        query.push_back(t.resolve(name));
    }
    return posterior(t.diagram, b.decisions, b.evidence, query, limits);
}

double counterfactual_expected_utility(const HcfDiagram& h, const CounterfactualQuery& q,
                                       const Limits& limits) {
    const TwinDiagram t = build_twin(h);
    if (!t.counterfactual_utility) throw NoUtilityNode("diagram has no utility node");
    const TwinBinding b = bind_twin(h, t, q);
    const Node& u = *t.counterfactual_utility;

    // Decision parents are bound; sum over the posterior of the others.
    std::vector<std::string> query;
    for (const auto& p : u.utility.parent_order) {
        if (!b.decisions.count(p)) query.push_back(p);
    }
    const Factor f = posterior(t.diagram, b.decisions, b.evidence, query, limits);
    const auto cards = cardinalities(t.diagram, u.utility.parent_order);
    double eu = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const auto digits = instance_digits(idx, f.cardinalities());
        std::size_t row = 0;
        std::size_t qi = 0;
        for (std::size_t i = 0; i < u.utility.parent_order.size(); ++i) {
            const auto& p = u.utility.parent_order[i];
            auto it = b.decisions.find(p);
            const std::size_t s = it != b.decisions.end()
                                      ? t.diagram.node(p).variable.require_state(it->second)
                                      : digits[qi++];
            row = row * cards[i] + s;
        }
        eu += f.values()[idx] * u.utility.values[row];
    }
    return eu;
}

}  // namespace cid
