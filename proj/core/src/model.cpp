#include "cid/model.hpp"

#include "cid/errors.hpp"
#include "cid/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace cid {

std::string set_state(std::string_view target_state) {
    return "set=" + std::string(target_state);
}

std::optional<std::size_t> Variable::state_index(std::string_view label) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == label) return i;
    }
    return std::nullopt;
}

std::size_t Variable::require_state(std::string_view label) const {
    if (auto i = state_index(label)) return *i;
    throw ValidationError("unknown state '" + std::string(label) + "' for variable '" + name + "'");
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::chance: return "chance";
        case NodeKind::deterministic: return "deterministic";
        case NodeKind::decision: return "decision";
        case NodeKind::utility: return "utility";
    }
    return "chance";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
    if (text == "chance") return NodeKind::chance;
    if (text == "deterministic") return NodeKind::deterministic;
    if (text == "decision") return NodeKind::decision;
    if (text == "utility") return NodeKind::utility;
    return std::nullopt;
}

Limits Limits::from_environment() {
    Limits limits;
    if (const char* raw = std::getenv("CID_CAP_WORLDS")) {
        char* end = nullptr;
        unsigned long long value = std::strtoull(raw, &end, 10);
        if (end != raw && *end == '\0' && value > 0) {
            limits.world_pairs = static_cast<std::size_t>(value);
            limits.joint_entries = static_cast<std::size_t>(value);
        }
    }
    return limits;
}

// ---------------------------------------------------------------------------
// Diagram lookups and builders

const Node* Diagram::find(std::string_view name) const {
    for (const auto& n : nodes) {
        if (n.name() == name) return &n;
    }
    return nullptr;
}

const Node& Diagram::node(std::string_view name) const {
    if (const Node* n = find(name)) return *n;
    throw UnknownVariable("unknown variable '" + std::string(name) + "'");
}

Node& Diagram::node(std::string_view name) {
    return const_cast<Node&>(std::as_const(*this).node(name));
}

std::vector<std::string> Diagram::parents(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& a : relevance_arcs) {
        if (a.to == name) out.push_back(a.from);
    }
    for (const auto& a : information_arcs) {
        if (a.to == name) out.push_back(a.from);
    }
    return out;
}

std::vector<std::string> Diagram::children(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& a : relevance_arcs) {
        if (a.from == name) out.push_back(a.to);
    }
    for (const auto& a : information_arcs) {
        if (a.from == name) out.push_back(a.to);
    }
    return out;
}

const Node* Diagram::set_decision_of(std::string_view name) const {
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::decision && n.set_decision_for && *n.set_decision_for == name) {
            return &n;
        }
    }
    return nullptr;
}

std::vector<std::string> Diagram::decisions() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::decision) out.push_back(n.name());
    }
    return out;
}

std::vector<std::string> Diagram::uncertain_nodes() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
        if (n.is_uncertain()) out.push_back(n.name());
    }
    return out;
}

const Node* Diagram::utility_node() const {
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::utility) return &n;
    }
    return nullptr;
}

namespace {

Node& add_table_node(Diagram& d, NodeKind kind, std::string name,
                     std::vector<std::string> states, std::vector<std::string> parents,
                     std::vector<std::vector<double>> rows) {
    for (const auto& p : parents) d.relevance_arcs.push_back({p, name});
    Node n;
    n.variable = {std::move(name), std::move(states)};
    n.kind = kind;
    n.table = {std::move(parents), std::move(rows)};
    d.nodes.push_back(std::move(n));
    return d.nodes.back();
}

}  // namespace

Node& Diagram::add_chance(std::string name, std::vector<std::string> states,
                          std::vector<std::string> parents,
                          std::vector<std::vector<double>> rows) {
    return add_table_node(*this, NodeKind::chance, std::move(name), std::move(states),
                          std::move(parents), std::move(rows));
}

Node& Diagram::add_deterministic(std::string name, std::vector<std::string> states,
                                 std::vector<std::string> parents,
                                 std::vector<std::vector<double>> rows) {
    return add_table_node(*this, NodeKind::deterministic, std::move(name), std::move(states),
                          std::move(parents), std::move(rows));
}

Node& Diagram::add_decision(std::string name, std::vector<std::string> states,
                            std::vector<std::string> observed) {
    for (const auto& p : observed) information_arcs.push_back({p, name});
    Node n;
    n.variable = {std::move(name), std::move(states)};
    n.kind = NodeKind::decision;
    nodes.push_back(std::move(n));
    return nodes.back();
}

Node& Diagram::add_set_decision(std::string_view target, std::string name) {
    const Node& x = node(target);
    if (name.empty()) name = "s_" + std::string(target);
    std::vector<std::string> states{std::string(do_nothing_state)};
    for (const auto& s : x.variable.states) states.push_back(set_state(s));
    relevance_arcs.push_back({name, std::string(target)});
    Node n;
    n.variable = {std::move(name), std::move(states)};
    n.kind = NodeKind::decision;
    n.set_decision_for = std::string(target);
    nodes.push_back(std::move(n));
    return nodes.back();
}

Node& Diagram::add_utility(std::string name, std::vector<std::string> parents,
                           std::vector<double> values) {
    for (const auto& p : parents) relevance_arcs.push_back({p, name});
    Node n;
    n.variable = {std::move(name), {}};
    n.kind = NodeKind::utility;
    n.utility = {std::move(parents), std::move(values)};
    nodes.push_back(std::move(n));
    return nodes.back();
}

// ---------------------------------------------------------------------------
// Equality

namespace {

bool close_rows(const std::vector<std::vector<double>>& a,
                const std::vector<std::vector<double>>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            if (std::abs(a[i][j] - b[i][j]) > tol) return false;
        }
    }
    return true;
}

}  // namespace

bool structurally_equal(const Diagram& a, const Diagram& b, double tolerance) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const Node& x = a.nodes[i];
        const Node& y = b.nodes[i];
        if (x.variable.name != y.variable.name || x.variable.states != y.variable.states ||
            x.kind != y.kind || x.set_decision_for != y.set_decision_for) {
            return false;
        }
        if (x.table.parent_order != y.table.parent_order ||
            !close_rows(x.table.rows, y.table.rows, tolerance)) {
            return false;
        }
        if (x.utility.parent_order != y.utility.parent_order ||
            !close_rows({x.utility.values}, {y.utility.values}, tolerance)) {
            return false;
        }
    }
    auto sorted = [](std::vector<Arc> arcs) {
        std::sort(arcs.begin(), arcs.end());
        return arcs;
    };
    return sorted(a.relevance_arcs) == sorted(b.relevance_arcs) &&
           sorted(a.information_arcs) == sorted(b.information_arcs) &&
           a.decision_order == b.decision_order && a.annotations == b.annotations;
}

// ---------------------------------------------------------------------------
// Instance utilities

std::size_t instance_count(std::span<const std::size_t> cardinalities) {
    std::size_t total = 1;
    for (std::size_t c : cardinalities) {
        if (c == 0) return 0;
        if (total > std::numeric_limits<std::size_t>::max() / c) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= c;
    }
    return total;
}

std::vector<std::size_t> instance_digits(std::size_t index,
                                         std::span<const std::size_t> cardinalities) {
    std::vector<std::size_t> digits(cardinalities.size());
    for (std::size_t i = cardinalities.size(); i-- > 0;) {
        digits[i] = index % cardinalities[i];
        index /= cardinalities[i];
    }
    return digits;
}

std::vector<Assignment> enumerate_instances(std::span<const Variable> vars) {
    NameSet seen;
    std::vector<std::size_t> cards;
    for (const auto& v : vars) {
        if (!seen.insert(v.name).second) {
            throw ValidationError("duplicate variable '" + v.name + "'");
        }
        cards.push_back(v.cardinality());
    }
    const std::size_t total = instance_count(cards);
    std::vector<Assignment> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto digits = instance_digits(i, cards);
        Assignment a;
        for (std::size_t k = 0; k < vars.size(); ++k) {
            a.emplace(vars[k].name, vars[k].states[digits[k]]);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<std::size_t> cardinalities(const Diagram& d, std::span<const std::string> names) {
    std::vector<std::size_t> cards;
    cards.reserve(names.size());
    for (const auto& n : names) cards.push_back(d.node(n).variable.cardinality());
    return cards;
}

std::size_t row_index(const Diagram& d, std::span<const std::string> parent_order,
                      const Assignment& a) {
    std::size_t index = 0;
    for (const auto& p : parent_order) {
        const Variable& v = d.node(p).variable;
        auto it = a.find(p);
        if (it == a.end()) {
            throw QueryError("no state bound for parent '" + p + "'");
        }
        index = index * v.cardinality() + v.require_state(it->second);
    }
    return index;
}

std::string row_key(const Diagram& d, std::span<const std::string> parent_order,
                    std::size_t index) {
    auto cards = cardinalities(d, parent_order);
    auto digits = instance_digits(index, cards);
    std::string key;
    for (std::size_t i = 0; i < parent_order.size(); ++i) {
        if (i) key += '|';
        key += d.node(parent_order[i]).variable.states[digits[i]];
    }
    return key;
}

// ---------------------------------------------------------------------------
// Topological order

std::vector<std::string> topological_order(const Diagram& d) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) index.emplace(d.nodes[i].name(), i);
    std::vector<std::vector<std::size_t>> children(d.nodes.size());
    std::vector<std::size_t> indegree(d.nodes.size(), 0);
    auto add = [&](const Arc& a) {
        auto f = index.find(a.from);
        auto t = index.find(a.to);
        if (f == index.end() || t == index.end()) return;
        children[f->second].push_back(t->second);
        ++indegree[t->second];
    };
    for (const auto& a : d.relevance_arcs) add(a);
    for (const auto& a : d.information_arcs) add(a);

    // Kahn's algorithm, always taking the earliest-declared ready node.
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::size_t i = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(d.nodes[i].name());
        for (std::size_t c : children[i]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != d.nodes.size()) {
        std::string members;
        for (std::size_t i = 0; i < d.nodes.size(); ++i) {
            if (indegree[i] > 0) members += (members.empty() ? "" : ", ") + d.nodes[i].name();
        }
        throw ValidationError("arcs contain a cycle through: " + members);
    }
    return order;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
public:
    explicit Validator(const Diagram& d) : d_(d) {}

    ValidationReport run() {
        check_variables();
        check_arcs();
        check_acyclic();
        for (const auto& n : d_.nodes) {
            switch (n.kind) {
                case NodeKind::chance:
                case NodeKind::deterministic: check_table(n); break;
                case NodeKind::decision: check_decision(n); break;
                case NodeKind::utility: check_utility(n); break;
            }
        }
        check_decision_order();
        check_annotations();
        return std::move(report_);
    }

private:
    void add(std::string message) { report_.violations.push_back(std::move(message)); }

    bool known(const std::string& name) const { return names_.count(name) > 0; }

    void check_variables() {
        int utilities = 0;
        for (const auto& n : d_.nodes) {
            const auto& v = n.variable;
            if (v.name.empty()) add("variable with empty name");
            if (!names_.insert(v.name).second) add("duplicate variable '" + v.name + "'");
            if (n.kind == NodeKind::utility) {
                ++utilities;
                if (!v.states.empty()) add("utility node '" + v.name + "' must not declare states");
                continue;
            }
            if (v.states.size() < 2) add("variable '" + v.name + "' needs at least 2 states");
            NameSet labels;
            for (const auto& s : v.states) {
                if (!labels.insert(s).second) {
                    add("duplicate state '" + s + "' in variable '" + v.name + "'");
                }
            }
            if (n.kind != NodeKind::decision && n.set_decision_for) {
                add("non-decision '" + v.name + "' carries set_decision_for");
            }
        }
        if (utilities > 1) add("more than one utility node");
    }

    void check_arcs() {
        std::set<Arc> seen;
        auto check = [&](const Arc& a, bool information) {
            const char* what = information ? "information arc" : "relevance arc";
            std::string label = std::string(what) + " " + a.from + " -> " + a.to;
            if (!known(a.from) || !known(a.to)) {
                add(label + " references an unknown variable");
                return;
            }
            if (!seen.insert(a).second) add("duplicate " + label);
            if (a.from == a.to) add(label + " is a self-loop (cycle)");
            const Node& from = d_.node(a.from);
            const Node& to = d_.node(a.to);
            if (from.kind == NodeKind::utility) add(label + " leaves the utility node");
            if (information && to.kind != NodeKind::decision) {
                add(label + " must point to a decision node");
            }
            if (!information && to.kind == NodeKind::decision) {
                add(label + " points to a decision node; use an information arc");
            }
        };
        for (const auto& a : d_.relevance_arcs) check(a, false);
        for (const auto& a : d_.information_arcs) check(a, true);
    }

    void check_acyclic() {
        try {
            topological_order(d_);
        } catch (const ValidationError& e) {
            add(e.what());
        }
    }

    // Relevance parents that must appear in the table (set decision excluded).
    NameSet table_parents(const Node& n) const {
        NameSet out;
        for (const auto& a : d_.relevance_arcs) {
            if (a.to != n.name() || !known(a.from)) continue;
            const Node& p = d_.node(a.from);
            if (p.kind == NodeKind::decision && p.set_decision_for &&
                *p.set_decision_for == n.name()) {
                continue;
            }
            out.insert(a.from);
        }
        return out;
    }

    bool check_parent_order(const Node& n, const std::vector<std::string>& order) {
        NameSet listed(order.begin(), order.end());
        bool ok = true;
        if (listed.size() != order.size()) {
            add("table of '" + n.name() + "' lists a parent twice");
            ok = false;
        }
        if (listed != table_parents(n)) {
            add("parent_order of '" + n.name() + "' does not match its relevance-arc parents");
            ok = false;
        }
        for (const auto& p : order) {
            if (!known(p)) return false;
            if (d_.node(p).kind == NodeKind::utility) return false;
        }
        return ok;
    }

    void check_table(const Node& n) {
        const auto& t = n.table;
        if (!check_parent_order(n, t.parent_order)) return;
        auto cards = cardinalities(d_, t.parent_order);
        const std::size_t expected = instance_count(cards);
        if (t.rows.size() != expected) {
            add("table of '" + n.name() + "' has " + std::to_string(t.rows.size()) +
                " rows, expected " + std::to_string(expected) + " (one per parent instance)");
            return;
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            std::string where = "'" + n.name() + "' row [" + row_key(d_, t.parent_order, r) + "]";
            if (row.size() != n.variable.cardinality()) {
                add("row length of " + where + " does not match the state count");
                continue;
            }
            double sum = 0.0;
            bool in_range = true;
            int ones = 0;
            for (double p : row) {
                if (!(p >= 0.0 && p <= 1.0)) in_range = false;
                if (p == 1.0) ++ones;
                sum += p;
            }
            if (!in_range) add("entry outside [0,1] in " + where);
            if (!(std::abs(sum - 1.0) <= normalization_tolerance)) {
                std::ostringstream os;
                os << "row sum of " << where << " is " << sum << ", expected 1";
                add(os.str());
            }
            if (n.kind == NodeKind::deterministic && (ones != 1 || std::abs(sum - 1.0) > 0)) {
                add("deterministic " + where + " is not one-hot");
            }
        }
    }

    void check_utility(const Node& n) {
        const auto& u = n.utility;
        if (!check_parent_order(n, u.parent_order)) return;
        const std::size_t expected = instance_count(cardinalities(d_, u.parent_order));
        if (u.values.size() != expected) {
            add("utility '" + n.name() + "' has " + std::to_string(u.values.size()) +
                " values, expected " + std::to_string(expected));
        }
        for (double v : u.values) {
            if (!std::isfinite(v)) add("utility '" + n.name() + "' has a non-finite value");
        }
    }

    void check_decision(const Node& n) {
        if (!n.table.parent_order.empty() || !n.table.rows.empty()) {
            add("decision '" + n.name() + "' must not carry a probability table");
        }
        if (!n.set_decision_for) return;
        const std::string& target = *n.set_decision_for;
        if (!known(target)) {
            add("set decision '" + n.name() + "' targets unknown variable '" + target + "'");
            return;
        }
        const Node& x = d_.node(target);
        if (!x.is_uncertain()) {
            add("set decision '" + n.name() + "' must target a chance node");
            return;
        }
        NameSet expected{std::string(do_nothing_state)};
        for (const auto& s : x.variable.states) expected.insert(set_state(s));
        NameSet actual(n.variable.states.begin(), n.variable.states.end());
        if (actual != expected || n.variable.states.size() != expected.size()) {
            add("set decision '" + n.name() + "' must have exactly the alternatives do_nothing and set=<state> for each state of '" + target + "'");
        }
        auto kids = d_.children(n.name());
        if (kids.size() != 1 || kids.front() != target) {
            add("set decision '" + n.name() + "' must have '" + target + "' as its only child");
        }
        for (const auto& other : d_.nodes) {
            if (&other != &n && other.kind == NodeKind::decision && other.set_decision_for &&
                *other.set_decision_for == target) {
                add("variable '" + target + "' has more than one set decision");
                break;
            }
        }
    }

    void check_decision_order() {
        if (!d_.decision_order) return;
        const auto& order = *d_.decision_order;
        auto decisions = d_.decisions();
        NameSet listed(order.begin(), order.end());
        if (listed.size() != order.size() ||
            listed != NameSet(decisions.begin(), decisions.end())) {
            add("decision_order must list every decision exactly once");
            return;
        }
        // A later decision may not be an ancestor of an earlier one.
        try {
            topological_order(d_);
        } catch (const ValidationError&) {
            return;
        }
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                if (is_ancestor(order[j], order[i])) {
                    add("decision_order places '" + order[j] + "' after its descendant '" + order[i] + "'");
                }
            }
        }
    }

    bool is_ancestor(const std::string& a, const std::string& b) const {
        std::vector<std::string> stack{a};
        NameSet seen;
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (const auto& c : d_.children(cur)) {
                if (c == b) return true;
                if (seen.insert(c).second) stack.push_back(c);
            }
        }
        return false;
    }

    void check_annotations() {
        for (const auto& name : d_.annotations.declared_fixed) {
            if (const Node* n = d_.find(name); n && !n->is_uncertain()) {
                add("declared_fixed names non-chance node '" + name + "'");
            }
        }
    }

    const Diagram& d_;
    NameSet names_;
    ValidationReport report_;
};

}  // namespace

ValidationReport validate_diagram(const Diagram& d) { return Validator(d).run(); }

void require_valid(const Diagram& d) {
    auto report = validate_diagram(d);
    if (report.ok()) return;
    std::string message = "invalid diagram:";
    for (const auto& v : report.violations) message += "\n  " + v;
    throw ValidationError(message);
}

}  // namespace cid
