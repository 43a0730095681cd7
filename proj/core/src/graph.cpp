#include "cid/graph.hpp"

#include "cid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace cid {

std::string_view to_string(CauseMethod method) {
    return method == CauseMethod::graphical ? "graphical" : "oracle";
}

namespace {

void require_known(const Diagram& d, const NameSet& names) {
    for (const auto& n : names) d.node(n);
}

NameSet all_decisions(const Diagram& d) {
    auto v = d.decisions();
    return {v.begin(), v.end()};
}

NameSet reachable_from(const Diagram& d, const NameSet& sources, const NameSet& stop) {
    NameSet seen;
    std::deque<std::string> queue;
    for (const auto& s : sources) {
        if (stop.count(s)) continue;
        if (seen.insert(s).second) queue.push_back(s);
    }
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (const auto& c : d.children(cur)) {
            if (stop.count(c)) continue;
            if (seen.insert(c).second) queue.push_back(c);
        }
    }
    return seen;
}

}  // namespace

NameSet decision_descendants(const Diagram& d) {
    NameSet out;
    for (const auto& dec : d.decisions()) {
        for (const auto& c : d.children(dec)) {
            auto r = reachable_from(d, {c}, {});
            out.insert(r.begin(), r.end());
        }
    }
    return out;
}

NameSet ancestors(const Diagram& d, const NameSet& of, bool include_self) {
    NameSet seen;
    std::vector<std::string> stack(of.begin(), of.end());
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (const auto& p : d.parents(cur)) {
            if (seen.insert(p).second) stack.push_back(p);
        }
    }
    if (include_self) seen.insert(of.begin(), of.end());
    return seen;
}

bool blocks(const Diagram& d, const BlockingQuery& q) {
    const Node& x = d.node(q.target);
    if (x.kind == NodeKind::decision) {
        throw QueryError("blocking target '" + q.target + "' must not be a decision");
    }
    if (q.candidate.count(q.target)) {
        throw QueryError("blocking set must not contain the target '" + q.target + "'");
    }
    require_known(d, q.candidate);
    NameSet decisions = q.decisions ? *q.decisions : all_decisions(d);
    for (const auto& dec : decisions) {
        if (d.node(dec).kind != NodeKind::decision) {
            throw QueryError("'" + dec + "' is not a decision");
        }
    }
    return reachable_from(d, decisions, q.candidate).count(q.target) == 0;
}

std::vector<NameSet> minimal_blocking_sets(const Diagram& d, const NameSet& decisions,
                                           const std::string& x, const NameSet& exclude,
                                           const Limits& limits) {
    d.node(x);
    NameSet downstream = reachable_from(d, decisions, {});
    NameSet upstream = ancestors(d, {x});
    std::vector<std::string> pool;
    for (const auto& n : downstream) {
        if (n != x && upstream.count(n) && !exclude.count(n)) pool.push_back(n);
    }
    if (pool.size() > limits.set_candidates) {
        throw NodeBudgetExceeded("minimal blocking set search for '" + x + "' has " +
                                 std::to_string(pool.size()) + " candidate nodes (cap " +
                                 std::to_string(limits.set_candidates) + ")");
    }

    std::vector<NameSet> found;
    const std::size_t n = pool.size();
    for (std::size_t k = 0; k <= n; ++k) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            NameSet c;
            for (std::size_t i : idx) c.insert(pool[i]);
            bool superset = std::any_of(found.begin(), found.end(), [&](const NameSet& f) {
                return std::includes(c.begin(), c.end(), f.begin(), f.end());
            });
            if (!superset && blocks(d, {c, decisions, x})) found.push_back(std::move(c));
            // Next k-combination in lexicographic order.
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return found;
}

bool d_separated(const Diagram& d, const NameSet& x, const NameSet& y, const NameSet& z) {
    require_known(d, x);
    require_known(d, y);
    require_known(d, z);
    auto overlap = [](const NameSet& a, const NameSet& b) {
        return std::any_of(a.begin(), a.end(), [&](const auto& n) { return b.count(n) > 0; });
    };
    if (overlap(x, y) || overlap(x, z) || overlap(y, z)) {
        throw QueryError("d-separation sets must be pairwise disjoint");
    }

    std::map<std::string, std::vector<std::string>> parents, children;
    for (const auto& a : d.relevance_arcs) {
        children[a.from].push_back(a.to);
        parents[a.to].push_back(a.from);
    }
    // Nodes with a descendant in Z (or in Z) open colliders.
    NameSet opens_collider = z;
    {
        std::vector<std::string> stack(z.begin(), z.end());
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (const auto& p : parents[cur]) {
                if (opens_collider.insert(p).second) stack.push_back(p);
            }
        }
    }

    // Reachability over (node, direction) pairs; up = arrived from a child.
    enum Dir { up, down };
    std::set<std::pair<std::string, Dir>> visited;
    std::deque<std::pair<std::string, Dir>> queue;
    for (const auto& s : x) queue.emplace_back(s, up);
    while (!queue.empty()) {
        auto [node, dir] = queue.front();
        queue.pop_front();
        if (!visited.insert({node, dir}).second) continue;
        const bool observed = z.count(node) > 0;
        if (!observed && y.count(node)) return false;
        if (dir == up && !observed) {
            for (const auto& p : parents[node]) queue.emplace_back(p, up);
            for (const auto& c : children[node]) queue.emplace_back(c, down);
        } else if (dir == down) {
            if (!observed) {
                for (const auto& c : children[node]) queue.emplace_back(c, down);
            }
            if (opens_collider.count(node)) {
                for (const auto& p : parents[node]) queue.emplace_back(p, up);
            }
        }
    }
    return true;
}

FixedSetResult graphical_fixed_set(const Diagram& d, const NameSet& given) {
    require_known(d, given);
    FixedSetResult result;
    result.claim_only = !d.annotations.causal;
    for (const auto& n : d.nodes) {
        if (n.kind == NodeKind::decision) continue;
        if (given.count(n.name())) {
            if (n.is_uncertain()) result.members.insert(n.name());
            continue;
        }
        if (blocks(d, {given, std::nullopt, n.name()})) result.members.insert(n.name());
    }
    return result;
}

CauseReport graphical_causes(const Diagram& d, const std::string& x, bool d_map_verified,
                             const Limits& limits) {
    const Node& node = d.node(x);
    if (node.kind == NodeKind::decision) {
        throw QueryError("'" + x + "' is a decision; only chance and utility nodes are caused");
    }
    CauseReport report;
    report.target = x;
    report.method = CauseMethod::graphical;
    if (!d.annotations.causal) {
        report.warnings.push_back(
            "diagram is not annotated causal; blocking sets are not guaranteed to be causes");
    }
    if (!d_map_verified) {
        report.warnings.push_back(
            "D-map property not verified; minimality of the reported sets is not guaranteed");
    }
    if (!decision_descendants(d).count(x)) {
        report.reason = "x ∈ F(D)";
        return report;
    }
    report.cause_sets = minimal_blocking_sets(d, all_decisions(d), x, {x}, limits);
    return report;
}

namespace {

bool rows_equal(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > normalization_tolerance) return false;
    }
    return true;
}

// Whether the table varies with parent position k.
template <typename RowAt>
bool depends_on(const std::vector<std::size_t>& cards, std::size_t k, std::size_t rows,
                RowAt row_at) {
    std::size_t stride = 1;
    for (std::size_t i = k + 1; i < cards.size(); ++i) stride *= cards[i];
    for (std::size_t r = 0; r < rows; ++r) {
        if ((r / stride) % cards[k] != 0) continue;
        for (std::size_t j = 1; j < cards[k]; ++j) {
            if (!rows_equal(row_at(r), row_at(r + j * stride))) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Arc> removable_arcs(const Diagram& d) {
    std::vector<Arc> out;
    for (const auto& arc : d.relevance_arcs) {
        const Node& x = d.node(arc.to);
        const auto& order =
            x.kind == NodeKind::utility ? x.utility.parent_order : x.table.parent_order;
        auto pos = std::find(order.begin(), order.end(), arc.from);
        if (pos == order.end()) continue;  // set decision: composed by the engine
        auto cards = cardinalities(d, order);
        const std::size_t k = static_cast<std::size_t>(pos - order.begin());
        bool depends = false;
        if (x.kind == NodeKind::utility) {
            depends = depends_on(cards, k, x.utility.values.size(), [&](std::size_t r) {
                return std::vector<double>{x.utility.values[r]};
            });
        } else {
            depends = depends_on(cards, k, x.table.rows.size(),
                                 [&](std::size_t r) { return x.table.rows[r]; });
        }
        if (!depends) out.push_back(arc);
    }
    return out;
}

bool is_set_decision(const Diagram& d, const std::string& s, const std::string& x) {
    const Node& dec = d.node(s);
    if (dec.kind != NodeKind::decision) {
        throw QueryError("'" + s + "' is not a decision");
    }
    const Node& target = d.node(x);
    NameSet expected{std::string(do_nothing_state)};
    for (const auto& k : target.variable.states) expected.insert(set_state(k));
    NameSet actual(dec.variable.states.begin(), dec.variable.states.end());
    if (actual != expected || dec.variable.states.size() != expected.size()) return false;
    auto kids = d.children(s);
    return kids.size() == 1 && kids.front() == x;
}

Certification certify_causal_network(const Diagram& d) {
    Certification result;
    if (!d.annotations.causal) result.reasons.push_back("not annotated causal");
    for (const auto& arc : removable_arcs(d)) {
        result.reasons.push_back("removable arc: " + arc.from + " -> " + arc.to);
    }
    std::vector<std::string> missing;
    for (const auto& n : d.nodes) {
        if (!n.is_uncertain()) continue;
        const bool leaf = !d.parents(n.name()).empty() && d.children(n.name()).empty();
        if (leaf) continue;
        bool covered = false;
        for (const auto& p : d.parents(n.name())) {
            if (d.node(p).kind == NodeKind::decision && is_set_decision(d, p, n.name())) {
                covered = true;
            }
        }
        if (!covered) missing.push_back(n.name());
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        result.reasons.push_back("missing set decisions: " + names);
    }
    result.certified = result.reasons.empty();
    return result;
}

}  // namespace cid
