#include "cid/worlds.hpp"

#include "cid/errors.hpp"
#include "cid/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cid {

namespace {

// One node of the propagation program: how to compute its value from slots.
struct Step {
    std::size_t slot;
    const Node* node;
    std::vector<std::size_t> parent_slots;
    std::vector<std::size_t> parent_cards;
    std::ptrdiff_t setter_slot = -1;
    const Node* setter = nullptr;
};

std::size_t one_hot_state(const Node& n, const std::vector<double>& row) {
    for (std::size_t s = 0; s < row.size(); ++s) {
        if (row[s] == 1.0) return s;
    }
    throw NotInHcf("row of '" + n.name() + "' is not one-hot; input is not in HCF");
}

}  // namespace

WorldTable::WorldTable(const HcfDiagram& h, const NameSet& focus, const Limits& limits) {
    if (auto v = hcf_violations(h); !v.empty()) {
        throw NotInHcf("diagram is not in Howard Canonical Form: " + v.front());
    }
    const Diagram& d = h.diagram;
    fixed_ = structural_fixed_set(d);

    NameSet relevant;
    if (focus.empty()) {
        for (const auto& n : d.nodes) relevant.insert(n.name());
    } else {
        relevant = ancestors(d, focus, true);
    }

    std::vector<std::string> propagated;
    for (const auto& name : topological_order(d)) {
        if (!relevant.count(name)) continue;
        const Node& n = d.node(name);
        if (n.kind == NodeKind::decision) {
            decisions_.push_back(name);
            decision_cards_.push_back(n.variable.cardinality());
        } else if (fixed_.count(name)) {
            world_nodes_.push_back(name);
        } else {
            propagated.push_back(name);
        }
    }
    decision_instances_ = instance_count(decision_cards_);
    tracked_ = world_nodes_;
    tracked_.insert(tracked_.end(), decisions_.begin(), decisions_.end());
    tracked_.insert(tracked_.end(), propagated.begin(), propagated.end());
    for (std::size_t i = 0; i < tracked_.size(); ++i) slots_.emplace(tracked_[i], i);

    const std::size_t pair_factor = decision_instances_ * decision_instances_;
    auto over_cap = [&](std::size_t worlds) {
        return worlds > limits.world_pairs / std::max<std::size_t>(pair_factor, 1);
    };

    // Worlds: depth-first over fixed nodes in topological order, pruning zeros.
    {
        std::vector<std::size_t> states(world_nodes_.size(), 0);
        std::vector<const Node*> nodes;
        for (const auto& w : world_nodes_) nodes.push_back(&d.node(w));
        auto recurse = [&](auto&& self, std::size_t i, double weight) -> void {
            if (i == nodes.size()) {
                worlds_.push_back({states, weight});
                if (over_cap(worlds_.size())) {
                    throw ResourceError("functional world enumeration exceeds " +
                                        std::to_string(limits.world_pairs) +
                                        " world-pairs (set CID_CAP_WORLDS to raise the cap)");
                }
                return;
            }
            const Node& n = *nodes[i];
            std::size_t row = 0;
            for (const auto& p : n.table.parent_order) {
                const std::size_t k = static_cast<std::size_t>(
                    std::find(world_nodes_.begin(), world_nodes_.end(), p) - world_nodes_.begin());
                row = row * d.node(p).variable.cardinality() + states[k];
            }
            for (std::size_t s = 0; s < n.variable.cardinality(); ++s) {
                const double p = n.table.rows[row][s];
                if (p <= 0.0) continue;
                states[i] = s;
                self(self, i + 1, weight * p);
            }
        };
        recurse(recurse, 0, 1.0);
    }

    std::vector<Step> program;
    for (const auto& name : propagated) {
        const Node& n = d.node(name);
        Step step{slots_.at(name), &n, {}, {}};
        const auto& order = n.kind == NodeKind::utility ? n.utility.parent_order : n.table.parent_order;
        for (const auto& p : order) {
            step.parent_slots.push_back(slots_.at(p));
            step.parent_cards.push_back(d.node(p).variable.cardinality());
        }
        if (const Node* s = d.set_decision_of(name)) {
            step.setter = s;
            step.setter_slot = static_cast<std::ptrdiff_t>(slots_.at(s->name()));
        }
        if (n.kind == NodeKind::chance) {
            throw NotInHcf("chance node '" + name + "' depends on a decision; input is not in HCF");
        }
        program.push_back(std::move(step));
    }

    const std::size_t width = tracked_.size();
    values_.assign(worlds_.size() * decision_instances_ * width, 0.0);
    const std::size_t nworld = world_nodes_.size();
    for (std::size_t w = 0; w < worlds_.size(); ++w) {
        for (std::size_t k = 0; k < decision_instances_; ++k) {
            double* v = &values_[(w * decision_instances_ + k) * width];
            for (std::size_t i = 0; i < nworld; ++i) v[i] = static_cast<double>(worlds_[w].states[i]);
            auto dstates = instance_digits(k, decision_cards_);
            for (std::size_t i = 0; i < dstates.size(); ++i) v[nworld + i] = static_cast<double>(dstates[i]);
            for (const auto& step : program) {
                std::size_t row = 0;
                for (std::size_t i = 0; i < step.parent_slots.size(); ++i) {
                    row = row * step.parent_cards[i] + static_cast<std::size_t>(v[step.parent_slots[i]]);
                }
                if (step.node->kind == NodeKind::utility) {
                    v[step.slot] = step.node->utility.values[row];
                    continue;
                }
                if (step.setter) {
                    const auto& alt = step.setter->variable.states[static_cast<std::size_t>(v[step.setter_slot])];
                    if (alt != do_nothing_state) {
                        v[step.slot] = static_cast<double>(
                            step.node->variable.require_state(std::string_view(alt).substr(4)));
                        continue;
                    }
                }
                v[step.slot] = static_cast<double>(one_hot_state(*step.node, step.node->table.rows[row]));
            }
        }
    }
}

bool WorldTable::tracks(std::string_view node) const { return slots_.find(node) != slots_.end(); }

bool WorldTable::is_fixed(std::string_view node) const { return fixed_.count(std::string(node)) > 0; }

std::size_t WorldTable::slot(std::string_view node) const {
    auto it = slots_.find(node);
    if (it == slots_.end()) {
        throw QueryError("node '" + std::string(node) + "' is not tracked by this world table");
    }
    return it->second;
}

std::vector<std::size_t> WorldTable::decision_instance(std::size_t k) const {
    return instance_digits(k, decision_cards_);
}

double WorldTable::value(std::size_t world, std::size_t decision_instance,
                         std::string_view node) const {
    return values_[(world * decision_instances_ + decision_instance) * tracked_.size() + slot(node)];
}

bool WorldTable::fixed_given(const std::string& x, const NameSet& given) const {
    if (given.count(x) || is_fixed(x)) return true;
    const std::size_t xs = slot(x);
    std::vector<std::size_t> cs;
    for (const auto& c : given) {
        if (!is_fixed(c)) cs.push_back(slot(c));  // fixed nodes are constant within a world
    }
    const std::size_t width = tracked_.size();
    for (std::size_t w = 0; w < worlds_.size(); ++w) {
        const double* base = &values_[w * decision_instances_ * width];
        for (std::size_t i = 0; i < decision_instances_; ++i) {
            const double* a = base + i * width;
            for (std::size_t j = i + 1; j < decision_instances_; ++j) {
                const double* b = base + j * width;
                if (a[xs] == b[xs]) continue;
                bool same_c = true;
                for (std::size_t c : cs) {
                    if (a[c] != b[c]) {
                        same_c = false;
                        break;
                    }
                }
                if (same_c) return false;
            }
        }
    }
    return true;
}

namespace {

void check_target(const HcfDiagram& h, const std::string& x) {
    const Node& n = h.diagram.node(x);
    if (n.kind == NodeKind::decision) {
        throw QueryError("'" + x + "' is a decision; only chance and utility nodes are caused");
    }
}

}  // namespace

bool oracle_fixed_set_member(const HcfDiagram& h, const std::string& x, const NameSet& given,
                             const Limits& limits) {
    check_target(h, x);
    for (const auto& c : given) h.diagram.node(c);
    NameSet focus = given;
    focus.insert(x);
    return WorldTable(h, focus, limits).fixed_given(x, given);
}

CauseReport oracle_causes(const HcfDiagram& h, const std::string& x, const Limits& limits) {
    check_target(h, x);
    CauseReport report;
    report.target = x;
    report.method = CauseMethod::oracle;
    WorldTable table(h, {}, limits);
    if (table.fixed_given(x, {})) {
        report.reason = "x ∈ F(D)";
        return report;
    }
    std::vector<std::string> pool;
    for (const auto& n : h.diagram.nodes) {
        if (n.name() == x || n.kind == NodeKind::utility || table.is_fixed(n.name())) continue;
        pool.push_back(n.name());
    }
    std::sort(pool.begin(), pool.end());
    if (pool.size() > limits.set_candidates) {
        throw NodeBudgetExceeded("oracle cause search for '" + x + "' has " +
                                 std::to_string(pool.size()) + " candidate nodes (cap " +
                                 std::to_string(limits.set_candidates) + ")");
    }
    const std::size_t n = pool.size();
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            NameSet c;
            for (std::size_t i : idx) c.insert(pool[i]);
            bool superset = std::any_of(report.cause_sets.begin(), report.cause_sets.end(),
                                        [&](const NameSet& f) {
                                            return std::includes(c.begin(), c.end(), f.begin(), f.end());
                                        });
            if (!superset && table.fixed_given(x, c)) report.cause_sets.push_back(std::move(c));
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return report;
}

namespace {

// Marginal of `full` onto the given scope positions, in one pass.
std::vector<double> project(const Factor& full, const std::vector<std::size_t>& positions,
                            std::vector<std::size_t>& out_cards) {
    const auto cards = full.cardinalities();
    out_cards.clear();
    for (std::size_t p : positions) out_cards.push_back(cards[p]);
    std::vector<double> out(instance_count(out_cards), 0.0);
    std::vector<std::size_t> digits(cards.size(), 0);
    for (std::size_t idx = 0; idx < full.size(); ++idx) {
        std::size_t o = 0;
        for (std::size_t p : positions) o = o * cards[p] + digits[p];
        out[o] += full.values()[idx];
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < cards[i]) break;
            digits[i] = 0;
        }
    }
    return out;
}

// Table layout [a][b][z...]; independence within tolerance at every z with P(z) > 0.
bool independent(const std::vector<double>& t, std::size_t ca, std::size_t cb, std::size_t cz) {
    for (std::size_t z = 0; z < cz; ++z) {
        double pz = 0.0;
        std::vector<double> pa(ca, 0.0), pb(cb, 0.0);
        for (std::size_t a = 0; a < ca; ++a) {
            for (std::size_t b = 0; b < cb; ++b) {
                const double v = t[(a * cb + b) * cz + z];
                pz += v;
                pa[a] += v;
                pb[b] += v;
            }
        }
        if (pz <= 0.0) continue;
        for (std::size_t a = 0; a < ca; ++a) {
            for (std::size_t b = 0; b < cb; ++b) {
                const double joint_ab = t[(a * cb + b) * cz + z] / pz;
                if (std::abs(joint_ab - (pa[a] / pz) * (pb[b] / pz)) > independence_tolerance) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace

DMapReport oracle_is_d_map(const Diagram& d, std::size_t max_conditioning, const Limits& limits) {
    require_valid(d);
    const auto decisions = d.decisions();
    const auto uncertain = d.uncertain_nodes();
    const auto dcards = cardinalities(d, decisions);
    const std::size_t ninst = instance_count(dcards);
    const std::size_t usize = instance_count(cardinalities(d, uncertain));
    if (ninst > limits.joint_entries / std::max<std::size_t>(usize, 1)) {
        throw StateSpaceExceeded("model too large to enumerate for the D-map check");
    }

    std::vector<Variable> scope;
    for (const auto& n : decisions) scope.push_back(d.node(n).variable);
    for (const auto& n : uncertain) scope.push_back(d.node(n).variable);
    std::vector<double> values;
    values.reserve(ninst * usize);
    for (std::size_t k = 0; k < ninst; ++k) {
        auto digits = instance_digits(k, dcards);
        Assignment inst;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            inst[decisions[i]] = d.node(decisions[i]).variable.states[digits[i]];
        }
        Factor j = joint(d, inst, limits);
        for (double v : j.values()) values.push_back(v / static_cast<double>(ninst));
    }
    const Factor full(scope, std::move(values));

    DMapReport report;
    const std::size_t n = scope.size();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != a && i != b) rest.push_back(i);
            }
            // Conditioning sets of size 0..max_conditioning.
            for (std::size_t k = 0; k <= std::min(max_conditioning, rest.size()); ++k) {
                std::vector<std::size_t> idx(k);
                for (std::size_t i = 0; i < k; ++i) idx[i] = i;
                while (true) {
                    std::vector<std::size_t> positions{a, b};
                    NameSet z;
                    for (std::size_t i : idx) {
                        positions.push_back(rest[i]);
                        z.insert(scope[rest[i]].name);
                    }
                    std::vector<std::size_t> pcards;
                    auto table = project(full, positions, pcards);
                    const std::size_t cz = table.size() / (pcards[0] * pcards[1]);
                    ++report.statements_checked;
                    if (independent(table, pcards[0], pcards[1], cz) &&
                        !d_separated(d, {scope[a].name}, {scope[b].name}, z)) {
                        report.holds = false;
                        std::string zs;
                        for (const auto& s : z) zs += (zs.empty() ? "" : ", ") + s;
                        report.counterexamples.push_back(scope[a].name + " and " + scope[b].name +
                                                         " are independent given {" + zs +
                                                         "} but not d-separated");
                    }
                    std::size_t i = k;
                    while (i > 0 && idx[i - 1] == rest.size() - k + i - 1) --i;
                    if (i == 0) break;
                    ++idx[i - 1];
                    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
    return report;
}

}  // namespace cid
