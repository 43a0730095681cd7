#include "cid/functional.hpp"

#include "cid/errors.hpp"
#include "cid/graph.hpp"
#include "cid/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cid {

namespace {

using StateMap = std::map<std::string, std::size_t>;

std::size_t row_of(const Diagram& d, std::span<const std::string> order, const StateMap& states) {
    std::size_t row = 0;
    for (const auto& p : order) row = row * d.node(p).variable.cardinality() + states.at(p);
    return row;
}

StateMap bind_states(std::span<const std::string> names, const std::vector<std::size_t>& digits,
              StateMap into = {}) {
    for (std::size_t i = 0; i < names.size(); ++i) into[names[i]] = digits[i];
    return into;
}

std::vector<Variable> variables_of(const Diagram& d, std::span<const std::string> names) {
    std::vector<Variable> out;
    for (const auto& n : names) out.push_back(d.node(n).variable);
    return out;
}

std::string describe(const Diagram& d, std::span<const std::string> names,
                     const std::vector<std::size_t>& digits) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i] + "=" + d.node(names[i]).variable.states[digits[i]];
    }
    return out;
}

}  // namespace

std::vector<Mapping> enumerate_mechanism_states(const Variable& x,
                                                std::span<const Variable> domain,
                                                const Limits& limits) {
    std::vector<std::size_t> cards;
    for (const auto& v : domain) {
        if (v.name == x.name) {
            throw QueryError("mechanism domain of '" + x.name + "' must not contain itself");
        }
        cards.push_back(v.cardinality());
    }
    const std::size_t q = instance_count(cards);
    const std::size_t r = x.cardinality();
    std::size_t total = 1;
    for (std::size_t i = 0; i < q; ++i) {
        if (total > limits.mechanism_states / std::max<std::size_t>(r, 1)) {
            throw StateSpaceExceeded("mechanism for '" + x.name + "' would have " +
                                     std::to_string(r) + "^" + std::to_string(q) +
                                     " states (cap " + std::to_string(limits.mechanism_states) + ")");
        }
        total *= r;
    }
    std::vector<Mapping> out;
    out.reserve(total);
    Mapping f(q, 0);
    for (std::size_t n = 0; n < total; ++n) {
        out.push_back(f);
        for (std::size_t i = q; i-- > 0;) {
            if (++f[i] < r) break;
            f[i] = 0;
        }
    }
    return out;
}

std::string mapping_label(const Variable& x, const Mapping& f) {
    std::string out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) out += '/';
        out += x.states[f[i]];
    }
    return out;
}

std::string mechanism_name(std::string_view x, std::span<const std::string> domain) {
    std::string out(x);
    out += '(';
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (i) out += ';';
        out += domain[i];
    }
    out += ')';
    return out;
}

NameSet structural_fixed_set(const Diagram& d) {
    NameSet reach = decision_descendants(d);
    NameSet out;
    for (const auto& n : d.nodes) {
        if (!n.is_uncertain()) continue;
        if (!reach.count(n.name()) || d.annotations.declared_fixed.count(n.name())) {
            out.insert(n.name());
        }
    }
    return out;
}

namespace {

MechanismSpec product_prior(const Diagram& d, const std::string& x, const NameSet& fixed,
                            const Limits& limits) {
    const Node& node = d.node(x);
    if (!node.is_uncertain()) {
        throw QueryError("'" + x + "' is not a chance node; only chance nodes have mechanisms");
    }
    MechanismSpec m;
    m.target = x;
    for (const auto& p : node.table.parent_order) {
        (fixed.count(p) ? m.fixed_parents : m.domain).push_back(p);
    }
    if (m.domain.empty() && !d.set_decision_of(x)) {
        throw QueryError("'" + x + "' has no parents outside the fixed set; nothing to extract");
    }
    m.node = mechanism_name(x, m.domain);
    const auto domain_vars = variables_of(d, m.domain);
    m.mappings = enumerate_mechanism_states(node.variable, domain_vars, limits);

    const auto ycards = cardinalities(d, m.domain);
    const auto zcards = cardinalities(d, m.fixed_parents);
    const std::size_t q = instance_count(ycards);
    const std::size_t zrows = instance_count(zcards);
    m.prior.parent_order = m.fixed_parents;
    m.prior.rows.assign(zrows, std::vector<double>(m.mappings.size(), 0.0));

    for (std::size_t zr = 0; zr < zrows; ++zr) {
        StateMap zstates = bind_states(m.fixed_parents, instance_digits(zr, zcards));
        // Original row for every domain instance at this z.
        std::vector<const std::vector<double>*> rows(q);
        for (std::size_t y = 0; y < q; ++y) {
            StateMap all = bind_states(m.domain, instance_digits(y, ycards), zstates);
            rows[y] = &node.table.rows[row_of(d, node.table.parent_order, all)];
        }
        for (std::size_t fi = 0; fi < m.mappings.size(); ++fi) {
            double p = 1.0;
            for (std::size_t y = 0; y < q && p != 0.0; ++y) p *= (*rows[y])[m.mappings[fi][y]];
            m.prior.rows[zr][fi] = p;
        }
    }
    return m;
}

}  // namespace

MechanismSpec canonical_mechanism_prior(const Diagram& d, const std::string& x,
                                        const Limits& limits) {
    return product_prior(d, x, structural_fixed_set(d), limits);
}

const MechanismSpec* HcfDiagram::mechanism_for(std::string_view target) const {
    for (const auto& m : mechanisms) {
        if (m.target == target) return &m;
    }
    return nullptr;
}

HcfDiagram as_hcf(Diagram d) {
    HcfDiagram h;
    h.diagram = std::move(d);
    return h;
}

HcfDiagram to_hcf(const Diagram& d, const HcfOptions& options) {
    require_valid(d);
    if (!d.annotations.causal && !options.assume_causal) {
        throw NotCausal(
            "diagram is not annotated causal; add causal arcs and set annotations.causal, "
            "or pass assume_causal");
    }

    const NameSet reach = decision_descendants(d);
    const auto& declared = d.annotations.declared_fixed;
    for (const auto& a : d.relevance_arcs) {
        if (!declared.count(a.to)) continue;
        const Node& from = d.node(a.from);
        const bool from_fixed = from.is_uncertain() && (!reach.count(a.from) || declared.count(a.from));
        if (!from_fixed) {
            throw ReassessmentRequired(
                "arc " + a.from + " -> " + a.to + " runs from outside the fixed set into declared-fixed '" +
                a.to + "'; reassess the diagram with the fixed variables ordered first");
        }
    }
    const NameSet fixed = structural_fixed_set(d);

    HcfDiagram h;
    std::map<std::string, MechanismSpec> specs;
    for (const auto& n : d.nodes) {
        if (n.kind != NodeKind::chance || fixed.count(n.name())) continue;
        MechanismSpec m = product_prior(d, n.name(), fixed, options.limits);
        if (auto it = options.priors.find(n.name()); it != options.priors.end()) {
            m.prior = it->second;
        }
        specs.emplace(n.name(), std::move(m));
    }

    for (const auto& [from, to] : options.mechanism_dependencies) {
        if (!specs.count(from) || !specs.count(to)) {
            throw QueryError("mechanism dependency " + from + " -> " + to +
                             " names a node that receives no mechanism");
        }
        if (!options.priors.count(to)) {
            throw DependentMechanismsUnassessed(
                "mechanism of '" + to + "' depends on the mechanism of '" + from +
                "' but no joint prior table was supplied for it");
        }
    }
    for (const auto& [target, table] : options.priors) {
        if (!specs.count(target)) {
            throw QueryError("prior supplied for '" + target + "', which receives no mechanism");
        }
    }

    // Declared-fixed names outside the diagram stand for marginalized common
    // causes, which typically make the extracted mechanisms dependent.
    std::vector<std::string> marginalized;
    for (const auto& name : declared) {
        if (!d.contains(name)) marginalized.push_back(name);
    }
    if (!marginalized.empty() && specs.size() >= 2 && options.mechanism_dependencies.empty()) {
        std::string names;
        for (const auto& m : marginalized) names += (names.empty() ? "" : ", ") + m;
        h.warnings.push_back("declared-fixed variable(s) " + names +
                             " are not modelled; mechanisms were made independent, but a "
                             "marginalized common cause may make them dependent");
    }

    Diagram& out = h.diagram;
    out.decision_order = d.decision_order;
    out.annotations = d.annotations;
    out.annotations.causal = true;
    out.information_arcs = d.information_arcs;

    for (const auto& n : d.nodes) {
        auto it = specs.find(n.name());
        if (it == specs.end()) {
            out.nodes.push_back(n);
            continue;
        }
        const MechanismSpec& m = it->second;
        Node mech;
        mech.variable.name = m.node;
        for (const auto& f : m.mappings) mech.variable.states.push_back(mapping_label(n.variable, f));
        mech.kind = NodeKind::chance;
        mech.table = m.prior;
        out.nodes.push_back(std::move(mech));

        Node x = n;
        x.kind = NodeKind::deterministic;
        x.table.parent_order = m.domain;
        x.table.parent_order.push_back(m.node);
        const std::size_t q = instance_count(cardinalities(d, m.domain));
        x.table.rows.clear();
        for (std::size_t y = 0; y < q; ++y) {
            for (const auto& f : m.mappings) {
                std::vector<double> row(n.variable.cardinality(), 0.0);
                row[f[y]] = 1.0;
                x.table.rows.push_back(std::move(row));
            }
        }
        out.nodes.push_back(std::move(x));
    }

    for (const auto& a : d.relevance_arcs) {
        auto it = specs.find(a.to);
        if (it == specs.end()) {
            out.relevance_arcs.push_back(a);
            continue;
        }
        const MechanismSpec& m = it->second;
        const bool to_mechanism =
            std::find(m.fixed_parents.begin(), m.fixed_parents.end(), a.from) != m.fixed_parents.end();
        if (!to_mechanism) out.relevance_arcs.push_back(a);
    }
    for (const auto& [target, m] : specs) {
        for (const auto& p : m.prior.parent_order) out.relevance_arcs.push_back({p, m.node});
        out.relevance_arcs.push_back({m.node, target});
    }

    for (const auto& n : d.nodes) {
        auto it = specs.find(n.name());
        if (it == specs.end()) continue;
        h.provenance[it->second.node] = n.name();
        h.mechanisms.push_back(std::move(it->second));
    }

    require_valid(out);
    return h;
}

std::vector<std::string> hcf_violations(const HcfDiagram& h) {
    std::vector<std::string> out = validate_diagram(h.diagram).violations;
    if (!out.empty()) return out;
    const Diagram& d = h.diagram;
    if (!d.annotations.causal) out.push_back("diagram is not annotated causal");
    const NameSet reach = decision_descendants(d);
    for (const auto& n : d.nodes) {
        if (n.kind == NodeKind::chance && reach.count(n.name())) {
            out.push_back("chance node '" + n.name() +
                          "' descends from a decision but is not deterministic");
        }
    }
    for (const auto& [node, target] : h.provenance) {
        if (!d.contains(node)) {
            out.push_back("mechanism '" + node + "' is not a node of the diagram");
        } else if (reach.count(node)) {
            out.push_back("mechanism '" + node + "' descends from a decision");
        }
        if (!d.contains(target)) out.push_back("mechanism target '" + target + "' is missing");
    }
    return out;
}

MarginalReport check_marginal_reproduction(const Diagram& original, const HcfDiagram& hcf,
                                           const Limits& limits) {
    MarginalReport report;
    const Diagram& hd = hcf.diagram;
    for (const auto& m : hcf.mechanisms) {
        const Node* x = original.find(m.target);
        const Node* mech = hd.find(m.node);
        const Node* hx = hd.find(m.target);
        if (!x || !mech || !hx) {
            report.violations.push_back("mechanism '" + m.node + "' or its target is missing");
            continue;
        }
        if (mech->variable.cardinality() != m.mappings.size()) {
            report.violations.push_back("mechanism '" + m.node + "' has " +
                                        std::to_string(mech->variable.cardinality()) +
                                        " states but " + std::to_string(m.mappings.size()) +
                                        " mappings");
            continue;
        }
        const auto ycards = cardinalities(original, m.domain);
        const auto zcards = cardinalities(original, m.fixed_parents);
        const std::size_t q = instance_count(ycards);

        // The target must follow its mechanism: x = f(y).
        for (std::size_t y = 0; y < q; ++y) {
            StateMap ys = bind_states(m.domain, instance_digits(y, ycards));
            for (std::size_t fi = 0; fi < m.mappings.size(); ++fi) {
                StateMap all = ys;
                all[m.node] = fi;
                const auto& row = hx->table.rows.at(row_of(hd, hx->table.parent_order, all));
                if (row[m.mappings[fi][y]] != 1.0) {
                    report.violations.push_back("'" + m.target + "' does not follow mapping " +
                                                mech->variable.states[fi] + " at " +
                                                describe(original, m.domain, instance_digits(y, ycards)));
                }
            }
        }

        const NameSet zset(m.fixed_parents.begin(), m.fixed_parents.end());
        const bool independent = std::all_of(
            mech->table.parent_order.begin(), mech->table.parent_order.end(),
            [&](const std::string& p) { return zset.count(p) > 0; });
        Assignment some_decisions;
        for (const auto& dec : hd.decisions()) {
            some_decisions[dec] = hd.node(dec).variable.states.front();
        }

        for (std::size_t zr = 0; zr < instance_count(zcards); ++zr) {
            const auto zdigits = instance_digits(zr, zcards);
            StateMap zs = bind_states(m.fixed_parents, zdigits);
            std::vector<double> prior;
            if (independent) {
                prior = mech->table.rows.at(row_of(hd, mech->table.parent_order, zs));
            } else {
                Assignment evidence;
                for (const auto& [name, s] : zs) evidence[name] = hd.node(name).variable.states[s];
                try {
                    std::vector<std::string> q1{m.node};
                    prior = posterior(hd, some_decisions, evidence, q1, limits).values();
                } catch (const ZeroProbabilityEvidence&) {
                    continue;
                }
            }
            for (std::size_t y = 0; y < q; ++y) {
                const auto ydigits = instance_digits(y, ycards);
                StateMap all = bind_states(m.domain, ydigits, zs);
                const auto& orig_row = x->table.rows[row_of(original, x->table.parent_order, all)];
                for (std::size_t k = 0; k < x->variable.cardinality(); ++k) {
                    double mass = 0.0;
                    for (std::size_t fi = 0; fi < m.mappings.size(); ++fi) {
                        if (m.mappings[fi][y] == k) mass += prior[fi];
                    }
                    const double err = std::abs(mass - orig_row[k]);
                    report.max_abs_error = std::max(report.max_abs_error, err);
                    if (err > normalization_tolerance) {
                        std::ostringstream os;
                        os << m.target << ": P(" << m.target << "=" << x->variable.states[k]
                           << " | " << describe(original, m.domain, ydigits);
                        if (!m.fixed_parents.empty()) {
                            os << ", " << describe(original, m.fixed_parents, zdigits);
                        }
                        os << ") is " << mass << " under the mechanism prior but " << orig_row[k]
                           << " in the original table";
                        report.violations.push_back(os.str());
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace cid
