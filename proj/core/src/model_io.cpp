#include "cid/model_io.hpp"

#include "cid/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cid {

using nlohmann::json;

double round_significant(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail("unknown key '" + key + "' in " + where);
    }
}

const json& require_type(const json& j, json::value_t type, const std::string& what) {
    const bool ok = type == json::value_t::number_float ? j.is_number() : j.type() == type;
    if (!ok) {
        static const std::map<json::value_t, std::string> names{
            {json::value_t::object, "an object"},  {json::value_t::array, "an array"},
            {json::value_t::string, "a string"},   {json::value_t::boolean, "a boolean"},
            {json::value_t::number_float, "a number"}};
        fail(what + " must be " + names.at(type));
    }
    return j;
}

std::string get_string(const json& j, const std::string& what) {
    return require_type(j, json::value_t::string, what).get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const std::string& what) {
    std::vector<std::string> out;
    for (const auto& e : require_type(j, json::value_t::array, what)) {
        out.push_back(get_string(e, "entries of " + what));
    }
    return out;
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        fail("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
             ": " + e.what());
    }
}

std::vector<Arc> parse_arcs(const json& j, const std::string& what) {
    std::vector<Arc> out;
    for (const auto& e : require_type(j, json::value_t::array, what)) {
        auto pair = get_strings(e, "entries of " + what);
        if (pair.size() != 2) fail("entries of " + what + " must be [from, to] pairs");
        out.push_back({pair[0], pair[1]});
    }
    return out;
}

// Splits a row key into parent states and returns the row index.
std::size_t parse_row_key(const Diagram& d, const std::string& node,
                          const std::vector<std::string>& parent_order, const std::string& key) {
    std::vector<std::string> parts;
    if (!parent_order.empty()) {
        std::size_t start = 0;
        while (true) {
            auto bar = key.find('|', start);
            parts.push_back(key.substr(start, bar - start));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
    } else if (!key.empty()) {
        fail("row key '" + key + "' of '" + node + "' must be \"\" (no parents)");
    }
    if (parts.size() != parent_order.size()) {
        fail("row key '" + key + "' of '" + node + "' names " + std::to_string(parts.size()) +
             " parent states, expected " + std::to_string(parent_order.size()));
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Node* p = d.find(parent_order[i]);
        if (!p) fail("table of '" + node + "' names unknown parent '" + parent_order[i] + "'");
        auto s = p->variable.state_index(parts[i]);
        if (!s) {
            fail("row key '" + key + "' of '" + node + "': '" + parts[i] + "' is not a state of '" +
                 parent_order[i] + "'");
        }
        index = index * p->variable.cardinality() + *s;
    }
    return index;
}

template <class Entry, class Store>
void parse_rows(const Diagram& d, const std::string& node, const std::vector<std::string>& parent_order,
                const json& rows, Store& store, Entry&& entry) {
    std::vector<std::size_t> cards;
    for (const auto& p : parent_order) {
        const Node* pn = d.find(p);
        if (!pn) fail("table of '" + node + "' names unknown parent '" + p + "'");
        cards.push_back(pn->variable.cardinality());
    }
    const std::size_t n = instance_count(cards);
    std::vector<bool> seen(n, false);
    store.resize(n);
    for (const auto& [key, value] : require_type(rows, json::value_t::object, "rows of '" + node + "'").items()) {
        const std::size_t i = parse_row_key(d, node, parent_order, key);
        seen[i] = true;
        store[i] = entry(key, value);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) fail("missing row [" + row_key(d, parent_order, i) + "] in table of '" + node + "'");
    }
}

void parse_tables(const json& section, const std::string& section_name, NodeKind kind, Diagram& d) {
    for (const auto& [name, spec] : require_type(section, json::value_t::object, section_name).items()) {
        if (!d.contains(name)) fail(section_name + " entry for unknown variable '" + name + "'");
        Node* n = &d.node(name);
        if (n->kind != kind) {
            fail(section_name + " entry for '" + name + "', which is a " +
                 std::string(to_string(n->kind)) + " node");
        }
        require_type(spec, json::value_t::object, section_name + " entry for '" + name + "'");
        only_keys(spec, {"parent_order", "rows"}, section_name + " entry for '" + name + "'");
        if (!spec.contains("rows")) fail(section_name + " entry for '" + name + "' has no rows");
        n->table.parent_order =
            spec.contains("parent_order") ? get_strings(spec["parent_order"], "parent_order of '" + name + "'")
                                          : std::vector<std::string>{};
        parse_rows(d, name, n->table.parent_order, spec["rows"], n->table.rows,
                   [&](const std::string& key, const json& v) {
                       std::vector<double> row;
                       for (const auto& p : require_type(v, json::value_t::array, "row [" + key + "] of '" + name + "'")) {
                           row.push_back(require_type(p, json::value_t::number_float,
                                                      "entries of row [" + key + "] of '" + name + "'")
                                             .get<double>());
                       }
                       return row;
                   });
    }
}

Diagram build_diagram(const json& doc) {
    require_type(doc, json::value_t::object, "model document");
    only_keys(doc,
              {"variables", "relevance_arcs", "information_arcs", "cpts", "deterministic", "utility",
               "decision_order", "annotations", "mechanisms"},
              "model document");
    if (!doc.contains("variables")) fail("model document has no 'variables' section");

    Diagram d;
    for (const auto& v : require_type(doc["variables"], json::value_t::array, "variables")) {
        require_type(v, json::value_t::object, "entries of variables");
        only_keys(v, {"name", "kind", "states", "set_decision_for"}, "a variable entry");
        if (!v.contains("name")) fail("variable entry without a name");
        Node n;
        n.variable.name = get_string(v["name"], "variable name");
        if (d.contains(n.name())) fail("duplicate variable '" + n.name() + "'");
        const std::string kind = v.contains("kind") ? get_string(v["kind"], "kind of '" + n.name() + "'") : "chance";
        auto k = parse_node_kind(kind);
        if (!k) fail("unknown kind '" + kind + "' for variable '" + n.name() + "'");
        n.kind = *k;
        if (v.contains("states")) n.variable.states = get_strings(v["states"], "states of '" + n.name() + "'");
        for (const auto& s : n.variable.states) {
            if (s.find('|') != std::string::npos) {
                fail("state '" + s + "' of '" + n.name() + "' contains '|', which row keys reserve");
            }
        }
        if (v.contains("set_decision_for")) {
            n.set_decision_for = get_string(v["set_decision_for"], "set_decision_for of '" + n.name() + "'");
        }
        d.nodes.push_back(std::move(n));
    }
    if (doc.contains("relevance_arcs")) d.relevance_arcs = parse_arcs(doc["relevance_arcs"], "relevance_arcs");
    if (doc.contains("information_arcs")) d.information_arcs = parse_arcs(doc["information_arcs"], "information_arcs");
    if (doc.contains("cpts")) parse_tables(doc["cpts"], "cpts", NodeKind::chance, d);
    if (doc.contains("deterministic")) parse_tables(doc["deterministic"], "deterministic", NodeKind::deterministic, d);
    if (doc.contains("utility")) {
        for (const auto& [name, spec] : require_type(doc["utility"], json::value_t::object, "utility").items()) {
            if (!d.contains(name)) fail("utility entry for unknown variable '" + name + "'");
            Node* n = &d.node(name);
            if (n->kind != NodeKind::utility) fail("utility entry for '" + name + "', which is not a utility node");
            require_type(spec, json::value_t::object, "utility entry for '" + name + "'");
            only_keys(spec, {"parents", "values"}, "utility entry for '" + name + "'");
            if (!spec.contains("values")) fail("utility entry for '" + name + "' has no values");
            n->utility.parent_order =
                spec.contains("parents") ? get_strings(spec["parents"], "parents of '" + name + "'")
                                         : std::vector<std::string>{};
            parse_rows(d, name, n->utility.parent_order, spec["values"], n->utility.values,
                       [&](const std::string& key, const json& v) {
                           return require_type(v, json::value_t::number_float,
                                               "value [" + key + "] of '" + name + "'")
                               .get<double>();
                       });
        }
    }
    for (const auto& n : d.nodes) {
        if (n.is_uncertain() && n.table.rows.empty()) {
            fail("missing table for " + std::string(to_string(n.kind)) + " node '" + n.name() + "'");
        }
        if (n.kind == NodeKind::utility && n.utility.values.empty()) {
            fail("missing values for utility node '" + n.name() + "'");
        }
    }
    if (doc.contains("decision_order")) d.decision_order = get_strings(doc["decision_order"], "decision_order");
    if (doc.contains("annotations")) {
        const auto& a = require_type(doc["annotations"], json::value_t::object, "annotations");
        only_keys(a, {"causal", "declared_fixed"}, "annotations");
        if (a.contains("causal")) d.annotations.causal = require_type(a["causal"], json::value_t::boolean, "annotations.causal").get<bool>();
        if (a.contains("declared_fixed")) {
            for (auto& s : get_strings(a["declared_fixed"], "annotations.declared_fixed")) {
                d.annotations.declared_fixed.insert(std::move(s));
            }
        }
    }
    require_valid(d);
    return d;
}

json table_json(const Diagram& d, const ConditionalTable& t) {
    json rows = json::object();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        json row = json::array();
        for (double p : t.rows[i]) row.push_back(round_significant(p));
        rows[row_key(d, t.parent_order, i)] = std::move(row);
    }
    return {{"parent_order", t.parent_order}, {"rows", std::move(rows)}};
}

json diagram_json(const Diagram& d) {
    json doc = json::object();
    json vars = json::array();
    json cpts = json::object(), det = json::object(), util = json::object();
    for (const auto& n : d.nodes) {
        json v = {{"name", n.name()}, {"kind", std::string(to_string(n.kind))}};
        if (n.kind != NodeKind::utility) v["states"] = n.variable.states;
        if (n.set_decision_for) v["set_decision_for"] = *n.set_decision_for;
        vars.push_back(std::move(v));
        if (n.kind == NodeKind::chance) cpts[n.name()] = table_json(d, n.table);
        if (n.kind == NodeKind::deterministic) det[n.name()] = table_json(d, n.table);
        if (n.kind == NodeKind::utility) {
            json values = json::object();
            for (std::size_t i = 0; i < n.utility.values.size(); ++i) {
                values[row_key(d, n.utility.parent_order, i)] = round_significant(n.utility.values[i]);
            }
            util[n.name()] = {{"parents", n.utility.parent_order}, {"values", std::move(values)}};
        }
    }
    auto arcs = [](const std::vector<Arc>& list) {
        json out = json::array();
        for (const auto& a : list) out.push_back({a.from, a.to});
        return out;
    };
    doc["variables"] = std::move(vars);
    doc["relevance_arcs"] = arcs(d.relevance_arcs);
    doc["information_arcs"] = arcs(d.information_arcs);
    doc["cpts"] = std::move(cpts);
    doc["deterministic"] = std::move(det);
    doc["utility"] = std::move(util);
    if (d.decision_order) doc["decision_order"] = *d.decision_order;
    doc["annotations"] = {{"causal", d.annotations.causal},
                          {"declared_fixed", std::vector<std::string>(d.annotations.declared_fixed.begin(),
                                                                      d.annotations.declared_fixed.end())}};
    return doc;
}

std::string dump(const json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

}  // namespace

Diagram parse_model(std::string_view text) { return build_diagram(parse_json(text)); }

HcfDiagram parse_hcf(std::string_view text) {
    const json doc = parse_json(text);
    HcfDiagram h;
    h.diagram = build_diagram(doc);
    if (!doc.contains("mechanisms")) return h;
    for (const auto& m : require_type(doc["mechanisms"], json::value_t::array, "mechanisms")) {
        require_type(m, json::value_t::object, "entries of mechanisms");
        only_keys(m, {"node", "target", "domain", "fixed_parents", "mappings"}, "a mechanism entry");
        MechanismSpec spec;
        if (!m.contains("node") || !m.contains("target")) fail("mechanism entry needs 'node' and 'target'");
        spec.node = get_string(m["node"], "mechanism node");
        spec.target = get_string(m["target"], "mechanism target");
        const Node* node = h.diagram.find(spec.node);
        const Node* target = h.diagram.find(spec.target);
        if (!node) fail("mechanism '" + spec.node + "' is not a variable");
        if (!target) fail("mechanism target '" + spec.target + "' is not a variable");
        if (m.contains("domain")) spec.domain = get_strings(m["domain"], "domain of '" + spec.node + "'");
        if (m.contains("fixed_parents")) {
            spec.fixed_parents = get_strings(m["fixed_parents"], "fixed_parents of '" + spec.node + "'");
        }
        if (m.contains("mappings")) {
            for (const auto& f : require_type(m["mappings"], json::value_t::array, "mappings of '" + spec.node + "'")) {
                Mapping map;
                for (const auto& k : require_type(f, json::value_t::array, "a mapping of '" + spec.node + "'")) {
                    if (!k.is_number_unsigned() || k.get<std::size_t>() >= target->variable.cardinality()) {
                        fail("mapping of '" + spec.node + "' has an entry that is not a state index of '" +
                             spec.target + "'");
                    }
                    map.push_back(k.get<std::size_t>());
                }
                spec.mappings.push_back(std::move(map));
            }
        }
        if (spec.mappings.size() != node->variable.cardinality()) {
            fail("mechanism '" + spec.node + "' lists " + std::to_string(spec.mappings.size()) +
                 " mappings but has " + std::to_string(node->variable.cardinality()) + " states");
        }
        spec.prior = node->table;
        h.provenance[spec.node] = spec.target;
        h.mechanisms.push_back(std::move(spec));
    }
    return h;
}

std::string serialize_model(const Diagram& d, bool pretty) { return dump(diagram_json(d), pretty); }

std::string serialize_model(const HcfDiagram& h, bool pretty) {
    json doc = diagram_json(h.diagram);
    if (!h.mechanisms.empty()) {
        json ms = json::array();
        for (const auto& m : h.mechanisms) {
            ms.push_back({{"node", m.node},
                          {"target", m.target},
                          {"domain", m.domain},
                          {"fixed_parents", m.fixed_parents},
                          {"mappings", m.mappings}});
        }
        doc["mechanisms"] = std::move(ms);
    }
    return dump(doc, pretty);
}

}  // namespace cid
