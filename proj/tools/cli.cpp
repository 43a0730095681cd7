#include "cid/cli.hpp"

#include "cid/decision.hpp"
#include "cid/errors.hpp"
#include "cid/functional.hpp"
#include "cid/graph.hpp"
#include "cid/inference.hpp"
#include "cid/model_io.hpp"
#include "cid/worlds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <sstream>

namespace cid {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

NameSet name_set(const std::string& text) {
    auto v = split(text, ',');
    return NameSet(v.begin(), v.end());
}

Assignment assignment(const std::string& text, const std::string& flag) {
    Assignment a;
    for (const auto& pair : split(text, ',')) {
        auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError(flag + " expects name=state pairs, got '" + pair + "'");
        }
        // Set-decision alternatives contain '=', so split on the first one only.
        a[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    return a;
}

json sets_json(const std::vector<NameSet>& sets) {
    json out = json::array();
    for (const auto& s : sets) out.push_back(std::vector<std::string>(s.begin(), s.end()));
    return out;
}

json distribution_json(const Factor& f) {
    json out = json::object();
    const auto cards = f.cardinalities();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto digits = instance_digits(i, cards);
        std::string key;
        for (std::size_t k = 0; k < digits.size(); ++k) {
            if (k) key += '|';
            key += f.scope()[k].states[digits[k]];
        }
        out[key] = round_significant(f.values()[i]);
    }
    return out;
}

json report_json(const CauseReport& r) {
    return {{"target", r.target},
            {"method", std::string(to_string(r.method))},
            {"cause_sets", sets_json(r.cause_sets)},
            {"reason", r.reason},
            {"warnings", r.warnings}};
}

// Human-readable rendering of an output document.
void render(const json& j, std::ostream& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    auto scalar = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    auto flat = [&](const json& v) {
        if (!v.is_array()) return false;
        for (const auto& e : v) {
            if (e.is_object()) return false;
            if (e.is_array()) {
                for (const auto& x : e) {
                    if (x.is_structured()) return false;
                }
            }
        }
        return true;
    };
    auto inline_array = [&](const json& v) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ", ";
            if (e.is_array()) {
                std::string inner;
                for (const auto& x : e) inner += (inner.empty() ? "" : ", ") + scalar(x);
                s += "{" + inner + "}";
            } else {
                s += scalar(e);
            }
        }
        return s.empty() ? std::string("(none)") : s;
    };
    for (const auto& [raw_key, value] : j.items()) {
        const std::string key = raw_key.empty() ? "(no parents)" : raw_key;
        if (value.is_object()) {
            out << pad << key << ":\n";
            render(value, out, indent + 1);
        } else if (value.is_array() && !flat(value)) {
            out << pad << key << ":\n";
            for (const auto& e : value) {
                if (e.is_object()) {
                    render(e, out, indent + 1);
                    out << "\n";
                } else {
                    out << pad << "  " << scalar(e) << "\n";
                }
            }
        } else if (value.is_array()) {
            out << pad << key << ": " << inline_array(value) << "\n";
        } else {
            out << pad << key << ": " << scalar(value) << "\n";
        }
    }
}

struct Context {
    std::string model_path;
    Limits limits = Limits::from_environment();
    std::vector<std::string> warnings;

    Diagram model() const { return parse_model(read_text_file(model_path)); }
    HcfDiagram hcf() const { return parse_hcf(read_text_file(model_path)); }
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal influence diagram toolkit", "cid"};
    app.require_subcommand(1);
    bool pretty = false;
    app.add_flag("--pretty", pretty, "Human-readable output");

    Context ctx;
    json result;
    int status = 0;
    std::function<void()> action;

    auto command = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("model", ctx.model_path, "Model file (JSON)")->required();
        sub->add_flag("--pretty", pretty, "Human-readable output");
        return sub;
    };

    // validate
    auto* validate = command("validate", "Check a model file");
    validate->callback([&] {
        action = [&] {
            const Diagram d = ctx.model();
            result = {{"valid", true},
                      {"nodes", d.nodes.size()},
                      {"relevance_arcs", d.relevance_arcs.size()},
                      {"information_arcs", d.information_arcs.size()}};
        };
    });

    // fixed-set
    std::string given, method = "graphical";
    auto* fixed = command("fixed-set", "Fixed set F(D|C)");
    fixed->add_option("--given", given, "Comma-separated conditioning set C");
    fixed->add_option("--method", method, "graphical | oracle")->check(CLI::IsMember({"graphical", "oracle"}));
    fixed->callback([&] {
        action = [&] {
            const NameSet c = name_set(given);
            result["given"] = std::vector<std::string>(c.begin(), c.end());
            result["method"] = method;
            if (method == "graphical") {
                const auto r = graphical_fixed_set(ctx.model(), c);
                result["fixed_set"] = std::vector<std::string>(r.members.begin(), r.members.end());
                result["claim_only"] = r.claim_only;
                return;
            }
            const HcfDiagram h = ctx.hcf();
            for (const auto& n : c) h.diagram.node(n);
            WorldTable table(h, {}, ctx.limits);
            std::vector<std::string> members;
            for (const auto& n : h.diagram.nodes) {
                if (n.is_uncertain() && table.fixed_given(n.name(), c)) members.push_back(n.name());
            }
            std::sort(members.begin(), members.end());
            result["fixed_set"] = members;
            result["claim_only"] = false;
        };
    });

    // causes
    std::string of;
    bool d_map_verified = false;
    auto* causes = command("causes", "Causes of a node");
    causes->add_option("--of", of, "Target node")->required();
    causes->add_option("--method", method, "graphical | oracle")->check(CLI::IsMember({"graphical", "oracle"}));
    causes->add_flag("--d-map-verified", d_map_verified, "Caller vouches the diagram is a D-map");
    causes->callback([&] {
        action = [&] {
            if (method == "graphical") {
                result = report_json(graphical_causes(ctx.model(), of, d_map_verified, ctx.limits));
            } else {
                result = report_json(oracle_causes(ctx.hcf(), of, ctx.limits));
            }
        };
    });

    // d-sep
    std::string xs, ys;
    auto* dsep = command("d-sep", "d-separation test");
    dsep->add_option("--x", xs, "Comma-separated set X")->required();
    dsep->add_option("--y", ys, "Comma-separated set Y")->required();
    dsep->add_option("--given", given, "Comma-separated set Z");
    dsep->callback([&] {
        action = [&] {
            const NameSet x = name_set(xs), y = name_set(ys), z = name_set(given);
            result = {{"x", x}, {"y", y}, {"given", z}, {"d_separated", d_separated(ctx.model(), x, y, z)}};
        };
    });

    // minimal
    std::string target, decisions, exclude;
    auto* minimal = command("minimal", "Minimal sets blocking decisions from a node");
    minimal->add_option("--target", target, "Target node")->required();
    minimal->add_option("--decisions", decisions, "Comma-separated decisions (default: all)");
    minimal->add_option("--exclude", exclude, "Comma-separated nodes to leave out of the sets");
    minimal->callback([&] {
        action = [&] {
            const Diagram d = ctx.model();
            NameSet decs = name_set(decisions);
            if (decisions.empty()) {
                const auto all = d.decisions();
                decs = NameSet(all.begin(), all.end());
            }
            result = {{"target", target},
                      {"decisions", decs},
                      {"blocking_sets", sets_json(minimal_blocking_sets(d, decs, target, name_set(exclude), ctx.limits))}};
        };
    });

    // to-hcf
    bool assume_causal = false;
    auto* tohcf = command("to-hcf", "Convert to Howard Canonical Form");
    tohcf->add_flag("--assume-causal", assume_causal, "Proceed on a diagram not annotated causal");
    tohcf->callback([&] {
        action = [&] {
            HcfOptions opts;
            opts.assume_causal = assume_causal;
            opts.limits = ctx.limits;
            const HcfDiagram h = to_hcf(ctx.model(), opts);
            ctx.warnings = h.warnings;
            result = json::parse(serialize_model(h));
        };
    });

    // check-hcf
    std::string original;
    auto* checkhcf = command("check-hcf", "Check HCF invariants and marginal reproduction");
    checkhcf->add_option("--original", original, "Original model whose marginals must be reproduced");
    checkhcf->callback([&] {
        action = [&] {
            const HcfDiagram h = ctx.hcf();
            auto violations = hcf_violations(h);
            result["hcf"] = violations.empty();
            result["violations"] = violations;
            json mechs = json::array();
            for (const auto& m : h.mechanisms) {
                json prior = json::object();
                const Node& node = h.diagram.node(m.node);
                for (std::size_t r = 0; r < m.prior.rows.size(); ++r) {
                    json row = json::object();
                    for (std::size_t s = 0; s < node.variable.cardinality(); ++s) {
                        row[node.variable.states[s]] = round_significant(m.prior.rows[r][s]);
                    }
                    prior[row_key(h.diagram, m.prior.parent_order, r)] = std::move(row);
                }
                mechs.push_back({{"node", m.node}, {"target", m.target}, {"prior", std::move(prior)}});
            }
            result["mechanisms"] = std::move(mechs);
            bool passed = violations.empty();
            if (!original.empty()) {
                const Diagram o = parse_model(read_text_file(original));
                const auto r = check_marginal_reproduction(o, h, ctx.limits);
                result["marginal_reproduction"] = {{"passed", r.passed()},
                                                   {"max_abs_error", round_significant(r.max_abs_error)},
                                                   {"violations", r.violations}};
                passed = passed && r.passed();
            }
            result["passed"] = passed;
            if (!passed) status = static_cast<int>(ErrorKind::validation);
        };
    });

    // infer
    std::string decision_text, evidence_text, query_text, infer_method = "ve";
    auto* infer = command("infer", "Posterior distribution");
    infer->add_option("--decisions", decision_text, "name=state pairs binding every decision");
    infer->add_option("--evidence", evidence_text, "name=state pairs");
    infer->add_option("--query", query_text, "Comma-separated query variables")->required();
    infer->add_option("--method", infer_method, "ve | enumeration")->check(CLI::IsMember({"ve", "enumeration"}));
    infer->callback([&] {
        action = [&] {
            const Diagram d = ctx.model();
            const auto decs = assignment(decision_text, "--decisions");
            const auto ev = assignment(evidence_text, "--evidence");
            const auto q = split(query_text, ',');
            const Factor f = infer_method == "ve" ? posterior(d, decs, ev, q, ctx.limits)
                                                  : posterior_by_enumeration(d, decs, ev, q, ctx.limits);
            result = {{"query", q}, {"distribution", distribution_json(f)}};
        };
    });

    // counterfactual
    std::string factual_text, counter_text;
    bool convert = false;
    auto* cf = command("counterfactual", "Twin-network counterfactual query");
    cf->add_option("--factual-decisions", factual_text, "name=state pairs")->required();
    cf->add_option("--evidence", evidence_text, "name=state pairs observed in the factual world");
    cf->add_option("--counterfactual-decisions", counter_text, "name=state pairs")->required();
    cf->add_option("--query", query_text, "Comma-separated variables (answered in the counterfactual copy)")->required();
    cf->add_flag("--convert", convert, "Convert the model to HCF first");
    cf->callback([&] {
        action = [&] {
            HcfDiagram h;
            if (convert) {
                HcfOptions opts;
                opts.limits = ctx.limits;
                h = to_hcf(ctx.model(), opts);
                ctx.warnings = h.warnings;
            } else {
                h = ctx.hcf();
            }
            CounterfactualQuery q{assignment(factual_text, "--factual-decisions"),
                                  assignment(evidence_text, "--evidence"),
                                  assignment(counter_text, "--counterfactual-decisions"),
                                  {}};
            const Node* u = h.diagram.utility_node();
            bool want_utility = false;
            for (const auto& n : split(query_text, ',')) {
                if (u && n == u->name()) {
                    want_utility = true;
                } else {
                    q.query.push_back(n);
                }
            }
            if (!q.query.empty()) {
                const Factor f = counterfactual(h, q, ctx.limits);
                result["query"] = f.names();
                result["distribution"] = distribution_json(f);
            }
            if (want_utility) {
                result["expected_utility"] = round_significant(counterfactual_expected_utility(h, q, ctx.limits));
            }
        };
    });

    // evaluate
    auto* evaluate = command("evaluate", "Optimal policy and its expected utility");
    evaluate->callback([&] {
        action = [&] {
            const Diagram d = ctx.model();
            const PolicyResult r = optimal_policy(d, ctx.limits);
            json policy = json::object();
            for (const auto& rule : r.policy.rules) {
                json choices = json::object();
                for (std::size_t i = 0; i < rule.choice.size(); ++i) {
                    choices[row_key(d, rule.observed, i)] = rule.choice[i];
                }
                policy[rule.decision] = {{"observed", rule.observed}, {"choice", std::move(choices)}};
            }
            result = {{"expected_utility", round_significant(r.expected_utility)},
                      {"policy", std::move(policy)},
                      {"policies_evaluated", r.policies_evaluated}};
        };
    });

    // voi
    std::string voi_node, voi_decision;
    bool no_forgetting = false;
    auto* voi = command("voi", "Value of information");
    voi->add_option("--node", voi_node, "Observed variable")->required();
    voi->add_option("--decision", voi_decision, "Decision that observes it")->required();
    voi->add_flag("--no-forgetting", no_forgetting, "Also observe before every later decision");
    voi->callback([&] {
        action = [&] {
            VoiOptions opts{no_forgetting, ctx.limits};
            const VoiResult r = value_of_information(ctx.model(), voi_node, voi_decision, opts);
            result = {{"node", voi_node},
                      {"decision", voi_decision},
                      {"value", round_significant(r.value)},
                      {"eu_with", round_significant(r.eu_with)},
                      {"eu_without", round_significant(r.eu_without)}};
        };
    });

    // certify-causal
    auto* certify = command("certify-causal", "Certify a causal network");
    certify->callback([&] {
        action = [&] {
            const Certification c = certify_causal_network(ctx.model());
            result = {{"certified", c.certified}, {"reasons", c.reasons}};
        };
    });

    // is-d-map
    std::size_t max_cond = 2;
    auto* dmap = command("is-d-map", "Exhaustive D-map check");
    dmap->add_option("--max-cond", max_cond, "Largest conditioning set size");
    dmap->callback([&] {
        action = [&] {
            const DMapReport r = oracle_is_d_map(ctx.model(), max_cond, ctx.limits);
            result = {{"d_map", r.holds},
                      {"statements_checked", r.statements_checked},
                      {"counterexamples", r.counterexamples}};
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    try {
        action();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return static_cast<int>(ErrorKind::resource);
    }
    for (const auto& w : ctx.warnings) err << "warning: " << w << "\n";
    if (pretty) {
        render(result, out, 0);
    } else {
        out << result.dump() << "\n";
    }
    return status;
}

}  // namespace cid
