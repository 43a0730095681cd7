#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cid/errors.hpp"
#include "cid/inference.hpp"
#include "cid/worlds.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace cid;

namespace {

bool has(const std::vector<NameSet>& sets, const NameSet& s) {
    return std::find(sets.begin(), sets.end(), s) != sets.end();
}

std::vector<Assignment> decision_instances(const Diagram& d) {
    std::vector<Variable> vars;
    for (const auto& n : d.decisions()) vars.push_back(d.node(n).variable);
    return enumerate_instances(vars);
}

HcfDiagram small_random_hcf(cidtest::Rng& rng) {
    cidtest::RandomSpec spec;
    spec.max_chance = 3;
    spec.max_states = 2;
    spec.max_parents = 2;
    return to_hcf(cidtest::random_diagram(rng, spec));
}

// x = d xor e, y = d: mutual causes whose relation changes with the world.
Diagram xor_pair() {
    Diagram d;
    d.add_chance("e", {"0", "1"}, {}, {{0.5, 0.5}});
    d.add_decision("d", {"0", "1"});
    d.add_deterministic("x", {"0", "1"}, {"d", "e"}, {{1, 0}, {0, 1}, {0, 1}, {1, 0}});
    d.add_deterministic("y", {"0", "1"}, {"d"}, {{1, 0}, {0, 1}});
    d.decision_order = std::vector<std::string>{"d"};
    d.annotations.causal = true;
    return d;
}

}  // namespace

TEST_CASE("fixed-set oracle examples") {
    auto coin = as_hcf(cidtest::load("coin.json"));
    CHECK_FALSE(oracle_fixed_set_member(coin, "w", {}));
    CHECK(oracle_fixed_set_member(coin, "c", {}));
    CHECK(oracle_fixed_set_member(coin, "w", {"d"}));

    auto fig6 = to_hcf(cidtest::load("fig6a.json"));
    CHECK(oracle_fixed_set_member(fig6, "cardiovascular status", {"diet"}));
    CHECK_FALSE(oracle_fixed_set_member(fig6, "cardiovascular status", {}));
    CHECK_FALSE(oracle_fixed_set_member(fig6, "cardiovascular status", {"smoke"}));
    CHECK(oracle_fixed_set_member(fig6, "lung cancer", {"smoke", "genotype"}));
    CHECK(oracle_fixed_set_member(fig6, "genotype", {}));
    for (const auto& [mech, target] : fig6.provenance) CHECK(oracle_fixed_set_member(fig6, mech, {}));
}

TEST_CASE("oracle causes") {
    auto fig2 = to_hcf(cidtest::load("fig2a.json"));
    auto lc = oracle_causes(fig2, "lung cancer");
    CHECK(lc.cause_sets == std::vector<NameSet>{{"smoke"}});
    CHECK(lc.method == CauseMethod::oracle);
    auto u = oracle_causes(fig2, "utility");
    CHECK(has(u.cause_sets, {"smoke"}));
    CHECK(has(u.cause_sets, {"smoking pleasure", "lung cancer"}));

    auto coin = as_hcf(cidtest::load("coin.json"));
    CHECK(oracle_causes(coin, "w").cause_sets == std::vector<NameSet>{{"d"}});
    auto c = oracle_causes(coin, "c");
    CHECK(c.cause_sets.empty());
    CHECK(c.reason == "x ∈ F(D)");
}

TEST_CASE("oracle errors") {
    auto coin = as_hcf(cidtest::load("coin.json"));
    CHECK_THROWS_AS(oracle_fixed_set_member(coin, "d", {}), QueryError);
    CHECK_THROWS_AS(oracle_fixed_set_member(coin, "w", {"nope"}), UnknownVariable);
    CHECK_THROWS_AS(oracle_causes(as_hcf(cidtest::m1()), "lung cancer"), NotInHcf);
    Limits tiny;
    tiny.world_pairs = 4;
    CHECK_THROWS_AS(oracle_fixed_set_member(coin, "w", {}, tiny), ResourceError);
}

TEST_CASE("world table matches independent world enumeration") {
    cidtest::Rng rng(51);
    for (int trial = 0; trial < 100; ++trial) {
        Diagram d = cidtest::random_functional(rng, {});
        WorldTable table(as_hcf(d));
        double total = 0;
        for (const auto& w : table.worlds()) total += w.weight;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

        auto worlds = cidtest::enumerate_worlds(d);
        const auto instances = decision_instances(d);
        REQUIRE(instances.size() == table.decision_instance_count());
        // Both enumerate fixed roots in the same order, but match worlds by
        // their exogenous states to stay independent of it.
        for (const auto& ow : worlds) {
            std::size_t match = table.worlds().size();
            for (std::size_t w = 0; w < table.worlds().size(); ++w) {
                bool same = true;
                for (const auto& [name, s] : ow.states) {
                    if (static_cast<std::size_t>(table.value(w, 0, name)) != s) same = false;
                }
                if (same) match = w;
            }
            REQUIRE(match < table.worlds().size());
            for (std::size_t k = 0; k < instances.size(); ++k) {
                auto values = cidtest::propagate(d, ow, instances[k]);
                for (const auto& [name, s] : values) {
                    CHECK(static_cast<std::size_t>(table.value(match, k, name)) == s);
                }
            }
        }
    }
}

TEST_CASE("every mechanism is in the fixed set") {
    cidtest::Rng rng(52);
    for (int trial = 0; trial < 60; ++trial) {
        auto h = small_random_hcf(rng);
        WorldTable table(h);
        for (const auto& [mech, target] : h.provenance) CHECK(table.fixed_given(mech, {}));
    }
}

TEST_CASE("blocking implies fixed-set membership on HCF diagrams") {
    cidtest::Rng rng(53);
    std::size_t checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto h = trial % 2 ? small_random_hcf(rng) : as_hcf(cidtest::random_functional(rng, {}));
        const Diagram& d = h.diagram;
        WorldTable table(h);
        std::vector<std::string> names;
        for (const auto& n : d.nodes) names.push_back(n.name());
        for (const auto& x : names) {
            if (d.node(x).kind == NodeKind::decision) continue;
            for (int s = 0; s < 20; ++s) {
                NameSet c;
                for (const auto& n : names) {
                    if (n != x && cidtest::uniform(rng, 0, 2) == 0) c.insert(n);
                }
                if (!blocks(d, {c, std::nullopt, x})) continue;
                ++checked;
                CHECK(table.fixed_given(x, c));
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("fixed-set membership implies independence from the decisions") {
    cidtest::Rng rng(54);
    for (int trial = 0; trial < 80; ++trial) {
        Diagram d = cidtest::random_functional(rng, {});
        auto h = as_hcf(d);
        WorldTable table(h);
        const auto instances = decision_instances(d);
        const NameSet fixed = structural_fixed_set(d);
        std::vector<std::string> conditioning;
        for (const auto& n : d.nodes) {
            if (fixed.count(n.name()) || n.kind == NodeKind::decision) conditioning.push_back(n.name());
        }
        for (const auto& x : d.uncertain_nodes()) {
            // C drawn from fixed nodes and decisions.
            NameSet c;
            for (const auto& n : conditioning) {
                if (n != x && cidtest::uniform(rng, 0, 1)) c.insert(n);
            }
            if (!table.fixed_given(x, c)) continue;
            std::vector<std::string> cu;
            for (const auto& n : c) {
                if (d.node(n).kind != NodeKind::decision) cu.push_back(n);
            }
            // P(x | C) must agree across decision instances that agree with C's decisions.
            std::vector<std::string> scope = cu;
            scope.push_back(x);
            std::map<std::vector<std::string>, Factor> seen;
            for (const auto& inst : instances) {
                std::vector<std::string> key;
                for (const auto& n : c) {
                    if (d.node(n).kind == NodeKind::decision) key.push_back(inst.at(n));
                }
                auto j = joint(d, inst).marginal(scope);
                auto it = seen.find(key);
                if (it == seen.end()) {
                    seen.emplace(key, j);
                } else {
                    CHECK(max_abs_difference(it->second, j) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("conditioning on a collider breaks the independence reading") {
    // d -> y <- e with x = e: x is fixed outright, hence fixed given y, yet
    // learning y makes x depend on d.
    Diagram d;
    d.add_chance("e", {"0", "1"}, {}, {{0.5, 0.5}});
    d.add_decision("d", {"0", "1"});
    d.add_deterministic("x", {"0", "1"}, {"e"}, {{1, 0}, {0, 1}});
    d.add_deterministic("y", {"0", "1"}, {"d", "e"}, {{1, 0}, {0, 1}, {0, 1}, {1, 0}});
    d.decision_order = std::vector<std::string>{"d"};
    d.annotations.causal = true;
    CHECK(oracle_fixed_set_member(as_hcf(d), "x", {"y"}));
    std::vector<std::string> q{"x"};
    auto p0 = posterior(d, {{"d", "0"}}, {{"y", "0"}}, q);
    auto p1 = posterior(d, {{"d", "1"}}, {{"y", "0"}}, q);
    CHECK(p0.at({{"x", "0"}}) == 1.0);
    CHECK(p1.at({{"x", "1"}}) == 1.0);
}

TEST_CASE("mutual causes are functions of each other within each world") {
    cidtest::Rng rng(55);
    std::size_t pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Diagram d = cidtest::random_functional(rng, {});
        auto h = as_hcf(d);
        std::map<std::string, std::vector<NameSet>> causes;
        for (const auto& x : d.uncertain_nodes()) causes[x] = oracle_causes(h, x).cause_sets;
        auto worlds = cidtest::enumerate_worlds(d);
        const auto instances = decision_instances(d);
        for (const auto& x : d.uncertain_nodes()) {
            for (const auto& y : d.uncertain_nodes()) {
                if (x == y || !has(causes[y], {x}) || !has(causes[x], {y})) continue;
                ++pairs;
                for (const auto& w : worlds) {
                    std::map<std::size_t, std::size_t> x_of_y;
                    for (const auto& inst : instances) {
                        auto s = cidtest::propagate(d, w, inst);
                        auto [it, fresh] = x_of_y.emplace(s.at(y), s.at(x));
                        CHECK(it->second == s.at(x));
                    }
                }
            }
        }
    }
    CHECK(pairs > 0);
}

TEST_CASE("mutual causes need not be one function across worlds") {
    Diagram d = xor_pair();
    auto h = as_hcf(d);
    CHECK(has(oracle_causes(h, "x").cause_sets, {"y"}));
    CHECK(has(oracle_causes(h, "y").cause_sets, {"x"}));
    // Across worlds, (y, d) = (0, 0) leaves x undetermined.
    auto p = posterior(d, {{"d", "0"}}, {{"y", "0"}}, std::vector<std::string>{"x"});
    CHECK(p.at({{"x", "0"}}) == doctest::Approx(0.5));
}

TEST_CASE("D-map oracle examples") {
    auto strong = oracle_is_d_map(cidtest::m1(), 2);
    CHECK(strong.holds);
    CHECK(strong.statements_checked == 1);
    auto flat = oracle_is_d_map(cidtest::m1(0.5, 0.5), 2);
    CHECK_FALSE(flat.holds);
    REQUIRE(flat.counterexamples.size() == 1);
    CHECK(flat.counterexamples[0] == "smoke and lung cancer are independent given {} but not d-separated");

    Diagram arcless;
    arcless.add_chance("a", {"0", "1"}, {}, {{0.3, 0.7}});
    arcless.add_chance("b", {"0", "1"}, {}, {{0.6, 0.4}});
    CHECK(oracle_is_d_map(arcless, 2).holds);

    CHECK_FALSE(oracle_is_d_map(cidtest::load("coin.json"), 2).holds);
    Limits tiny;
    tiny.joint_entries = 4;
    CHECK_THROWS_AS(oracle_is_d_map(cidtest::load("fig6a.json"), 2, tiny), StateSpaceExceeded);
}

TEST_CASE("graphical causes appear among oracle causes on D-map HCF diagrams") {
    cidtest::Rng rng(56);
    std::size_t compared = 0;
    for (int trial = 0; trial < 120; ++trial) {
        auto h = small_random_hcf(rng);
        if (!oracle_is_d_map(h.diagram, 2).holds) continue;
        const NameSet reach = decision_descendants(h.diagram);
        for (const auto& x : h.diagram.uncertain_nodes()) {
            if (!reach.count(x)) continue;
            auto oracle = oracle_causes(h, x).cause_sets;
            for (const auto& c : graphical_causes(h.diagram, x, true).cause_sets) {
                ++compared;
                CHECK(has(oracle, c));
            }
        }
    }
    CHECK(compared > 0);
}
