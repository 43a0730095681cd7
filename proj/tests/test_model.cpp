#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include "cid/errors.hpp"
#include "cid/model.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace cid;

namespace {

bool mentions(const ValidationReport& r, const std::string& needle) {
    for (const auto& v : r.violations) {
        if (v.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("smoke -> lung cancer fixture is valid") {
    CHECK(validate_diagram(cidtest::m1()).ok());
}

TEST_CASE("two-arc cycle is reported") {
    Diagram d;
    d.add_chance("a", {"0", "1"}, {}, {{0.5, 0.5}});
    d.add_chance("b", {"0", "1"}, {"a"}, {{0.5, 0.5}, {0.5, 0.5}});
    d.relevance_arcs.push_back({"b", "a"});
    d.node("a").table.parent_order = {"b"};
    d.node("a").table.rows = {{0.5, 0.5}, {0.5, 0.5}};
    auto r = validate_diagram(d);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "cycle"));
}

TEST_CASE("row summing to 0.9 names node and row") {
    Diagram d = cidtest::m1();
    d.node("lung cancer").table.rows[1] = {0.7, 0.2};
    auto r = validate_diagram(d);
    REQUIRE_FALSE(r.ok());
    CHECK(mentions(r, "row sum"));
    CHECK(mentions(r, "'lung cancer' row [yes]"));
}

TEST_CASE("normalization tolerance is 1e-9") {
    Diagram d = cidtest::m1();
    d.node("lung cancer").table.rows[0] = {0.95 + 5e-10, 0.05};
    CHECK(validate_diagram(d).ok());
    d.node("lung cancer").table.rows[0] = {0.95 + 1e-8, 0.05};
    CHECK_FALSE(validate_diagram(d).ok());
}

TEST_CASE("structural violations") {
    SUBCASE("information arc into chance node") {
        Diagram d = cidtest::m1();
        d.add_chance("t", {"a", "b"}, {}, {{0.5, 0.5}});
        d.information_arcs.push_back({"t", "lung cancer"});
        CHECK(mentions(validate_diagram(d), "must point to a decision"));
    }
    SUBCASE("relevance arc into decision") {
        Diagram d = cidtest::m1();
        d.add_chance("t", {"a", "b"}, {}, {{0.5, 0.5}});
        d.relevance_arcs.push_back({"t", "smoke"});
        CHECK(mentions(validate_diagram(d), "use an information arc"));
    }
    SUBCASE("two utility nodes") {
        Diagram d = cidtest::m1();
        d.add_utility("u1", {"lung cancer"}, {1, 0});
        d.add_utility("u2", {"lung cancer"}, {1, 0});
        CHECK(mentions(validate_diagram(d), "more than one utility"));
    }
    SUBCASE("deterministic row not one-hot") {
        Diagram d = cidtest::m1();
        d.node("lung cancer").kind = NodeKind::deterministic;
        CHECK(mentions(validate_diagram(d), "not one-hot"));
    }
    SUBCASE("parent order must match relevance parents") {
        Diagram d = cidtest::m1();
        d.node("lung cancer").table.parent_order.clear();
        CHECK(mentions(validate_diagram(d), "parent_order"));
    }
    SUBCASE("single-state variable") {
        Diagram d = cidtest::m1();
        d.add_chance("z", {"only"}, {}, {{1.0}});
        CHECK(mentions(validate_diagram(d), "at least 2 states"));
    }
    SUBCASE("duplicate variable") {
        Diagram d = cidtest::m1();
        d.add_chance("smoke", {"a", "b"}, {}, {{0.5, 0.5}});
        CHECK(mentions(validate_diagram(d), "duplicate variable"));
    }
}

TEST_CASE("set decision structure") {
    Diagram d = cidtest::m1();
    d.add_set_decision("lung cancer");
    d.decision_order->push_back("s_lung cancer");
    CHECK(validate_diagram(d).ok());
    const Node& s = d.node("s_lung cancer");
    CHECK(s.variable.states == std::vector<std::string>{"do_nothing", "set=no", "set=yes"});

    SUBCASE("second child is rejected") {
        d.add_chance("other", {"a", "b"}, {"s_lung cancer"}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
        CHECK(mentions(validate_diagram(d), "only child"));
    }
    SUBCASE("missing do_nothing is rejected") {
        d.node("s_lung cancer").variable.states = {"set=no", "set=yes"};
        CHECK(mentions(validate_diagram(d), "alternatives"));
    }
}

TEST_CASE("decision order must respect ancestry") {
    Diagram d;
    d.add_decision("first", {"a", "b"});
    d.add_chance("x", {"0", "1"}, {"first"}, {{0.5, 0.5}, {0.5, 0.5}});
    d.add_decision("second", {"a", "b"}, {"x"});
    d.decision_order = std::vector<std::string>{"first", "second"};
    CHECK(validate_diagram(d).ok());
    d.decision_order = std::vector<std::string>{"second", "first"};
    CHECK_FALSE(validate_diagram(d).ok());
    d.decision_order = std::vector<std::string>{"first"};
    CHECK_FALSE(validate_diagram(d).ok());
}

TEST_CASE("require_valid throws ValidationError") {
    Diagram d = cidtest::m1();
    d.node("lung cancer").table.rows[1] = {0.7, 0.2};
    CHECK_THROWS_AS(require_valid(d), ValidationError);
}

TEST_CASE("enumerate_instances examples") {
    Variable smoke{"smoke", {"no", "yes"}};
    Variable diet{"diet", {"good", "poor"}};
    std::vector<Variable> one{smoke};
    auto a = enumerate_instances(one);
    REQUIRE(a.size() == 2);
    CHECK(a[0].at("smoke") == "no");
    CHECK(a[1].at("smoke") == "yes");

    std::vector<Variable> two{smoke, diet};
    auto b = enumerate_instances(two);
    REQUIRE(b.size() == 4);
    CHECK(b[0] == Assignment{{"smoke", "no"}, {"diet", "good"}});
    CHECK(b[1] == Assignment{{"smoke", "no"}, {"diet", "poor"}});
    CHECK(b[2] == Assignment{{"smoke", "yes"}, {"diet", "good"}});
    CHECK(b[3] == Assignment{{"smoke", "yes"}, {"diet", "poor"}});

    std::vector<Variable> none;
    auto c = enumerate_instances(none);
    REQUIRE(c.size() == 1);
    CHECK(c[0].empty());

    std::vector<Variable> dup{smoke, smoke};
    CHECK_THROWS_WITH_AS(enumerate_instances(dup), doctest::Contains("duplicate variable"), Error);
}

TEST_CASE("instance enumeration length is the product of state counts") {
    cidtest::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Variable> vars;
        std::size_t expected = 1;
        const auto n = cidtest::uniform(rng, 0, 4);
        for (std::size_t i = 0; i < n; ++i) {
            Variable v{"v" + std::to_string(i), {}};
            const auto k = cidtest::uniform(rng, 2, 4);
            for (std::size_t s = 0; s < k; ++s) v.states.push_back(std::to_string(s));
            expected *= k;
            vars.push_back(v);
        }
        auto inst = enumerate_instances(vars);
        CHECK(inst.size() == expected);
        std::vector<std::size_t> cards;
        for (const auto& v : vars) cards.push_back(v.cardinality());
        for (std::size_t i = 0; i < inst.size(); ++i) {
            auto digits = instance_digits(i, cards);
            for (std::size_t k = 0; k < vars.size(); ++k) {
                CHECK(inst[i].at(vars[k].name) == vars[k].states[digits[k]]);
            }
        }
    }
}

TEST_CASE("validation is idempotent and leaves the diagram untouched") {
    cidtest::Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        cidtest::RandomSpec spec;
        spec.utility = trial % 2 == 0;
        Diagram d = cidtest::random_diagram(rng, spec);
        if (trial % 3 == 0) d.node("x0").table.rows[0][0] += 0.1;
        const Diagram before = d;
        auto r1 = validate_diagram(d);
        auto r2 = validate_diagram(d);
        CHECK(r1.violations == r2.violations);
        CHECK(r1.ok() == (trial % 3 != 0));
        CHECK(structurally_equal(before, d));
    }
}

TEST_CASE("topological order is stable and respects arcs") {
    Diagram d = cidtest::load("fig1.json");
    auto order = topological_order(d);
    REQUIRE(order.size() == d.nodes.size());
    auto pos = [&](const std::string& n) { return std::find(order.begin(), order.end(), n) - order.begin(); };
    for (const auto& a : d.relevance_arcs) CHECK(pos(a.from) < pos(a.to));
    CHECK(order.front() == "smoke");
}
