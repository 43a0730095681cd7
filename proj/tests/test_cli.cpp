#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cid/cli.hpp"
#include "cid/decision.hpp"
#include "cid/inference.hpp"
#include "cid/model_io.hpp"
#include "fixtures.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;

    json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cid::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string model(const std::string& file) { return cidtest::model_path(file); }

std::string temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / ("cid_test_" + name);
    std::ofstream(path) << content;
    return path.string();
}

}  // namespace

TEST_CASE("validate") {
    auto r = run({"validate", model("fig1.json")});
    CHECK(r.code == 0);
    CHECK(r.doc()["valid"] == true);

    auto bad = temp_file("bad.json", R"({"variables": [{"name": "a", "kind": "chance", "states": ["x"]}],
        "cpts": {"a": {"parent_order": [], "rows": {"": [1.0]}}}})");
    auto v = run({"validate", bad});
    CHECK(v.code == 2);
    CHECK(v.err.find("'a'") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"causes", model("fig2a.json")}).code == 1);
    CHECK(run({"validate", "/nonexistent.json"}).code == 1);
    CHECK(run({"infer", model("m1.json"), "--decisions", "smoke", "--query", "lung cancer"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("graphical causes of utility") {
    auto r = run({"causes", model("fig2a.json"), "--of", "utility", "--method", "graphical"});
    REQUIRE(r.code == 0);
    auto sets = r.doc()["cause_sets"];
    CHECK(sets == json::parse(R"([["smoke"], ["lung cancer", "smoking pleasure"]])"));
    CHECK_FALSE(r.doc()["warnings"].empty());
    auto verified = run({"causes", model("fig2a.json"), "--of", "utility", "--d-map-verified"});
    CHECK(verified.doc()["warnings"].empty());
}

TEST_CASE("oracle causes through the canonical form") {
    auto h = run({"to-hcf", model("fig2a.json")});
    REQUIRE(h.code == 0);
    auto path = temp_file("fig2a_hcf.json", h.out);
    auto r = run({"causes", path, "--of", "lung cancer", "--method", "oracle"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["cause_sets"] == json::parse(R"([["smoke"]])"));
    CHECK(r.doc()["method"] == "oracle");
    CHECK(run({"causes", model("fig2a.json"), "--of", "lung cancer", "--method", "oracle"}).code == 3);
}

TEST_CASE("to-hcf then check-hcf") {
    auto h = run({"to-hcf", model("m1.json")});
    REQUIRE(h.code == 0);
    auto path = temp_file("m1_hcf.json", h.out);
    auto r = run({"check-hcf", path, "--original", model("m1.json")});
    REQUIRE(r.code == 0);
    auto doc = r.doc();
    CHECK(doc["passed"] == true);
    CHECK(doc["marginal_reproduction"]["passed"] == true);
    auto prior = doc["mechanisms"][0]["prior"][""];
    CHECK(prior["no/yes"] == 0.19);
    CHECK(prior["yes/no"] == 0.04);
    CHECK(prior["no/no"] == 0.76);
    CHECK(prior["yes/yes"] == 0.01);

    // Perturbed prior fails with exit 2.
    auto altered = json::parse(h.out);
    altered["cpts"]["lung cancer(smoke)"]["rows"][""] = {0.25, 0.25, 0.25, 0.25};
    auto bad = temp_file("m1_bad.json", altered.dump());
    auto f = run({"check-hcf", bad, "--original", model("m1.json")});
    CHECK(f.code == 2);
    CHECK(f.doc()["passed"] == false);

    auto plain = run({"check-hcf", model("m1.json")});
    CHECK(plain.code == 2);
    CHECK(plain.doc()["hcf"] == false);
}

TEST_CASE("to-hcf refuses a diagram not annotated causal") {
    auto doc = json::parse(cid::read_text_file(model("m1.json")));
    doc["annotations"]["causal"] = false;
    auto path = temp_file("m1_noncausal.json", doc.dump());
    CHECK(run({"to-hcf", path}).code == 3);
    CHECK(run({"to-hcf", path, "--assume-causal"}).code == 0);
}

TEST_CASE("voi") {
    auto r = run({"voi", model("coin_utility.json"), "--node", "c", "--decision", "d"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["value"] == 0.5);
    auto w = run({"voi", model("coin_utility.json"), "--node", "w", "--decision", "d"});
    CHECK(w.code == 3);
    CHECK(w.err.find("fixed-set observation") != std::string::npos);
    CHECK(w.err.find("'w'") != std::string::npos);
}

TEST_CASE("infer, counterfactual and evaluate") {
    auto i = run({"infer", model("m1.json"), "--decisions", "smoke=yes", "--query", "lung cancer"});
    REQUIRE(i.code == 0);
    CHECK(i.doc()["distribution"]["yes"] == 0.2);
    auto e = run({"infer", model("m1.json"), "--decisions", "smoke=yes", "--query", "lung cancer",
                  "--method", "enumeration"});
    CHECK(e.doc() == i.doc());
    auto zero = run({"infer", model("coin_degenerate.json"), "--decisions", "d=heads", "--evidence", "c=tails",
                     "--query", "w"});
    CHECK(zero.code == 3);

    auto c = run({"counterfactual", model("coin.json"), "--factual-decisions", "d=heads", "--evidence", "w=win",
                  "--counterfactual-decisions", "d=tails", "--query", "w"});
    REQUIRE(c.code == 0);
    CHECK(c.doc()["query"] == json::parse(R"(["w'"])"));
    CHECK(c.doc()["distribution"]["lose"] == 1.0);

    auto m = run({"counterfactual", model("m1.json"), "--convert", "--factual-decisions", "smoke=no",
                  "--evidence", "lung cancer=no", "--counterfactual-decisions", "smoke=yes", "--query",
                  "lung cancer"});
    REQUIRE(m.code == 0);
    CHECK(m.doc()["distribution"]["yes"].get<double>() == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(run({"counterfactual", model("m1.json"), "--factual-decisions", "smoke=no",
               "--counterfactual-decisions", "smoke=yes", "--query", "lung cancer"}).code == 3);

    auto u = run({"counterfactual", model("coin_utility.json"), "--factual-decisions", "d=heads", "--evidence",
                  "w=win", "--counterfactual-decisions", "d=tails", "--query", "utility"});
    REQUIRE(u.code == 0);
    CHECK(u.doc()["expected_utility"] == 0.0);

    auto v = run({"evaluate", model("coin_observed.json")});
    REQUIRE(v.code == 0);
    CHECK(v.doc()["expected_utility"] == 1.0);
    CHECK(v.doc()["policy"]["d"]["choice"] == json::parse(R"({"heads": "heads", "tails": "tails"})"));
    CHECK(run({"evaluate", model("coin.json")}).code == 3);
}

TEST_CASE("graph commands") {
    auto f = run({"fixed-set", model("fig6a.json"), "--given", "diet"});
    REQUIRE(f.code == 0);
    CHECK(f.doc()["fixed_set"] == json::parse(R"(["cardiovascular status", "genotype"])"));
    auto hcf = temp_file("fig6a_hcf.json", run({"to-hcf", model("fig6a.json")}).out);
    auto o = run({"fixed-set", hcf, "--given", "diet", "--method", "oracle"});
    REQUIRE(o.code == 0);
    auto members = o.doc()["fixed_set"];
    CHECK(std::find(members.begin(), members.end(), "cardiovascular status") != members.end());

    auto s = run({"d-sep", model("fig1.json"), "--x", "lung cancer", "--y", "cardiovascular status", "--given",
                  "smoke,diet,genotype"});
    CHECK(s.doc()["d_separated"] == true);
    auto m = run({"minimal", model("fig2a.json"), "--target", "utility"});
    CHECK(m.doc()["blocking_sets"] == json::parse(R"([["smoke"], ["lung cancer", "smoking pleasure"]])"));
    auto c = run({"certify-causal", model("fig2b.json")});
    CHECK(c.code == 0);
    CHECK(c.doc()["certified"] == false);
    auto d = run({"is-d-map", model("m1_flat.json")});
    CHECK(d.doc()["d_map"] == false);
    CHECK(run({"is-d-map", model("m1.json"), "--max-cond", "1"}).doc()["d_map"] == true);
}

TEST_CASE("resource caps exit 4") {
    ::setenv("CID_CAP_WORLDS", "2", 1);
    auto r = run({"is-d-map", model("fig1.json")});
    ::unsetenv("CID_CAP_WORLDS");
    CHECK(r.code == 4);
}

TEST_CASE("pretty output and determinism") {
    auto a = run({"causes", model("fig2a.json"), "--of", "utility"});
    auto b = run({"causes", model("fig2a.json"), "--of", "utility"});
    CHECK(a.out == b.out);
    auto p = run({"causes", model("fig2a.json"), "--of", "utility", "--pretty"});
    CHECK(p.code == 0);
    CHECK(p.out.find("cause_sets: {smoke}, {lung cancer, smoking pleasure}") != std::string::npos);
    CHECK(run({"--pretty", "validate", model("m1.json")}).out.find("valid: true") != std::string::npos);
}

TEST_CASE("the command line reproduces library numbers") {
    const cid::Diagram fig1 = cidtest::load("fig1.json");
    auto e = run({"evaluate", model("fig1.json")});
    REQUIRE(e.code == 0);
    CHECK(e.doc()["expected_utility"] == cid::round_significant(cid::optimal_policy(fig1).expected_utility));

    auto i = run({"infer", model("fig1.json"), "--decisions", "smoke=yes,diet=poor", "--evidence",
                  "length of life=short", "--query", "genotype"});
    REQUIRE(i.code == 0);
    auto f = cid::posterior(fig1, {{"smoke", "yes"}, {"diet", "poor"}}, {{"length of life", "short"}},
                            std::vector<std::string>{"genotype"});
    CHECK(i.doc()["distribution"]["b"] == cid::round_significant(f.at({{"genotype", "b"}})));

    auto v = run({"voi", model("fig1.json"), "--node", "genotype", "--decision", "smoke"});
    REQUIRE(v.code == 0);
    CHECK(v.doc()["value"] == cid::round_significant(cid::value_of_information(fig1, "genotype", "smoke").value));
}
