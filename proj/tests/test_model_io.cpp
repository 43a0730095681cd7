#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cid/errors.hpp"
#include "cid/model_io.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

#include <algorithm>
#include <filesystem>

using namespace cid;

namespace {

const char* m1_text = R"({
  "variables": [
    {"name": "smoke", "kind": "decision", "states": ["no", "yes"]},
    {"name": "lung cancer", "kind": "chance", "states": ["no", "yes"]}
  ],
  "relevance_arcs": [["smoke", "lung cancer"]],
  "cpts": {
    "lung cancer": {"parent_order": ["smoke"], "rows": {"no": [0.95, 0.05], "yes": [0.8, 0.2]}}
  },
  "decision_order": ["smoke"],
  "annotations": {"causal": true}
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::vector<std::string> corpus() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(CID_MODELS_DIR)) {
        if (e.path().extension() == ".json") out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("parse the smoking document") {
    Diagram d = parse_model(m1_text);
    CHECK(d.nodes.size() == 2);
    CHECK(d.relevance_arcs.size() == 1);
    CHECK(structurally_equal(d, cidtest::m1(), 1e-15));
    CHECK(structurally_equal(d, cidtest::load("m1.json")));
}

TEST_CASE("parse errors name what is wrong") {
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "\"yes\": [0.8", "\"maybe\": [0.8")),
                         doctest::Contains("row key 'maybe'"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "\"lung cancer\", \"kind\"", "\"smoke\", \"kind\"")),
                         doctest::Contains("duplicate variable"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "\"relevance_arcs\": [[", "\"relevance_arcs\": [[[")),
                         doctest::Contains("syntax error at line"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "\"decision_order\"", "\"decision_ordr\"")),
                         doctest::Contains("unknown key 'decision_ordr'"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, ", \"yes\": [0.8, 0.2]", "")),
                         doctest::Contains("missing row [yes] in table of 'lung cancer'"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "[0.8, 0.2]", "[0.7, 0.2]")),
                         doctest::Contains("lung cancer"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_model(replace(m1_text, "\"no\", \"yes\"]},\n    {\"name\": \"lung",
                                             "\"no\", \"y|s\"]},\n    {\"name\": \"lung")),
                         doctest::Contains("reserve"), ValidationError);
    CHECK_THROWS_AS(parse_model("[]"), ValidationError);
    CHECK_THROWS_AS(read_text_file("/nonexistent/model.json"), UsageError);
}

TEST_CASE("serialization is canonical") {
    const std::string a = serialize_model(parse_model(m1_text));
    CHECK(a.find("\"annotations\"") < a.find("\"variables\""));
    CHECK(a.find("0.05") != std::string::npos);
    CHECK(serialize_model(parse_model(a)) == a);
    CHECK(serialize_model(parse_model(a), true).find('\n') != std::string::npos);
    CHECK(round_significant(0.1 + 0.2) == 0.3);
    CHECK(round_significant(1.0 / 3.0) == 0.333333333333);
    CHECK(round_significant(0.0) == 0.0);
}

TEST_CASE("round trip over the example corpus") {
    auto files = corpus();
    CHECK(files.size() >= 10);
    for (const auto& f : files) {
        CAPTURE(f);
        Diagram d = cidtest::load(f);
        const std::string text = serialize_model(d);
        Diagram again = parse_model(text);
        CHECK(structurally_equal(d, again));
        CHECK(serialize_model(again) == text);
    }
}

TEST_CASE("round trip over random diagrams") {
    cidtest::Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        cidtest::RandomSpec spec;
        spec.utility = trial % 2 == 0;
        spec.information_probability = 0.3;
        Diagram d = cidtest::random_diagram(rng, spec);
        Diagram again = parse_model(serialize_model(d));
        CHECK(structurally_equal(d, again, 1e-11));
        CHECK(serialize_model(again) == serialize_model(d));
    }
}

TEST_CASE("canonical form documents keep their mechanisms") {
    auto h = to_hcf(cidtest::load("fig6a.json"));
    const std::string text = serialize_model(h);
    auto back = parse_hcf(text);
    CHECK(structurally_equal(back.diagram, h.diagram, 1e-11));
    REQUIRE(back.mechanisms.size() == h.mechanisms.size());
    for (std::size_t i = 0; i < h.mechanisms.size(); ++i) {
        CHECK(back.mechanisms[i].node == h.mechanisms[i].node);
        CHECK(back.mechanisms[i].target == h.mechanisms[i].target);
        CHECK(back.mechanisms[i].domain == h.mechanisms[i].domain);
        CHECK(back.mechanisms[i].fixed_parents == h.mechanisms[i].fixed_parents);
        CHECK(back.mechanisms[i].mappings == h.mechanisms[i].mappings);
    }
    CHECK(back.provenance == h.provenance);
    CHECK(serialize_model(back) == text);
    CHECK(check_marginal_reproduction(cidtest::load("fig6a.json"), back).passed());
    // A plain model document reads as HCF input without mechanisms.
    CHECK(parse_hcf(m1_text).mechanisms.empty());
}
