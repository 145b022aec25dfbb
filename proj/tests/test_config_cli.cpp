#include <catch_amalgamated.hpp>

#include <string>

#include "sqzlab/acceptance.hpp"
#include "sqzlab/commands.hpp"
#include "sqzlab/config.hpp"
#include "sqzlab/io.hpp"
#include "sqzlab/scenarios.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace sqz;

TEST_CASE("default configuration validates and round trips through JSON", "[config]") {
    const ScenarioConfig c;
    CHECK_NOTHROW(validate(c));
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
}

TEST_CASE("partial documents override defaults", "[config]") {
    const auto c = config_from_json(nlohmann::json::parse(R"({"seed": 7, "opa": {"pump_power": 90}})"));
    CHECK(c.seed == 7);
    CHECK(c.opa.pump_power == 90.0);
    CHECK(c.opa.threshold_power == 165.0);
}

TEST_CASE("config errors name the offending field", "[config][errors]") {
    auto message = [](const char* text) {
        try {
            config_from_json(nlohmann::json::parse(text));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::config);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK_THAT(message(R"({"opa": {"pump_powr": 1}})"), ContainsSubstring("opa.pump_powr") && ContainsSubstring("unknown"));
    CHECK_THAT(message(R"({"opa": {"pump_power": "a"}})"), ContainsSubstring("opa.pump_power"));
    CHECK_THAT(message(R"({"seed": -1})"), ContainsSubstring("seed"));
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"opa": {"pump_power": 170}})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"duration": 0})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"noise": {"tones": [{"frequency": -1}]}})")), Error);
}

TEST_CASE("config hash ignores the seed but tracks physics", "[config]") {
    ScenarioConfig a, b;
    b.seed = a.seed + 1;
    CHECK(config_hash(a) == config_hash(b));
    b.opa.pump_power = 99.0;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("scaling multiplies durations and averages", "[config]") {
    ScenarioConfig c;
    apply_scale(c, 0.1);
    CHECK(c.duration == Approx(10.0));
    CHECK(c.analyzer.zero_span.averages == 40);
    CHECK(c.analyzer.sweep.averages == 1);
    CHECK_THROWS_AS(apply_scale(c, 0.0), Error);
}

TEST_CASE("fnv1a64 matches reference vectors", "[config]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("pair CSV parsing reports row-level errors", "[cli][errors]") {
    const auto rows = parse_pairs_csv("# comment\nlabel,sq,anti\nideal,-5.70,13.68\nlocked,-5.57,13.80,5000\n", "p.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].pair.frequency == 5000.0);
    try {
        parse_pairs_csv("ideal,-5.70,13.68\nbad,x,1\n", "p.csv");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK_THAT(e.what(), ContainsSubstring("p.csv:2") && ContainsSubstring("squeezing_db"));
    }
    CHECK_THROWS_AS(parse_pairs_csv("a,1\n", "p.csv"), Error);
    CHECK_THROWS_AS(parse_pairs_csv("# nothing\n", "p.csv"), Error);
}

TEST_CASE("fit command reports jitter and provenance", "[cli]") {
    const ScenarioConfig c;
    const std::string text = "label,sq,anti\nideal,-5.70,13.68\nlocked,-5.57,13.80\n";
    const auto out = cmd_fit(c, text, "pairs.csv");
    REQUIRE(out.files.size() == 1);
    CHECK(out.files[0].name == "fit.json");
    const auto rows = out.summary["rows"];
    CHECK(rows[1]["phase_jitter"]["joint_rad"].get<double>() == Approx(0.018).margin(0.0015));
    CHECK(out.summary["input"]["path"] == "pairs.csv");
    const auto doc = nlohmann::json::parse(out.files[0].content);
    CHECK(doc["meta"]["config_hash"] == config_hash(c));
    CHECK(doc["meta"]["seed"] == c.seed);
    CHECK(doc["meta"]["version"] == tool_version);
}

TEST_CASE("CSV output carries metadata and fixed formatting", "[cli]") {
    Table t;
    t.add("a", {1.0, 0.5}).add("b", {-2.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(t.add("c", {1.0}), Error);
    OutputMeta meta{"demo", "0123456789abcdef", 42, "0.1.0", {{"rbw_hz", "10"}}};
    const auto csv = format_csv(t, meta);
    CHECK(csv == "# tool: sqzsim 0.1.0\n# command: demo\n# config_hash: 0123456789abcdef\n# seed: 42\n"
                 "# rbw_hz: 10\na,b\n1,-2\n0.5,nan\n");
}

TEST_CASE("scenario outputs are byte-identical across reruns", "[cli][determinism]") {
    auto c = determinism_config(ScenarioConfig{});
    c.duration = 1.0;
    const auto a = cmd_zero_span(c, 70.0);
    const auto b = cmd_zero_span(c, 70.0);
    REQUIRE(a.files.size() == 2);
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].content == b.files[i].content);
    c.seed += 1;
    CHECK(cmd_zero_span(c, 70.0).files[0].content != a.files[0].content);
}

TEST_CASE("tolerance overrides are strict", "[cli][config]") {
    const auto t = tolerances_from_json(nlohmann::json::parse(R"({"forward_tolerance_db": 0.001})"));
    CHECK(t.forward_tolerance_db == 0.001);
    CHECK_THROWS_AS(tolerances_from_json(nlohmann::json::parse(R"({"nope": 1})")), Error);
    const auto r = check_forward_jitter(t);
    CHECK_FALSE(r.passed);
    CHECK(check_forward_jitter(Tolerances{}).passed);
}

TEST_CASE("fast acceptance checks pass with default tolerances", "[acceptance]") {
    const ScenarioConfig c;
    const auto results = run_acceptance(c, Tolerances{}, {1, 2, 3, 7, 8});
    REQUIRE(results.size() == 5);
    for (const auto& r : results) {
        CAPTURE(format_check(r));
        CHECK(r.passed);
    }
}
