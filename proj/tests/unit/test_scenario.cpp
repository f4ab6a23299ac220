// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/errors.hpp"
#include "jbb/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace jbb;

namespace
{
const std::filesystem::path kScenarios = JBB_SCENARIO_DIR;

const char *kMinimal = R"({
  "system": {"M": 100, "K": 1, "Mp": 7, "tau_c": 500, "tau_pu": 10, "tau_po": 10, "rho_u_db": -3},
  "drop": {"beta": [1.0]},
  "o_terminal": {"beta_o": 1.0}
})";

std::string field_of(const std::string &text)
{
    try
    {
        parse_scenario(text);
    }
    catch (const ValidationError &e)
    {
        return e.field();
    }
    return "";
}

std::string replace(std::string s, const std::string &from, const std::string &to)
{
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}
} // namespace

TEST_CASE("shipped scenarios load and round-trip")
{
    for (const char *name : {"figure_a", "figure_b", "figure_c", "figure_e1", "figure_e2"})
    {
        CAPTURE(name);
        const Scenario s = load_scenario(kScenarios / (std::string(name) + ".json"));
        CHECK(s.name == name);
        const std::string text = serialize_scenario(s);
        const Scenario again = parse_scenario(text);
        CHECK(again == s);
        CHECK(serialize_scenario(again) == text);
        CHECK(scenario_hash(again) == scenario_hash(s));
        CHECK(scenario_hash(s).size() == 16);
    }
}

TEST_CASE("defaults and units")
{
    const Scenario s = parse_scenario(kMinimal);
    CHECK(s.system.rho_u == doctest::Approx(db_to_linear(-3.0)));
    CHECK(s.precoder == Precoder::ZF);
    CHECK(s.grid.points == 121);
    CHECK(s.mc.channel_draws == 100000);
    CHECK(s.mc.scalar_draws == 1000000);
    CHECK_FALSE(s.targets.has_value());
    CHECK(s.beta_o() == 1.0);
    CHECK_THROWS_AS(s.point(), ValidationError);
}

TEST_CASE("O-terminal gain from position and margin")
{
    const Scenario e1 = load_scenario(kScenarios / "figure_e1.json");
    CHECK(e1.beta_o() == doctest::Approx(std::pow(0.55, -4.0)));
    const Scenario b = load_scenario(kScenarios / "figure_b.json");
    CHECK(b.beta_o() == doctest::Approx(0.1));
    CHECK(b.profile().beta.size() == 10);
    CHECK(b.profile() == b.profile());
}

TEST_CASE("decibel fields accept -inf")
{
    const std::string text =
        replace(kMinimal, R"("o_terminal": {"beta_o": 1.0})",
                R"("o_terminal": {"beta_o": 1.0}, "operating_point": {"rho_b_db": 0, "rho_o_db": "-inf"})");
    const Scenario s = parse_scenario(text);
    CHECK(s.point().rho_o == 0.0);
    CHECK(parse_scenario(serialize_scenario(s)) == s);
    // but linear fields do not
    CHECK(field_of(replace(kMinimal, R"("beta_o": 1.0)", R"("beta_o": "-inf")")) == "o_terminal.beta_o");
}

TEST_CASE("validation errors name the field")
{
    CHECK(field_of("{not json") == "scenario");
    CHECK(field_of(replace(kMinimal, R"("M": 100)", R"("M": 0)")) == "system.M");
    CHECK(field_of(replace(kMinimal, R"("tau_po": 10)", R"("tau_po": 5)")) == "system.tau_po");
    CHECK(field_of(replace(kMinimal, R"("M": 100,)", "")) == "system.M");
    CHECK(field_of(replace(kMinimal, R"("Mp": 7)", R"("Mp": 7, "Mq": 1)")) == "system.Mq");
    CHECK(field_of(replace(kMinimal, R"("beta": [1.0])", R"("beta": [1.0, 2.0])")) == "drop.beta");
    CHECK(field_of(replace(kMinimal, R"("beta": [1.0])", R"("beta": [1.0], "seed": 3)")) == "drop");
    CHECK(field_of(replace(kMinimal, R"("beta_o": 1.0)", R"("beta_o": 1.0, "distance": 1)")) == "o_terminal");
    CHECK(field_of(replace(kMinimal, R"("beta": [1.0])", R"("beta": [-1.0])")) == "drop.beta[0]");
    CHECK(field_of(replace(kMinimal, "}\n}", "},\n \"mc\": {\"channel_draws\": 10}\n}")) == "mc.channel_draws");
    CHECK(field_of(replace(kMinimal, "}\n}", "},\n \"precoder\": \"MMSE\"\n}")) == "precoder");
    CHECK(field_of(replace(kMinimal, "}\n}", "},\n \"targets\": {\"net_b\": 2, \"net_o\": -1}\n}")) ==
          "targets.net_o");
    CHECK_THROWS_AS(load_scenario(kScenarios / "does_not_exist.json"), ValidationError);
}

TEST_CASE("hash changes with content")
{
    const Scenario a = parse_scenario(kMinimal);
    const Scenario b = parse_scenario(replace(kMinimal, R"("rho_u_db": -3)", R"("rho_u_db": -2)"));
    CHECK(scenario_hash(a) != scenario_hash(b));
    // key order and whitespace do not matter
    const Scenario c = parse_scenario(R"({"o_terminal": {"beta_o": 1.0}, "drop": {"beta": [1.0]},
        "system": {"tau_po": 10, "tau_pu": 10, "tau_c": 500, "Mp": 7, "K": 1, "M": 100, "rho_u_db": -3}})");
    CHECK(scenario_hash(a) == scenario_hash(c));
}

TEST_CASE("drop seeds are distinct")
{
    CHECK(drop_seed(1, 0) != drop_seed(1, 1));
    CHECK(drop_seed(1, 0) != drop_seed(2, 0));
    CHECK(drop_seed(5, 3) == drop_seed(5, 3));
}
