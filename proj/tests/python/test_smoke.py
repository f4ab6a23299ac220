# SPDX-License-Identifier: Apache-2.0
#
# jbb: joint beamforming and broadcasting for massive MIMO downlinks
# ------------------------------------------------------------------------

import math
import pathlib

import pytest

import jbb

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def scenario(name):
    return jbb.load_scenario(str(SCENARIOS / f"{name}.json"))


def test_version_and_scenario_round_trip():
    assert jbb.__version__ == "1.0.0"
    s = scenario("figure_a")
    assert s.name == "figure_a"
    assert (s.M, s.K, s.Mp) == (100, 1, 7)
    again = jbb.parse_scenario(s.to_json())
    assert again == s
    assert again.hash() == s.hash()
    assert len(s.hash()) == 16


def test_gamma_reference():
    assert jbb.gamma_k(1.0, jbb.db_to_linear(-3.0), 10) == pytest.approx(0.8336624691834381, rel=1e-13)


def test_rates_at_reference_point():
    out = jbb.rates(SCENARIOS / "figure_a.json")
    assert out.exit_code == 0
    assert out["meta"]["scenario_hash"] == scenario("figure_a").hash()
    assert out["jbb_prime"]["b"]["net_sum_b"] == pytest.approx(1.9966453375634407, rel=1e-10)
    assert out["jbb_prime"]["o"]["rate_exact"] == pytest.approx(1.6164171672146299, rel=1e-8)
    assert out.csv.startswith("# tool=jbbctl")


def test_operating_points_and_epsilon():
    p = jbb.operating_points(scenario("figure_a"))
    assert p["jbb_prime"]["found"] and p["oa"]["found"]
    assert 10 * math.log10(p["jbb_prime"]["rho_d"]) == pytest.approx(7.3, abs=0.15)
    assert p["epsilon"] == pytest.approx(0.45, abs=0.02)
    assert p["saving_db"] == pytest.approx(3.2, abs=0.3)

    m = jbb.optimize_epsilon(scenario("figure_a"), p["oa"]["rho_b"], p["oa"]["rho_o"])
    assert m["feasible"]
    energy = (1 - m["epsilon"]) * m["rho_b_oa"] + m["epsilon"] * m["rho_o_oa"]
    assert energy == pytest.approx(p["oa"]["rho_d"], rel=1e-9)


def test_net_rates_on_the_b_curve():
    p = jbb.operating_points(scenario("figure_a"))["jbb_prime"]
    r = jbb.net_rates(scenario("figure_a"), p["rho_b"], p["rho_o"])
    assert r["net_b"] == pytest.approx(2.0, abs=1e-6)
    assert r["net_o"] == pytest.approx(0.75, abs=1e-5)
    assert r["net_o_bound"] < r["net_o"]


def test_monte_carlo_twin():
    s = scenario("figure_a")
    exact = jbb.o_rate_exact(s, 5.0, 0.4)
    mean, se = jbb.sample_o_rate(s, 5.0, 0.4, 50000, seed=3, threads=2)
    assert abs(mean - exact) < 4 * se
    assert jbb.sample_o_rate(s, 5.0, 0.4, 50000, seed=3, threads=1) == (mean, se)


def test_sweep_and_table1():
    sw = jbb.sweep(SCENARIOS / "figure_e2.json")
    assert sw.exit_code == 0
    assert [r["rho_u_db"] for r in sw["rows"]] == sorted(r["rho_u_db"] for r in sw["rows"])
    t = jbb.table1([SCENARIOS / "figure_a.json", scenario("figure_e1")])
    assert len(t["rows"]) == 4


def test_validation_errors():
    text = (SCENARIOS / "figure_a.json").read_text().replace('"M": 100', '"M": 0')
    with pytest.raises(ValueError, match=r"system\.M"):
        jbb.parse_scenario(text)
    with pytest.raises(ValueError, match=r"system\.K"):
        jbb.parse_scenario('{"system": {"M": 10}}')
    with pytest.raises(jbb.ValidationError):
        jbb.load_scenario(str(SCENARIOS / "nope.json"))


def test_cli_in_process():
    code, out, err = jbb.run_cli(["rates", "--scenario", str(SCENARIOS / "figure_a.json"), "--format", "csv"])
    assert code == 0 and err == ""
    assert out.splitlines()[1] == "scheme,quantity,value"
    code, out, err = jbb.run_cli(["rates", "--scenario", str(SCENARIOS / "nope.json")])
    assert code == 2 and out == "" and "nope.json" in err
