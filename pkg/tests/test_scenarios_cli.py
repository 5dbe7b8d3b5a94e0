import json

import pytest

from metamap.cli import main
from metamap.families import DEFAULT_EPS_LIST
from metamap.scenarios import (ScenarioError, critical_denominator_lcm,
                               load_scenario, suggested_grid_n)

FAMILY_A_JSON = {
    "name": "family-a-from-file",
    "boundary": "1/2",
    "lebesgue_halves": True,
    "branches": [
        {"domain": ["0", "1/6"], "slope": 3, "intercept": 0},
        {"domain": ["1/6", "1/3"], "slope": 3, "intercept": "-1/2", "intercept_eps": 3},
        {"domain": ["1/3", "1/2"], "slope": -3, "intercept": "3/2"},
        {"domain": ["1/2", "2/3"], "slope": -3, "intercept": "5/2"},
        {"domain": ["2/3", "5/6"], "slope": 3, "intercept": "-3/2", "intercept_eps": -1},
        {"domain": ["5/6", "1"], "slope": 3, "intercept": -2},
    ],
    "holes": [
        {"location": "1/3", "a": 1, "b": 0},
        {"location": "2/3", "a": 0, "b": "1/3"},
    ],
    "eps_list": [0.02, 0.01],
    "grid_n": 384,
}


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_builtin_family_a_defaults():
    scn = load_scenario("builtin:family_a")
    assert scn.kind == "family"
    assert scn.grid_n == 3840
    assert scn.eps_list == DEFAULT_EPS_LIST
    assert scn.run_second_eigenpair and scn.run_escape_rates and scn.run_saltus
    assert scn.family.lebesgue_halves


def test_builtin_markov_routes_to_markov_kind():
    scn = load_scenario("builtin:markov2")
    assert scn.kind == "markov"
    assert scn.markov_pairs == ((0.01, 0.03),)


def test_builtin_unknown_name():
    with pytest.raises(ScenarioError):
        load_scenario("builtin:nope")


def test_load_scenario_file_round_trip(tmp_path):
    scn = load_scenario(write_scenario(tmp_path, FAMILY_A_JSON))
    fam = scn.family
    assert scn.name == "family-a-from-file"
    assert len(fam.base.branches) == 6
    assert fam.base.branches[1].intercept == pytest.approx(-0.5)
    assert fam.intercept_eps == (0, 3, 0, 0, -1, 0)
    assert fam.hole_coefficients[1][2] == pytest.approx(1 / 3)
    assert scn.eps_list == (0.02, 0.01)
    assert scn.grid_n == 384


def test_grid_rule_warnings(tmp_path):
    data = dict(FAMILY_A_JSON, grid_n=100)
    scn = load_scenario(write_scenario(tmp_path, data))
    assert any("multiple" in w for w in scn.warnings)
    data = dict(FAMILY_A_JSON, grid_n=384)
    scn = load_scenario(write_scenario(tmp_path, data))
    assert any("12/min(eps)" in w for w in scn.warnings)


def test_missing_file():
    with pytest.raises(ScenarioError) as err:
        load_scenario("/nonexistent/path.json")
    assert "not found" in str(err.value)


def test_invalid_json_cites_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  bad\n}')
    with pytest.raises(ScenarioError) as err:
        load_scenario(str(path))
    assert "line 3" in str(err.value)


def test_overlapping_branch_domains_cite_branches(tmp_path):
    data = dict(FAMILY_A_JSON)
    data["branches"] = [
        {"domain": ["0", "0.6"], "slope": 1.5, "intercept": 0},
        {"domain": ["0.5", "1"], "slope": 2, "intercept": -1},
    ]
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_scenario(tmp_path, data))
    assert "tile" in str(err.value)


def test_bad_rational_cites_field(tmp_path):
    data = dict(FAMILY_A_JSON)
    data["boundary"] = "1/0"
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_scenario(tmp_path, data))
    assert "boundary" in str(err.value)


def test_missing_required_fields(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_scenario(tmp_path, {"name": "x"}))
    msg = str(err.value)
    assert "branches" in msg and "boundary" in msg


def test_suggested_grid_rule(fam_a):
    assert critical_denominator_lcm(fam_a.base) == 6
    assert suggested_grid_n(fam_a, [0.02, 0.01]) == 1200
    assert suggested_grid_n(fam_a, [0.0025]) == 4800


def test_cli_markov(capsys):
    assert main(["markov", "--eps-lr", "0.01", "--eps-rl", "0.03"]) == 0
    out = capsys.readouterr().out
    assert "alpha = 0.75" in out
    assert "rho = 0.96" in out


def test_cli_markov_domain_error(capsys):
    assert main(["markov", "--eps-lr", "-1", "--eps-rl", "0.03"]) == 1


def test_cli_validate_family_b(capsys):
    assert main(["validate", "--scenario", "builtin:family_b"]) == 0
    out = capsys.readouterr().out
    assert "P2: FAIL" in out
    assert "I4a: pass" in out


def test_cli_run_small_scenario_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    argv = ["run", "--scenario", "builtin:family_a", "--eps", "0.02,0.01",
            "--grid", "192", "--out"]
    assert main(argv + [str(out1)]) == 0
    assert main(argv + [str(out2)]) == 0
    names = sorted(p.name for p in out1.iterdir())
    assert "sweep.csv" in names and "sweep.json" in names
    assert "density_0.02.csv" in names and "density_0.01.csv" in names
    assert "saltus_0.01.csv" in names
    assert "hypotheses.txt" in names
    assert {"densities.svg", "l1_vs_eps.svg", "rho_vs_eps.svg"} <= set(names)
    sweep = (out1 / "sweep.csv").read_text()
    assert len(sweep.splitlines()) == 3      # header + one row per eps
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_cli_run_family_b_reports_boundary_warning(tmp_path):
    out = tmp_path / "famb"
    code = main(["run", "--scenario", "builtin:family_b", "--eps", "0.01",
                 "--grid", "192", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "sweep.json").read_text())
    row_warnings = payload["rows"][0]["warnings"]
    assert any("touches the boundary" in w for w in row_warnings)
    assert payload["hypotheses"]["P2"] is False


def test_cli_run_failed_rows_exit_2(tmp_path):
    # eps = 0.2 breaks the branch-image invariant, so its row fails
    code = main(["run", "--scenario", "builtin:family_a", "--eps", "0.2",
                 "--grid", "192", "--out", str(tmp_path / "bad")])
    assert code == 2
    sweep = (tmp_path / "bad" / "sweep.csv").read_text().splitlines()
    assert "escapes" in sweep[1]


def test_cli_run_unwritable_out_dir(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    code = main(["run", "--scenario", "builtin:family_a", "--eps", "0.02",
                 "--grid", "192", "--out", str(blocker / "sub")])
    assert code == 1


def test_cli_unknown_builtin_exit_1(capsys):
    assert main(["run", "--scenario", "builtin:zzz", "--out", "/tmp/x"]) == 1
    assert "unknown builtin" in capsys.readouterr().err


def test_cli_jobs_flag_matches_serial(tmp_path):
    argv = ["run", "--scenario", "builtin:family_a", "--eps", "0.02,0.01",
            "--grid", "192", "--out"]
    serial, parallel = tmp_path / "s", tmp_path / "p"
    assert main(argv + [str(serial)]) == 0
    assert main(argv + [str(parallel), "--jobs", "2"]) == 0
    assert (serial / "sweep.csv").read_bytes() == (parallel / "sweep.csv").read_bytes()
