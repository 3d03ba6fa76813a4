import csv
import io
import json

import pytest

from myopic.cli import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, cmd_verify, fmt, main
from myopic.scenario import load_scenario, preset


def write(tmp_path, body, name="scenario.json"):
    path = tmp_path / name
    path.write_text(body if isinstance(body, str) else json.dumps(body))
    return path


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


EQUAL_TWOHOP = {
    "positions": [0, 1, 2, 3, 4], "powers": [1, 1, 1, 1], "noises": [1, 1, 1, 1],
    "k": 2, "split": {"named": {"alpha1": 0, "alpha2": 0, "alpha3": 0}},
}


def test_rate_twohop_example(tmp_path, capsys):
    assert main(["rate", "--scenario", str(write(tmp_path, EQUAL_TWOHOP))]) == EXIT_OK
    rows = {int(r["t"]): r for r in table(capsys.readouterr().out)}
    assert float(rows[3]["rate"]) == pytest.approx(0.58496, abs=1e-5)
    assert float(rows[5]["rate"]) == pytest.approx(0.523102, abs=1e-6)
    assert sum(int(r["bottleneck"]) for r in rows.values()) == 1


def test_rate_two_nodes(tmp_path, capsys):
    scenario = {"positions": [0, 1], "powers": [1], "noises": [1],
                "split": {"matrix": [[1.0]]}}
    assert main(["rate", "--scenario", str(write(tmp_path, scenario))]) == EXIT_OK
    rows = table(capsys.readouterr().out)
    assert len(rows) == 1
    assert rows[0]["rate"] == "0.5"


def test_rate_json(tmp_path, capsys):
    assert main(["rate", "--scenario", str(write(tmp_path, EQUAL_TWOHOP)),
                 "--format", "json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["k"] == 2 and len(body["nodes"]) == 4
    assert body["nodes"][1]["interference_layers"] == []


def test_malformed_json_exit_2_without_output(tmp_path, capsys):
    assert main(["rate", "--scenario", str(write(tmp_path, "{not json"))]) == EXIT_USAGE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "malformed" in captured.err


def test_rate_without_split(tmp_path, capsys):
    body = dict(EQUAL_TWOHOP)
    del body["split"]
    assert main(["rate", "--scenario", str(write(tmp_path, body))]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("patch", [
    {"colour": "blue"},
    {"optimizer": {"resolution": 0.1, "speed": 3}},
    {"split": {"named": {"alpha1": 0, "beta1": 0.1}}},
    {"positions": [0, 0, 2, 3, 4]},
    {"k": 7},
    {"split": {"matrix": [[0.5, 0.6, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}},
])
def test_bad_scenarios_exit_2(tmp_path, capsys, patch):
    body = dict(EQUAL_TWOHOP, **patch)
    assert main(["rate", "--scenario", str(write(tmp_path, body))]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_preset_and_scenario_are_exclusive(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["rate", "--preset", "equal_spacing_5", "--scenario", "x.json"])
    assert exc.value.code == 2


def test_unknown_preset(capsys):
    assert main(["optimize", "--preset", "nowhere"]) == EXIT_USAGE
    assert "unknown preset" in capsys.readouterr().err


def _summary(text):
    block = text.strip().split("\n\n")[-1]
    return {r["key"]: r["value"] for r in table(block)}


@pytest.mark.parametrize("name,zero", [
    ("equal_spacing_5", ("alpha1", "beta1", "gamma1", "beta2")),
    ("node2_close_5", ("alpha1", "beta1", "alpha2", "beta2")),
])
def test_optimize_named_findings(capsys, name, zero):
    assert main(["optimize", "--preset", name]) == EXIT_OK
    summary = _summary(capsys.readouterr().out)
    assert summary["method"] in ("grid_then_refined", "refined")
    for key in zero:
        assert float(summary[key]) <= 0.05, key


def test_optimize_json_two_nodes(tmp_path, capsys):
    scenario = {"positions": [0, 2], "powers": [3], "noises": [0.5]}
    assert main(["optimize", "--scenario", str(write(tmp_path, scenario)),
                 "--format", "json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["split"] == [[1.0]]
    assert body["end_to_end"] == pytest.approx(0.5 * __import__("math").log2(1 + 0.75 / 0.5))


def test_optimize_budget_exit_3(capsys):
    code = main(["optimize", "--preset", "equal_spacing_5", "--resolution", "0.05",
                 "--budget", "1000"])
    assert code == EXIT_BUDGET
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "1000" in captured.err


def test_optimize_out_file(tmp_path, capsys):
    out = tmp_path / "opt.csv"
    assert main(["optimize", "--preset", "equal_spacing_5", "--k", "2", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert "alpha3" in out.read_text()


def sweep_scenario(tmp_path, values):
    body = {"positions": [0, 0.5, 2, 3, 4], "powers": [1] * 4, "noises": [1] * 4,
            "sweep": {"parameter": "power_all", "values": values}}
    return str(write(tmp_path, body))


def test_sweep_nesting_and_low_snr_gap(tmp_path, capsys):
    assert main(["sweep", "--scenario", sweep_scenario(tmp_path, [0.01, 0.1, 1, 10])]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == ("value,rate_k1,rate_k2,rate_k3,rate_omniscient,"
                                    "bottleneck_k1,bottleneck_k2,bottleneck_k3,"
                                    "bottleneck_omniscient")
    rows = table(text)
    assert [r["value"] for r in rows] == ["0.01", "0.1", "1", "10"]
    for r in rows:
        rates = [float(r[c]) for c in ("rate_k1", "rate_k2", "rate_k3", "rate_omniscient")]
        assert rates == sorted(rates)

    def gap(r):
        return (float(r["rate_omniscient"]) - float(r["rate_k2"])) / float(r["rate_omniscient"])

    assert gap(rows[0]) < gap(rows[-1])


def test_sweep_single_value(tmp_path, capsys):
    assert main(["sweep", "--scenario", sweep_scenario(tmp_path, [2.0])]) == EXIT_OK
    assert len(table(capsys.readouterr().out)) == 1


def test_sweep_empty_values(tmp_path, capsys):
    assert main(["sweep", "--scenario", sweep_scenario(tmp_path, [])]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_sweep_without_spec(tmp_path, capsys):
    assert main(["sweep", "--scenario", str(write(tmp_path, EQUAL_TWOHOP))]) == EXIT_USAGE


def test_schedule_text_and_json(capsys):
    assert main(["schedule", "-T", "5", "--k", "2", "-B", "10", "--last", "2"]) == EXIT_OK
    text = capsys.readouterr().out
    assert [c.strip() for c in text.splitlines()[0].split("|")] == ["node", "b=1", "b=2"]
    assert main(["schedule", "-T", "5", "--k", "2", "-B", "10", "--format", "json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["effective_rate_factor"] == "10/13"
    assert body["total_blocks"] == 13
    windows = {(w["node"], w["message"]): (w["first"], w["last"]) for w in body["decode_window"]}
    assert windows[3, 4] == (4, 5)


def test_schedule_bad_range(capsys):
    assert main(["schedule", "-T", "5", "--k", "2", "-B", "3", "--last", "99"]) == EXIT_USAGE
    assert main(["schedule", "-T", "5", "--k", "9", "-B", "3"]) == EXIT_USAGE


def test_verify_passes_and_is_deterministic(capsys):
    assert main(["verify", "--preset", "equal_spacing_5", "--trials", "1000"]) == EXIT_OK
    first = capsys.readouterr().out
    summary = {r["key"]: r["value"] for r in table(first)}
    assert summary["status"] == "pass" and float(summary["max_rel_error"]) < 1e-9
    assert main(["verify", "--preset", "equal_spacing_5", "--trials", "1000"]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_verify_zero_trials(capsys):
    assert main(["verify", "--preset", "equal_spacing_5", "--trials", "0"]) == EXIT_USAGE


def test_verify_failure_dumps_scenario(tmp_path, monkeypatch):
    import myopic.cli as cli

    monkeypatch.setattr(cli, "VERIFY_TOL", -1.0)
    text, code, failing = cmd_verify(preset("equal_spacing_5", k=2), 5, 0)
    assert code == EXIT_VERIFY and "fail" in text
    dump = tmp_path / "fail.json"
    assert main(["verify", "--preset", "equal_spacing_5", "--k", "2", "--trials", "5",
                 "--dump", str(dump)]) == EXIT_VERIFY
    again = load_scenario(dump)
    assert again.k == 2
    assert again.split == failing.split


def test_fmt_twelve_significant_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(123456.7890123456) == "123456.789012"
    assert fmt(True) == "1" and fmt(7) == "7"
