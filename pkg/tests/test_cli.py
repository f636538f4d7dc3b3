import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chainwatch.chain import MeasurementChain
from chainwatch.cli import EXIT_CHECK_FAILED, EXIT_DIM_CAP, EXIT_OK, EXIT_USAGE, main
from chainwatch.errors import ConfigError
from chainwatch.report import RunReport, build_run_report, chain_from_config, chain_to_config

from conftest import H_QUARTER, H_SIN2_PI8, PI8, make_random_chain


def write_config(tmp_path, data, name="chain.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run_json(tmp_path, argv):
    out = tmp_path / "out.json"
    code = main(argv + ["--output", str(out)])
    return code, json.loads(out.read_text())


def entropies(report):
    return {c["quantity"]: c for c in report["comparisons"]}


def test_chain_uniform_fixed_point(tmp_path):
    cfg = write_config(tmp_path, {"p": 0.5, "angles": [0.3927]})
    code, report = run_json(tmp_path, ["chain", cfg])
    assert code == EXIT_OK
    rows = entropies(report)
    assert rows["H(X0)"]["closed_form"] == pytest.approx(1.0)
    assert rows["H(X1)"]["closed_form"] == pytest.approx(1.0)


def test_chain_two_rotations(tmp_path):
    cfg = write_config(tmp_path, {"p": 0, "angles": [PI8, PI8]})
    code, report = run_json(tmp_path, ["chain", cfg])
    assert code == EXIT_OK
    rows = entropies(report)
    got = [rows[f"H(X{k})"]["closed_form"] for k in range(3)]
    assert got == pytest.approx([0.0, H_SIN2_PI8, H_QUARTER], abs=1e-12)
    assert report["max_abs_diff"] <= 1e-9


def test_chain_explicit_three_level_single_step(tmp_path):
    cfg = write_config(tmp_path, chain_to_config(make_random_chain(21, 3, 1)))
    code, report = run_json(tmp_path, ["chain", cfg, "--venn"])
    assert code == EXIT_OK
    assert report["max_abs_diff"] <= 1e-9
    assert abs(report["venn"]["region_sum"]) <= 1e-8


def test_chain_reports_identity_violation(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_to_config(make_random_chain(21, 3, 3)))
    code, report = run_json(tmp_path, ["chain", cfg])
    assert code == EXIT_CHECK_FAILED
    worst = max(report["comparisons"], key=lambda c: c["abs_diff"])
    assert worst["abs_diff"] == report["max_abs_diff"] > 1e-9
    assert worst["quantity"] in capsys.readouterr().err


def test_chain_without_oracle(tmp_path):
    cfg = write_config(tmp_path, chain_to_config(make_random_chain(21, 3, 3)))
    code, report = run_json(tmp_path, ["chain", cfg, "--no-oracle"])
    assert code == EXIT_OK
    assert report["max_abs_diff"] is None
    assert all(c["oracle"] is None for c in report["comparisons"])


def test_chain_csv(tmp_path):
    cfg = write_config(tmp_path, {"p": 0.25, "angles": [0.4]})
    out = tmp_path / "out.csv"
    assert main(["chain", cfg, "--format", "csv", "--output", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    by_name = {r["quantity"]: r for r in rows}
    assert float(by_name["P(X0=0)"]["closed_form"]) == 0.25
    assert float(by_name["H(X0)"]["closed_form"]) == pytest.approx(H_QUARTER)


def test_report_round_trip_is_bit_exact(tmp_path):
    chain = make_random_chain(5, 3, 2)
    report = build_run_report(chain, venn=True)
    path = tmp_path / "r.json"
    path.write_text(report.to_json())
    again = RunReport.from_dict(json.loads(path.read_text()))
    assert again.as_dict() == report.as_dict()
    for a, b in zip(again.comparisons, report.comparisons):
        assert a.closed_form.hex() == b.closed_form.hex()
        assert a.oracle.hex() == b.oracle.hex()


def test_reproducible_output_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, chain_to_config(make_random_chain(2, 2, 2)))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["chain", cfg, "--reproducible", "--venn", "-o", str(a)])
    main(["chain", cfg, "--reproducible", "--venn", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert "timestamp" not in json.loads(a.read_text())["metadata"]
    main(["chain", cfg, "-o", str(a)])
    assert "timestamp" in json.loads(a.read_text())["metadata"]


@pytest.mark.parametrize(
    "data",
    [
        {},
        {"p": 0.5, "angles": [0.1], "amplitudes": [[1, 0], [0, 0]]},
        {"p": "half", "angles": []},
        {"p": 1.5, "angles": []},
        {"amplitudes": [[1, 0], [0, 0]], "unitaries": [[[[0.9, 0], [0, 0]], [[0, 0], [1, 0]]]]},
        {"amplitudes": [[1, 0], [1, 0]], "unitaries": []},
        {"amplitudes": [1, 0], "unitaries": []},
        [1, 2],
    ],
)
def test_bad_configs(data, tmp_path):
    with pytest.raises(ConfigError):
        chain_from_config(data)
    assert main(["chain", write_config(tmp_path, data)]) == EXIT_USAGE


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["chain", str(bad)]) == EXIT_USAGE
    assert main(["chain", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_config_round_trip_preserves_chain():
    chain = make_random_chain(9, 3, 2)
    again = chain_from_config(json.loads(json.dumps(chain_to_config(chain))))
    assert np.array_equal(again.preparation.amplitudes, chain.preparation.amplitudes)
    for a, b in zip(again.steps, chain.steps):
        assert np.array_equal(a.u, b.u)


def test_dimension_cap_env(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, {"p": 0.5, "angles": [0.1] * 6})
    monkeypatch.setenv("CHAINWATCH_DIM_CAP", "64")
    assert main(["chain", cfg]) == EXIT_DIM_CAP
    assert main(["chain", cfg, "--no-oracle"]) == EXIT_OK


def test_zeno_single_detector(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeno", "--n", "1", "--p", "1", "-o", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == ["n", "q_simulated", "q_closed_form", "abs_diff"]
    assert float(rows[0]["q_simulated"]) == pytest.approx(0.5, abs=1e-15)
    assert float(rows[0]["q_closed_form"]) == pytest.approx(0.5, abs=1e-15)


def test_zeno_multiple_n_json(tmp_path):
    code, rows = run_json(tmp_path, ["zeno", "--n", "2", "1000", "--format", "json"])
    assert code == EXIT_OK
    assert [r["n"] for r in rows] == [2, 1000]
    assert rows[1]["q_closed_form"] == pytest.approx(0.999383, abs=1e-6)
    assert all(r["abs_diff"] <= 1e-12 for r in rows)


def test_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--theta", "0.3927", "--steps", "2", "--grid", "101", "-o", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "p,H0,H1,H2"
    assert len(lines) == 102
    first = [float(x) for x in lines[1].split(",")]
    assert first[2] == pytest.approx(H_SIN2_PI8, abs=1e-4)


def test_antizeno_json(tmp_path):
    code, data = run_json(tmp_path, ["antizeno", "--n", "5", "--trials", "100000", "--seed", "7"])
    assert code == EXIT_OK
    for key in ("n", "trials", "seed", "sample_mean", "std_error", "theory", "sigmas"):
        assert key in data
    assert data["theory"] == pytest.approx((2 / math.pi) ** 5, abs=1e-15)
    assert data["sigmas"] <= 5


def test_antizeno_threads_do_not_change_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["antizeno", "--n", "3", "--trials", "20000", "--seed", "1", "-o", str(a)])
    main(["antizeno", "--n", "3", "--trials", "20000", "--seed", "1", "--threads", "3", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["zeno", "--n", "0"],
        ["zeno", "--p", "2"],
        ["antizeno"],
        ["antizeno", "--n", "3", "--seed", "-4"],
        ["sweep", "--grid", "1"],
        ["frobnicate"],
    ],
)
def test_bad_flags_exit_with_usage(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_USAGE
    assert "usage:" in capsys.readouterr().err


def test_selftest_prints_one_line_per_check(tmp_path):
    out = tmp_path / "self.txt"
    code = main(["selftest", "--quick", "--chains", "12", "-o", str(out)])
    lines = out.read_text().splitlines()
    assert len(lines) == 11
    assert all(line.startswith(("[PASS]", "[FAIL]")) for line in lines)
    assert code == (EXIT_OK if all(l.startswith("[PASS]") for l in lines) else EXIT_CHECK_FAILED)


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "chainwatch.cli", "zeno", "--n", "2"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert proc.stdout.splitlines()[1].startswith("2,0.75")
