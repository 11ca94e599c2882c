import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hdl import fixture_path
from hdl.cli import dumps, main, parse_config, UsageError
from hdl.linalg_core import matrix_to_json, random_unitary


def run_cli(*argv, env=None):
    """Run the CLI in a subprocess; returns (exit code, stderr)."""
    proc = subprocess.run([sys.executable, "-m", "hdl.cli", *map(str, argv)],
                          capture_output=True, text=True, env=env)
    return proc.returncode, proc.stderr


def test_gen_povm_then_dilate(tmp_path):
    povm = tmp_path / "povm.json"
    assert main(["--cmd", "gen-povm", "--seed", "7", "--dim", "2", "--atoms", "3", "--out", str(povm)]) == 0
    out = tmp_path / "dil.json"
    assert main(["--cmd", "dilate", "--in", str(povm), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["compression_residual"] < 1e-9 and rep["pass"]


def test_dilate_minimal(tmp_path):
    povm = tmp_path / "povm.json"
    main(["--cmd", "gen-povm", "--seed", "3", "--dim", "3", "--atoms", "4", "--out", str(povm)])
    out = tmp_path / "dil.json"
    assert main(["--cmd", "dilate", "--in", str(povm), "--minimal", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["minimal"] is True


def test_verify_identity_full_space(tmp_path):
    out = tmp_path / "id.json"
    assert main(["--cmd", "verify-identity", "--seed", "1", "--dim", "5", "--full-space", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["certificate"]["max_identity_residual"] < 1e-12


def test_verify_identity_from_file(tmp_path, rng):
    U = random_unitary(4, rng)
    src = tmp_path / "uk.json"
    src.write_text(json.dumps({"U": matrix_to_json(U), "K": matrix_to_json(np.eye(4)[:, :2])}))
    out = tmp_path / "id.json"
    assert main(["--cmd", "verify-identity", "--in", str(src), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["k"] == 2 and rep["measure_residual"] < 1e-10


def test_clark_fixture_csv(tmp_path):
    out = tmp_path / "clark.json"
    assert main(["--cmd", "clark", "--in", str(fixture_path()), "--alpha-grid", "8", "--out", str(out)]) == 0
    with open(out.with_suffix(".csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 16
    by_alpha = {}
    for r in rows:
        by_alpha.setdefault(r["alpha_theta"], []).append(float(r["mass"]))
    assert len(by_alpha) == 8
    for masses in by_alpha.values():
        np.testing.assert_allclose(masses, [0.5, 0.5], atol=1e-10)


def test_clark_seeded_defect_two(tmp_path):
    out = tmp_path / "clark.json"
    assert main(["--cmd", "clark", "--seed", "4", "--dim", "6", "--subdim", "2",
                 "--alpha-grid", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["defect_index"] == 2 and len(rep["reports"]) == 3


def test_perturbed_dilation_exit_one(tmp_path):
    povm = tmp_path / "povm.json"
    main(["--cmd", "gen-povm", "--seed", "7", "--dim", "2", "--atoms", "3", "--out", str(povm)])
    out = tmp_path / "dil.json"
    code, err = run_cli("--cmd", "dilate", "--in", povm, "--perturb", "1e-3", "--out", out)
    assert code == 1
    assert str(out) in err
    assert not json.loads(out.read_text())["report"]["pass"]


def test_malformed_json_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2,\n  "atoms": [}')
    out = tmp_path / "never.json"
    code, err = run_cli("--cmd", "dilate", "--in", bad, "--out", out)
    assert code == 2
    assert "bad.json:2:" in err
    assert not out.exists()


def test_invalid_povm_exit_two(tmp_path):
    src = tmp_path / "p.json"
    src.write_text(json.dumps({"dim": 1, "kind": "povm",
                               "atoms": [{"theta": 0.0, "weight": matrix_to_json(np.eye(1) * 2)}]}))
    out = tmp_path / "o.json"
    assert main(["--cmd", "dilate", "--in", str(src), "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_input_exit_two(tmp_path):
    out = tmp_path / "o.json"
    assert main(["--cmd", "dilate", "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["--cmd", "nope", "--out", "x"],
    ["--cmd", "verify-identity", "--dim", "3", "--subdim", "3", "--out", "x"],
    ["--cmd", "clark", "--tol.gap", "-1", "--out", "x"],
    ["--cmd", "clark", "--tol.unknown=1e-3", "--out", "x"],
    ["--cmd", "clark", "--z-radii", "0.5,1.0", "--out", "x"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_config(argv)


def test_tolerance_flags_both_forms():
    args = parse_config(["--cmd", "clark", "--tol.gap=1e-6", "--tol.det", "1e-7", "--out", "x"])
    assert args.tolerances["gap"] == 1e-6 and args.tolerances["det"] == 1e-7


def test_tight_tolerance_exit_one(tmp_path):
    out = tmp_path / "id.json"
    code = main(["--cmd", "verify-identity", "--seed", "2", "--dim", "6", "--tol.identity=1e-30",
                 "--out", str(out)])
    assert code == 1 and out.exists()


def test_dumps_formatting():
    assert dumps({"a": 0.1, "b": [1, 2.5], "c": float("nan"), "d": True}) == (
        '{\n  "a": 0.10000000000000001,\n  "b": [1, 2.5],\n  "c": null,\n  "d": true\n}')


def _outputs(tmp_path, tag, env=None):
    d = tmp_path / tag
    d.mkdir()
    run_cli("--cmd", "clark", "--seed", "5", "--dim", "7", "--subdim", "2", "--alpha-grid", "4",
            "--out", d / "c.json", env=env)
    run_cli("--cmd", "verify-identity", "--seed", "5", "--dim", "7", "--subdim", "3",
            "--out", d / "v.json", env=env)
    return [(d / name).read_bytes() for name in ("c.json", "c.csv", "v.json")]


def test_determinism_byte_identical(tmp_path):
    assert _outputs(tmp_path, "a") == _outputs(tmp_path, "b")


def test_thread_count_does_not_change_output(tmp_path):
    env = dict(os.environ, HDL_THREADS="4")
    assert _outputs(tmp_path, "serial") == _outputs(tmp_path, "threaded", env=env)
