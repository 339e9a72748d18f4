import json
import subprocess
import sys

import pytest

from tolltrees.cli import run
from tolltrees.tolls import TOLL_REGISTRY
from tolltrees.trees import parse_tree


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_count(capsys):
    code, out, _ = _run(capsys, "count", "--model", "dary:2", "--n", "4")
    assert code == 0 and out == "24\n"
    code, out, _ = _run(capsys, "count", "--model", "port", "--n", "5", "--format", "json")
    doc = json.loads(out)
    assert doc["count"] == 105 and doc["schema_version"] == 1


def test_constants_text_and_json(capsys):
    code, out, _ = _run(capsys, "constants", "--model", "dary:2", "--toll", "fringe-size:k=1")
    assert code == 0
    lines = dict(line.split(" = ", 1) for line in out.strip().splitlines())
    assert float(lines["mu"]) == pytest.approx(1 / 3, abs=1e-12)
    assert float(lines["sigma2"]) == pytest.approx(2 / 45, abs=1e-12)
    code, out, _ = _run(capsys, "constants", "--model", "port", "--toll", "leaf", "-K", "4",
                        "--format", "json")
    doc = json.loads(out)
    assert set(doc["sigma2_variants"]) >= {"plus-unscaled", "minus-unscaled", "plus-scaled", "minus-scaled"}


def test_generate_is_reproducible_and_parseable(capsys, tmp_path):
    args = ["generate", "--model", "gport:1/2", "--n", "30", "--count", "3", "--seed", "42"]
    code, a, _ = _run(capsys, *args)
    code2, b, _ = _run(capsys, *args)
    assert code == code2 == 0 and a == b
    trees = [parse_tree(line) for line in a.strip().splitlines()]
    assert [t.n for t in trees] == [30, 30, 30]


def test_random_commands_require_seed(capsys):
    code, _, err = _run(capsys, "generate", "--model", "dary:2", "--n", "5")
    assert code == 2 and "--seed" in err
    code, _, err = _run(capsys, "simulate", "--model", "dary:2", "--toll", "leaf", "--n", "5")
    assert code == 2


def test_enumerate(capsys):
    code, out, _ = _run(capsys, "enumerate", "--model", "dary:3", "--n", "3")
    assert code == 0 and len(out.strip().splitlines()) == 15


def test_mean_exact(capsys):
    code, out, _ = _run(capsys, "mean-exact", "--model", "dary:2", "--toll", "leaf", "--n", "9",
                        "--format", "json")
    assert json.loads(out)["mean"] == pytest.approx(10 / 3)


def test_simulate_output_files_are_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        code = run(["simulate", "--model", "dary:2", "--toll", "leaf", "--n", "200",
                    "--samples", "2000", "--seed", "7", "--format", "json", "--output", str(path),
                    "--values-csv", str(tmp_path / f"v{i}.csv")])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["seed"] == 7 and doc["stats"]["seed_manifest"]
    assert (tmp_path / "v0.csv").read_bytes() == (tmp_path / "v1.csv").read_bytes()


def test_simulate_gate_exit_code(capsys):
    # 40 samples of a tiny tree cannot pass a 1e-6 KS gate
    code, _, _ = _run(capsys, "simulate", "--model", "dary:2", "--toll", "leaf", "--n", "20",
                      "--samples", "40", "--seed", "1", "--gate", "--ks-tol", "1e-6")
    assert code == 1


def test_verify_commands(capsys):
    assert _run(capsys, "verify", "count", "--d", "3", "--n", "5")[0] == 0
    assert _run(capsys, "verify", "probability", "--alpha", "1/2", "--n", "5")[0] == 0
    assert _run(capsys, "verify", "mean", "--model", "port", "--toll", "orbits", "--n", "5")[0] == 0
    assert _run(capsys, "verify", "relabel", "--toll", "shape", "--size-cutoff", "4")[0] == 0
    code, out, _ = _run(capsys, "verify", "uniformity", "--d", "2", "--n", "4", "--samples",
                        "20000", "--seed", "3")
    assert code == 0 and out.startswith("pass")


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "dary:3", "n": 4}))
    code, out, _ = _run(capsys, "count", "--config", str(cfg))
    assert out == "105\n"  # 1*3*5*7
    code, out, _ = _run(capsys, "count", "--config", str(cfg), "--n", "3")
    assert out == "15\n"


def test_usage_errors(capsys):
    assert _run(capsys, "count", "--model", "dary:1", "--n", "3")[0] == 2
    assert _run(capsys, "constants", "--toll", "no-such-toll")[0] == 2
    assert _run(capsys, "enumerate", "--model", "dary:2", "--n", "30")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2
    code, _, err = _run(capsys, "count", "--n", "3", "--format", "csv", "--model", "recursive")
    assert code == 0


def test_help_lists_registries():
    proc = subprocess.run([sys.executable, "-m", "tolltrees", "--help"], capture_output=True,
                          text=True, check=True)
    for name in TOLL_REGISTRY:
        assert name in proc.stdout
    for model in ("dary:<d>", "gport:<alpha>", "port", "recursive"):
        assert model in proc.stdout
    assert "k: int >= 1" in proc.stdout
