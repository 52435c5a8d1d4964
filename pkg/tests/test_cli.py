import io
import json
import math

import numpy as np
import pytest

from opspace import cli


def call(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), stdout=buf)
    text = buf.getvalue()
    return code, (json.loads(text) if text and not text.startswith(("instance", "anchor")) else text)


def test_gaussian_constant():
    code, rep = call("khintchine", "gaussian-const", "--p", "4")
    assert code == 0
    row = rep["results"][0]
    assert row["constant"] == pytest.approx(3**0.25)
    assert row["pairing_mass"] == 3.0
    man = rep["manifest"]
    for key in ("subcommand", "parameters", "seed", "tolerance", "version", "max_dim", "wall_clock_s"):
        assert key in man
    assert man["wall_clock_s"] is None


def test_mobius_sum_abs():
    code, rep = call("mobius", "--n", "4", "--sum-abs")
    assert code == 0 and rep["results"][0]["sum_abs"] == 24


def test_burkholder_example():
    code, rep = call("burkholder", "--p", "4", "--levels", "3", "--dim", "2", "--seed", "7", "--instances", "200")
    assert code == 0
    assert len(rep["results"]) == 200
    bound = math.sqrt(2) + math.sqrt(3)
    assert all(max(r["ratio_xy"], r["ratio_yx"]) <= bound + 1e-6 for r in rep["results"])
    assert rep["violations"] == []


def test_deterministic_under_seed():
    a = call("fuzz", "--campaign", "holder", "--seed", "3", "--instances", "5")
    b = call("fuzz", "--campaign", "holder", "--seed", "3", "--instances", "5")
    assert a == b


@pytest.mark.parametrize("campaign", sorted(cli.CAMPAIGNS))
def test_fuzz_campaigns_clean(campaign):
    code, rep = call("fuzz", "--campaign", campaign, "--instances", "5", "--seed", "1")
    assert code == 0, rep
    assert len(rep["results"]) == 5


@pytest.mark.parametrize(
    "argv",
    [
        ("norms", "--p", "4", "--instances", "2"),
        ("dualdoob", "--m", "2", "--instances", "2"),
        ("stein", "--m", "1", "--instances", "2"),
        ("rosenthal", "--p", "4", "--instances", "2"),
        ("hilbert", "--p", "4", "--instances", "2"),
        ("lpaley", "--p", "4", "--instances", "2"),
        ("khintchine", "rademacher", "--p", "4", "--instances", "2"),
        ("khintchine", "free", "--p", "8"),
        ("khintchine", "q-gaussian", "--p", "6", "--q", "0.5"),
        ("randmat", "exact", "--p", "6", "--n", "2"),
        ("randmat", "constant", "--p", "4", "--n", "3"),
        ("randmat", "mc", "--p", "4", "--n", "4", "--samples", "5000"),
        ("mobius", "--n", "4", "--instances", "2"),
        ("lacunary", "--p", "4", "--E", "1,3,9"),
        ("cb-limit", "--m-max", "3", "--n", "2"),
        ("nc-burkholder4", "--n", "2", "--instances", "2"),
    ],
)
def test_subcommands_run(argv):
    code, rep = call(*argv)
    assert code == 0, rep
    assert rep["results"]


def test_randmat_exact_value():
    code, rep = call("randmat", "exact", "--p", "6", "--n", "2")
    assert rep["results"][0]["moment"] == pytest.approx(5.25)


def test_invalid_input_exit_codes():
    assert call("norms", "--p", "3")[0] == 2
    assert call("khintchine", "q-gaussian", "--p", "4")[0] == 2
    assert call("norms", "--instances", "0")[0] == 2
    assert call("nosuchcommand")[0] == 2


def test_dimension_guard_exit_code():
    code, _ = call("norms", "--p", "8", "--dim", "3", "--max-dim", "100")
    assert code == 3
    import os

    assert "OPSPACE_MAX_DIM" not in os.environ


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    code, text = call("norms", "--instances", "3", "--format", "csv", "--out", str(out))
    assert code == 0
    assert text.count("\r\n") == 4
    assert out.read_bytes().decode() == text


def test_json_input(tmp_path):
    b = np.diag([2.0, 1.0])
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"kind": "field", "values": [b.tolist()], "weights": [1.0]}))
    code, rep = call("norms", "--p", "4", "--input", str(path))
    assert code == 0 and rep["results"][0]["norm"] == pytest.approx(2.0)
    blocks = np.zeros((2, 2, 1, 1))
    blocks[0, 0] = blocks[1, 1] = 1.0
    path.write_text(json.dumps({"kind": "nc", "blocks": blocks.tolist()}))
    code, rep = call("norms", "--p", "4", "--input", str(path))
    assert code == 0 and rep["results"][0]["norm"] == pytest.approx(1.0)


def test_timing_flag():
    code, rep = call("mobius", "--n", "3", "--sum-abs", "--timing")
    assert isinstance(rep["manifest"]["wall_clock_s"], float)
