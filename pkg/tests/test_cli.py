"""CLI verbs: exit codes, file outputs, determinism, error JSON."""

import json

import numpy as np
import pytest

from waverg import FilterPair, Harmonic, flow
from waverg.cli import main


@pytest.fixture(scope="module")
def pair_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "pair.json"
    assert main(["design", "--dispersion", "harmonic:m=0",
                 "--K", "2", "--L", "2", "--out", str(path)]) == 0
    return str(path)


def test_design_writes_loadable_pair(tmp_path, capsys):
    out = tmp_path / "p.json"
    rep = tmp_path / "r.json"
    code = main(["design", "--dispersion", "harmonic:m=0", "--K", "1",
                 "--L", "1", "--out", str(out), "--report", str(rep)])
    assert code == 0
    pair = FilterPair.load(out)
    assert pair.pr_residual < 1e-8
    d = json.loads(rep.read_text())
    assert d["K"] == 1 and d["L"] == 1
    assert {"epsilon", "pr_residual", "stability_max_abs_eig",
            "positivity_min"} <= set(d)
    assert "designed K=1 L=1" in capsys.readouterr().out


def test_design_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["design", "--K", "2", "--L", "1", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_grid_row_count(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--K", "1..3", "--L", "1..5",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "K,L,epsilon,pr_residual,stability_max_abs_eig,positivity_min"
    assert len(lines) == 1 + 15
    # epsilon decreases along L for K = 2 where the design succeeds; at L = 5
    # the factorization target goes negative for K >= 2 and the row is a
    # diagnosed nan, never a silent bad pair
    eps = {tuple(map(int, l.split(",")[:2])): float(l.split(",")[2])
           for l in lines[1:]}
    for L in (1, 2, 3):
        assert eps[(2, L + 1)] < eps[(2, L)]
    assert np.isnan(eps[(2, 5)])


def test_sweep_combined_specifier(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--sweep", "K=1..2,L=1..2", "--out", str(out)]) == 0
    assert len(out.read_text().strip().splitlines()) == 1 + 4


def test_circuit_verb(tmp_path, pair_file, capsys):
    out = tmp_path / "circ.json"
    assert main(["circuit", "--in", pair_file, "--out", str(out),
                 "--verify"]) == 0
    txt = capsys.readouterr().out
    assert "depth=6" in txt
    res = float(txt.split("round_trip_residual=")[1].split()[0])
    assert res < 1e-10
    circ = json.loads(out.read_text())
    assert circ["M"] == 6
    assert all(g["parity"] in ("even", "odd") for g in circ["gates"])


def test_simulate_divisibility_usage_error(pair_file, capsys):
    code = main(["simulate", "--pair", pair_file, "--layers", "3",
                 "--N", "100", "--dispersion", "harmonic:m=0"])
    assert code == 1
    assert "divisible" in capsys.readouterr().err


def test_simulate_outputs(tmp_path, pair_file):
    rep = tmp_path / "err.json"
    csvf = tmp_path / "corr.csv"
    code = main(["simulate", "--pair", pair_file, "--layers", "3",
                 "--N", "128", "--dispersion", "harmonic:m=0",
                 "--report", str(rep), "--csv", str(csvf),
                 "--quad-points", "8192"])
    assert code == 0
    d = json.loads(rep.read_text())
    assert d["dominated"] is True
    assert d["delta_p"] < 0.1
    lines = csvf.read_text().strip().splitlines()
    assert lines[0] == ("n,m,exact_p,mera_p,exact_q_reg,mera_q_reg,"
                       "abs_err_p,abs_err_q")
    row = lines[1].split(",")
    assert row[0] == "0" and row[1] == "1"
    assert abs(float(row[6]) - abs(float(row[2]) - float(row[3]))) < 1e-15


def test_simulate_deterministic(tmp_path, pair_file):
    outs = []
    for name in ("a.csv", "b.csv"):
        f = tmp_path / name
        assert main(["simulate", "--pair", pair_file, "--layers", "2",
                     "--N", "64", "--csv", str(f),
                     "--quad-points", "4096"]) == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_cascade_csv(tmp_path, pair_file):
    out = tmp_path / "phi.csv"
    assert main(["cascade", "--pair", pair_file, "--J", "5",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "x,phi_g,phi_h,psi_g,psi_h"
    data = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
    # grid spacing 2^-5 and phi integrates to about 1
    assert np.diff(data[:, 0])[0] == pytest.approx(2.0 ** -5)
    assert np.sum(data[:, 1]) * 2.0 ** -5 == pytest.approx(1.0, abs=1e-6)


def test_spectrum_verb(pair_file, capsys):
    assert main(["spectrum", "--pair", pair_file, "--K", "2"]) == 0
    txt = capsys.readouterr().out
    assert "scaling dimension 0" in txt
    assert "scaling dimension 1" in txt
    assert "scaling dimension 2" in txt  # descendant eigenvalue 1/4


def test_flow_verb(capsys):
    assert main(["flow", "--dispersion", "harmonic:m=0.5",
                 "--levels", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "level,omega_pi,omega_max,fitted_mass"
    masses = [float(l.split(",")[3]) for l in lines[1:4]]
    assert masses[1] == pytest.approx(2 * np.sqrt(0.25 + 0.0625), rel=1e-6)


def test_numerical_failure_exit_code(tmp_path, capsys):
    # nearly flat renormalized massive dispersion: factorization target
    # goes negative at this degree
    level2 = flow(Harmonic(0.5), 2)[2]
    k = np.linspace(-np.pi, np.pi, 4097)
    disp = tmp_path / "lvl2.csv"
    np.savetxt(disp, np.column_stack([k, np.asarray(level2(k))]),
               delimiter=",")
    code = main(["design", "--dispersion", f"tabulated:{disp}",
                 "--K", "2", "--L", "3", "--out", str(tmp_path / "x.json")])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "NotNonnegative"
    assert "min_value" in err and "at_k" in err


def test_usage_error_missing_file(tmp_path, capsys):
    code = main(["cascade", "--pair", str(tmp_path / "nope.json")])
    assert code == 1


def test_usage_error_json_flag(tmp_path, capsys):
    code = main(["cascade", "--pair", str(tmp_path / "nope.json"),
                 "--json-errors"])
    assert code == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "FileNotFoundError"


def test_unknown_verb_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1
