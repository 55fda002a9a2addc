"""Binary-circuit factorization: round trip, gate identities, symplectic maps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waverg import (BinaryCircuit, DegenerateFactorization, Gate2,
                    LatticeTooSmall, compose, composed_wavelets, decompose,
                    derive_wavelet, to_lattice_symplectic)
from waverg.circuit import canonicalize_support, gate_alpha_identity_check


def max_coeff_diff(a, b):
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    return max(abs(a[n] - b[n]) for n in range(lo, hi + 1))


def test_haar_roundtrip(haar):
    circ = decompose(haar)
    assert circ.depth == 1
    rec = compose(circ)
    assert max_coeff_diff(rec.g_s.shift(-circ.shift), haar.g_s) < 1e-12
    assert max_coeff_diff(rec.h_s.shift(-circ.shift), haar.h_s) < 1e-12


def test_designed_roundtrip_and_depth(designs):
    for (K, L), (pair, _) in designs.items():
        circ = decompose(pair)
        assert circ.depth == K + 2 * L
        for g in circ.gates:
            assert g.det == pytest.approx(1.0, abs=1e-12)
        rec = compose(circ)
        assert max_coeff_diff(rec.g_s.shift(-circ.shift), pair.g_s) < 1e-10
        assert max_coeff_diff(rec.h_s.shift(-circ.shift), pair.h_s) < 1e-10


def test_composed_wavelets_match_modulation_rule(pair_k2l4):
    circ = decompose(pair_k2l4)
    g_w, h_w = composed_wavelets(circ)
    assert max_coeff_diff(g_w.shift(-circ.shift), pair_k2l4.g_w) < 1e-10
    assert max_coeff_diff(h_w.shift(-circ.shift), pair_k2l4.h_w) < 1e-10


def test_lattice_symplectic_identity(pair_k2l4):
    circ = decompose(pair_k2l4)
    A, B = to_lattice_symplectic(circ, 256)
    assert np.max(np.abs(A.matrix @ B.matrix.T - np.eye(256))) < 1e-12


def test_lattice_symplectic_squeeze(haar):
    circ = decompose(haar)
    circ2 = BinaryCircuit(circ.gates, squeeze=2.0)
    A, B = to_lattice_symplectic(circ2, 16)
    A1, _ = to_lattice_symplectic(circ, 16)
    np.testing.assert_allclose(A.matrix, 2.0 * A1.matrix, atol=1e-12)
    assert np.max(np.abs(A.matrix @ B.matrix.T - np.eye(16))) < 1e-12


def test_lattice_too_small(haar):
    with pytest.raises(LatticeTooSmall):
        to_lattice_symplectic(decompose(haar), 1)


@given(st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False),
       st.floats(-3, 3, allow_nan=False))
@settings(max_examples=50)
def test_gate_alpha_identity(a, b, c):
    # any det-1 gate satisfies a^{-1} = alpha a^T alpha^{-1}
    d = (1.0 + b * c) / a if abs(a) > 0.1 else None
    if d is None or abs(d) > 1e6:
        return
    g = Gate2(np.array([[a, b], [c, d]]), "even")
    assert g.det == pytest.approx(1.0, abs=1e-9)
    assert gate_alpha_identity_check(g) < 1e-8


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate2(np.eye(2), "sideways")
    with pytest.raises(ValueError):
        BinaryCircuit((Gate2(np.eye(2), "even"),), squeeze=-1.0)


def test_compose_rejects_non_unit_det(haar):
    g = Gate2(2.0 * np.eye(2), "even")
    with pytest.raises(ValueError):
        compose(BinaryCircuit((g,)))


def test_circuit_json_roundtrip(tmp_path, pair_k2l4):
    circ = decompose(pair_k2l4)
    path = tmp_path / "circ.json"
    circ.save(path)
    back = BinaryCircuit.load(path)
    assert back.depth == circ.depth
    assert back.shift == circ.shift
    d = circ.to_json()
    assert d["convention"] == {"scaling_impulse": 0, "wavelet_impulse": 1}
    for g1, g2 in zip(circ.gates, back.gates):
        assert g1.parity == g2.parity
        np.testing.assert_allclose(g1.entries, g2.entries)


def test_canonicalize_support(pair_k2l4):
    shifted = derive_wavelet(pair_k2l4.g_s.shift(4), pair_k2l4.h_s.shift(4))
    canon, t = canonicalize_support(shifted)
    assert t % 2 == 0
    M = canon.halfwidth
    lo = min(canon.g_s.support[0], canon.h_s.support[0])
    hi = max(canon.g_s.support[1], canon.h_s.support[1])
    assert lo >= -M + 1 and hi <= M


def test_decompose_rejects_broken_pr(haar):
    bad = derive_wavelet(haar.g_s, haar.h_s.scale(1.3))
    with pytest.raises(DegenerateFactorization):
        decompose(bad)
