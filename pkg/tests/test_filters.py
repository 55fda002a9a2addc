"""Filter algebra, wavelet rule, perfect reconstruction, lattice maps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waverg import (FirFilter, HAAR_SCALING, LatticeTooSmall, decomposition_map,
                    derive_wavelet, haar_pair, kgrid, multi_layer_map,
                    pr_residual, wavelet_from_scaling)

ROOT2 = np.sqrt(2.0)

taps = st.lists(st.floats(-4, 4, allow_nan=False, width=32),
                min_size=1, max_size=8)
offsets = st.integers(-6, 6)


def random_filter(offset, coeffs):
    if not any(coeffs):
        coeffs = list(coeffs) + [1.0]
    return FirFilter(offset, np.array(coeffs))


# -- Fourier convention ----------------------------------------------------

@given(offsets, st.floats(-np.pi, np.pi, allow_nan=False))
def test_delta_fourier_is_pure_phase(n, k):
    f = FirFilter.delta(n)
    assert f(k) == pytest.approx(np.exp(-1j * k * n), abs=1e-12)


@given(offsets, taps, offsets, taps)
@settings(max_examples=50)
def test_convolve_matches_fourier_product(o1, c1, o2, c2):
    a, b = random_filter(o1, c1), random_filter(o2, c2)
    k = np.linspace(-np.pi, np.pi, 17)
    lhs = a.convolve(b)(k)
    np.testing.assert_allclose(lhs, a(k) * b(k), atol=1e-9)


@given(offsets, taps)
@settings(max_examples=50)
def test_reflect_and_correlate_fourier_rules(o, c):
    a = random_filter(o, c)
    k = np.linspace(-np.pi, np.pi, 17)
    np.testing.assert_allclose(a.reflect()(k), a(-k), atol=1e-9)
    np.testing.assert_allclose(a.correlate(a)(k), a(k) * a(-k), atol=1e-8)


def test_canonical_trim_and_support():
    f = FirFilter(-3, np.array([0.0, 0.0, 2.0, 1.0, 0.0]))
    assert f.support == (-1, 0)
    assert f[-1] == 2.0 and f[0] == 1.0 and f[5] == 0.0
    assert len(f) == 2


# -- wavelet rule ----------------------------------------------------------

@given(offsets, taps)
@settings(max_examples=50)
def test_wavelet_rule_time_domain(o, c):
    b = random_filter(o, c)
    w = wavelet_from_scaling(b)
    lo, hi = w.support
    for n in range(lo - 2, hi + 3):
        assert w[n] == pytest.approx((-1.0) ** ((1 - n) % 2) * b[1 - n])


@given(offsets, taps)
@settings(max_examples=50)
def test_wavelet_rule_frequency_domain(o, c):
    # g_w(k) = exp(-ik) conj(b_s(k + pi)) for real filters
    b = random_filter(o, c)
    w = wavelet_from_scaling(b)
    k = np.linspace(-np.pi, np.pi, 17)
    np.testing.assert_allclose(w(k), np.exp(-1j * k) * np.conj(b(k + np.pi)),
                               atol=1e-9)


def test_haar_pair_is_perfect_reconstruction():
    pair = haar_pair()
    assert pair.pr_residual < 1e-14
    assert pair.g_s[0] == pytest.approx(1 / ROOT2)
    assert pair.support_length() == 2
    # Haar wavelet: g_w[0] = -1/sqrt2, g_w[1] = 1/sqrt2
    assert pair.g_w[0] == pytest.approx(-1 / ROOT2)
    assert pair.g_w[1] == pytest.approx(1 / ROOT2)


def test_pr_residual_detects_broken_pair(haar):
    bad = derive_wavelet(haar.g_s, haar.h_s.scale(1.1))
    assert bad.pr_residual > 0.05


def test_pair_json_roundtrip(tmp_path, haar):
    p = tmp_path / "pair.json"
    haar.save(p, name="haar")
    back = type(haar).load(p)
    assert back.g_s.offset == haar.g_s.offset
    np.testing.assert_allclose(back.g_s.coeffs, haar.g_s.coeffs)
    np.testing.assert_allclose(back.h_w.coeffs, haar.h_w.coeffs)


# -- lattice maps ----------------------------------------------------------

def test_haar_decomposition_is_orthogonal(haar):
    W = decomposition_map(haar, "g", 16).matrix
    np.testing.assert_allclose(W @ W.T, np.eye(16), atol=1e-12)


def test_decomposition_biorthogonality(pair_k2l4):
    # W_g (W_h)^T = I: lattice form of perfect reconstruction
    N = 64
    Wg = decomposition_map(pair_k2l4, "g", N).matrix
    Wh = decomposition_map(pair_k2l4, "h", N).matrix
    np.testing.assert_allclose(Wg @ Wh.T, np.eye(N), atol=1e-10)


def test_decomposition_size_guard(pair_k2l4):
    with pytest.raises(LatticeTooSmall):
        decomposition_map(pair_k2l4, "g", 16)
    with pytest.raises(LatticeTooSmall):
        decomposition_map(pair_k2l4, "g", 65)  # odd


def test_multi_layer_biorthogonality(pair_k2l4):
    N, L = 128, 3
    Rg = multi_layer_map([pair_k2l4] * L, "g", N).matrix
    Rh = multi_layer_map([pair_k2l4] * L, "h", N).matrix
    np.testing.assert_allclose(Rg @ Rh.T, np.eye(N), atol=1e-9)


def test_multi_layer_block_ordering(haar):
    # constant input: all wavelet rows vanish, top scaling rows carry 2^{L/2}
    N, L = 16, 2
    R = multi_layer_map([haar] * L, "g", N).matrix
    out = R @ np.ones(N)
    top = N // 2 ** L
    np.testing.assert_allclose(out[:top], 2.0, atol=1e-12)
    np.testing.assert_allclose(out[top:], 0.0, atol=1e-12)


def test_multi_layer_scales(haar):
    R1 = multi_layer_map([haar] * 2, "g", 16, scales=[2.0, 3.0]).matrix
    R0 = multi_layer_map([haar] * 2, "g", 16).matrix
    # wavelet rows of layer 1 scale by 2, deeper block by 2 * 3
    np.testing.assert_allclose(R1[8:], 2.0 * R0[8:], atol=1e-12)
    np.testing.assert_allclose(R1[:8], 6.0 * R0[:8], atol=1e-12)


def test_pr_residual_grid_independence(pair_k2l4):
    assert pr_residual(pair_k2l4, 512) == pytest.approx(
        pr_residual(pair_k2l4, 4096), abs=1e-12)
