import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlinbound.wavelets import (
    BumpFamily,
    CoefficientTable,
    ProductAtom,
    ResolutionError,
    SymbolGrid,
    WaveletFamily,
    analyze,
    build_bump,
    build_daubechies,
    coeff_norms,
    daubechies_filter,
    eval_atom,
    letter_sets,
    load_wavelets,
    save_wavelets,
    sobolev_norm,
    synthesize,
)

# four-tap filter with two vanishing moments, standard orientation
DB2 = [0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037]


def test_db2_taps():
    np.testing.assert_allclose(daubechies_filter(1), DB2, atol=1e-14)


@pytest.mark.parametrize("M", range(1, 11))
def test_filter_orthonormal(M):
    h = daubechies_filter(M)
    assert len(h) == 2 * M + 2
    assert h.sum() == pytest.approx(math.sqrt(2), abs=1e-13)
    for k in range(M + 1):
        assert np.dot(h[: len(h) - 2 * k], h[2 * k:]) == pytest.approx(float(k == 0), abs=5e-13)


@pytest.mark.parametrize("M", [1, 2, 3, 5])
def test_moments_norms_inner(M):
    w = build_daubechies(M)
    assert w.C0 == 2 * M + 1
    for a in range(M + 1):
        assert abs(w.moment("M", a)) / w.C0**a <= 1e-6
    assert w.moment("F", 0) == pytest.approx(1.0, abs=1e-9)
    assert w.inner("F", "F") == pytest.approx(1.0, abs=1e-6)
    assert w.inner("M", "M") == pytest.approx(1.0, abs=1e-6)
    for s in range(-w.C0, w.C0 + 1):
        assert abs(w.inner("F", "M", s)) <= 1e-4
        assert abs(w.inner("M", "M", s, 1)) <= 1e-4
        if s:
            assert abs(w.inner("M", "M", s)) <= 1e-4


def test_wavelet_support():
    w = build_daubechies(3)
    assert w("M", np.array([-0.01, w.C0 + 0.01])).tolist() == [0.0, 0.0]


def test_build_rejects():
    with pytest.raises(ValueError):
        build_daubechies(0)
    with pytest.raises(ValueError):
        build_daubechies(11)


def test_save_load(tmp_path):
    w = build_daubechies(2)
    save_wavelets(w, tmp_path / "w.txt")
    v = load_wavelets(tmp_path / "w.txt")
    assert (v.M, v.J) == (w.M, w.J)
    np.testing.assert_array_equal(v.father, w.father)
    np.testing.assert_array_equal(v.mother, w.mother)


# ------------------------------------------------------------------- bumps


def test_bump_support_and_peak():
    b = build_bump(0.75)
    assert b(0.0) == 1.0
    assert b(np.array([0.75, -0.75, 1.0])).tolist() == [0.0, 0.0, 0.0]
    assert b.overlap == 3


def test_bump_overlap_bound():
    b = build_bump(0.75)
    fam = BumpFamily(b)
    xi = np.linspace(-4, 4, 20001)
    lam = 2
    tot = sum(np.abs(fam.axis(lam, k, xi)) for k in range(-20, 21))
    assert tot.max() <= 2 ** (lam / 2) * b.overlap


def test_bump_rejects():
    with pytest.raises(ValueError):
        build_bump(0)


# ------------------------------------------------------------------- atoms


def test_atom_identity_dilation():
    b = build_bump(0.5)
    g = SymbolGrid.box(5, 1.0, 1)
    np.testing.assert_array_equal(eval_atom(BumpFamily(b), 0, None, (0,), g), b(g.axis(0)))


def test_atom_support_rule():
    w = build_daubechies(3)
    g = SymbolGrid.box(8, 3.0, 1)
    a = eval_atom(WaveletFamily(w), 3, "M", (8,), g)
    xi = g.axis(0)[np.abs(a) > 0]
    assert xi.min() >= 1.0 and xi.max() <= 1.0 + w.C0 / 8


def test_atom_l2_mass():
    w = build_daubechies(3)
    g = SymbolGrid.box(9, 4.0, 2)
    a = eval_atom(WaveletFamily(w), 2, "MF", (1, -3), g)
    assert np.sum(a**2) * g.spacing**2 == pytest.approx(1.0, abs=1e-4)


def test_atom_resolution_error():
    g = SymbolGrid.box(3, 1.0, 1)
    with pytest.raises(ResolutionError):
        eval_atom(BumpFamily(build_bump(0.5)), 1, None, (0,), g)


def test_letters():
    assert letter_sets(0, 2) == ["FF", "FM", "MF", "MM"]
    assert letter_sets(1, 2) == ["FM", "MF", "MM"]
    with pytest.raises(ValueError):
        ProductAtom(1, "FF", (0, 0))


# ---------------------------------------------------------------- analysis


def test_single_atom_delta():
    w = build_daubechies(3)
    g = SymbolGrid.box(6, 3.0, 2)
    A = eval_atom(WaveletFamily(w), 2, "MF", (1, -3), g)
    tab = analyze(A, g, w, 3)
    assert tab.get(2, "MF", (1, -3)) == pytest.approx(1.0, abs=1e-4)
    rest = max(abs(b) for lam, G, k, b in tab.items() if (lam, G, k) != (2, "MF", (1, -3)))
    assert rest <= 1e-4


def test_roundtrip_smooth():
    w = build_daubechies(3)
    g = SymbolGrid.box(9, 1.5, 2)
    r2 = g.radius2()
    F = np.where(r2 < 1, np.exp(-1 / np.maximum(1 - r2, 1e-300)), 0.0)
    R = synthesize(analyze(F, g, w, 6), g, w)
    assert np.linalg.norm(R - F) / np.linalg.norm(F) <= 1e-3


def test_smooth_decay_rate():
    from mlinbound.norms import fit_scaling

    w = build_daubechies(3)
    g = SymbolGrid.box(8, 4.0, 2)
    tab = analyze(np.exp(-np.pi * g.radius2()), g, w, 5)
    sups = [coeff_norms(tab, lam, np.inf)[0] for lam in range(6)]
    assert -fit_scaling(range(6), sups, "lambda", "linear").slope >= 3 + 1 - 0.5


def test_analyze_needs_resolution():
    w = build_daubechies(2)
    g = SymbolGrid.box(3, 2.0, 1)
    with pytest.raises(ResolutionError):
        analyze(np.ones(g.shape), g, w, 2)


def test_coeff_norms_exact():
    tab = CoefficientTable(1, {(1, "M"): ((0,), np.array([3.0, -4.0])), (0, "F"): ((0,), np.array([1.0]))})
    assert coeff_norms(tab, 1, 2) == (4.0, 5.0)
    assert coeff_norms(tab, 2, 2) == (0.0, 0.0)
    with pytest.raises(ValueError):
        coeff_norms(tab, 1, 0)


def test_table_csv_roundtrip(tmp_path):
    w = build_daubechies(2)
    g = SymbolGrid.box(6, 1.0, 2)
    tab = analyze(np.exp(-4 * g.radius2()) * (1 + 0.5j), g, w, 2)
    tab.write_csv(tmp_path / "t.csv")
    back = CoefficientTable.read_csv(tmp_path / "t.csv")
    for lam, G, k, b in tab.items():
        assert back.get(lam, G, k) == b


def test_sobolev_norm():
    h = 1 / 64
    x = np.arange(256) * h
    F = np.cos(2 * np.pi * x)
    base = sobolev_norm(F, h, 0.0, 2)
    assert base == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert sobolev_norm(F, h, 2.0, 2) == pytest.approx((1 + 4 * math.pi**2) * base, rel=1e-10)
    with pytest.raises(ValueError):
        sobolev_norm(F, h, -1.0, 2)


# -------------------------------------------------------------- properties

_W = build_daubechies(2)
_G = SymbolGrid.box(6, 4.0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2), st.sampled_from("FM"), st.integers(-8, 8), st.floats(-3, 3))
def test_atom_recovered(lam, letter, k, c):
    if lam >= 1 and letter == "F":
        letter = "M"
    # keep the atom inside the box
    k = max(-3 * 2**lam, min(k, 3 * 2**lam - _W.C0))
    A = c * eval_atom(WaveletFamily(_W), lam, letter, (k,), _G)
    tab = analyze(A, _G, _W, 2)
    assert abs(tab.get(lam, letter, (k,)) - c) <= 1e-4 * max(1, abs(c))
    rest = [abs(b) for l, G, kk, b in tab.items() if (l, G, kk) != (lam, letter, (k,))]
    assert max(rest, default=0) <= 1e-4 * max(1, abs(c))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_analyze_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    F, H = rng.standard_normal((2,) + _G.shape)
    t1 = analyze(a * F + b * H, _G, _W, 2)
    tF, tH = analyze(F, _G, _W, 2), analyze(H, _G, _W, 2)
    for key, (off, vals) in t1.blocks.items():
        np.testing.assert_allclose(vals, a * tF.blocks[key][1] + b * tH.blocks[key][1], atol=1e-10)
