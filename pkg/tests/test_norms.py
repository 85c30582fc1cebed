import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlinbound.engine import DenseOperator, DenseSymbol, TorusGrid
from mlinbound.norms import (
    NumericError,
    envelope_ratio,
    estimate_opnorm,
    fit_scaling,
    norm_ratio,
)


def dense_op(G, m, values, L=4.0):
    return DenseOperator(DenseSymbol(TorusGrid(L, G), m, values))


# ---------------------------------------------------------------- oracles


def test_identity_m1_is_one():
    est = estimate_opnorm(dense_op(32, 1, np.ones(32)), trials=4, ascent_steps=0)
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_m1_reaches_sup_of_symbol():
    rng = np.random.default_rng(0)
    sig = rng.uniform(0.1, 1.0, 64)
    sig[17] = 3.5
    est = estimate_opnorm(dense_op(64, 1, sig), trials=8, ascent_steps=20)
    assert est.value == pytest.approx(3.5, rel=1e-9)


def test_pointwise_product_reaches_one():
    # ‖fg‖_1 ≤ ‖f‖_2 ‖g‖_2 with equality for |f| = |g|
    est = estimate_opnorm(dense_op(32, 2, np.ones((32, 32))), trials=8, ascent_steps=50)
    assert 0.999 <= est.value <= 1 + 1e-12


def test_lower_bound_and_certificate():
    rng = np.random.default_rng(1)
    op = dense_op(16, 2, rng.standard_normal((16, 16)))
    est = estimate_opnorm(op, trials=16, ascent_steps=60, seed=5)
    assert abs(est.reevaluate(op) - est.value) <= 1e-10 * est.value
    assert est.history == sorted(est.history)
    assert est.history[-1] == pytest.approx(est.value)


def test_workers_do_not_change_result():
    rng = np.random.default_rng(2)
    op = dense_op(16, 2, rng.standard_normal((16, 16)))
    a = estimate_opnorm(op, trials=12, ascent_steps=30, seed=3, workers=1)
    b = estimate_opnorm(op, trials=12, ascent_steps=30, seed=3, workers=4)
    assert a.value == b.value


def test_scale_covariance():
    rng = np.random.default_rng(3)
    op = dense_op(16, 2, rng.standard_normal((16, 16)))
    a = estimate_opnorm(op, trials=12, ascent_steps=30, seed=4)
    b = estimate_opnorm(op.scaled(2.5j), trials=12, ascent_steps=30, seed=4)
    assert b.value == pytest.approx(2.5 * a.value, rel=1e-6)


class _BadOp:
    grid = TorusGrid(1.0, 8)
    m = 1

    def apply(self, fs):
        return np.full(8, np.nan)


def test_numeric_error_carries_inputs():
    with pytest.raises(NumericError) as exc:
        norm_ratio(_BadOp(), [np.ones(8)])
    assert len(exc.value.inputs) == 1


def test_estimator_rejects_no_trials():
    with pytest.raises(ValueError):
        estimate_opnorm(dense_op(8, 1, np.ones(8)), trials=0)


def test_fit_exact_power_law():
    N = [16, 32, 64, 128]
    rep = fit_scaling(N, [3 * n**0.25 for n in N])
    assert rep.slope == pytest.approx(0.25, abs=1e-12)
    assert rep.residual == pytest.approx(0, abs=1e-12)


def test_fit_linear_axis():
    lam = [0, 1, 2, 3]
    rep = fit_scaling(lam, [2.0**l * 5 for l in lam], "lambda", "linear")
    assert rep.slope == pytest.approx(1.0, abs=1e-12)
    assert rep.intercept == pytest.approx(np.log2(5))


def test_fit_constant_data():
    rep = fit_scaling([1, 2, 4, 8], [0.7] * 4, envelope=[1, 1, 1, 1])
    assert rep.slope == pytest.approx(0, abs=1e-12)
    assert rep.max_min_ratio == pytest.approx(1.0)


def test_fit_noisy_slope():
    rng = np.random.default_rng(8)
    N = 2.0 ** np.arange(4, 11)
    vals = N**0.5 * np.exp(rng.normal(0, 0.02, len(N)))
    assert fit_scaling(N, vals).slope == pytest.approx(0.5, abs=0.03)


def test_fit_rejects():
    with pytest.raises(ValueError):
        fit_scaling([1, 2], [1, 2])
    with pytest.raises(ValueError):
        fit_scaling([1, 2, 3], [1, 0, 2])
    with pytest.raises(ValueError):
        fit_scaling([0, 1, 2], [1, 1, 1])
    with pytest.raises(ValueError):
        fit_scaling([1, 2, 3], [1, 1, 1], xscale="ln")


def test_envelope_ratio():
    r, mm = envelope_ratio([2.0, 3.0, 8.0], [1.0, 2.0, 4.0])
    np.testing.assert_allclose(r, [2.0, 1.5, 2.0])
    assert mm == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        envelope_ratio([1.0], [0.0])


def test_report_files(tmp_path):
    rep = fit_scaling([1, 2, 4], [1.0, 2.0, 4.0], envelope=lambda n: n, seed=9)
    rep.write_csv(tmp_path / "r.csv")
    rep.write_json(tmp_path / "r.json")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "parameter,estimate,envelope,ratio"
    assert lines[1] == "1.0,1.0,1.0,1.0"
    assert '"seed": 9' in (tmp_path / "r.json").read_text()


# -------------------------------------------------------------- properties


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_estimate_is_achieved_and_bounded(seed):
    # |T| ≤ G^{-1/2} sup|σ| ‖f̂‖_1 ‖ĝ‖_1 and Cauchy-Schwarz give ratio ≤ G^{3/2} sup|σ|
    rng = np.random.default_rng(seed)
    sig = rng.standard_normal((8, 8))
    op = dense_op(8, 2, sig, L=2.0)
    est = estimate_opnorm(op, trials=6, ascent_steps=10, seed=seed)
    assert abs(est.reevaluate(op) - est.value) <= 1e-10 * est.value
    assert est.value <= np.abs(sig).max() * 8**1.5


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-2, 2, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
    st.lists(st.floats(0.5, 2.0), min_size=4, max_size=4),
)
def test_fit_recovers_slope(slope, icpt, jitter):
    N = [8, 16, 32, 64]
    vals = [2.0 ** (icpt + slope * np.log2(n)) for n in N]
    assert fit_scaling(N, vals).slope == pytest.approx(slope, abs=1e-9)
    # a common factor moves only the intercept
    rep = fit_scaling(N, [v * jitter[0] for v in vals])
    assert rep.slope == pytest.approx(slope, abs=1e-9)
