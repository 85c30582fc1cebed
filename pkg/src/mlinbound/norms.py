"""Lower estimates of multilinear (quasi)norms L^2 x ... x L^2 -> L^{2/m}.

The estimator probes random complex Gaussian inputs, then refines the
best few by alternating maximization: with all arguments but f_j
frozen, T is a linear map of f̂_j given by an explicit matrix R, and
Σ |R^T h|^p is maximized over unit vectors h by normalized gradient
steps with step halving, plus a probe of every pure frequency mode.
Every reported value is an achieved ratio, hence a lower bound.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NumericError",
    "NormEstimate",
    "ScalingReport",
    "norm_ratio",
    "estimate_opnorm",
    "fit_scaling",
    "envelope_ratio",
]

TRIALS = 64
ASCENT_STEPS = 200
STEP_TOL = 1e-8
STARTS = 4
INNER_STEPS = 25


class NumericError(FloatingPointError):
    """Operator output was not finite; ``inputs`` holds the offending tuple."""

    def __init__(self, msg: str, inputs=None):
        super().__init__(msg)
        self.inputs = inputs


def _pnorm(v: np.ndarray, p: float, w: float) -> float:
    return float((np.sum(np.abs(v) ** p) * w) ** (1.0 / p))


def norm_ratio(op, fs: Sequence[np.ndarray]) -> float:
    """‖T(f_1..f_m)‖_{2/m} / Π ‖f_j‖_2 with grid weights Δx."""
    out = op.apply(fs)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite operator output", [np.array(f) for f in fs])
    dx = op.grid.dx
    den = math.prod(_pnorm(f, 2.0, dx) for f in fs)
    return _pnorm(out, 2.0 / op.m, dx) / den


@dataclass
class NormEstimate:
    value: float
    trials: int
    ascent_steps: int
    seed: int
    certificate: tuple = field(repr=False, default=())
    history: list = field(repr=False, default_factory=list)

    def reevaluate(self, op) -> float:
        return norm_ratio(op, self.certificate)


def _fwd(f: np.ndarray, shape) -> np.ndarray:
    axes = tuple(range(len(shape)))
    v = np.asarray(f, dtype=complex).reshape(shape)
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(v, axes=axes), norm="ortho", axes=axes), axes=axes).ravel()


def _inv(F: np.ndarray, shape) -> np.ndarray:
    axes = tuple(range(len(shape)))
    v = np.asarray(F).reshape(shape)
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(v, axes=axes), norm="ortho", axes=axes), axes=axes)


def _objective(h: np.ndarray, R: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(h @ R) ** p))


def _inner_ascent(R: np.ndarray, h: np.ndarray, p: float, budget: int, tol: float):
    """Maximize Σ|R^T h|^p over unit h; returns (h, value, steps used)."""
    h = h / np.linalg.norm(h)
    best = _objective(h, R, p)
    rows = np.sum(np.abs(R) ** p, axis=1)
    i = int(np.argmax(rows))
    if rows[i] > best:
        h = np.zeros_like(h)
        h[i] = 1.0
        best = float(rows[i])
    steps = 0
    while steps < budget:
        u = h @ R
        a = np.abs(u)
        cut = 1e-12 * a.max()
        w = np.where(a > cut, np.where(a > cut, a, 1.0) ** (p - 2.0) * u, 0.0)
        g = np.conj(R) @ w
        gn = np.linalg.norm(g)
        if gn == 0 or not np.isfinite(gn):
            break
        g = g / gn
        steps += 1
        prev = best
        moved = False
        cand = g
        val = _objective(cand, R, p)
        if val > best:
            h, best, moved = cand, val, True
        else:
            t = 1.0
            while t >= tol:
                cand = h + t * g
                cand = cand / np.linalg.norm(cand)
                val = _objective(cand, R, p)
                if val > best:
                    h, best, moved = cand, val, True
                    break
                t *= 0.5
        if not moved or best - prev <= 1e-10 * best:
            break
    return h, best, steps


def _ascend(op, fs: list[np.ndarray], budget: int, tol: float):
    """Alternating maximization from one start; returns (ratio, inputs, steps, history)."""
    shape = op.grid.shape
    p = 2.0 / op.m
    fs = [np.asarray(f, dtype=complex).reshape(shape) for f in fs]
    best = norm_ratio(op, fs)
    hist = [best]
    used = 0
    while used < budget:
        start = best
        for j in range(op.m):
            if used >= budget:
                break
            R = op.partial_matrix(j, fs)
            scale = np.linalg.norm(fs[j])
            cap = min(INNER_STEPS, budget - used)
            h, _, steps = _inner_ascent(R, _fwd(fs[j], shape), p, cap, tol)
            used += max(steps, 1)
            trial = list(fs)
            trial[j] = _inv(h, shape) * scale
            val = norm_ratio(op, trial)
            if val > best:
                best, fs = val, trial
            hist.append(best)
        if best <= start * (1 + 1e-9):
            break
    return best, fs, used, hist


def estimate_opnorm(
    op,
    trials: int = TRIALS,
    ascent_steps: int = ASCENT_STEPS,
    seed: int = 0,
    workers: int = 1,
    starts: int = STARTS,
    tol: float = STEP_TOL,
) -> NormEstimate:
    """Best achieved ratio over random probes and alternating ascent.

    Each trial draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    shape = op.grid.shape
    children = np.random.SeedSequence(seed).spawn(trials)

    def draw(ss):
        rng = np.random.default_rng(ss)
        fs = [rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for _ in range(op.m)]
        return norm_ratio(op, fs), fs

    with ThreadPoolExecutor(max(1, int(workers))) as pool:
        probes = list(pool.map(draw, children))
        history = []
        best_val, best_fs = -1.0, None
        for val, fs in probes:
            if val > best_val:
                best_val, best_fs = val, fs
            history.append(best_val)
        order = sorted(range(trials), key=lambda i: (-probes[i][0], i))[: max(0, starts)]
        runs = list(pool.map(lambda i: _ascend(op, probes[i][1], ascent_steps, tol), order)) \
            if ascent_steps > 0 else []
    used = 0
    for val, fs, steps, hist in runs:
        used += steps
        history.extend(max(best_val, v) for v in hist)
        if val > best_val:
            best_val, best_fs = val, fs
    cert = tuple(np.asarray(f).copy() for f in best_fs)
    return NormEstimate(float(best_val), trials, used, seed, cert, history)


# ----------------------------------------------------------------- fitting


def envelope_ratio(estimates: Sequence[float], predicted: Sequence[float]) -> tuple[np.ndarray, float]:
    """estimate / envelope per sample, and max/min of that series."""
    e = np.asarray(estimates, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if e.shape != p.shape:
        raise ValueError("estimates and envelope must have matching length")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = e / p
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("envelope ratios must be finite and positive")
    return r, float(r.max() / r.min())


@dataclass
class ScalingReport:
    parameter: str
    params: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residuals: np.ndarray
    xscale: str = "log2"
    envelope: np.ndarray | None = None
    ratios: np.ndarray | None = None
    seed: int | None = None

    @property
    def max_min_ratio(self) -> float:
        return float(self.ratios.max() / self.ratios.min()) if self.ratios is not None else float("nan")

    @property
    def residual(self) -> float:
        """Root mean square of the log2 fit residuals."""
        return float(np.sqrt(np.mean(self.residuals**2)))

    def summary(self) -> dict:
        return {
            "parameter": self.parameter,
            "xscale": self.xscale,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "max_min_ratio": self.max_min_ratio,
            "seed": self.seed,
        }

    def write_csv(self, path: str | Path) -> None:
        env = self.envelope if self.envelope is not None else np.full(len(self.params), np.nan)
        rat = self.ratios if self.ratios is not None else np.full(len(self.params), np.nan)
        with open(path, "w") as fh:
            fh.write("parameter,estimate,envelope,ratio\n")
            for a, b, c, d in zip(self.params, self.values, env, rat):
                fh.write(",".join(repr(float(t)) for t in (a, b, c, d)) + "\n")

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n")


def fit_scaling(
    params: Sequence[float],
    values: Sequence[float],
    parameter: str = "N",
    xscale: str = "log2",
    envelope: Sequence[float] | Callable | None = None,
    seed: int | None = None,
) -> ScalingReport:
    """Least-squares line through (x, log2 value).

    x is log2(parameter) for ``xscale="log2"`` (a power law, as for N)
    and the parameter itself for ``"linear"`` (levels λ, μ, r).
    """
    x = np.asarray(params, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise ValueError("need at least 3 matching samples")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("values must be positive and finite")
    if xscale == "log2":
        if np.any(x <= 0):
            raise ValueError("log2 scale needs positive parameters")
        u = np.log2(x)
    elif xscale == "linear":
        u = x
    else:
        raise ValueError(f"unknown xscale {xscale!r}")
    v = np.log2(y)
    A = np.stack([u, np.ones_like(u)], 1)
    (slope, icpt), *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - (slope * u + icpt)
    env = ratios = None
    if envelope is not None:
        env = np.array([envelope(t) for t in x]) if callable(envelope) else np.asarray(envelope, float)
        ratios, _ = envelope_ratio(y, env)
    return ScalingReport(parameter, x, y, float(slope), float(icpt), resid, xscale, env, ratios, seed)
