"""Multilinear multiplier operators on a periodic grid.

Functions live on the torus [-L/2, L/2)^n sampled at G points per axis.
The frequency view holds the samples of f̂ on ξ = j/L, j = -G/2..G/2-1,
with a unitary discrete transform. An m-linear operator with symbol σ
acts as

    T(f_1..f_m)(x) = G^{-mn/2} Σ_ξ σ(ξ_1..ξ_m) Π f̂_j(ξ_j) e^{2πi x·(ξ_1+...+ξ_m)}

which reduces to the pointwise product when σ ≡ 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .lattice import LatticeSet
from .wavelets import BumpFamily, ResolutionError, WaveletFamily

__all__ = [
    "BudgetError",
    "TorusGrid",
    "GridFunction",
    "DenseSymbol",
    "AtomSymbol",
    "LPWindow",
    "dft",
    "idft",
    "apply_dense",
    "atom_project",
    "apply_atomsum",
    "quasinorm",
    "frequency_restrict",
    "build_lp_window",
    "lp_slice",
    "lp_piece",
    "smooth_step",
    "DenseOperator",
    "AtomSumOperator",
    "read_grid_function",
    "write_grid_function",
]

MAX_M = 3
DENSE_BUDGET = {1: 1 << 24, 2: 256, 3: 64}


class BudgetError(RuntimeError):
    """Dense evaluation would exceed the desk-scale budget."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with G (even) points per axis on a torus of period L."""

    L: float
    G: int
    n: int = 1

    def __post_init__(self):
        if self.G <= 0 or self.G % 2:
            raise ValueError(f"G must be a positive even integer, got {self.G}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.G,) * self.n

    @property
    def dx(self) -> float:
        return (self.L / self.G) ** self.n

    def x(self) -> np.ndarray:
        return self.L * (np.arange(self.G) / self.G - 0.5)

    def xi(self) -> np.ndarray:
        return (np.arange(self.G) - self.G // 2) / self.L

    def xi_mesh(self) -> np.ndarray:
        """Frequency nodes of one block, shape (*shape, n)."""
        return np.stack(np.meshgrid(*[self.xi()] * self.n, indexing="ij"), -1)

    def x_mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*[self.x()] * self.n, indexing="ij"), -1)


@dataclass(frozen=True)
class GridFunction:
    """Samples on a torus grid; ``freq`` marks the frequency view."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)
    freq: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            if v.size != self.grid.G**self.grid.n:
                raise ValueError(f"{v.size} samples do not match grid {self.grid}")
            v = v.reshape(self.grid.shape)
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm2(self) -> float:
        w = 1.0 if self.freq else self.grid.dx
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * w))


def _fwd(v: np.ndarray, axes) -> np.ndarray:
    return np.fft.fftshift(
        np.fft.fftn(np.fft.ifftshift(v, axes=axes), axes=axes, norm="ortho"), axes=axes
    )


def _inv(v: np.ndarray, axes) -> np.ndarray:
    return np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(v, axes=axes), axes=axes, norm="ortho"), axes=axes
    )


def dft(f: GridFunction) -> GridFunction:
    """Unitary transform with kernel e^{-2πi x·ξ} on the centered grids."""
    if f.freq:
        raise ValueError("already in the frequency view")
    return GridFunction(f.grid, _fwd(f.values, tuple(range(f.grid.n))), freq=True)


def idft(F: GridFunction) -> GridFunction:
    if not F.freq:
        raise ValueError("expected the frequency view")
    return GridFunction(F.grid, _inv(F.values, tuple(range(F.grid.n))))


def _check_inputs(fs: Sequence[GridFunction]) -> TorusGrid:
    if not fs:
        raise ValueError("need at least one input")
    grid = fs[0].grid
    for f in fs:
        if f.grid != grid:
            raise ValueError("all inputs must share one grid")
        if f.freq:
            raise ValueError("inputs must be in the physical view")
    if len(fs) > MAX_M:
        raise ValueError(f"m={len(fs)} exceeds the supported maximum {MAX_M}")
    return grid


@dataclass(frozen=True)
class DenseSymbol:
    """σ sampled on the product frequency lattice, shape (G,)*(m n)."""

    grid: TorusGrid
    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.m <= MAX_M:
            raise ValueError(f"m must be in 1..{MAX_M}")
        shape = (self.grid.G,) * (self.m * self.grid.n)
        v = np.asarray(self.values, dtype=complex).reshape(shape).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValueError("symbol samples must be finite")

    @property
    def sup(self) -> float:
        return float(np.abs(self.values).max())

    @classmethod
    def from_function(cls, grid: TorusGrid, m: int, func) -> "DenseSymbol":
        """Sample func(xi) with xi of shape (..., m n) on the product lattice."""
        axes = [grid.xi()] * (m * grid.n)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
        return cls(grid, m, func(mesh))


def _check_budget(grid: TorusGrid, m: int) -> None:
    if m > MAX_M:
        raise ValueError(f"m={m} is not supported")
    if grid.n == 2 and m == 3:
        raise BudgetError("dense m=3 evaluation is not supported for n=2")
    cap = DENSE_BUDGET[m] if grid.n == 1 else {1: 1 << 12, 2: 32}[m]
    if grid.G > cap:
        raise BudgetError(f"G={grid.G} exceeds the dense budget {cap} for m={m}, n={grid.n}")


def _sum_index(grid: TorusGrid, m: int) -> list[np.ndarray]:
    """Per output axis, the wrapped centered index of ξ_1+...+ξ_m over the product lattice."""
    G, n = grid.G, grid.n
    d = m * n
    out = []
    for c in range(n):
        tot = np.zeros((1,) * d, dtype=np.int64)
        for j in range(m):
            shape = [1] * d
            shape[j * n + c] = G
            tot = tot + (np.arange(G) - G // 2).reshape(shape)
        out.append((tot + G // 2) % G)
    return out


def _product_hat(fhats: Sequence[np.ndarray], n: int) -> np.ndarray:
    out = np.ones(())
    for fh in fhats:
        out = np.multiply.outer(out, fh)
    return out.reshape(tuple(s for fh in fhats for s in fh.shape))


def apply_dense(sigma: DenseSymbol, *fs: GridFunction) -> GridFunction:
    """Evaluate T_σ(f_1..f_m) on every grid point.

    The product σ Π f̂_j is accumulated by the output frequency
    Σ ξ_j (mod the lattice, which is exact on grid nodes because G is
    even), followed by one inverse transform.
    """
    grid = _check_inputs(fs)
    m = len(fs)
    if sigma.m != m or sigma.grid != grid:
        raise ValueError("symbol does not match the inputs")
    _check_budget(grid, m)
    G, n = grid.G, grid.n
    prod = sigma.values * _product_hat([dft(f).values for f in fs], n)
    idx = _sum_index(grid, m)
    flat = np.zeros(np.broadcast_shapes(*[i.shape for i in idx]) if idx else (), dtype=np.int64)
    for c, ic in enumerate(idx):
        flat = flat * G + ic
    flat = np.broadcast_to(flat, prod.shape).ravel()
    acc = np.bincount(flat, weights=prod.real.ravel(), minlength=G**n) + 1j * np.bincount(
        flat, weights=prod.imag.ravel(), minlength=G**n
    )
    acc = acc.reshape(grid.shape)
    scale = G ** (-(m - 1) * n / 2)
    return GridFunction(grid, scale * _inv(acc, tuple(range(n))))


def _atom_block(family, lam: int, k: Sequence[int], xi_mesh: np.ndarray, letters=None,
                dilate: int = 0) -> np.ndarray:
    out = np.ones(xi_mesh.shape[:-1])
    for c in range(xi_mesh.shape[-1]):
        letter = None if letters is None else letters[c]
        out = out * family.axis(lam, int(k[c]), xi_mesh[..., c] * 2.0**-dilate, letter)
    return out


def _check_resolution(grid: TorusGrid, lam: int, gamma: int = 0) -> None:
    if 1.0 / grid.L > 2.0 ** (gamma - lam) / 8 * (1 + 1e-12):
        raise ResolutionError(
            f"period L={grid.L} does not resolve level {lam} (dilation {gamma})"
        )


def atom_project(f: GridFunction, family, lam: int, k, gamma: int = 0,
                 letters: str | None = None) -> GridFunction:
    """(ω^λ_k(·/2^γ) f̂)^∨: multiply the transform by one (dilated) atom."""
    grid = f.grid
    _check_resolution(grid, lam, gamma)
    k = np.ravel(k)
    if len(k) != grid.n:
        raise ValueError("atom position must have n coordinates")
    w = _atom_block(family, lam, k, grid.xi_mesh(), letters, gamma)
    return idft(GridFunction(grid, w * dft(f).values, freq=True))


@dataclass(frozen=True)
class AtomSymbol:
    """σ^λ = Σ_{k∈U} b_k ω^λ_k as coefficients over a lattice set."""

    lam: int
    family: object
    points: LatticeSet
    coeffs: np.ndarray = field(repr=False)
    letters: str | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel().copy()
        if c.shape != (len(self.points),):
            raise ValueError("one coefficient per lattice point is required")
        if self.points.m > MAX_M:
            raise ValueError(f"m={self.points.m} is not supported")
        if isinstance(self.family, WaveletFamily):
            d = self.points.m * self.points.n
            if self.letters is None or len(self.letters) != d:
                raise ValueError("wavelet atoms need a letter string of length mn")
            if self.lam >= 1 and set(self.letters) == {"F"}:
                raise ValueError("the all-F letter string is only allowed at level 0")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, lam, family, b: dict, n: int = 1, m: int = 2, letters=None):
        pts = LatticeSet(n, m, tuple(b))
        vals = []
        lookup = {LatticeSet(n, m, (k,)).points[0]: v for k, v in b.items()}
        for p in pts.points:
            vals.append(lookup[p])
        return cls(lam, family, pts, np.array(vals, dtype=complex), letters)

    @property
    def m(self) -> int:
        return self.points.m

    @property
    def n(self) -> int:
        return self.points.n

    def block_letters(self, j: int):
        if self.letters is None:
            return None
        return self.letters[j * self.n:(j + 1) * self.n]

    def scaled(self, t: complex) -> "AtomSymbol":
        return AtomSymbol(self.lam, self.family, self.points, t * self.coeffs, self.letters)

    def to_dense(self, grid: TorusGrid) -> DenseSymbol:
        """Synthesize σ on the product frequency lattice of ``grid``."""
        if grid.n != self.n:
            raise ValueError("grid dimension does not match the symbol")
        _check_resolution(grid, self.lam)
        xi = grid.xi_mesh()
        d = self.m * self.n
        out = np.zeros((grid.G,) * d, dtype=complex)
        arr = self.points.as_array()
        cache: dict = {}
        for b, p in zip(self.coeffs, arr):
            term = np.ones(())
            for j in range(self.m):
                key = (j, tuple(p[j]))
                if key not in cache:
                    cache[key] = _atom_block(self.family, self.lam, p[j], xi,
                                             self.block_letters(j))
                term = np.multiply.outer(term, cache[key])
            out += b * term
        return DenseSymbol(grid, self.m, out)


def _projected(sigma: AtomSymbol, grid: TorusGrid, fs: Sequence[GridFunction]):
    """Per argument j: distinct blocks κ of U, index of each point's block, L_κ f_j."""
    _check_resolution(grid, sigma.lam)
    arr = sigma.points.as_array()
    xi = grid.xi_mesh()
    out = []
    for j, f in enumerate(fs):
        blocks, inv = np.unique(arr[:, j, :], axis=0, return_inverse=True)
        fh = dft(f).values
        W = np.stack([
            _atom_block(sigma.family, sigma.lam, b, xi, sigma.block_letters(j)) for b in blocks
        ]) if len(blocks) else np.zeros((0,) + grid.shape)
        Lf = _inv(W * fh, tuple(range(1, grid.n + 1))) if len(blocks) else W.astype(complex)
        out.append((blocks, np.ravel(inv), W, Lf))
    return out


def apply_atomsum(sigma: AtomSymbol, *fs: GridFunction) -> GridFunction:
    """Σ_{k∈U} b_k Π_j (L^λ_{k_j} f_j) evaluated pointwise."""
    grid = _check_inputs(fs)
    if len(fs) != sigma.m:
        raise ValueError(f"symbol is {sigma.m}-linear, got {len(fs)} inputs")
    if len(sigma.points) == 0:
        return GridFunction(grid, np.zeros(grid.shape))
    proj = _projected(sigma, grid, fs)
    terms = sigma.coeffs.reshape((-1,) + (1,) * grid.n)
    for j, (_, inv, _, Lf) in enumerate(proj):
        terms = terms * Lf[inv]
    return GridFunction(grid, terms.sum(axis=0))


def quasinorm(f: GridFunction, p: float) -> float:
    """(Σ |f|^p Δx)^{1/p}."""
    if not p > 0:
        raise ValueError("p must be positive")
    v = np.abs(f.values)
    w = 1.0 if f.freq else f.grid.dx
    return float((np.sum(v**p) * w) ** (1.0 / p))


def frequency_restrict(f: GridFunction, lam: int, gamma: int, mu: int, C0: float) -> GridFunction:
    """Sharp cut of f̂ to C0 √n 2^{γ-λ} ≤ |ξ| ≤ 2^{γ+μ+3}."""
    grid = f.grid
    r = np.sqrt(np.sum(grid.xi_mesh() ** 2, axis=-1))
    lo = C0 * math.sqrt(grid.n) * 2.0 ** (gamma - lam)
    hi = 2.0 ** (gamma + mu + 3)
    mask = (r >= lo) & (r <= hi)
    return idft(GridFunction(grid, dft(f).values * mask, freq=True))


def band_range(grid: TorusGrid, lam: int, mu: int, C0: float) -> range:
    """All γ for which the band of frequency_restrict meets the lattice."""
    rmin = 1.0 / grid.L
    rmax = math.sqrt(grid.n) * (grid.G // 2) / grid.L
    g_lo = math.floor(math.log2(rmin)) - mu - 4
    g_hi = math.ceil(math.log2(rmax / (C0 * math.sqrt(grid.n)))) + lam + 1
    return range(g_lo, g_hi + 1)


# ------------------------------------------------------- Littlewood-Paley


def smooth_step(t) -> np.ndarray:
    """C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def _beta(r) -> np.ndarray:
    # 1 on [0, 1/2], 0 on [1, ∞)
    return 1.0 - smooth_step(2.0 * np.asarray(r, dtype=float) - 1.0)


@dataclass(frozen=True)
class LPWindow:
    """Radial window Φ̂(ξ) = β(|ξ|/2) - β(|ξ|) on (R^n)^m, supported in 1/2 ≤ |ξ| ≤ 2."""

    m: int
    n: int
    samples: np.ndarray = field(repr=False, default=None)

    def profile(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = _beta(r / 2.0) - _beta(r)
        return np.where((r >= 0.5) & (r <= 2.0), out, 0.0)

    def __call__(self, xi) -> np.ndarray:
        """Window at points xi of shape (..., m n)."""
        xi = np.asarray(xi, dtype=float)
        return self.profile(np.sqrt(np.sum(xi**2, axis=-1)))


def build_lp_window(m: int, n: int = 1, resolution: int = 12) -> LPWindow:
    win = LPWindow(m, n)
    r = np.arange(0, 2 * 2**resolution + 1) * 2.0**-resolution
    object.__setattr__(win, "samples", win.profile(r))
    return win


def lp_slice(func, gamma: int, window: LPWindow):
    """σ_γ(ξ) = σ(2^γ ξ) Φ̂(ξ), returned as a callable on points (..., m n)."""

    def piece(xi):
        xi = np.asarray(xi, dtype=float)
        return func(2.0**gamma * xi) * window(xi)

    return piece


def lp_piece(values: np.ndarray, xi: np.ndarray, gamma: int, window: LPWindow) -> np.ndarray:
    """The scale-2^γ piece σ(ξ) Φ̂(2^{-γ} ξ) of samples on the nodes ``xi``."""
    return values * window(2.0**-gamma * np.asarray(xi))


# ------------------------------------------------------- operator handles
#
# The estimator needs, besides T itself, the matrix of the linear map
# f̂_j ↦ T(f) with the other arguments frozen. Rows index the frequency
# nodes of f_j (flattened, centered order), columns the output samples.


class DenseOperator:
    """T_σ for a dense symbol, as an operator handle."""

    def __init__(self, sigma: DenseSymbol):
        _check_budget(sigma.grid, sigma.m)
        self.sigma = sigma
        self.grid = sigma.grid
        self.m = sigma.m

    def apply(self, fs: Sequence[np.ndarray]) -> np.ndarray:
        gfs = [GridFunction(self.grid, f) for f in fs]
        return apply_dense(self.sigma, *gfs).values

    def scaled(self, t: complex) -> "DenseOperator":
        return DenseOperator(DenseSymbol(self.grid, self.m, t * self.sigma.values))

    def partial_matrix(self, j: int, fs: Sequence[np.ndarray]) -> np.ndarray:
        grid, m, n, G = self.grid, self.m, self.grid.n, self.grid.G
        axes = tuple(range(n))
        # move argument j to the front of the symbol
        d_order = list(range(j * n, (j + 1) * n)) + [
            a for a in range(m * n) if not j * n <= a < (j + 1) * n
        ]
        s = np.transpose(self.sigma.values, d_order).reshape((G**n,) + (G,) * ((m - 1) * n))
        others = [_fwd(np.asarray(f, dtype=complex).reshape(grid.shape), axes)
                  for i, f in enumerate(fs) if i != j]
        if m == 1:
            acc = np.zeros((G**n,) + grid.shape, dtype=complex)
            acc.reshape(G**n, -1)[np.arange(G**n), np.arange(G**n)] = s
        else:
            prod = s * _product_hat(others, n)[None]
            idx = _sum_index(grid, m - 1)
            flat = 0
            for ic in idx:
                flat = flat * G + ic
            flat = np.broadcast_to(flat, prod.shape[1:]).ravel()
            acc = np.zeros((G**n, G**n), dtype=complex)
            for row in range(G**n):
                pr = prod[row].ravel()
                acc[row] = np.bincount(flat, pr.real, G**n) + 1j * np.bincount(flat, pr.imag, G**n)
            # shift by the row frequency ξ_j: output index = (row + other) mod G per axis
            acc = acc.reshape((G**n,) + grid.shape)
            rows = np.stack(np.unravel_index(np.arange(G**n), grid.shape), -1) - G // 2
            for r in range(G**n):
                acc[r] = np.roll(acc[r], tuple(rows[r]), axis=axes)
        out = _inv(acc, tuple(range(1, n + 1))) * G ** (-(m - 1) * n / 2)
        return out.reshape(G**n, -1)


class AtomSumOperator:
    """Σ b_k Π L^λ_{k_j} f_j as an operator handle (no dense budget)."""

    def __init__(self, sigma: AtomSymbol, grid: TorusGrid):
        _check_resolution(grid, sigma.lam)
        self.sigma = sigma
        self.grid = grid
        self.m = sigma.m
        self._phase_cache = None

    def apply(self, fs: Sequence[np.ndarray]) -> np.ndarray:
        gfs = [GridFunction(self.grid, f) for f in fs]
        return apply_atomsum(self.sigma, *gfs).values

    def scaled(self, t: complex) -> "AtomSumOperator":
        return AtomSumOperator(self.sigma.scaled(t), self.grid)

    def partial_matrix(self, j: int, fs: Sequence[np.ndarray]) -> np.ndarray:
        grid, n, G = self.grid, self.grid.n, self.grid.G
        gfs = [GridFunction(grid, f) for f in fs]
        proj = _projected(self.sigma, grid, gfs)
        blocks, inv, W, _ = proj[j]
        terms = self.sigma.coeffs.reshape((-1,) + (1,) * n)
        for i, (_, inv_i, _, Lf) in enumerate(proj):
            if i != j:
                terms = terms * Lf[inv_i]
        Q = np.zeros((len(blocks),) + grid.shape, dtype=complex)
        np.add.at(Q, inv, terms)
        # R[ξ, x] = G^{-n/2} e^{2πi x ξ} Σ_κ ω_κ(ξ) Q_κ(x)
        R = W.reshape(len(blocks), -1).T @ Q.reshape(len(blocks), -1)
        return R * self._phase()

    def _phase(self) -> np.ndarray:
        if self._phase_cache is None:
            grid = self.grid
            n = grid.n
            arg = grid.xi_mesh().reshape(-1, n) @ grid.x_mesh().reshape(-1, n).T
            self._phase_cache = np.exp(2j * np.pi * arg) * grid.G ** (-n / 2)
        return self._phase_cache


# ------------------------------------------------------------ file format


def write_grid_function(f: GridFunction, path: str | Path, m: int = 1) -> None:
    """Header ``n m G L`` then one ``re im`` row per sample."""
    with open(path, "w") as fh:
        fh.write(f"{f.grid.n} {m} {f.grid.G} {float(f.grid.L)!r}\n")
        for v in np.asarray(f.values).ravel():
            fh.write(f"{float(v.real)!r} {float(v.imag)!r}\n")


def read_grid_function(path: str | Path) -> tuple[GridFunction, int]:
    with open(path) as fh:
        head = fh.readline().split()
        n, m, G, L = int(head[0]), int(head[1]), int(head[2]), float(head[3])
        data = np.loadtxt(fh, ndmin=2)
    grid = TorusGrid(L, G, n)
    vals = data[:, 0] + 1j * data[:, 1]
    if m == 1:
        return GridFunction(grid, vals), m
    return GridFunction(grid, vals.reshape((G,) * n) if vals.size == G**n else vals), m
