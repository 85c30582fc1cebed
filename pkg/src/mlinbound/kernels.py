"""Rough homogeneous kernels and Hörmander-type symbols.

A rough kernel is K(y) = Ω(y/|y|) / |y|^d on R^d, d = mn, with Ω of
mean zero on the sphere. Its pieces are

    K^γ(y)   = Φ̂(2^γ y) K(y)
    K^γ_μ    = Φ_{μ+γ} * K^γ,    so  K̂^γ_μ(ξ) = Φ̂(2^{-μ-γ} ξ) K̂^0(2^{-γ} ξ),

and K_μ = Σ_γ K^γ_μ. Everything is computed on the frequency side.
For d = 2 the transform of K^0 uses the angular Fourier series of Ω,

    K̂^0(ξ) = 2π Σ_k c_k (-i)^k e^{ikφ} ∫_{1/2}^{2} Φ̂(r) J_k(2πr|ξ|) dr / r,

and a direct FFT of sampled K^0 serves as an independent route (and
the only one for d = 3).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import interpolate, special

from .engine import LPWindow, build_lp_window
from .wavelets import (
    CoefficientTable,
    MotherWavelets,
    ResolutionError,
    SymbolGrid,
    analyze,
    build_daubechies,
    coeff_norms,
    sobolev_norm,
)

__all__ = [
    "SingularPointError",
    "SphereFunction",
    "sphere_from_function",
    "read_sphere",
    "write_sphere",
    "kernel_eval",
    "PieceGrid",
    "K0_hat",
    "K0_hat_fft",
    "dyadic_piece",
    "RoughPieces",
    "rough_pieces",
    "assemble_Kmu",
    "gamma_range",
    "annulus_mass",
    "rough_coeffs",
    "shell_violations",
    "HormanderSymbol",
    "hormander_make",
    "hormander_slices",
    "hormander_coeffs",
    "HormanderReport",
]

MEAN_TOL = 1e-10
TRUNCATION_TOL = 1e-8
MU_RANGE = (-2, 10)


class SingularPointError(ValueError):
    """The kernel was evaluated at the origin."""


# ----------------------------------------------------------------- sphere


@dataclass(frozen=True)
class SphereFunction:
    """Ω sampled at quadrature nodes of S^{d-1}, d = mn ∈ {2, 3}.

    For d = 2 ``angles`` has shape (K,) (polar angle θ); for d = 3 it has
    shape (K, 2) holding (θ, φ) with θ the polar angle from the last axis.
    """

    mn: int
    angles: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    q: float = 2.0

    def __post_init__(self):
        if self.mn not in (2, 3):
            raise ValueError("only mn = 2 or 3 is supported")
        for name in ("angles", "weights", "values"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        scale = max(1.0, float(np.sum(self.weights * np.abs(self.values))))
        if abs(self.mean()) > MEAN_TOL * scale:
            raise ValueError(f"Ω is not mean-zero: quadrature mean {self.mean():.3e}")

    def mean(self) -> float:
        return float(np.sum(self.weights * self.values))

    def lq_norm(self, q: float | None = None) -> float:
        q = self.q if q is None else q
        return float(np.sum(self.weights * np.abs(self.values) ** q) ** (1.0 / q))

    def directions(self) -> np.ndarray:
        if self.mn == 2:
            return np.stack([np.cos(self.angles), np.sin(self.angles)], -1)
        th, ph = self.angles[:, 0], self.angles[:, 1]
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        """Ω at unit vectors u (..., d), interpolated linearly between nodes."""
        u = np.asarray(u, dtype=float)
        if self.mn == 2:
            K = len(self.angles)
            t = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi) * K / (2 * np.pi)
            i0 = np.floor(t).astype(int) % K
            frac = t - np.floor(t)
            return (1 - frac) * self.values[i0] + frac * self.values[(i0 + 1) % K]
        nth, nph = self._shape3
        grid = self.values.reshape(nth, nph)
        nodes = np.cos(self.angles[::nph, 0])
        order = np.argsort(nodes)
        # close the longitude circle so interpolation wraps around
        table = np.concatenate([grid[order], grid[order][:, :1]], axis=1)
        ph_nodes = 2 * np.pi * np.arange(nph + 1) / nph
        interp = interpolate.RegularGridInterpolator(
            (nodes[order], ph_nodes), table, bounds_error=False, fill_value=None
        )
        cth = np.clip(u[..., 2], nodes.min(), nodes.max())
        ph = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
        return interp(np.stack([cth, ph], -1))

    @property
    def _shape3(self) -> tuple[int, int]:
        nph = int(np.sum(self.angles[:, 0] == self.angles[0, 0]))
        return len(self.angles) // nph, nph

    def harmonics(self, tol: float = 1e-13, kmax: int = 256) -> dict[int, complex]:
        """Angular Fourier coefficients c_k with Ω(θ) = Σ c_k e^{ikθ} (d = 2)."""
        if self.mn != 2:
            raise ValueError("harmonics are defined for mn = 2")
        K = len(self.angles)
        c = np.fft.fft(self.values) / K
        ks = np.fft.fftfreq(K, 1.0 / K).astype(int)
        big = np.abs(c) > tol * max(np.abs(c).max(), 1e-300)
        return {int(k): complex(v) for k, v, b in zip(ks, c, big) if b and abs(k) <= kmax}


def sphere_from_function(
    func: Callable[[np.ndarray], np.ndarray],
    mn: int = 2,
    q: float = 2.0,
    resolution: tuple[int, ...] | int | None = None,
    center: bool = False,
) -> SphereFunction:
    """Sample Ω = func(unit vectors) on the standard quadrature.

    mn = 2: 2048 uniform angles with equal weights. mn = 3: 64 Gauss
    nodes in cos θ times 128 uniform longitudes. ``center`` subtracts
    the quadrature mean; otherwise a nonzero mean is an error.
    """
    if mn == 2:
        K = resolution or 2048
        th = 2 * np.pi * np.arange(K) / K
        w = np.full(K, 2 * np.pi / K)
        angles = th
        u = np.stack([np.cos(th), np.sin(th)], -1)
    elif mn == 3:
        nth, nph = resolution or (64, 128)
        x, wx = np.polynomial.legendre.leggauss(nth)
        th = np.arccos(x)
        ph = 2 * np.pi * np.arange(nph) / nph
        T, P = np.meshgrid(th, ph, indexing="ij")
        angles = np.stack([T.ravel(), P.ravel()], -1)
        w = np.repeat(wx, nph) * (2 * np.pi / nph)
        u = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    else:
        raise ValueError("only mn = 2 or 3 is supported")
    vals = np.asarray(func(u), dtype=float).reshape(-1)
    if center:
        vals = vals - np.sum(w * vals) / np.sum(w)
    return SphereFunction(mn, angles, w, vals, q)


def write_sphere(omega: SphereFunction, path: str | Path) -> None:
    """Header ``mn q`` then ``angle(s) value`` rows."""
    with open(path, "w") as fh:
        fh.write(f"{omega.mn} {float(omega.q)!r}\n")
        ang = omega.angles.reshape(len(omega.values), -1)
        for a, v in zip(ang, omega.values):
            fh.write(" ".join(repr(float(t)) for t in a) + f" {float(v)!r}\n")


def read_sphere(path: str | Path) -> SphereFunction:
    """Read a sphere file; weights are rebuilt from the node layout."""
    with open(path) as fh:
        head = fh.readline().split()
        mn, q = int(head[0]), float(head[1])
        data = np.loadtxt(fh, ndmin=2)
    if mn == 2:
        K = len(data)
        return SphereFunction(2, data[:, 0], np.full(K, 2 * np.pi / K), data[:, 1], q)
    th, ph, vals = data[:, 0], data[:, 1], data[:, 2]
    nph = int(np.sum(th == th[0]))
    nth = len(th) // nph
    _, wx = np.polynomial.legendre.leggauss(nth)
    w = np.repeat(wx, nph) * (2 * np.pi / nph)
    return SphereFunction(3, np.stack([th, ph], -1), w, vals, q)


def kernel_eval(omega: SphereFunction, y) -> np.ndarray:
    """K(y) = Ω(y/|y|) / |y|^{mn}."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != omega.mn:
        raise ValueError(f"points must have {omega.mn} coordinates")
    r = np.sqrt(np.sum(y**2, axis=-1))
    if np.any(r == 0):
        raise SingularPointError("the kernel is singular at y = 0")
    return omega(y / r[..., None]) / r**omega.mn


# ---------------------------------------------------- transform of K^0


_RADIAL_CACHE: dict = {}
_RADIAL_STEP = 1.0 / 128
# K^0 is smooth with compact support, so I_k(ρ) < 1e-16 past this radius
RADIAL_MAX = 256.0


def _radial_integral(k: int, rho: np.ndarray, window: LPWindow) -> np.ndarray:
    """I_k(ρ) = ∫_{1/2}^{2} Φ̂(r) J_k(2πrρ) dr / r by Gauss-Legendre, in chunks."""
    rho = np.asarray(rho, dtype=float)
    vals = np.empty_like(rho)
    seg = 1024
    for s in range(0, len(rho), seg):
        part = rho[s:s + seg]
        x, w = np.polynomial.legendre.leggauss(64 + int(5 * part.max()))
        r = 1.25 + 0.75 * x
        w = 0.75 * w * window.profile(r) / r
        vals[s:s + seg] = special.jv(k, 2 * np.pi * np.outer(part, r)) @ w
    return vals


def _radial_table(k: int, rho_max: float, window: LPWindow):
    """Spline of I_k on [0, min(rho_max, RADIAL_MAX)]; zero beyond RADIAL_MAX."""
    top = min(2.0 ** math.ceil(math.log2(max(rho_max, 1.0))), RADIAL_MAX)
    key = (k, top)
    if key in _RADIAL_CACHE:
        return _RADIAL_CACHE[key]
    rho = np.arange(0, top + 8 * _RADIAL_STEP, _RADIAL_STEP)
    spline = interpolate.make_interp_spline(rho, _radial_integral(k, rho, window), k=5)

    def table(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= top, spline(np.minimum(x, top)), 0.0)

    _RADIAL_CACHE[key] = table
    return table


def K0_hat(omega: SphereFunction, xi: np.ndarray) -> np.ndarray:
    """K̂^0 at points xi (..., 2) by the angular series (mn = 2)."""
    if omega.mn != 2:
        raise ValueError("the angular series route is implemented for mn = 2; use K0_hat_fft")
    xi = np.asarray(xi, dtype=float)
    rho = np.sqrt(np.sum(xi**2, axis=-1))
    phi = np.arctan2(xi[..., 1], xi[..., 0])
    window = build_lp_window(2, 1)
    out = np.zeros(rho.shape, dtype=complex)
    if rho.size == 0:
        return out
    rmax = float(rho.max())
    for k, c in omega.harmonics().items():
        spline = _radial_table(abs(k), rmax, window)
        Ik = spline(rho)
        if k < 0 and k % 2:
            Ik = -Ik
        out += 2 * np.pi * c * (-1j) ** k * np.exp(1j * k * phi) * Ik
    return out


@dataclass(frozen=True)
class PieceGrid:
    """Periodic box [-P/2, P/2)^d with N nodes per axis; frequencies j/P."""

    P: float
    N: int
    d: int = 2

    @property
    def dy(self) -> float:
        return self.P / self.N

    def y(self) -> np.ndarray:
        return self.P * (np.arange(self.N) / self.N - 0.5)

    def xi(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) / self.P

    def mesh(self, which: str = "y") -> np.ndarray:
        ax = self.y() if which == "y" else self.xi()
        return np.stack(np.meshgrid(*[ax] * self.d, indexing="ij"), -1)

    def to_physical(self, Khat: np.ndarray) -> np.ndarray:
        """Samples of ∫ K̂(ξ) e^{2πi y·ξ} dξ from lattice values of K̂."""
        ax = tuple(range(self.d))
        v = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(Khat, axes=ax), axes=ax), axes=ax)
        sign = self._sign()
        return v * sign * (self.N / self.P) ** self.d

    def to_frequency(self, K: np.ndarray) -> np.ndarray:
        ax = tuple(range(self.d))
        v = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(K, axes=ax), axes=ax), axes=ax)
        return v * self._sign() * self.dy**self.d

    def _sign(self) -> np.ndarray:
        # centered-index phase is trivial because both grids are centered at index N/2
        return np.ones(())


def K0_hat_fft(omega: SphereFunction, grid: PieceGrid) -> np.ndarray:
    """K̂^0 on the frequency lattice of ``grid`` from physical samples of K^0."""
    if grid.P < 4:
        raise ResolutionError("the physical box must contain |y| ≤ 2")
    y = grid.mesh("y")
    r = np.sqrt(np.sum(y**2, axis=-1))
    window = build_lp_window(1, grid.d)
    mask = (r >= 0.5) & (r <= 2.0)
    K = np.zeros(r.shape)
    K[mask] = window.profile(r[mask]) * kernel_eval(omega, y[mask])
    return grid.to_frequency(K)


def _K0_hat_at(omega: SphereFunction, xi: np.ndarray) -> np.ndarray:
    if omega.mn == 2:
        return K0_hat(omega, xi)
    raise ValueError("pointwise K̂^0 needs mn = 2; sample on a PieceGrid with K0_hat_fft")


def _piece_hat(omega, gamma: int, mu: int, xi: np.ndarray, window: LPWindow) -> np.ndarray:
    out = np.zeros(xi.shape[:-1], dtype=complex)
    w = window(2.0 ** -(mu + gamma) * xi)
    on = w != 0
    if np.any(on):
        out[on] = w[on] * _K0_hat_at(omega, 2.0**-gamma * xi[on])
    return out


def dyadic_piece(omega: SphereFunction, gamma: int, mu: int, grid: PieceGrid):
    """(K^γ_μ samples, K̂^γ_μ samples) on ``grid``."""
    if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
        raise ValueError(f"μ must lie in {MU_RANGE}")
    top = (grid.N // 2 - 1) / grid.P
    if 2.0 ** (mu + gamma + 1) > top:
        raise ResolutionError(f"grid frequencies reach {top}, piece needs {2.0 ** (mu + gamma + 1)}")
    if 2.0 ** (mu + gamma - 1) < 8.0 / grid.P:
        raise ResolutionError("frequency spacing does not resolve the piece")
    window = build_lp_window(1, grid.d)
    Khat = _piece_hat(omega, gamma, mu, grid.mesh("xi"), window)
    return grid.to_physical(Khat), Khat


@dataclass
class RoughPieces:
    grid: PieceGrid
    mus: tuple[int, ...]
    K0: dict = field(repr=False, default_factory=dict)
    K0_hat: dict = field(repr=False, default_factory=dict)
    pieces: dict = field(repr=False, default_factory=dict)


def rough_pieces(omega, mus: Sequence[int], gammas: Sequence[int], grid: PieceGrid) -> RoughPieces:
    out = RoughPieces(grid, tuple(mus))
    for mu in mus:
        out.K0[mu], out.K0_hat[mu] = dyadic_piece(omega, 0, mu, grid)
        for g in gammas:
            if g != 0:
                out.pieces[(g, mu)] = dyadic_piece(omega, g, mu, grid)[0]
        out.pieces[(0, mu)] = out.K0[mu]
    return out


def gamma_range(mu: int, grid: PieceGrid) -> range:
    """All γ whose annulus 2^{μ+γ-1} ≤ |ξ| ≤ 2^{μ+γ+1} meets the lattice."""
    lo = 1.0 / grid.P
    hi = math.sqrt(grid.d) * (grid.N // 2) / grid.P
    return range(math.floor(math.log2(lo)) - mu - 1, math.ceil(math.log2(hi)) - mu + 2)


def assemble_Kmu(omega: SphereFunction, mu: int, gammas: Sequence[int] | None, grid: PieceGrid):
    """(K_μ, K̂_μ) = Σ_γ (K^γ_μ, K̂^γ_μ) on ``grid``; warns on boundary truncation."""
    gammas = list(gamma_range(mu, grid) if gammas is None else gammas)
    window = build_lp_window(1, grid.d)
    xi = grid.mesh("xi")
    total = np.zeros(xi.shape[:-1], dtype=complex)
    mass = []
    for g in sorted(gammas):
        part = _piece_hat(omega, g, mu, xi, window)
        mass.append(float(np.sum(np.abs(part) ** 2)))
        total += part
    tot = float(np.sum(np.abs(total) ** 2))
    if tot > 0 and len(mass) > 1 and max(mass[0], mass[-1]) > TRUNCATION_TOL * tot:
        warnings.warn(
            f"boundary γ terms carry {max(mass[0], mass[-1]) / tot:.2e} of the mass; "
            "the γ range may be truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    return grid.to_physical(total), total


def annulus_mass(omega: SphereFunction, mu: int, inner: float, outer: float,
                 radial_step: float = 1.0 / 64) -> float:
    """Fraction of ∫|K̂^0_μ|^2 carried by inner ≤ |ξ| ≤ outer (mn = 2, polar quadrature).

    Radial midpoint rule over [0, 2^{μ+3}]; only nodes where the window is
    nonzero are integrated, the rest contribute exactly zero. I_k comes
    from the cached radial table, so radii past RADIAL_MAX count as zero.
    """
    window = build_lp_window(2, 1)
    rho = np.arange(radial_step / 2, 2.0 ** (mu + 3), radial_step)
    win = window.profile(rho / 2.0**mu)
    on = win != 0
    rho, win = rho[on], win[on]
    dens = np.zeros_like(rho)
    for k, c in omega.harmonics().items():
        Ik = _radial_table(abs(k), float(rho.max()), window)(rho)
        dens += (2 * np.pi) ** 2 * abs(c) ** 2 * Ik**2
    dens *= 2 * np.pi * rho * win**2
    tot = float(np.sum(dens))
    if tot == 0:
        return 1.0
    sel = (rho >= inner) & (rho <= outer)
    return float(np.sum(dens[sel])) / tot


# ---------------------------------------------------- wavelet coefficients


def _k0mu_samples(omega, mu: int, grid: SymbolGrid) -> np.ndarray:
    window = build_lp_window(1, grid.d)
    r2 = grid.radius2()
    lo, hi = 2.0 ** (mu - 1), 2.0 ** (mu + 1)
    on = (r2 >= lo * lo) & (r2 <= hi * hi)
    out = np.zeros(grid.shape, dtype=complex)
    if np.any(on):
        pts = grid.mesh()[on]
        out[on] = window(2.0**-mu * pts) * _K0_hat_at(omega, pts)
    return out


def rough_coeffs(
    omega: SphereFunction,
    mu: int,
    lam_max: int,
    M: int | MotherWavelets = 3,
    budget: int = 1 << 23,
) -> CoefficientTable:
    """Wavelet coefficients of K̂^0_μ for λ ≤ lam_max (mn = 2)."""
    w = M if isinstance(M, MotherWavelets) else build_daubechies(M)
    if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
        raise ValueError(f"μ must lie in {MU_RANGE}")
    grid = SymbolGrid.box(lam_max + 3, 2.0 ** (mu + 1), omega.mn)
    if math.prod(grid.shape) > budget:
        raise ResolutionError(f"grid of {math.prod(grid.shape)} nodes exceeds the budget {budget}")
    F = _k0mu_samples(omega, mu, grid)
    tab = analyze(F, grid, w, lam_max)
    tab.source = f"K0_mu(mu={mu})"
    return tab


def shell_violations(table: CoefficientTable, mu: int, C0: float, tol: float = 1e-9,
                     spill: float = 0.0) -> int:
    """Count |b| > tol outside 2^{λ+μ-1} - C0√d - spill ≤ |k| ≤ 2^{λ+μ+1} + C0√d + spill."""
    bad = 0
    d = table.d
    for (lam, G), (off, vals) in table.blocks.items():
        k = table.positions(lam, G).astype(float)
        # atom support is k + [0, C0]^d, so measure from the cell centre
        r = np.sqrt(np.sum((k + C0 / 2) ** 2, axis=-1))
        slack = C0 * math.sqrt(d) / 2 + spill
        inside = (r >= 2.0 ** (lam + mu - 1) - slack) & (r <= 2.0 ** (lam + mu + 1) + slack)
        bad += int(np.sum((np.abs(vals) > tol) & ~inside))
    return bad


# -------------------------------------------------------------- Hörmander


@dataclass(frozen=True)
class HormanderSymbol:
    kind: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    mn: int = 2
    q: float = 4.0
    s: float = 2.0
    params: tuple = ()

    def __call__(self, xi) -> np.ndarray:
        return self.func(np.asarray(xi, dtype=float))


def hormander_make(
    kind: str,
    s: float = 2.0,
    q: float = 4.0,
    mn: int = 2,
    t: Sequence[float] = (1.0, -0.5, 0.75),
    func: Callable | None = None,
) -> HormanderSymbol:
    """Built-in symbols.

    ``mihlin``: Π_j (1 + ξ_j^2)^{i t_j / 2}, unimodular and oscillating.
    ``envelope``: (1 + |ξ|^2)^{-s/2}.
    ``sampled``: the user callable ``func`` on points (..., mn).
    """
    if kind == "mihlin":
        ts = tuple(float(v) for v in t[:mn])

        def f(xi):
            out = np.ones(xi.shape[:-1], dtype=complex)
            for j, tj in enumerate(ts):
                out = out * (1.0 + xi[..., j] ** 2) ** (0.5j * tj)
            return out

        return HormanderSymbol(kind, f, mn, q, s, ts)
    if kind == "envelope":
        return HormanderSymbol(kind, lambda xi: (1.0 + np.sum(xi**2, -1)) ** (-s / 2), mn, q, s)
    if kind == "sampled":
        if func is None:
            raise ValueError("the sampled kind needs a callable")
        return HormanderSymbol(kind, func, mn, q, s)
    raise ValueError(f"unknown symbol kind {kind!r}")


def hormander_slices(sigma: HormanderSymbol, gammas: Sequence[int], p: int):
    """σ_γ(ξ) = σ(2^γ ξ) Φ̂(ξ) sampled on the box [-2, 2]^{mn} at spacing 2^{-p}."""
    window = build_lp_window(1, sigma.mn)
    grid = SymbolGrid.box(p, 2.0, sigma.mn)
    xi = grid.mesh()
    w = window(xi)
    on = w != 0
    out = {}
    for g in gammas:
        v = np.zeros(grid.shape, dtype=complex)
        v[on] = sigma(2.0**g * xi[on]) * w[on]
        out[g] = v
    return grid, out


@dataclass
class HormanderReport:
    tables: dict
    lq: dict
    linf: dict
    sobolev: dict


def hormander_coeffs(
    sigma: HormanderSymbol,
    lam_max: int,
    gammas: Sequence[int] = (-2, -1, 0, 1, 2),
    M: int | MotherWavelets = 3,
) -> HormanderReport:
    """Per-γ coefficient tables of σ_γ with sup_γ l^q and l^∞ norms per λ."""
    w = M if isinstance(M, MotherWavelets) else build_daubechies(M)
    grid, slices = hormander_slices(sigma, gammas, lam_max + 3)
    tables, sob = {}, {}
    for g, v in slices.items():
        tables[g] = analyze(v, grid, w, lam_max)
        tables[g].source = f"sigma_gamma(gamma={g})"
        sob[g] = sobolev_norm(v, grid.spacing, sigma.s, sigma.q)
    lq, linf = {}, {}
    for lam in range(lam_max + 1):
        norms = [coeff_norms(t, lam, sigma.q) for t in tables.values()]
        linf[lam] = max(a for a, _ in norms)
        lq[lam] = max(b for _, b in norms)
    return HormanderReport(tables, lq, linf, sob)
