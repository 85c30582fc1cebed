"""Atom families on the frequency side and wavelet coefficients of symbols.

Two families are provided. Bump atoms 2^{λn/2} ω(2^λ ξ - k) come from a
smooth compactly supported profile ω. Wavelet atoms are tensor products
of the Daubechies scaling function (letter ``F``) and wavelet (letter
``M``) with M+1 vanishing moments, sampled by the cascade algorithm.

Symbols are sampled on a :class:`SymbolGrid`, a box of a dyadic lattice
2^{-p} Z^d with d = mn. :func:`analyze` turns such samples into a
:class:`CoefficientTable`; :func:`synthesize` goes back.
"""

from __future__ import annotations

import csv
import functools
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy import signal

__all__ = [
    "ResolutionError",
    "BumpProfile",
    "MotherWavelets",
    "BumpFamily",
    "WaveletFamily",
    "ProductAtom",
    "SymbolGrid",
    "CoefficientTable",
    "build_bump",
    "daubechies_filter",
    "build_daubechies",
    "save_wavelets",
    "load_wavelets",
    "letter_sets",
    "eval_atom",
    "analyze",
    "synthesize",
    "coeff_norms",
    "sobolev_norm",
]

J_CASCADE = 16
LAMBDA_MAX_DEFAULT = 6


class ResolutionError(ValueError):
    """Raised when a grid is too coarse for the requested level."""


# ---------------------------------------------------------------- bump atoms


@dataclass(frozen=True)
class BumpProfile:
    """Smooth bump ω(ξ) = exp(a(1 - 1/(1 - (ξ/ρ)^2))) on |ξ| < ρ, zero elsewhere.

    ``samples`` holds ω on the dyadic nodes i 2^{-resolution}; evaluation
    uses the closed form, so support and peak are exact.
    """

    radius: float
    sharpness: float = 1.0
    resolution: int = 10
    samples: np.ndarray = field(repr=False, default=None)

    def __call__(self, xi) -> np.ndarray:
        t = np.asarray(xi, dtype=float) / self.radius
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        ti = t[inside]
        out[inside] = np.exp(self.sharpness * (1.0 - 1.0 / (1.0 - ti * ti)))
        return out

    @property
    def overlap(self) -> int:
        """Bound on the number of integer translates covering any point."""
        return math.ceil(2 * self.radius) + 1


def build_bump(radius: float, sharpness: float = 1.0, resolution: int = 10) -> BumpProfile:
    if not radius > 0:
        raise ValueError(f"bump radius must be positive, got {radius}")
    if not sharpness > 0:
        raise ValueError(f"sharpness must be positive, got {sharpness}")
    prof = BumpProfile(float(radius), float(sharpness), int(resolution))
    n = math.floor(radius * 2**resolution)
    nodes = np.arange(-n, n + 1) * 2.0**-resolution
    object.__setattr__(prof, "samples", prof(nodes))
    return prof


# ------------------------------------------------------------ Daubechies


def daubechies_filter(M: int) -> np.ndarray:
    """Low-pass filter of the extremal-phase Daubechies wavelet with M+1 moments.

    Spectral factorization: the roots y of the Bernstein-type polynomial
    sum_k binom(K-1+k, k) y^k are mapped to z + 1/z = 2 - 4y, and the root
    of each reciprocal pair inside the unit circle is kept.
    """
    K = M + 1
    coef = [math.comb(K - 1 + k, k) for k in range(K)]
    c = np.array([1.0 + 0j])
    for y in np.roots(coef[::-1]) if K > 1 else []:
        pair = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        c = np.convolve(c, [1.0, -pair[np.argmin(np.abs(pair))]])
    for _ in range(K):
        c = np.convolve(c, [0.5, 0.5])
    h = np.real(c)
    return h * (math.sqrt(2.0) / h.sum())


def _integer_values(h: np.ndarray) -> np.ndarray:
    # φ(0..N) is the eigenvector of T_ij = √2 h_{2i-j} for eigenvalue 1
    N = len(h) - 1
    T = np.zeros((N + 1, N + 1))
    for i in range(N + 1):
        for j in range(N + 1):
            if 0 <= 2 * i - j <= N:
                T[i, j] = math.sqrt(2.0) * h[2 * i - j]
    w, v = np.linalg.eig(T)
    phi = np.real(v[:, np.argmin(np.abs(w - 1.0))])
    phi = phi / phi.sum()
    phi[0] = phi[-1] = 0.0
    return phi


def _cascade(h: np.ndarray, J: int) -> np.ndarray:
    """Scaling function on the nodes i 2^{-J}, 0 ≤ i ≤ N 2^J."""
    vals = _integer_values(h)
    N = len(h) - 1
    for j in range(1, J + 1):
        s = 2 ** (j - 1)
        new = np.zeros(N * 2**j + 1)
        for mm, hm in enumerate(h):
            new[mm * s:mm * s + len(vals)] += hm * vals
        vals = math.sqrt(2.0) * new
    return vals


def _inverse_filter(phi_int: np.ndarray, tol: float = 1e-16) -> tuple[np.ndarray, int]:
    """Two-sided convolution inverse of the integer samples of φ.

    Returns (r, t0): r[i] is the tap at offset t0 + i.
    """
    size = 1 << 16
    s = np.zeros(size)
    s[: len(phi_int)] = phi_int
    spec = np.fft.fft(s)
    if np.min(np.abs(spec)) < 1e-8:
        raise ValueError("integer samples of the scaling function are not invertible")
    r = np.fft.fftshift(np.fft.ifft(1.0 / spec).real)
    a = np.abs(r)
    keep = np.nonzero(a > tol * a.max())[0]
    lo, hi = keep.min(), keep.max()
    return r[lo:hi + 1].copy(), int(lo - size // 2)


@dataclass(frozen=True)
class MotherWavelets:
    """Scaling function and wavelet of order M sampled on a 2^{-J} grid.

    Both are supported in [0, C0] with C0 = 2M+1. ``father`` and
    ``mother`` hold the samples at x = i 2^{-J}.
    """

    M: int
    J: int
    h: np.ndarray = field(repr=False)
    father: np.ndarray = field(repr=False)
    mother: np.ndarray = field(repr=False)

    @property
    def C0(self) -> int:
        return len(self.h) - 1

    @property
    def g(self) -> np.ndarray:
        L = len(self.h)
        return np.array([(-1) ** n * self.h[L - 1 - n] for n in range(L)])

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(len(self.father)) * 2.0**-self.J

    def table(self, letter: str) -> np.ndarray:
        if letter == "F":
            return self.father
        if letter == "M":
            return self.mother
        raise ValueError(f"letter must be F or M, got {letter!r}")

    def __call__(self, letter: str, x) -> np.ndarray:
        """ψ_letter(x); exact table lookup on 2^{-J} nodes, linear in between."""
        tab = self.table(letter)
        u = np.asarray(x, dtype=float) * 2.0**self.J
        return np.interp(u, np.arange(len(tab), dtype=float), tab, left=0.0, right=0.0)

    def moment(self, letter: str, alpha: int) -> float:
        """∫ x^α ψ_letter(x) dx by the rectangle rule on the cascade grid."""
        return float(np.sum(self.nodes**alpha * self.table(letter)) * 2.0**-self.J)

    def inner(self, a: str, b: str, shift: int = 0, level: int = 0) -> float:
        """<ψ_a, 2^{level/2} ψ_b(2^level · - shift)> by quadrature on the cascade grid."""
        ta, tb = self.table(a), self.table(b)
        idx = np.arange(len(ta)) * 2**level - shift * 2**self.J
        ok = (idx >= 0) & (idx < len(tb))
        return float(np.sum(ta[ok] * tb[idx[ok]]) * 2.0 ** (level / 2 - self.J))

    @functools.cached_property
    def prefilter(self) -> tuple[np.ndarray, int]:
        step = 2**self.J
        return _inverse_filter(self.father[::step])


@functools.lru_cache(maxsize=None)
def build_daubechies(M: int, J: int = J_CASCADE) -> MotherWavelets:
    """Daubechies pair with M+1 vanishing moments, refined J times."""
    if not isinstance(M, (int, np.integer)) or not 1 <= M <= 10:
        raise ValueError(f"M must be an integer in 1..10, got {M!r}")
    h = daubechies_filter(int(M))
    phi = _cascade(h, J)
    L = len(h)
    g = np.array([(-1) ** n * h[L - 1 - n] for n in range(L)])
    # ψ(x) = √2 Σ g_n φ(2x - n); on nodes i 2^{-J} the argument is node 2i - n 2^J
    psi = np.zeros_like(phi)
    i2 = 2 * np.arange(len(phi))
    for n, gn in enumerate(g):
        idx = i2 - n * 2**J
        ok = (idx >= 0) & (idx < len(phi))
        psi[ok] += gn * phi[idx[ok]]
    psi *= math.sqrt(2.0)
    for a in (h, phi, psi):
        a.setflags(write=False)
    return MotherWavelets(int(M), J, h, phi, psi)


def save_wavelets(w: MotherWavelets, path: str | Path) -> None:
    """Plain text: header ``M J`` then one ``father mother`` pair per node."""
    with open(path, "w") as fh:
        fh.write(f"{w.M} {w.J}\n")
        for a, b in zip(w.father, w.mother):
            fh.write(f"{float(a)!r} {float(b)!r}\n")


def load_wavelets(path: str | Path) -> MotherWavelets:
    with open(path) as fh:
        M, J = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    return MotherWavelets(M, J, daubechies_filter(M), data[:, 0].copy(), data[:, 1].copy())


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class BumpFamily:
    profile: BumpProfile
    n: int = 1
    kind = "bump"

    def axis(self, lam: int, k: int, xi, letter: str | None = None) -> np.ndarray:
        return 2.0 ** (lam / 2) * self.profile(2.0**lam * np.asarray(xi) - k)

    def extent(self, lam: int, k: int) -> tuple[float, float]:
        r = self.profile.radius
        return ((k - r) * 2.0**-lam, (k + r) * 2.0**-lam)


@dataclass(frozen=True)
class WaveletFamily:
    wavelets: MotherWavelets
    n: int = 1
    kind = "wavelet"

    def axis(self, lam: int, k: int, xi, letter: str | None = "M") -> np.ndarray:
        return 2.0 ** (lam / 2) * self.wavelets(letter, 2.0**lam * np.asarray(xi) - k)

    def extent(self, lam: int, k: int) -> tuple[float, float]:
        return (k * 2.0**-lam, (k + self.wavelets.C0) * 2.0**-lam)


@dataclass(frozen=True)
class ProductAtom:
    """Ψ^λ_{G,k}: level, letter string of length mn, flat integer position."""

    lam: int
    G: str
    k: tuple[int, ...]

    def __post_init__(self):
        if len(self.G) != len(self.k):
            raise ValueError("letter string and position must have equal length")
        if set(self.G) - {"F", "M"}:
            raise ValueError(f"letters must be F or M, got {self.G!r}")
        if self.lam >= 1 and set(self.G) == {"F"}:
            raise ValueError("the all-F letter string is only allowed at level 0")


def letter_sets(lam: int, d: int) -> list[str]:
    """Admissible letter strings at level lam in dimension d."""
    out = ["".join(t) for t in itertools.product("FM", repeat=d)]
    return out if lam == 0 else out[1:]


# ------------------------------------------------------------------- grids


@dataclass(frozen=True)
class SymbolGrid:
    """Box of the lattice h Z^d: axis a holds nodes (lo[a] + i) h, 0 ≤ i < shape[a]."""

    spacing: float
    lo: tuple[int, ...]
    shape: tuple[int, ...]

    @classmethod
    def dyadic(cls, p: int, lo: Sequence[int], shape: Sequence[int]) -> "SymbolGrid":
        return cls(2.0**-p, tuple(int(v) for v in lo), tuple(int(v) for v in shape))

    @classmethod
    def box(cls, p: int, radius: float, d: int) -> "SymbolGrid":
        """Symmetric box [-radius, radius]^d at spacing 2^{-p}."""
        r = math.ceil(radius * 2**p)
        return cls.dyadic(p, (-r,) * d, (2 * r + 1,) * d)

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def level(self) -> int | None:
        p = -math.log2(self.spacing)
        return int(round(p)) if abs(p - round(p)) < 1e-12 else None

    def axis(self, a: int) -> np.ndarray:
        return (self.lo[a] + np.arange(self.shape[a])) * self.spacing

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape (*shape, d)."""
        return np.stack(np.meshgrid(*[self.axis(a) for a in range(self.d)], indexing="ij"), -1)

    def radius2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for a in range(self.d):
            sl = [None] * self.d
            sl[a] = slice(None)
            out = out + self.axis(a)[tuple(sl)] ** 2
        return out

    def check(self, lam: int) -> None:
        if self.spacing > 2.0**-lam / 8 * (1 + 1e-12):
            raise ResolutionError(
                f"grid spacing {self.spacing} does not resolve level {lam}"
            )


def _family_axis(family, lam, G, a, k, xi):
    letter = None if G is None else G[a]
    return family.axis(lam, k, xi, letter)


def eval_atom(family, lam: int, G: str | None, k: Sequence[int], grid: SymbolGrid) -> np.ndarray:
    """Samples of the product atom at level lam, letters G, position k."""
    k = tuple(int(c) for c in np.ravel(k))
    if len(k) != grid.d:
        raise ValueError(f"position has {len(k)} coordinates, grid has {grid.d}")
    grid.check(lam)
    out = np.ones(())
    for a in range(grid.d):
        out = np.multiply.outer(out, _family_axis(family, lam, G, a, k[a], grid.axis(a)))
    return out


# ------------------------------------------------------- coefficient table


@dataclass
class CoefficientTable:
    """Wavelet coefficients stored as dense blocks per (λ, G).

    ``blocks[(lam, G)] = (offset, values)`` where values[i] is the
    coefficient at k = offset + i (multi-index).
    """

    d: int
    blocks: dict = field(default_factory=dict)
    source: str = ""

    def levels(self) -> list[int]:
        return sorted({lam for lam, _ in self.blocks})

    def level_values(self, lam: int) -> np.ndarray:
        parts = [v.ravel() for (l, _), (_, v) in sorted(self.blocks.items()) if l == lam]
        return np.concatenate(parts) if parts else np.zeros(0)

    def get(self, lam: int, G: str, k: Sequence[int]) -> complex:
        if (lam, G) not in self.blocks:
            return 0.0
        off, vals = self.blocks[(lam, G)]
        idx = tuple(int(c) - o for c, o in zip(k, off))
        if any(i < 0 or i >= s for i, s in zip(idx, vals.shape)):
            return 0.0
        return vals[idx]

    def items(self, tol: float = 0.0) -> Iterator[tuple[int, str, tuple[int, ...], complex]]:
        """(λ, G, k, b) for every |b| > tol, in sorted order."""
        for (lam, G), (off, vals) in sorted(self.blocks.items()):
            for idx in zip(*np.nonzero(np.abs(vals) > tol)):
                yield lam, G, tuple(int(i) + o for i, o in zip(idx, off)), vals[idx]

    def positions(self, lam: int, G: str) -> np.ndarray:
        """Integer positions of a block, shape (*block_shape, d)."""
        off, vals = self.blocks[(lam, G)]
        axes = [o + np.arange(s) for o, s in zip(off, vals.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1)

    def max_abs(self) -> float:
        return max((float(np.abs(v).max()) for _, v in self.blocks.values() if v.size), default=0.0)

    def write_csv(self, path: str | Path, tol: float = 0.0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "G", "k", "re", "im"])
            for lam, G, k, b in self.items(tol):
                b = complex(b)
                w.writerow([lam, G, " ".join(map(str, k)), repr(b.real), repr(b.imag)])

    @classmethod
    def read_csv(cls, path: str | Path) -> "CoefficientTable":
        entries: dict = {}
        d = 0
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                k = tuple(int(t) for t in row["k"].split())
                d = len(k)
                b = complex(float(row["re"]), float(row["im"]))
                entries.setdefault((int(row["lambda"]), row["G"]), {})[k] = b
        tab = cls(d)
        for key, pts in entries.items():
            ks = np.array(list(pts))
            off = ks.min(axis=0)
            vals = np.zeros(tuple(ks.max(axis=0) - off + 1), dtype=complex)
            for k, b in pts.items():
                vals[tuple(np.subtract(k, off))] = b
            tab.blocks[key] = (tuple(int(o) for o in off), vals)
        return tab


def coeff_norms(table: CoefficientTable, lam: int, q: float) -> tuple[float, float]:
    """(l^∞, l^q) norms of all coefficients at level lam."""
    if not q > 0:
        raise ValueError("q must be positive")
    v = np.abs(table.level_values(lam))
    if v.size == 0:
        return 0.0, 0.0
    return float(v.max()), float(np.sum(v**q) ** (1.0 / q))


# -------------------------------------------------------------- analysis


def _prefilter(F: np.ndarray, lo: Sequence[int], w: MotherWavelets, p: int):
    """Scaling coefficients c at level p with Σ_k c_k 2^{p/2} φ(2^p ξ - k) = F on nodes."""
    r, t0 = w.prefilter
    c = F.astype(complex) if np.iscomplexobj(F) else F.astype(float)
    for a in range(F.ndim):
        shape = [1] * F.ndim
        shape[a] = len(r)
        c = signal.oaconvolve(c, r.reshape(shape), mode="full", axes=a)
    return c * 2.0 ** (-p * F.ndim / 2), tuple(o + t0 for o in lo)


def _step(a: np.ndarray, off: int, filt: np.ndarray, axis: int):
    """out_k = Σ_n filt_n a_{2k+n} along one axis, with zero extension."""
    N = len(filt) - 1
    n0 = off
    n1 = off + a.shape[axis] - 1
    k0 = -((N - n0) // 2)  # ceil((n0 - N) / 2)
    k1 = n1 // 2
    size = k1 - k0 + 1
    pad_lo = n0 - 2 * k0
    # padded index u corresponds to lattice index 2 k0 + u
    total = 2 * size + N
    pad = [(0, 0)] * a.ndim
    pad[axis] = (pad_lo, total - pad_lo - a.shape[axis])
    ap = np.pad(a, pad)
    out = 0
    for n, fn in enumerate(filt):
        sl = [slice(None)] * a.ndim
        sl[axis] = slice(n, n + 2 * size - 1, 2)
        out = out + fn * ap[tuple(sl)]
    return out, k0


def analyze(
    F: np.ndarray,
    grid: SymbolGrid,
    wavelets: MotherWavelets,
    lam_max: int = LAMBDA_MAX_DEFAULT,
) -> CoefficientTable:
    """Wavelet coefficients b^λ_{G,k} = <F, Ψ^λ_{G,k}> for all λ ≤ lam_max.

    F is extended by zero outside the grid. The samples are first
    converted to the unique scaling expansion at the grid level p that
    interpolates them (exact when F lies in that space, e.g. a sampled
    atom of level < p), then the two-scale relations carry the
    coefficients down to level 0.
    """
    F = np.asarray(F)
    if F.shape != grid.shape:
        raise ValueError(f"samples have shape {F.shape}, grid has {grid.shape}")
    p = grid.level
    if p is None:
        raise ResolutionError("analysis needs a dyadic grid spacing 2^-p")
    grid.check(lam_max)
    d = grid.d
    table = CoefficientTable(d, source=f"analyze(p={p}, M={wavelets.M})")
    if not np.any(F):
        return table
    approx, off = _prefilter(F, grid.lo, wavelets, p)
    h, g = wavelets.h, wavelets.g
    for j in range(p, 0, -1):
        keep_details = j - 1 <= lam_max
        bands = {"": (approx, off)}
        for a in range(d):
            nxt = {}
            for key, (arr, o) in bands.items():
                lo_arr, k0 = _step(arr, o[a], h, a)
                nxt[key + "F"] = (lo_arr, o[:a] + (k0,) + o[a + 1:])
                if keep_details:
                    hi_arr, k0 = _step(arr, o[a], g, a)
                    nxt[key + "M"] = (hi_arr, o[:a] + (k0,) + o[a + 1:])
            bands = nxt
        approx, off = bands.pop("F" * d)
        for G, (arr, o) in bands.items():
            table.blocks[(j - 1, G)] = (o, arr)
    table.blocks[(0, "F" * d)] = (off, approx)
    return table


def synthesize(table: CoefficientTable, grid: SymbolGrid, wavelets: MotherWavelets) -> np.ndarray:
    """Σ b^λ_{G,k} Ψ^λ_{G,k} evaluated on the grid nodes."""
    out = np.zeros(grid.shape, dtype=complex)
    fam = WaveletFamily(wavelets)
    for (lam, G), (off, vals) in sorted(table.blocks.items()):
        grid.check(lam)
        block = vals
        for a in range(grid.d):
            ks = off[a] + np.arange(vals.shape[a])
            xi = grid.axis(a)
            A = fam.axis(lam, 0, xi[:, None] - ks[None, :] * 2.0**-lam, G[a])
            block = np.tensordot(A, block, axes=([1], [a]))
            block = np.moveaxis(block, 0, a)
        out += block
    return out


# ---------------------------------------------------------------- Sobolev


def sobolev_norm(F: np.ndarray, spacing: float, s: float, q: float) -> float:
    """L^q norm of (I - Δ)^{s/2} F for periodic samples F on a box of spacing h.

    The multiplier is (1 + 4π^2 |ζ|^2)^{s/2} in the dual variable ζ of
    the box, i.e. (1 + |ω|^2)^{s/2} for angular frequency ω = 2πζ.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if not q > 1:
        raise ValueError("q must exceed 1")
    F = np.asarray(F)
    if s == 0:
        G = F
    else:
        mult = np.ones(())
        z2 = np.zeros(())
        for a, size in enumerate(F.shape):
            z = np.fft.fftfreq(size, d=spacing)
            z2 = np.add.outer(z2, z**2)
        mult = (1.0 + 4.0 * math.pi**2 * z2) ** (s / 2)
        G = np.fft.ifftn(mult * np.fft.fftn(F))
    return float((np.sum(np.abs(G) ** q) * spacing**F.ndim) ** (1.0 / q))
