"""Finite lattice point sets in (Z^n)^m and their column combinatorics.

A point is stored as a tuple of m blocks, each block a tuple of n ints.
Axis indices are 0-based throughout (axis j of the math text is ``j - 1``
here). Sets are kept sorted lexicographically on the flattened
coordinates so that iteration and serialization are reproducible.
"""

from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "LatticeSet",
    "ColumnSplit",
    "LevelSetPartition",
    "ShellSpec",
    "project",
    "column",
    "nested_enumeration",
    "split_columns",
    "level_sets",
    "r_max_for",
    "shell_members",
    "shell_splits",
    "read_lattice",
    "write_lattice",
]

Block = tuple[int, ...]
Point = tuple[Block, ...]

MAX_M = 3
MAX_N = 2


def _as_point(p, n: int, m: int) -> Point:
    if isinstance(p, np.ndarray):
        p = p.tolist()
    if n == 1 and len(p) == m and all(isinstance(b, (int, np.integer)) for b in p):
        blocks = tuple((int(b),) for b in p)
    else:
        blocks = tuple(tuple(int(c) for c in b) for b in p)
    if len(blocks) != m or any(len(b) != n for b in blocks):
        raise ValueError(f"point {p!r} does not have {m} blocks of length {n}")
    return blocks


def _flat(p: Point) -> tuple[int, ...]:
    return tuple(c for b in p for c in b)


@dataclass(frozen=True)
class LatticeSet:
    """A duplicate-free finite subset of (Z^n)^m.

    ``points`` accepts blocks as tuples, or plain ints when ``n == 1``.
    """

    n: int
    m: int
    points: tuple[Point, ...] = ()

    def __post_init__(self):
        if not (1 <= self.n <= MAX_N):
            raise ValueError(f"n must be in 1..{MAX_N}, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        pts = {_as_point(p, self.n, self.m) for p in self.points}
        object.__setattr__(self, "points", tuple(sorted(pts, key=_flat)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return _as_point(p, self.n, self.m) in self._lookup

    @property
    def _lookup(self) -> frozenset:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = frozenset(self.points)
            object.__setattr__(self, "_lookup_cache", cached)
        return cached

    def as_array(self) -> np.ndarray:
        """Points as an int array of shape (|U|, m, n)."""
        return np.array(self.points, dtype=np.int64).reshape(len(self), self.m, self.n)

    def norms(self) -> np.ndarray:
        """Euclidean norm |k| of every point, in iteration order."""
        a = self.as_array().reshape(len(self), -1).astype(float)
        return np.sqrt((a**2).sum(axis=1))

    def to_set(self) -> set[Point]:
        return set(self.points)


def _check_axes(axes: Iterable[int], m: int) -> tuple[int, ...]:
    axes = tuple(int(a) for a in axes)
    if len(set(axes)) != len(axes):
        raise ValueError(f"repeated axis in {axes}")
    for a in axes:
        if not 0 <= a < m:
            raise ValueError(f"axis {a} out of range for m={m}")
    return axes


def project(
    U: LatticeSet,
    keep: Sequence[int] | None = None,
    drop: Sequence[int] | None = None,
) -> LatticeSet:
    """Restrict every point of U to the kept axes.

    Exactly one of ``keep`` / ``drop`` is given. Dropping axes (0,) gives
    the complement projection P_{*1}; keeping (j,) gives P_j. The result
    lives in (Z^n)^{m'} with m' the number of kept axes, in increasing
    axis order.
    """
    if (keep is None) == (drop is None):
        raise ValueError("give exactly one of keep or drop")
    if keep is None:
        dropped = _check_axes(drop, U.m)
        keep = [a for a in range(U.m) if a not in dropped]
    kept = sorted(_check_axes(keep, U.m))
    if not kept:
        raise ValueError("projection must keep at least one axis")
    return LatticeSet(U.n, len(kept), tuple(tuple(p[a] for a in kept) for p in U.points))


def column(U: LatticeSet, fixed: Mapping[int, Sequence[int] | int]) -> LatticeSet:
    """Free-axis coordinates of the points of U that agree with ``fixed``.

    ``fixed`` maps axis index to a block. The free axes must be nonempty.
    """
    axes = _check_axes(fixed.keys(), U.m)
    want = {a: _as_point([fixed[a]], U.n, 1)[0] for a in axes}
    free = [a for a in range(U.m) if a not in want]
    if not free:
        raise ValueError("column needs at least one free axis")
    pts = (
        tuple(p[a] for a in free)
        for p in U.points
        if all(p[a] == b for a, b in want.items())
    )
    return LatticeSet(U.n, len(free), tuple(pts))


def _group(points: Iterable[Point], axes: Sequence[int]) -> dict:
    out = defaultdict(list)
    for p in points:
        out[tuple(p[a] for a in axes)].append(p)
    return out


def nested_enumeration(U: LatticeSet, axis_order: Sequence[int]) -> Iterator[Point]:
    """Enumerate U as nested sums over projections and columns.

    With ``axis_order = (j1, ..., jl)`` the outer loop runs over the
    complement projection P_{*j1..jl}U; inside it, k_{jl} runs over the
    projection of the current column onto axis jl, then k_{j(l-1)}, and
    so on down to k_{j1}. Each point of U is produced exactly once.
    """
    order = _check_axes(axis_order, U.m)
    if not order:
        raise ValueError("axis_order must be nonempty")
    rest = [a for a in range(U.m) if a not in order]
    outer = _group(U.points, rest)
    for key in sorted(outer, key=lambda t: tuple(c for b in t for c in b)):
        yield from _inner(outer[key], list(order))


def _inner(points: list[Point], order: list[int]) -> Iterator[Point]:
    axis = order[-1]
    groups = _group(points, [axis])
    for key in sorted(groups):
        if len(order) == 1:
            yield from groups[key]
        else:
            yield from _inner(groups[key], order[:-1])


@dataclass(frozen=True)
class ColumnSplit:
    """The m-way column split U = U^1 ∪ ... ∪ U^m of a set with |U| ≤ N."""

    parts: tuple[LatticeSet, ...]
    thresholds: tuple[float, ...]
    N: int

    def projection_sizes(self) -> list[int]:
        """|P_{*1..j} U^j| for j = 1..m-1."""
        return [
            len({p[j:] for p in part.points}) for j, part in enumerate(self.parts[:-1], 1)
        ]

    def max_column_sizes(self) -> list[int]:
        """Largest column of U^j over k^{*1..j-1}, for j = 2..m."""
        out = []
        for j, part in enumerate(self.parts[1:], 2):
            groups = _group(part.points, range(j - 1, part.m))
            out.append(max((len(v) for v in groups.values()), default=0))
        return out

    def certificate(self) -> dict[str, bool]:
        """Recount both cardinality bounds with exact integer arithmetic."""
        m, N = len(self.parts), self.N
        proj_ok = all(
            (s**m) * N**j < N**m for j, s in enumerate(self.projection_sizes(), 1)
        )
        col_ok = all(
            c**m <= N ** (j - 1) for j, c in enumerate(self.max_column_sizes(), 2)
        )
        return {"projection": proj_ok, "column": col_ok}

    def write_csv(self, path: str | Path) -> None:
        proj = self.projection_sizes()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["part_index", "size", "projection_bound", "projection_actual"])
            for j, part in enumerate(self.parts, 1):
                if j < len(self.parts):
                    bound = self.N / self.thresholds[j - 1]
                    w.writerow([j, len(part), repr(bound), proj[j - 1]])
                else:
                    w.writerow([j, len(part), "nan", "nan"])


def _exceeds(size: int, N: int, j: int, m: int) -> bool:
    # size > N^{j/m}, decided in exact integer arithmetic
    return size**m > N**j


def split_columns(U: LatticeSet, N: int) -> ColumnSplit:
    """Peel U into U^1..U^m by column-size thresholds N_j = N^{j/m}.

    U^j collects the points of the current remainder whose column over
    k^{*1..j}, counted inside that remainder, has more than N_j points.
    """
    if U.m < 2:
        raise ValueError("split_columns needs m >= 2")
    N = int(N)
    if N < len(U) or N < 1:
        raise ValueError(f"N={N} must be a positive integer >= |U|={len(U)}")
    m = U.m
    remainder = list(U.points)
    parts = []
    for j in range(1, m):
        groups = _group(remainder, range(j, m))
        take = {
            p for g in groups.values() if _exceeds(len(g), N, j, m) for p in g
        }
        parts.append(LatticeSet(U.n, m, tuple(p for p in remainder if p in take)))
        remainder = [p for p in remainder if p not in take]
    parts.append(LatticeSet(U.n, m, tuple(remainder)))
    thresholds = tuple(N ** (j / m) for j in range(1, m))
    return ColumnSplit(tuple(parts), thresholds, N)


def r_max_for(lam: int, m: int, n: int, q: float) -> int:
    """Smallest integer r_max >= 1 with lam*m*n/q <= r_max."""
    return max(1, math.ceil(lam * m * n / q - 1e-12))


@dataclass(frozen=True)
class LevelSetPartition:
    """Dyadic magnitude classes A 2^{-r} < |b| ≤ A 2^{-r+1}."""

    classes: dict[int, LatticeSet]
    A: float
    q: float
    r_max: int | None
    bounds: dict[int, float] = field(default_factory=dict)
    B: float = 0.0

    def sizes(self) -> dict[int, int]:
        return {r: len(s) for r, s in self.classes.items()}

    def satisfied(self) -> dict[int, bool]:
        return {r: len(self.classes[r]) <= self.bounds[r] for r in self.classes}


def _band(mag: float, A: float) -> int:
    # frexp keeps subnormal magnitudes finite in log2
    f, e = math.frexp(mag)
    r = math.floor(math.log2(A) - math.log2(f) - e) + 1
    while not math.ldexp(A, -r) < mag:
        r += 1
    while not mag <= math.ldexp(A, -r + 1):
        r -= 1
    return r


def _card_bound(B: float, A: float, r: int, q: float) -> float:
    # (B / (2^{-r} A))^q, saturating to inf instead of overflowing
    if B == 0:
        return 0.0
    e = q * (r + math.log2(B) - math.log2(A))
    return math.inf if e > 1023 else 2.0**e


def level_sets(
    b: Mapping,
    A: float,
    q: float,
    r_max: int | None = None,
    *,
    n: int | None = None,
    m: int | None = None,
) -> LevelSetPartition:
    """Partition the support of ``b`` into dyadic magnitude bands.

    Without ``r_max`` zero coefficients belong to no class and every
    |b| must be at most A. With ``r_max`` the last class absorbs all
    points with |b| ≤ A 2^{-r_max+1}, zeros included.

    ``bounds[r]`` is the cardinality bound (B / (2^{-r} A))^q with B the
    l^q norm of b. For the capped class it is 2^{r_max q} (B/A)^q, which
    is certified only when the whole index set is that small.
    """
    if A <= 0 or q <= 0:
        raise ValueError("A and q must be positive")
    if r_max is not None and r_max < 1:
        raise ValueError("r_max must be >= 1")
    items = [(k, abs(complex(v))) for k, v in b.items()]
    if n is None or m is None:
        if not items:
            n, m = n or 1, m or 2
        else:
            k0 = items[0][0]
            m = m or len(k0)
            n = n or (1 if isinstance(k0[0], (int, np.integer)) else len(k0[0]))
    if r_max is None and any(mag > A for _, mag in items):
        raise ValueError("some |b_k| exceeds A")
    # scale by the largest magnitude so tiny coefficients do not underflow
    top = max((mag for _, mag in items), default=0.0)
    B = top * sum((mag / top) ** q for _, mag in items) ** (1.0 / q) if top > 0 else 0.0
    members = defaultdict(list)
    for k, mag in items:
        if mag == 0.0:
            if r_max is not None:
                members[r_max].append(k)
            continue
        r = _band(mag, A)
        if r < 1:
            raise ValueError("some |b_k| exceeds A")
        if r_max is not None:
            r = min(r, r_max)
        members[r].append(k)
    classes = {r: LatticeSet(n, m, tuple(v)) for r, v in sorted(members.items())}
    bounds = {r: _card_bound(B, A, r, q) for r in classes}
    return LevelSetPartition(classes, A, q, r_max, bounds, B)


@dataclass(frozen=True)
class ShellSpec:
    """Membership predicate for the shell sets of large lattice points.

    A point passes when 2^{scale-c0} ≤ |k| ≤ 2^{scale+c0} and exactly the
    first ``l`` blocks have |k_i| ≥ M. ``ordered`` also demands
    (|k_1|, k_1) ≥ (|k_2|, k_2) ≥ ..., ties in |k_i| being broken by
    lexicographic block order. ``l = None`` drops the large-block test.
    """

    scale: int
    c0: float = 1.0
    M: float = 1.0
    l: int | None = None
    ordered: bool = False

    def __post_init__(self):
        if self.c0 < 1:
            raise ValueError("c0 must be >= 1")
        if self.M <= 0:
            raise ValueError("M must be positive")

    def contains(self, p: Point) -> bool:
        sq = [sum(c * c for c in blk) for blk in p]
        tot = math.sqrt(sum(sq))
        if not (2.0 ** (self.scale - self.c0) <= tot <= 2.0 ** (self.scale + self.c0)):
            return False
        if self.ordered:
            keys = [(s, blk) for s, blk in zip(sq, p)]
            if any(keys[i] < keys[i + 1] for i in range(len(keys) - 1)):
                return False
        if self.l is not None:
            big = [math.sqrt(s) >= self.M for s in sq]
            if big != [True] * self.l + [False] * (len(p) - self.l):
                return False
        return True


def shell_members(spec: ShellSpec, radius: int, n: int = 1, m: int = 2) -> LatticeSet:
    """All points of the box [-radius, radius]^{mn} passing ``spec``."""
    rng = range(-radius, radius + 1)
    pts = []
    for flat in itertools.product(rng, repeat=n * m):
        p = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(m))
        if spec.contains(p):
            pts.append(p)
    return LatticeSet(n, m, tuple(pts))


def shell_splits(
    scale: int, c0: float, M: float, radius: int, n: int = 1, m: int = 2,
    ordered: bool = True,
) -> dict[int, LatticeSet]:
    """The l-splits l = 0..m of one shell; l = 0 holds points with no large block."""
    return {
        l: shell_members(ShellSpec(scale, c0, M, l, ordered), radius, n, m)
        for l in range(m + 1)
    }


def write_lattice(U: LatticeSet, path: str | Path) -> None:
    """One point per line: blocks space-separated, block coordinates comma-separated."""
    with open(path, "w") as fh:
        fh.write(f"# n={U.n} m={U.m}\n")
        for p in U.points:
            fh.write(" ".join(",".join(str(c) for c in blk) for blk in p) + "\n")


def read_lattice(path: str | Path) -> LatticeSet:
    n = m = None
    pts = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta = dict(tok.split("=") for tok in line[1:].split() if "=" in tok)
            n, m = int(meta.get("n", n or 1)), int(meta.get("m", m or 1))
            continue
        try:
            blocks = tuple(tuple(int(c) for c in tok.split(",")) for tok in line.split())
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad point {line!r}") from exc
        pts.append(blocks)
    if pts and n is None:
        m, n = len(pts[0]), len(pts[0][0])
    return LatticeSet(n or 1, m or 1, tuple(pts))
