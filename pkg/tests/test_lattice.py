import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlinbound.lattice import (
    LatticeSet,
    ShellSpec,
    column,
    level_sets,
    nested_enumeration,
    project,
    r_max_for,
    read_lattice,
    shell_members,
    shell_splits,
    split_columns,
    write_lattice,
)

U3 = LatticeSet(1, 2, ((0, 0), (1, 0), (0, 1)))


def pts(*flat, n=1):
    return {tuple((c,) for c in p) for p in flat} if n == 1 else set(flat)


# ---------------------------------------------------------------- oracles


def test_project_drop_first_axis():
    P = project(U3, drop=[0])
    assert P.m == 1
    assert P.to_set() == {((0,),), ((1,),)}


def test_project_keep_all_is_identity():
    assert project(U3, keep=[0, 1]) == U3


def test_project_empty():
    E = LatticeSet(1, 2, ())
    assert len(project(E, keep=[1])) == 0


def test_project_bad_axis():
    with pytest.raises(ValueError):
        project(U3, keep=[2])
    with pytest.raises(ValueError):
        project(U3, keep=[0, 0])


def test_column_examples():
    assert column(U3, {1: 0}).to_set() == {((0,),), ((1,),)}
    assert len(column(U3, {1: 7})) == 0
    V = LatticeSet(1, 2, ((0, 5), (1, 5)))
    assert column(V, {1: 5}).to_set() == {((0,),), ((1,),)}


def test_nested_enumeration_small():
    seq = list(nested_enumeration(U3, [0]))
    assert len(seq) == 3 and set(seq) == U3.to_set()
    assert list(nested_enumeration(LatticeSet(1, 2, ()), [0])) == []


def test_split_three_points():
    s = split_columns(U3, 3)
    assert s.thresholds == pytest.approx((math.sqrt(3),))
    assert s.parts[0].to_set() == {((0,), (0,)), ((1,), (0,))}
    assert s.parts[1].to_set() == {((0,), (1,))}
    assert s.certificate() == {"projection": True, "column": True}


def test_split_empty_and_single():
    s = split_columns(LatticeSet(1, 2, ()), 1)
    assert all(len(p) == 0 for p in s.parts)
    s = split_columns(LatticeSet(1, 3, ((0, 0, 0),)), 1)
    assert s.thresholds == (1.0, 1.0)
    assert [len(p) for p in s.parts] == [0, 0, 1]


def test_split_rejects():
    with pytest.raises(ValueError):
        split_columns(U3, 2)
    with pytest.raises(ValueError):
        split_columns(LatticeSet(1, 1, ((0,),)), 1)


def test_split_tie_stays_in_later_part():
    # N = 4, m = 2: N_1 = 2 exactly; a column of size 2 is not promoted
    U = LatticeSet(1, 2, ((0, 0), (1, 0), (5, 1), (6, 2)))
    s = split_columns(U, 4)
    assert len(s.parts[0]) == 0


def test_split_csv(tmp_path):
    s = split_columns(U3, 3)
    s.write_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "part_index,size,projection_bound,projection_actual"
    assert lines[1].startswith("1,2,")
    assert lines[2] == "2,1,nan,nan"


def test_level_sets_example():
    b = {(0, 0): 1.0, (0, 1): 0.6, (1, 0): 0.4}
    part = level_sets(b, 1.0, 2)
    assert part.sizes() == {1: 2, 2: 1}
    assert part.bounds[1] == pytest.approx(1.52 * 4)
    assert part.satisfied()[1]


def test_level_sets_capped_zeros():
    b = {(0, 0): 0.0, (1, 1): 0.0}
    part = level_sets(b, 1.0, 2, r_max=3)
    assert part.sizes() == {3: 2}


def test_level_sets_single_top():
    part = level_sets({(0, 0): 2.5}, 2.5, 2)
    assert part.sizes() == {1: 1}


def test_level_sets_rejects_large():
    with pytest.raises(ValueError):
        level_sets({(0, 0): 1.5}, 1.0, 2)
    with pytest.raises(ValueError):
        level_sets({(0, 0): 0.5}, 1.0, 2, r_max=0)


def test_r_max():
    assert r_max_for(0, 2, 1, 2) == 1
    assert r_max_for(3, 2, 1, 2) == 3
    assert r_max_for(3, 3, 1, 2) == 5


def test_shell_example_point():
    spec = ShellSpec(3, c0=2, M=2 * 1.1, l=1)
    assert spec.contains(((8,), (1,)))
    assert not ShellSpec(3, c0=2).contains(((0,), (0,)))


def test_shell_splits_cover_ordered_shell():
    full = shell_members(ShellSpec(5, 1, 2.2, None, True), 32)
    splits = shell_splits(5, 1, 2.2, 32)
    union = set()
    for l, S in splits.items():
        assert not (union & S.to_set())
        union |= S.to_set()
    assert union == full.to_set()


def test_unordered_shell_is_symmetric():
    S = shell_members(ShellSpec(3, 1, 1.0), 12)
    assert all(((p[1], p[0]) in S) for p in S)


def test_roundtrip_file(tmp_path):
    U = LatticeSet(2, 2, (((0, 1), (2, -3)), ((5, 5), (0, 0))))
    write_lattice(U, tmp_path / "u.txt")
    assert read_lattice(tmp_path / "u.txt") == U
    write_lattice(U3, tmp_path / "v.txt")
    assert "0 1" in (tmp_path / "v.txt").read_text().splitlines()
    assert read_lattice(tmp_path / "v.txt") == U3


# --------------------------------------------------------------- properties

point3 = st.tuples(*[st.integers(-3, 3)] * 3)


@st.composite
def lattice_sets(draw, m=None):
    m = draw(st.sampled_from([2, 3])) if m is None else m
    side = draw(st.integers(1, 6))
    coords = st.tuples(*[st.integers(0, side)] * m)
    return LatticeSet(1, m, tuple(draw(st.lists(coords, max_size=80))))


@settings(max_examples=150, deadline=None)
@given(lattice_sets(), st.integers(0, 40))
def test_split_partition_and_bounds(U, extra):
    N = max(1, len(U) + extra)
    s = split_columns(U, N)
    union = set()
    for p in s.parts:
        assert not (union & p.to_set())
        union |= p.to_set()
    assert union == U.to_set()
    assert s.certificate() == {"projection": True, "column": True}


@settings(max_examples=150, deadline=None)
@given(lattice_sets(), st.data())
def test_nested_enumeration_is_a_bijection(U, data):
    order = data.draw(st.permutations(range(U.m)))
    k = data.draw(st.integers(1, U.m))
    seq = list(nested_enumeration(U, order[:k]))
    assert sorted(seq) == sorted(U.points)


@settings(max_examples=100, deadline=None)
@given(lattice_sets(), st.data())
def test_column_union_rebuilds_set(U, data):
    # U is the disjoint union over the complement projection of its columns
    axis = data.draw(st.integers(0, U.m - 1))
    rest = [a for a in range(U.m) if a != axis]
    total = 0
    for q in project(U, drop=[axis]):
        col = column(U, dict(zip(rest, q)))
        total += len(col)
    assert total == len(U)


@settings(max_examples=100, deadline=None)
@given(
    st.dictionaries(point3, st.floats(0, 1, allow_nan=False), max_size=60),
    st.sampled_from([1.0, 2.0, 4.0]),
)
def test_level_set_bands(b, q):
    b = {k: v for k, v in b.items()}
    part = level_sets(b, 1.0, q, n=1, m=3)
    seen = set()
    for r, cls in part.classes.items():
        for k in cls:
            flat = tuple(c for blk in k for c in blk)
            assert 2.0**-r < b[flat] <= 2.0 ** (-r + 1)
            seen.add(flat)
    assert seen == {k for k, v in b.items() if v > 0}
    assert all(part.satisfied().values())


@settings(max_examples=60, deadline=None)
@given(lattice_sets())
def test_deterministic_order(U):
    again = LatticeSet(U.n, U.m, tuple(reversed(U.points)))
    assert again.points == U.points
