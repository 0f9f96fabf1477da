import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from finres.combin import (
    CombMap,
    CoverHandle,
    comb_compose,
    comb_image_set,
    comb_inverse,
    comb_power,
    is_finer_cover,
    is_finer_map,
    minimal_representation,
    mixing_by_powers,
)
from finres.cover import GridSpec, IntervalCover1D, _union, box_bounds, is_essential_1d
from finres.construct import build
from finres.dynmap import MapSpec, exact_image_1d
from finres.errors import DomainError
from finres.graph import graph_from_comb, is_mixing, oracle_mixing
from finres.interval import OInterval


@st.composite
def comb_maps(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    images = draw(st.lists(st.sets(st.integers(0, n - 1), max_size=n), min_size=n, max_size=n))
    return CombMap.from_lists(images)


def test_images_are_sorted_and_deduplicated():
    f = CombMap.from_lists([[2, 0, 2], [1], []])
    assert f.images == ((0, 2), (1,), ())
    assert not f.total
    assert f(0) == (0, 2)
    assert list(f.edges()) == [(0, 0), (0, 2), (1, 1)]


def test_bad_maps_rejected():
    with pytest.raises(DomainError):
        CombMap.from_lists([[1]])
    with pytest.raises(DomainError):
        CombMap(2, ((0,),))
    with pytest.raises(DomainError):
        comb_compose(CombMap.identity(2), CombMap.identity(3))
    with pytest.raises(DomainError):
        comb_power(CombMap.identity(2), 0)
    with pytest.raises(DomainError):
        comb_image_set(CombMap.identity(2), [5])


@given(comb_maps(), st.data())
def test_composition_is_associative(f, data):
    g = data.draw(comb_maps(max_n=f.n).filter(lambda m: m.n == f.n))
    h = data.draw(comb_maps(max_n=f.n).filter(lambda m: m.n == f.n))
    assert comb_compose(comb_compose(h, g), f) == comb_compose(h, comb_compose(g, f))


@given(comb_maps())
def test_identity_and_powers(f):
    ident = CombMap.identity(f.n)
    assert comb_compose(f, ident) == f == comb_compose(ident, f)
    assert comb_power(f, 3) == comb_compose(f, comb_compose(f, f))


@given(comb_maps())
def test_inverse_reverses_edges(f):
    inv = comb_inverse(f)
    assert sorted((v, u) for u, v in inv.edges()) == sorted(f.edges())
    assert comb_inverse(inv) == f


# ------------------------------------------------------------ mixing by powers


def random_strongly_connected(rng: random.Random, n: int, period: int | None = None) -> CombMap:
    """Random map whose graph is strongly connected; with ``period`` set, all
    edges go from class i to class i+1 (mod period), giving that period."""
    order = list(range(n))
    rng.shuffle(order)
    images = [set() for _ in range(n)]
    if period:
        cls = {v: i % period for i, v in enumerate(order)}
    for i, v in enumerate(order):
        images[v].add(order[(i + 1) % n])
    for _ in range(rng.randint(0, 2 * n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if period and cls[v] != (cls[u] + 1) % period:
            continue
        images[u].add(v)
    return CombMap.from_lists([sorted(s) for s in images])


def test_mixing_by_powers_matches_graph_criterion():
    rng = random.Random(17)
    seen = {True: 0, False: 0}
    for _ in range(300):
        n = rng.randint(1, 8)
        period = rng.choice([None, None, 2, 3]) if n % 6 == 0 else None
        f = random_strongly_connected(rng, n, period)
        verdict = mixing_by_powers(f)
        assert verdict == is_mixing(graph_from_comb(f)) == oracle_mixing(f)
        seen[verdict] += 1
    assert seen[True] > 20 and seen[False] > 20


def test_cycle_is_not_mixing_but_cycle_with_loop_is():
    cyc = CombMap.from_lists([[1], [2], [0]])
    assert not mixing_by_powers(cyc)
    loop = CombMap.from_lists([[1], [2], [0, 2]])
    assert mixing_by_powers(loop)


# ------------------------------------------------------------ covers


def test_finer_cover_relation():
    coarse = CoverHandle((OInterval(0.0, 0.6), OInterval(0.4, 1.0)))
    fine = CoverHandle(
        (OInterval(0.0, 0.3), OInterval(0.25, 0.55), OInterval(0.5, 0.8), OInterval(0.75, 1.0))
    )
    assert is_finer_cover(fine, coarse)
    assert not is_finer_cover(coarse, fine)
    sets = CoverHandle(({1, 2}, [3]))
    assert is_finer_cover(CoverHandle(({1}, {2}, {3})), sets)


@given(
    st.lists(st.integers(3, 12), min_size=2, max_size=8),
    st.lists(st.booleans(), min_size=64, max_size=64),
)
def test_second_finer_clause_follows_for_essential_coarse_covers(widths, keep):
    """If u1 covers the region and each u1 element sits in a u2 element,
    every element of an essential u2 contains some u1 element."""
    cuts = [0]
    for w in widths:
        cuts.append(cuts[-1] + w)
    total = cuts[-1]
    u2 = tuple(OInterval(max(0, a - 1) / total, min(total, b + 1) / total) for a, b in zip(cuts, cuts[1:]))
    assert is_essential_1d(IntervalCover1D(u2))
    cells = []
    for k, flag in enumerate(keep):
        c = OInterval(max(0.0, k / 64 - 1 / 512), min(1.0, (k + 1) / 64 + 1 / 512))
        if flag:
            cells.append(c)
        else:  # replace the cell by the first coarse element holding it
            cells.append(next(b for b in u2 if b.lo <= c.lo and c.hi <= b.hi))
    fine, coarse = CoverHandle(tuple(cells)), CoverHandle(u2)
    union = _union(IntervalCover1D(tuple(cells)).elements())
    assert len(union) == 1 and union[0][0] <= 0 and union[0][1] >= 1
    assert all(any(b.lo <= a.lo and a.hi <= b.hi for b in u2) for a in cells)
    assert is_finer_cover(fine, coarse)


def test_finer_map_checks_every_containing_pair():
    u2 = CoverHandle(({0, 1}, {1, 2}))
    u1 = CoverHandle(({0}, {1}, {2}))
    f1 = CombMap.from_lists([[0], [2], [2]])
    f2_good = CombMap.from_lists([[0, 1], [1]])
    assert is_finer_map(f1, u1, f2_good, u2)
    # {1} sits in both coarse sets; f2 of the first must cover f1({1}) = {2}
    f2_bad = CombMap.from_lists([[0], [1]])
    assert not is_finer_map(f1, u1, f2_bad, u2)
    with pytest.raises(DomainError):
        is_finer_map(f1, u2, f2_good, u2)


def grid_handle(g: GridSpec, boxes):
    return CoverHandle(tuple(box_bounds(g, b) for b in boxes))


def test_minimal_representation_of_logistic_on_quarters():
    g = GridSpec((0.0,), (1.0,), (4,), 1e-3)
    u = grid_handle(g, [(k,) for k in range(4)])
    f = minimal_representation(MapSpec.logistic(), u)
    # cell 0 reaches past 1/4 by the margin, so its image passes 3/4
    assert f.images[0] == (0, 1, 2, 3)
    assert f.images[1] == (2, 3)
    assert mixing_by_powers(f)
    with pytest.raises(DomainError):
        minimal_representation(MapSpec.henon(), u)


def test_composition_of_representations_represents_the_composition():
    rng = random.Random(3)
    logistic = MapSpec.logistic()
    half = MapSpec.linear1d((1, 2), (1, 4), domain=((0.0, 1.0),))
    g = GridSpec((0.0,), (1.0,), (12,), 0.01)
    u = grid_handle(g, [(k,) for k in range(12)])
    F, G = minimal_representation(logistic, u), minimal_representation(half, u)
    GF = comb_compose(G, F)
    ends = [(Fraction(e.axes[0].lo), Fraction(e.axes[0].hi)) for e in u.elements]
    for _ in range(2000):
        i = rng.randrange(12)
        lo, hi = ends[i]
        x = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
        x = min(max(x, Fraction(0)), Fraction(1))
        y = 4 * x * (1 - x) / 2 + Fraction(1, 4)
        for j, (wl, wh) in enumerate(ends):
            if wl < y < wh:
                assert j in GF.images[i]


def test_exact_images_drive_minimal_representation():
    m = MapSpec.linear1d((0, 1), (1, 2))  # constant 1/2
    g = GridSpec((0.0,), (1.0,), (4,), 1e-3)
    u = grid_handle(g, [(k,) for k in range(4)])
    f = minimal_representation(m, u)
    # 1/2 lies only in the cell (0.25, 0.5 + margin) and (0.5, 0.75 + margin)
    assert all(im == (1, 2) for im in f.images)
    assert exact_image_1d(m, Fraction(0), Fraction(1))[0] == Fraction(1, 2)


# ------------------------------------------------------------ consistency


def rep_comb(rep) -> CombMap:
    g = rep.graph
    return CombMap(g.n, tuple(tuple(g.successors(i).tolist()) for i in range(g.n)))


def rep_handle(rep) -> CoverHandle:
    return grid_handle(rep.grid, rep.boxes)


@pytest.mark.parametrize("p2", [3, 5, 8])
@pytest.mark.parametrize("frac", [0.3, 0.9])
def test_fine_mixing_representation_is_finer_than_coarse_constructions(p2, frac):
    """With R+(F0) below half the coarse overlap, a coarse construction is
    coarser than F0 and inherits mixing."""
    m = MapSpec.logistic()
    kappa = frac / p2
    coarse = build(GridSpec((0.0,), (1.0,), (p2,), kappa), m, (0.3,))
    fine = build(GridSpec((0.0,), (1.0,), (int(16 / kappa),)), m, (0.3,))
    assert fine.r_plus < kappa / 2
    assert is_mixing(fine.graph)
    assert is_finer_map(rep_comb(fine), rep_handle(fine), rep_comb(coarse), rep_handle(coarse))
    assert is_mixing(coarse.graph)
