from fractions import Fraction

import numpy as np
import pytest

from finres.combin import CoverHandle, minimal_representation
from finres.construct import (
    BuildConfig,
    ConstructionFailure,
    build,
    build_full,
    export,
    resolution_certificate,
    verify_closure,
)
from finres.cover import (
    GridSpec,
    box_bounds,
    boxes_containing_point,
    grid_new,
    outer_resolution_cover,
    read_cover,
)
from finres.dynmap import MapSpec, eval_box
from finres.errors import DomainError, MemoryBudgetExceeded
from finres.graph import analyze_graph, read_edge_list
from finres.interval import rect_contains

from conftest import HENON_REGION, HENON_X0


@pytest.fixture(scope="module")
def henon446():
    return build(grid_new(*HENON_REGION, 446), MapSpec.henon(), HENON_X0)


def test_p1_446_succeeds_and_mixes(henon446):
    rep = henon446
    assert rep.r_plus < 0.05
    v = analyze_graph(rep.graph)
    assert v.transitive and v.mixing and v.period == 1
    assert rep.stats["boxes"] == len(rep.cover) == rep.graph.n
    assert resolution_certificate(rep, 0.05)
    assert not resolution_certificate(rep, 0.03)


@pytest.mark.parametrize("p1", [100, 400, 445])
def test_coarser_grids_fail(p1):
    with pytest.raises(ConstructionFailure) as info:
        build(grid_new(*HENON_REGION, p1), MapSpec.henon(), HENON_X0)
    exc = info.value
    g = grid_new(*HENON_REGION, p1)
    assert not rect_contains(g.region, exc.rect)
    assert eval_box(MapSpec.henon(), box_bounds(g, exc.box)) == exc.rect


def test_cover_is_duplicate_free_and_closed(henon446):
    rep = henon446
    assert len(np.unique(rep.cover)) == len(rep.cover)
    assert rep.graph.targets.min() >= 0 and rep.graph.targets.max() < len(rep.cover)
    assert verify_closure(rep, MapSpec.henon())
    assert rep.r_plus >= outer_resolution_cover(rep.grid)


def test_cover_starts_with_boxes_around_start_point(henon446):
    rep = henon446
    seeds = boxes_containing_point(rep.grid, HENON_X0)
    assert rep.boxes[: len(seeds)] == seeds


def test_sampled_points_land_in_represented_images(henon446):
    """Any cover box containing f(x), x in U, belongs to F(U)."""
    rep, g = henon446, henon446.grid
    rng = np.random.default_rng(8)
    a, b = Fraction(14, 10), Fraction(3, 10)
    boxes = rep.boxes
    index = {box: i for i, box in enumerate(boxes)}
    for _ in range(10000):
        i = int(rng.integers(len(boxes)))
        r = box_bounds(g, boxes[i])
        t = rng.integers(1, 1 << 30, 2)
        x, y = (
            Fraction(ax.lo) + (Fraction(ax.hi) - Fraction(ax.lo)) * Fraction(int(s), 1 << 30)
            for ax, s in zip(r.axes, t)
        )
        fx, fy = 1 + y - a * x * x, b * x
        image = set(rep.graph.successors(i).tolist())
        for w in boxes_containing_point(g, (float(fx), float(fy))):
            wb = box_bounds(g, w)
            if Fraction(wb.axes[0].lo) < fx < Fraction(wb.axes[0].hi) and Fraction(
                wb.axes[1].lo
            ) < fy < Fraction(wb.axes[1].hi):
                assert w in index and index[w] in image


def test_image_enclosures_stay_inside_the_cover_union(henon446):
    rep, g, m = henon446, henon446.grid, MapSpec.henon()
    for i, box in enumerate(rep.boxes[::7]):
        i *= 7
        img = eval_box(m, box_bounds(g, box))
        targets = rep.images(i)
        lo = [min(box_bounds(g, t).axes[d].lo for t in targets) for d in range(2)]
        hi = [max(box_bounds(g, t).axes[d].hi for t in targets) for d in range(2)]
        for d in range(2):
            assert lo[d] <= img.axes[d].lo and img.axes[d].hi <= hi[d]


def test_batching_and_workers_do_not_change_the_result(henon446):
    g, m = henon446.grid, MapSpec.henon()
    one_by_one = build(g, m, HENON_X0, BuildConfig(batch=1))
    threaded = build(g, m, HENON_X0, BuildConfig(batch=97, workers=3))
    hashed = build(g, m, HENON_X0, BuildConfig(seen_mode="hash", batch=1000))
    for rep in (one_by_one, threaded, hashed):
        assert np.array_equal(rep.cover, henon446.cover)
        assert rep.graph.same_as(henon446.graph)
        assert rep.r_plus == henon446.r_plus
    assert hashed.stats["seen_mode"] == "hash"


def test_wide_indices(henon446):
    rep = build(henon446.grid, MapSpec.henon(), HENON_X0, BuildConfig(index_width=64))
    assert rep.graph.targets.dtype == np.int64
    assert np.array_equal(rep.graph.targets, henon446.graph.targets)


def test_memory_budget_is_enforced():
    with pytest.raises(MemoryBudgetExceeded) as info:
        build(grid_new(*HENON_REGION, 446), MapSpec.henon(), HENON_X0, BuildConfig(memory_budget=50_000))
    assert info.value.budget == 50_000 and info.value.needed > 50_000


def test_bad_inputs():
    g = grid_new(*HENON_REGION, 446)
    with pytest.raises(DomainError):
        build(g, MapSpec.henon(), (5.0, 5.0))
    with pytest.raises(DomainError):
        build(g, MapSpec.logistic(), (0.3,))
    with pytest.raises(DomainError):
        build(g, MapSpec.henon())
    with pytest.raises(DomainError):
        BuildConfig(metric="taxicab")
    with pytest.raises(DomainError):
        BuildConfig(seen_mode="tree")


def test_constant_map_closes_in_one_step():
    g = GridSpec((0.0,), (1.0,), (10,), 1e-3)
    m = MapSpec.linear1d((0, 1), (33, 100))
    rep = build(g, m, (0.75,))
    seeds = boxes_containing_point(g, (0.75,))
    targets = boxes_containing_point(g, (0.33,))
    assert rep.boxes == seeds + [t for t in targets if t not in seeds]
    for i in range(rep.graph.n):
        assert rep.images(i) == targets


def test_minimal_images_are_inside_constructed_images():
    for m, p in [
        (MapSpec.logistic(), 40),
        (MapSpec.logistic((7, 2)), 33),
        (MapSpec.linear1d((-1, 2), (3, 4), domain=((0.0, 1.0),)), 25),
    ]:
        g = GridSpec((0.0,), (1.0,), (p,), 1e-6)
        rep = build_full(g, m)
        handle = CoverHandle(tuple(box_bounds(g, b) for b in rep.boxes))
        minimal = minimal_representation(m, handle)
        for i in range(rep.graph.n):
            assert set(minimal.images[i]) <= set(rep.graph.successors(i).tolist())


def test_logistic_toy_mixes_on_small_grids():
    for p in (16, 64, 256):
        rep = build(GridSpec((0.0,), (1.0,), (p,)), MapSpec.logistic(), (0.3,))
        assert analyze_graph(rep.graph).mixing


def test_export_round_trip(tmp_path, henon446):
    cpath, gpath = tmp_path / "cover.txt", tmp_path / "graph.txt"
    export(henon446, cpath, gpath)
    back = read_edge_list(gpath)
    assert back.same_as(henon446.graph)
    assert analyze_graph(back) == analyze_graph(henon446.graph)
    cov = read_cover(cpath)
    assert cov.linear == henon446.cover.tolist()
    assert cov.boxes == henon446.boxes
