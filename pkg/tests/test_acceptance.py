"""End-to-end acceptance gate.

Each criterion prints exactly one PASS/FAIL line.  Numeric pins are frozen
values computed by independent dense-grid oracles or derived from the
problem definitions; they are asserted, not recomputed leniently.
"""

import functools
import json
import time

import numpy as np
import pytest

from fptrace.assembly import RefinementSchedule, trace
from fptrace.covers import Cover, build_cover, cover_graph, k_neighbor
from fptrace.cli import main as cli_main
from fptrace.onedim import GridSpec, default_tol, solve_onedim
from fptrace.plmap import PLMap, eval_pl
from fptrace.problems import builtin, fixed_point_count_1d, oracle_component
from fptrace.assembly import hausdorff_points, rect_union_points
from fptrace.spaces import StateSpace, estimate_lipschitz
from fptrace.walk import Walk, covering_walk

BUILTINS = ("constant", "diagonal", "square-param", "logit-coordination")
SCHEDULE = RefinementSchedule(radius_x=0.25, radius_y=0.25, factor=0.5)
BASE_GRID = GridSpec(s_cells=32, y_cells=(8,), tol=1.0)

# dense-grid oracle count of fixed points of the logit problem at x = 0.5
# (three crossings of f(0.5, y) = y on a 10^4-point state grid)
LOGIT_FOLD_COUNT = 3


# one verdict line per criterion is printed by the pytest_runtest_logreport
# hook in conftest.py, outside output capture; the decorator only tags the
# test so the hook can match number to label
def report(num, label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            return fn(*args, **kwargs)
        wrapper._acceptance = (num, label)
        return wrapper
    return deco


@pytest.fixture(scope="module")
def traced():
    """Criterion-2 runs, shared by the oracle / regression / fold criteria."""
    out = {}
    for name in BUILTINS:
        p = builtin(name)
        t0 = time.monotonic()
        result = trace(p.map, SCHEDULE, BASE_GRID)
        out[name] = (p, result, time.monotonic() - t0)
    return out


@report(1, "single-segment component extraction")
def test_criterion_1_single_segment_witness():
    for name in BUILTINS:
        p = builtin(name)
        cover = build_cover(p.space_x, 0.25)
        full = covering_walk(cover_graph(cover))
        assert full.N >= 1
        segment = Walk(sequence=full.sequence[:2])
        pl = PLMap(segment, cover, p.map)
        lip = estimate_lipschitz(p.map, 2000, seed=0)
        s_cells, y_cells = 64, (64,)
        tol = default_tol(pl, s_cells, y_cells, p.space_y, lip)
        t0 = time.monotonic()
        comp = solve_onedim(pl, GridSpec(s_cells=s_cells, y_cells=y_cells, tol=tol),
                            max_refines=2)
        elapsed = time.monotonic() - t0
        assert comp.projection_complete, name
        assert comp.grid.s_cells <= 512 and comp.grid.y_cells[0] <= 512, name
        assert elapsed < 10.0, f"{name}: {elapsed:.1f}s"


@report(2, "full refinement convergence on all built-ins")
def test_criterion_2_trace_witness(traced):
    for name, (p, result, elapsed) in traced.items():
        assert result.converged, name
        assert result.connected, name
        assert len(result.history) <= 6, name
        assert result.history[0].radius_x == 0.25
        final = result.history[-1]
        assert result.coverage_gap <= final.radius_x, name
        assert result.residual_max <= result.residual_bound, name
        assert elapsed < 60.0, f"{name}: {elapsed:.1f}s"


@report(3, "dense-grid oracle equivalence")
def test_criterion_3_oracle_equivalence(traced):
    oracle_tol = 0.01
    density = 200
    for name in ("constant", "diagonal"):
        p, result, _ = traced[name]
        oracle = oracle_component(builtin(name), density, oracle_tol)
        spacing = 1.0 / (density - 1)

        # oracle vs analytic set, pointwise in the product max-norm
        analytic = p.analytic_component(2001)
        d = hausdorff_points(oracle, analytic)
        assert d <= oracle_tol + spacing + 1e-12, f"{name}: oracle vs analytic {d:.4f}"

        final_radius = max(result.history[-1].radius_x,
                           result.history[-1].radius_y)
        d = hausdorff_points(rect_union_points(result.final_rects), oracle)
        assert d <= 3.0 * final_radius, f"{name}: {d:.4f} > {3 * final_radius:.4f}"


@report(4, "covering-walk properties on random graphs")
def test_criterion_4_walk_properties():
    rng = np.random.default_rng(2024)
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))
    failures = 0
    for _ in range(200):
        n = int(rng.integers(1, 65))
        edges = set()
        order = rng.permutation(n)
        for i in range(1, n):
            j = order[int(rng.integers(0, i))]
            edges.add((min(order[i], j), max(order[i], j)))
        for _ in range(int(rng.integers(0, n))):
            a, b = rng.integers(0, n, size=2)
            if a != b:
                edges.add((min(a, b), max(a, b)))
        cover = Cover(centers=np.zeros((n, 1)), radii=np.ones(n),
                      space_tag="Y", convex_flag=True, space=sy)
        from fptrace.covers import CoverGraph
        w = covering_walk(CoverGraph(cover=cover, edges=tuple(sorted(edges))),
                          start=int(rng.integers(0, n)))
        edge_set = {frozenset(e) for e in edges}
        ok = (set(w.sequence) == set(range(n))
              and all(a == b or frozenset((a, b)) in edge_set
                      for a, b in zip(w.sequence, w.sequence[1:]))
              and w.N <= 2 * n - 2)
        failures += 0 if ok else 1
    assert failures == 0


@report(5, "reduced-map breakpoint, containment and continuity properties")
def test_criterion_5_pl_properties():
    p = builtin("diagonal")
    cover = build_cover(p.space_x, 0.15)
    walk = covering_walk(cover_graph(cover))
    pl = PLMap(walk, cover, p.map)
    n = pl.N
    rng = np.random.default_rng(5)

    # exact breakpoint agreement on 10^3 (i, y) pairs
    for _ in range(1000):
        i = int(rng.integers(0, n + 1))
        y = np.array([rng.random()])
        d = float(np.max(np.abs(eval_pl(pl, i / n, y) - pl.breakpoint_state(i, y))))
        assert d == 0.0

    # convex-hull containment on 10^4 (s, y) pairs
    for _ in range(10_000):
        s = float(rng.random())
        y = np.array([rng.random()])
        i, t = pl.segment_of(s)
        a = pl.breakpoint_state(i, y)
        b = pl.breakpoint_state(i + 1, y)
        out = eval_pl(pl, s, y)
        assert np.all(out >= np.minimum(a, b) - 1e-12)
        assert np.all(out <= np.maximum(a, b) + 1e-12)

    # finite-difference continuity bound within 10% slack
    y = np.array([0.3])
    step = max(float(np.max(np.abs(pl.breakpoint_state(i + 1, y)
                                   - pl.breakpoint_state(i, y))))
               for i in range(n))
    slope = n * step
    h = 1e-4
    for s in np.linspace(0.0, 1.0 - h, 101):
        d = float(np.max(np.abs(eval_pl(pl, s + h, y) - eval_pl(pl, float(s), y))))
        assert d <= slope * h * 1.10 + 1e-12


@report(6, "connectivity regression on every converged iteration")
def test_criterion_6_connectivity_regression(traced):
    for name, (_, result, _) in traced.items():
        assert result.converged, name
        for rec in result.history:
            if rec.projection_complete:
                assert rec.connected, f"{name} iteration {rec.index}"


@report(7, "neighbor-chain calculus")
def test_criterion_7_k_neighbor():
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))
    chain = Cover(centers=np.array([[0.125], [0.375], [0.625], [0.875]]),
                  radii=np.full(4, 0.16), space_tag="Y", convex_flag=True,
                  space=sy)
    endpoints = (np.array([0.0]), np.array([1.0]))
    assert not k_neighbor(chain, *endpoints, 0)
    assert k_neighbor(chain, *endpoints, 3)

    p = builtin("diagonal")
    net = build_cover(p.space_x, 0.15)
    rng = np.random.default_rng(7)
    for cover in (chain, net):
        for _ in range(1000):
            za, zb = rng.random(), rng.random()
            a, b = np.array([za]), np.array([zb])
            k = int(rng.integers(0, 6))
            if k_neighbor(cover, a, b, k):
                assert k_neighbor(cover, a, b, k + 1)


@report(8, "fold threading in the smoothed coordination game")
def test_criterion_8_logit_fold(traced):
    p, result, _ = traced["logit-coordination"]
    assert fixed_point_count_1d(p, 0.5) == LOGIT_FOLD_COUNT
    assert result.converged
    assert result.coverage_gap <= result.history[-1].radius_x


@report(9, "byte-identical artifacts under equal seeds")
def test_criterion_9_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli_main(["--problem", "constant", "--out", str(out1), "--seed", "11"]) == 0
    assert cli_main(["--problem", "constant", "--out", str(out2), "--seed", "11"]) == 0
    b1 = (out1 / "summary.json").read_bytes()
    b2 = (out2 / "summary.json").read_bytes()
    assert b1 == b2
    json.loads(b1)  # strict JSON
