"""Lifting the 1-D component to the product space and driving refinement.

Each iteration builds covers at the scheduled radii, a covering walk, the
reduced one-parameter map, its grid component, and the rectangle union of
closed cover-element products touching the component.  Runtime checks verify
connectivity of the union, coverage of the parameter sample by its projection,
and the fixed-point residual over sampled rectangle points.  Convergence is
declared when consecutive unions stabilize in Hausdorff distance; this
stopping rule is heuristic (no fineness bound links radii to the limit error)
and a non-converged result is a legitimate, reported outcome.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .covers import Cover, build_cover, cover_graph, _intersecting_pairs
from .errors import DisconnectedCover, EmptyUnion, NoComponent
from .onedim import ComponentGrid, GridSpec, default_tol, solve_onedim
from .plmap import PLMap
from .spaces import ParamSpace, ParametricMap, StateSpace, estimate_lipschitz, eval_map_batch
from .unionfind import UnionFind
from .walk import Walk, covering_walk


@dataclass(frozen=True)
class RectUnion:
    """Union of closed products of cover elements, with its intersection graph."""

    rects: tuple                 # sorted tuple of (x_element, y_element)
    cover_x: Cover
    cover_y: Cover
    edges: tuple                 # (i, j) indices into rects, closed intersection

    @property
    def size(self) -> int:
        return len(self.rects)

    def to_dict(self) -> dict:
        return {"rects": [list(r) for r in self.rects],
                "n_edges": len(self.edges)}


@dataclass(frozen=True)
class IterationRecord:
    index: int
    radius_x: float
    radius_y: float
    s_cells: int
    y_cells: tuple
    tol: float
    inflation: float
    n_cover_x: int
    n_cover_y: int
    walk_length: int
    n_marked: int
    n_component: int
    projection_complete: bool
    n_rects: int
    connected: bool
    coverage_gap: float
    residual_max: float
    hausdorff_step: float
    residual_bound: float

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["y_cells"] = list(self.y_cells)
        # keep strict JSON: non-finite floats become null
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in d.items()}


@dataclass(frozen=True)
class TraceResult:
    final_rects: Optional[RectUnion]
    history: tuple
    converged: bool
    residual_max: float
    coverage_gap: float
    connected: bool
    residual_bound: float
    iterations: tuple = ()       # (walk, component, cover_x, cover_y) per iteration

    def summary_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return {
            "converged": self.converged,
            "residual_max": clean(self.residual_max),
            "coverage_gap": clean(self.coverage_gap),
            "connected": self.connected,
            "residual_bound": clean(self.residual_bound),
            "n_iterations": len(self.history),
            "final_n_rects": self.final_rects.size if self.final_rects else 0,
            "history": [h.to_dict() for h in self.history],
        }


@dataclass(frozen=True)
class RefinementSchedule:
    """Strictly decreasing cover radii: (rX, rY) * factor^k."""

    radius_x: float = 0.25
    radius_y: float = 0.25
    factor: float = 0.5

    def __post_init__(self):
        if self.radius_x <= 0 or self.radius_y <= 0:
            raise ValueError("initial radii must be positive")
        if not 0.0 < self.factor < 1.0:
            raise ValueError("factor must lie in (0, 1)")

    def radii(self, k: int) -> tuple[float, float]:
        f = self.factor ** k
        return self.radius_x * f, self.radius_y * f


def build_rect_union(component: ComponentGrid, walk: Walk,
                     cover_x: Cover, cover_y: Cover) -> RectUnion:
    """All element products passing the membership test for the component.

    A pair (O_X, O_Y) qualifies when some component cell meets a walk segment
    whose endpoint representative lies in O_X, and the cell's closed y-range
    meets O_Y.
    """
    if not component.projection_complete:
        raise ValueError("rect union requires a projection-complete component")
    if not cover_y.convex_flag:
        raise ValueError("state cover must be convex")
    grid = component.grid
    n = walk.N
    space_y: StateSpace = cover_y.space  # type: ignore[assignment]

    # elements of the parameter cover containing each walk representative
    contain: dict[int, list[int]] = {}
    for v in set(walk.sequence):
        contain[v] = cover_x.elements_containing(cover_x.centers[v])

    q = grid.s_cells // n if n > 0 else grid.s_cells
    yc, yr = cover_y.centers, cover_y.radii
    rects: set[tuple[int, int]] = set()
    for cell in sorted(component.component):
        a, b = cell[0], cell[1:]
        lo, hi = grid.y_cell_bounds(space_y, b)
        overlap = np.all((yc - yr[:, None] < hi) & (yc + yr[:, None] > lo), axis=1)
        y_elems = np.nonzero(overlap)[0]
        if len(y_elems) == 0:
            continue
        if n == 0:
            segs = [0]
        else:
            segs = [a // q]
            if a % q == 0 and a > 0:
                segs.append(a // q - 1)          # left boundary touches previous segment
            if (a + 1) % q == 0 and (a + 1) // q < n:
                segs.append((a + 1) // q)        # right boundary touches next segment
        x_elems: set[int] = set()
        for i in segs:
            if n == 0:
                x_elems.update(contain[walk.sequence[0]])
            else:
                x_elems.update(contain[walk.sequence[i]])
                x_elems.update(contain[walk.sequence[i + 1]])
        for ex in x_elems:
            for ey in y_elems:
                rects.add((int(ex), int(ey)))
    rect_list = tuple(sorted(rects))
    edges = _rect_adjacency(rect_list, cover_x, cover_y)
    return RectUnion(rects=rect_list, cover_x=cover_x, cover_y=cover_y, edges=edges)


def _rect_adjacency(rects: tuple, cover_x: Cover, cover_y: Cover) -> tuple:
    """Edges between rects whose closed products intersect."""
    if not rects:
        return ()
    x_pairs = set(_intersecting_pairs(cover_x, closed=True))
    y_pairs = set(_intersecting_pairs(cover_y, closed=True))

    def x_adj(a: int, b: int) -> bool:
        return a == b or (min(a, b), max(a, b)) in x_pairs

    def y_adj(a: int, b: int) -> bool:
        return a == b or (min(a, b), max(a, b)) in y_pairs

    by_x: dict[int, list[int]] = {}
    for idx, (ex, _) in enumerate(rects):
        by_x.setdefault(ex, []).append(idx)
    x_elems = sorted(by_x)
    x_neighbor: dict[int, list[int]] = {e: [e] for e in x_elems}
    for a, b in x_pairs:
        if a in by_x and b in by_x:
            x_neighbor[a].append(b)
            x_neighbor[b].append(a)
    edges: set[tuple[int, int]] = set()
    for ex in x_elems:
        for ex2 in x_neighbor[ex]:
            for i in by_x[ex]:
                for j in by_x[ex2]:
                    if i < j and y_adj(rects[i][1], rects[j][1]):
                        edges.add((i, j))
    return tuple(sorted(edges))


def check_connected(rects: RectUnion) -> bool:
    """Whether the union's intersection graph has a single component."""
    if rects.size == 0:
        raise EmptyUnion("empty rectangle union")
    uf = UnionFind(rects.size)
    for i, j in rects.edges:
        uf.union(i, j)
    return uf.n_components == 1


def check_coverage(rects: RectUnion, space: ParamSpace) -> float:
    """Worst distance from a parameter sample to the projected closed elements."""
    if rects.size == 0:
        return space.diameter
    x_elems = sorted({ex for ex, _ in rects.rects})
    centers = rects.cover_x.centers[x_elems]
    radii = rects.cover_x.radii[x_elems]
    gap = 0.0
    for p in space.points:
        d = space.distances_to(p, centers) - radii
        gap = max(gap, float(max(0.0, d.min())))
    return gap


def _x_sample_points(rects: RectUnion, ex: int, limit: int) -> np.ndarray:
    """Deterministic samples of a closed parameter element: center plus the
    first in-element sample points."""
    cover = rects.cover_x
    space: ParamSpace = cover.space  # type: ignore[assignment]
    c = cover.centers[ex]
    r = float(cover.radii[ex])
    pts = [c]
    if limit > 1:
        d = space.distances_to(c, space.points)
        inside = np.nonzero(d <= r)[0]
        for i in inside[: limit - 1]:
            pts.append(space.points[i])
    return np.array(pts)


def _y_sample_points(rects: RectUnion, ey: int) -> np.ndarray:
    """Corners and center of a closed state element, clipped to the box."""
    cover = rects.cover_y
    space: StateSpace = cover.space  # type: ignore[assignment]
    c = cover.centers[ey]
    r = float(cover.radii[ey])
    pts = [c]
    for signs in itertools.product((-1.0, 1.0), repeat=space.dims):
        pts.append(c + r * np.array(signs))
    out = np.clip(np.array(pts), space.lower, space.upper)
    return np.unique(out, axis=0)


def check_residual(rects: RectUnion, pmap: ParametricMap,
                   samples_per_rect: int = 3) -> float:
    """Max fixed-point defect ||f(x,y) - y||_inf over the corner/center
    lattice of every closed rectangle."""
    if samples_per_rect < 1:
        raise ValueError("samples_per_rect must be >= 1")
    worst = 0.0
    y_cache: dict[int, np.ndarray] = {}
    x_cache: dict[int, np.ndarray] = {}
    for ex, ey in rects.rects:
        xs = x_cache.get(ex)
        if xs is None:
            xs = x_cache[ex] = _x_sample_points(rects, ex, samples_per_rect)
        ys = y_cache.get(ey)
        if ys is None:
            ys = y_cache[ey] = _y_sample_points(rects, ey)
        for x in xs:
            out = eval_map_batch(pmap, x, ys)
            worst = max(worst, float(np.max(np.abs(out - ys))))
    return worst


def rect_union_points(rects: RectUnion) -> np.ndarray:
    """Point-sample cloud of the union in R^(d+m): parameter element center
    and axis extremes crossed with state element corners and center."""
    if rects.size == 0:
        raise EmptyUnion("empty rectangle union")
    cover_x, cover_y = rects.cover_x, rects.cover_y
    d = cover_x.centers.shape[1]
    xs_cache: dict[int, np.ndarray] = {}
    ys_cache: dict[int, np.ndarray] = {}
    rows = []
    for ex, ey in rects.rects:
        xs = xs_cache.get(ex)
        if xs is None:
            c = cover_x.centers[ex]
            r = float(cover_x.radii[ex])
            pts = [c]
            for j in range(d):
                e = np.zeros(d)
                e[j] = r
                pts.extend([c + e, c - e])
            xs = xs_cache[ex] = np.array(pts)
        ys = ys_cache.get(ey)
        if ys is None:
            ys = ys_cache[ey] = _y_sample_points(rects, ey)
        for x in xs:
            for y in ys:
                rows.append(np.concatenate([x, y]))
    return np.unique(np.round(np.array(rows), 12), axis=0)


def hausdorff_points(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between point clouds under the product
    max-norm."""
    ta, tb = cKDTree(a), cKDTree(b)
    d_ab = tb.query(a, p=np.inf)[0].max()
    d_ba = ta.query(b, p=np.inf)[0].max()
    return float(max(d_ab, d_ba))


def hausdorff_distance(a: RectUnion, b: RectUnion) -> float:
    """Hausdorff distance between two unions on their corner/center samples;
    zero exactly when the sampled sets coincide."""
    return hausdorff_points(rect_union_points(a), rect_union_points(b))


def residual_bound(tol: float, inflation: float, lipschitz: float,
                   radius_x: float, radius_y: float) -> float:
    """Propagated membership bound for sampled rectangle points: the marked
    witness contributes tol + inflation, moving the parameter contributes
    L * rX, and moving the state across a closed element contributes
    (1 + L) * 2 * rY because the residual has y-slope up to 1 + L."""
    return tol + inflation + lipschitz * radius_x + (1.0 + lipschitz) * 2.0 * radius_y


def _iteration_grid(pl: PLMap, base: GridSpec, radius_y: float,
                    space_y: StateSpace, lipschitz: float,
                    resolution: int = 4) -> GridSpec:
    """Grid for one refinement iteration: cell sizes tied to the state cover
    radius and s-cells snapped up to a multiple of the walk length."""
    y_cells = tuple(
        max(base.y_cells[j] if j < len(base.y_cells) else 1,
            resolution * math.ceil(float(space_y.width[j]) / radius_y))
        for j in range(space_y.dims)
    )
    n = max(pl.N, 1)
    target = max(base.s_cells, max(y_cells))
    s_cells = n * max(1, math.ceil(target / n))
    tol = default_tol(pl, s_cells, y_cells, space_y, lipschitz)
    return GridSpec(s_cells=s_cells, y_cells=y_cells, tol=tol,
                    inflation=base.inflation)


def trace(pmap: ParametricMap, schedule: RefinementSchedule, grid: GridSpec,
          max_iters: int = 6, stability_eps: float = 0.05,
          walk_start: int = 0, max_refines: int = 2,
          samples_per_rect: int = 3, keep_iterations: bool = True) -> TraceResult:
    """Refinement loop to a Hausdorff-stable rectangle-union approximation.

    Convergence requires: consecutive unions within ``stability_eps`` in
    Hausdorff distance, a connected union, coverage gap at most the current
    parameter radius, and residual within the propagated bound.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    space_x, space_y = pmap.space_x, pmap.space_y
    if pmap.lipschitz_estimate is None:
        estimate_lipschitz(pmap, samples=4000, seed=0)
    lip = pmap.lipschitz_estimate

    history: list[IterationRecord] = []
    artifacts: list[tuple] = []
    prev_union: Optional[RectUnion] = None
    final_union: Optional[RectUnion] = None
    converged = False
    last = dict(residual=float("inf"), gap=float("inf"), conn=False, bound=float("inf"))

    for k in range(max_iters):
        rx, ry = schedule.radii(k)
        try:
            cover_x = build_cover(space_x, rx)
            graph = cover_graph(cover_x)
        except DisconnectedCover as exc:
            raise DisconnectedCover(f"iteration {k}: {exc}") from exc
        wk = covering_walk(graph, start=walk_start)
        cover_y = build_cover(space_y, ry)
        pl = PLMap(wk, cover_x, pmap)
        gk = _iteration_grid(pl, grid, ry, space_y, lip)
        try:
            comp = solve_onedim(pl, gk, max_refines=max_refines)
        except NoComponent as exc:
            raise NoComponent(f"iteration {k}: {exc}") from exc
        gk = comp.grid  # solve may have refined

        if not comp.projection_complete:
            history.append(IterationRecord(
                index=k, radius_x=rx, radius_y=ry, s_cells=gk.s_cells,
                y_cells=gk.y_cells, tol=gk.tol, inflation=gk.inflation,
                n_cover_x=cover_x.size, n_cover_y=cover_y.size,
                walk_length=wk.N, n_marked=len(comp.marked),
                n_component=len(comp.component), projection_complete=False,
                n_rects=0, connected=False, coverage_gap=float("inf"),
                residual_max=float("inf"), hausdorff_step=float("inf"),
                residual_bound=float("inf")))
            if keep_iterations:
                artifacts.append((wk, comp, cover_x, cover_y, None))
            prev_union = None
            continue

        union = build_rect_union(comp, wk, cover_x, cover_y)
        conn = check_connected(union)
        gap = check_coverage(union, space_x)
        res = check_residual(union, pmap, samples_per_rect)
        bound = residual_bound(gk.tol, gk.inflation, lip, rx, ry)
        step = hausdorff_distance(prev_union, union) if prev_union is not None else float("inf")

        history.append(IterationRecord(
            index=k, radius_x=rx, radius_y=ry, s_cells=gk.s_cells,
            y_cells=gk.y_cells, tol=gk.tol, inflation=gk.inflation,
            n_cover_x=cover_x.size, n_cover_y=cover_y.size,
            walk_length=wk.N, n_marked=len(comp.marked),
            n_component=len(comp.component), projection_complete=True,
            n_rects=union.size, connected=conn, coverage_gap=gap,
            residual_max=res, hausdorff_step=step, residual_bound=bound))
        if keep_iterations:
            artifacts.append((wk, comp, cover_x, cover_y, union))
        final_union = union
        last = dict(residual=res, gap=gap, conn=conn, bound=bound)
        if step <= stability_eps and conn and gap <= rx and res <= bound:
            converged = True
            break
        prev_union = union

    return TraceResult(
        final_rects=final_union,
        history=tuple(history),
        converged=converged,
        residual_max=last["residual"],
        coverage_gap=last["gap"],
        connected=last["conn"],
        residual_bound=last["bound"],
        iterations=tuple(artifacts),
    )
