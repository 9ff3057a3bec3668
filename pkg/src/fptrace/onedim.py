"""One-dimensional fixed-point component extraction on a cell grid.

Cells of [0,1] x Y are marked when the max-norm residual of the reduced map at
the cell center passes the tolerance; components are taken under closed-cell
adjacency (faces and corners, matching closed-rectangle intersection), and the
result is the component whose s-projection covers every column, when one
exists.  The exact component is a closed connected set; the grid both over-
and under-approximates it, so the tolerance and inflation are reported with
every result rather than any claim of exactness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import NoComponent
from .plmap import PLMap
from .spaces import StateSpace
from .unionfind import UnionFind

Cell = tuple  # (s_index, y_index_0, ..., y_index_{m-1})


@dataclass(frozen=True)
class GridSpec:
    """Cell grid over [0,1] x Y.

    ``s_cells`` must be a multiple of the walk length N so every breakpoint
    i/N is a cell boundary.  The marking threshold is ``tol + inflation``;
    ``inflation`` carries any Lipschitz slack on top of the base tolerance.
    """

    s_cells: int
    y_cells: tuple
    tol: float
    inflation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y_cells", tuple(int(c) for c in np.atleast_1d(self.y_cells)))
        if self.s_cells < 1 or any(c < 1 for c in self.y_cells):
            raise ValueError("cell counts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.inflation < 0:
            raise ValueError("inflation must be >= 0")

    def check_compatible(self, n_segments: int) -> None:
        if n_segments > 0 and self.s_cells % n_segments != 0:
            raise ValueError(
                f"s_cells={self.s_cells} must be a multiple of the walk length {n_segments}"
            )

    def y_centers(self, space: StateSpace) -> np.ndarray:
        """(K, m) array of cell-center states, K = prod(y_cells)."""
        axes = [space.lower[j] + space.width[j] * (np.arange(self.y_cells[j]) + 0.5)
                / self.y_cells[j]
                for j in range(space.dims)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    def y_cell_bounds(self, space: StateSpace, b: tuple) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([space.lower[j] + space.width[j] * b[j] / self.y_cells[j]
                       for j in range(space.dims)])
        hi = np.array([space.lower[j] + space.width[j] * (b[j] + 1) / self.y_cells[j]
                       for j in range(space.dims)])
        return lo, hi

    def s_bounds(self, a: int) -> tuple[float, float]:
        return a / self.s_cells, (a + 1) / self.s_cells


@dataclass(frozen=True)
class ComponentGrid:
    """Marked cells and the selected connected component."""

    marked: frozenset
    component: frozenset
    projection_complete: bool
    grid: GridSpec

    def component_columns(self) -> set[int]:
        return {c[0] for c in self.component}

    def rle(self) -> list[list[int]]:
        """Run-length encoding of the component along the last y axis."""
        cells = sorted(self.component)
        runs: list[list[int]] = []
        for cell in cells:
            if runs:
                prev = runs[-1]
                if list(cell[:-1]) == prev[:-2] and cell[-1] == prev[-2] + prev[-1]:
                    prev[-1] += 1
                    continue
            runs.append(list(cell) + [1])
        return runs


def mark_cells(pl: PLMap, grid: GridSpec) -> set:
    """Cells whose center residual passes tol + inflation."""
    grid.check_compatible(pl.N)
    space = pl.pmap.space_y
    yc = grid.y_centers(space)
    thr = grid.tol + grid.inflation
    marked: set = set()
    n = pl.N
    for a in range(grid.s_cells):
        s = (a + 0.5) / grid.s_cells
        if n == 0:
            g = pl.breakpoint_states(0, yc)
        else:
            u = s * n
            i = min(int(u), n - 1)
            t = u - i
            fa = pl.breakpoint_states(i, yc)
            fb = pl.breakpoint_states(i + 1, yc)
            g = (1.0 - t) * fa + t * fb
        res = np.max(np.abs(g - yc), axis=1)
        for flat in np.nonzero(res <= thr)[0]:
            b = np.unravel_index(int(flat), grid.y_cells)
            marked.add((a, *(int(v) for v in b)))
    return marked


def extract_component(marked: set, grid: GridSpec) -> ComponentGrid:
    """Connected components of the marked set under face-and-corner adjacency;
    returns the lexicographically smallest component with full s-projection,
    or the widest component flagged incomplete."""
    if not marked:
        raise NoComponent("no cell passed the residual test")
    cells = sorted(marked)
    index = {c: i for i, c in enumerate(cells)}
    dim = len(cells[0])
    uf = UnionFind(len(cells))
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=dim) if any(o)]
    half = [o for o in offsets if o > (0,) * dim]  # one direction per pair
    for c in cells:
        for o in half:
            nb = tuple(c[k] + o[k] for k in range(dim))
            j = index.get(nb)
            if j is not None:
                uf.union(index[c], j)
    comps: dict[int, list[Cell]] = {}
    for c in cells:
        comps.setdefault(uf.find(index[c]), []).append(c)

    all_cols = set(range(grid.s_cells))
    complete = [v for v in comps.values() if {c[0] for c in v} == all_cols]
    if complete:
        chosen = min(complete, key=lambda v: min(v))
        return ComponentGrid(marked=frozenset(marked), component=frozenset(chosen),
                             projection_complete=True, grid=grid)
    chosen = max(comps.values(),
                 key=lambda v: (len({c[0] for c in v}), [-x for x in min(v)]))
    return ComponentGrid(marked=frozenset(marked), component=frozenset(chosen),
                         projection_complete=False, grid=grid)


def solve_onedim(pl: PLMap, grid: GridSpec, max_refines: int = 2) -> ComponentGrid:
    """Mark and extract, doubling the grid until the component projects onto
    every column or the refinement budget runs out.  An incomplete result is
    returned flagged, not raised."""
    if max_refines < 0:
        raise ValueError("max_refines must be >= 0")
    current = grid
    result = None
    for attempt in range(max_refines + 1):
        try:
            result = extract_component(mark_cells(pl, current), current)
        except NoComponent:
            # nothing marked at this resolution; a finer grid may still succeed
            if attempt == max_refines and result is None:
                raise
        else:
            if result.projection_complete:
                return result
        current = replace(current,
                          s_cells=current.s_cells * 2,
                          y_cells=tuple(c * 2 for c in current.y_cells))
    return result


def default_tol(pl: PLMap, grid_s_cells: int, y_cells: tuple,
                space: StateSpace, lipschitz: float) -> float:
    """Tolerance that marks every cell containing a true fixed point.

    Bounds the residual variation over half a cell: the s-slope of the reduced
    map is at most N * L * (longest walk step), and the y-slope of the residual
    is at most L + 1.
    """
    n = pl.N
    dy = float(np.max(space.width / np.array(y_cells)))
    if n == 0:
        slope_s = 0.0
    else:
        steps = [pl.cover.space.distance(pl.rep(i), pl.rep(i + 1)) for i in range(n)]
        slope_s = n * lipschitz * max(steps)
    ds = 1.0 / grid_s_cells
    return 0.55 * (slope_s * ds + (lipschitz + 1.0) * dy)
