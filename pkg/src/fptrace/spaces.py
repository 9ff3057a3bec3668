"""Parameter space, state space, and the wrapped user map.

The parameter space is realized as a finite metric sample with a declared
connectivity radius; the state space is a compact axis-aligned box.  The user
map is wrapped with evaluation bookkeeping and a hard range check: a returned
state outside the box is an error, never clamped, because clamping would
manufacture spurious boundary fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import RangeViolation
from .unionfind import UnionFind

Metric = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class ParamSpace:
    """Finite sample of a compact connected parameter set.

    ``points`` has shape (n, d).  ``metric`` is Euclidean when None.  The
    sample must be connected at ``connectivity_radius`` (checked on
    construction): this is the discrete stand-in for connectedness of the
    underlying space.
    """

    points: np.ndarray
    connectivity_radius: float
    metric: Optional[Metric] = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, d) array")
        if self.connectivity_radius <= 0:
            raise ValueError("connectivity_radius must be positive")
        if not self._connected_at(self.connectivity_radius):
            raise ValueError(
                "sample is disconnected at the declared connectivity radius"
            )

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        if self.metric is not None:
            return float(self.metric(np.asarray(a, float), np.asarray(b, float)))
        return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))

    def distances_to(self, p: np.ndarray, centers: np.ndarray) -> np.ndarray:
        """Distances from point p to each row of centers."""
        p = np.asarray(p, float)
        centers = np.atleast_2d(centers)
        if self.metric is not None:
            return np.array([self.metric(p, c) for c in centers])
        return np.linalg.norm(centers - p[None, :], axis=1)

    @cached_property
    def diameter(self) -> float:
        pts = self.points
        if self.metric is None:
            # max pairwise Euclidean distance, chunked to bound memory
            best = 0.0
            for i in range(0, len(pts), 512):
                d = np.linalg.norm(pts[i : i + 512, None, :] - pts[None, :, :], axis=2)
                best = max(best, float(d.max()))
            return best
        best = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = max(best, self.metric(pts[i], pts[j]))
        return best

    def _connected_at(self, radius: float) -> bool:
        n = self.size
        if n == 1:
            return True
        uf = UnionFind(n)
        if self.metric is None:
            tree = cKDTree(self.points)
            for i, j in tree.query_pairs(radius, output_type="set"):
                uf.union(i, j)
        else:
            for i in range(n):
                for j in range(i + 1, n):
                    if self.metric(self.points[i], self.points[j]) <= radius:
                        uf.union(i, j)
        return uf.n_components == 1


@dataclass(frozen=True)
class StateSpace:
    """Compact convex box in R^m with per-axis bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("need lower[j] < upper[j] on every axis")

    @property
    def dims(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, y: np.ndarray) -> bool:
        y = np.asarray(y, float)
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))

    def contains_many(self, ys: np.ndarray) -> np.ndarray:
        ys = np.atleast_2d(ys)
        return np.all((ys >= self.lower) & (ys <= self.upper), axis=1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dims))


@dataclass
class ParametricMap:
    """User map f with evaluation bookkeeping.

    ``evaluator(x, y) -> y'`` must be deterministic and return a point inside
    the state box.  When ``vectorized`` is set, the evaluator also accepts a
    (k, m) batch of states for a single parameter point and returns (k, m).
    ``eval_count`` totals individual state evaluations; updates are plain
    increments, so under threads the observable total equals the number of
    calls only if callers serialize (queries themselves are reentrant).
    """

    evaluator: Callable
    space_x: ParamSpace
    space_y: StateSpace
    vectorized: bool = False
    eval_count: int = 0
    lipschitz_estimate: Optional[float] = None


def eval_map(pmap: ParametricMap, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate f(x, y), checking the range contract."""
    out = np.atleast_1d(np.asarray(pmap.evaluator(np.asarray(x, float),
                                                  np.asarray(y, float)), dtype=float))
    pmap.eval_count += 1
    if not pmap.space_y.contains(out):
        raise RangeViolation(
            f"map returned {out} outside state bounds "
            f"[{pmap.space_y.lower}, {pmap.space_y.upper}]"
        )
    return out


def eval_map_batch(pmap: ParametricMap, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Evaluate f(x, .) on a (k, m) batch of states."""
    ys = np.atleast_2d(np.asarray(ys, float))
    if pmap.vectorized:
        out = np.atleast_2d(np.asarray(pmap.evaluator(np.asarray(x, float), ys),
                                       dtype=float))
        if out.shape != ys.shape:
            out = out.reshape(ys.shape)
        pmap.eval_count += len(ys)
    else:
        out = np.empty_like(ys)
        for k in range(len(ys)):
            row = np.atleast_1d(np.asarray(
                pmap.evaluator(np.asarray(x, float), ys[k]), dtype=float))
            out[k] = row
        pmap.eval_count += len(ys)
    bad = ~pmap.space_y.contains_many(out)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise RangeViolation(
            f"map returned {out[k]} outside state bounds at y={ys[k]}"
        )
    return out


def estimate_lipschitz(pmap: ParametricMap, samples: int, seed: int) -> float:
    """Sampled Lipschitz constant of f over random point pairs.

    Maximizes ||f(x,y) - f(x',y')||_inf / (d(x,x') + ||y - y'||_inf) over
    ``samples`` random pairs; deterministic given the seed.  The estimate is
    stored on the map and approaches the true constant from below.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = np.random.default_rng(seed)
    sx, sy = pmap.space_x, pmap.space_y
    ia = rng.integers(0, sx.size, size=samples)
    ib = rng.integers(0, sx.size, size=samples)
    ya = sy.sample(rng, samples)
    yb = sy.sample(rng, samples)
    best = 0.0
    for k in range(samples):
        xa, xb = sx.points[ia[k]], sx.points[ib[k]]
        den = sx.distance(xa, xb) + float(np.max(np.abs(ya[k] - yb[k])))
        if den == 0.0:
            continue
        fa = eval_map(pmap, xa, ya[k])
        fb = eval_map(pmap, xb, yb[k])
        best = max(best, float(np.max(np.abs(fa - fb))) / den)
    pmap.lipschitz_estimate = best
    return best


def interval_space(lo: float, hi: float, n: int) -> ParamSpace:
    """Evenly sampled interval parameter space."""
    pts = np.linspace(lo, hi, n)[:, None]
    h = (hi - lo) / (n - 1) if n > 1 else 1.0
    return ParamSpace(points=pts, connectivity_radius=h * 1.001)


def grid_space_2d(lo: float, hi: float, n: int) -> ParamSpace:
    """n x n grid sample of a square parameter space."""
    axis = np.linspace(lo, hi, n)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    h = (hi - lo) / (n - 1) if n > 1 else 1.0
    return ParamSpace(points=pts, connectivity_radius=h * 1.001)
