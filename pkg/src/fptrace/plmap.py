"""Piecewise-linear one-parameter reduction of the map along a walk.

For a walk x_0, ..., x_N over parameter-cover representatives, the reduced map
sends (s, y) with s = (i + t)/N to (1-t) f(x_i, y) + t f(x_{i+1}, y).  At
breakpoints s = i/N it equals f(x_i, y) exactly; between them each section in
s is linear, and the value stays inside the state box because it is a convex
combination of two states.
"""

from __future__ import annotations

import math

import numpy as np

from .covers import Cover
from .spaces import ParametricMap, eval_map, eval_map_batch
from .walk import Walk

# tolerance for snapping s*N to an integer so breakpoint sections are exact
_SNAP = 1e-9


class PLMap:
    """Walk-induced one-parameter map with breakpoint caching.

    Breakpoint evaluations f(x_i, y) are cached keyed by (i, y-bytes): the
    one-dimensional solver re-reads each section across many grid cells.
    Cache inserts are last-write-wins with identical values, so concurrent
    readers see consistent data.
    """

    def __init__(self, walk: Walk, cover: Cover, pmap: ParametricMap):
        self.walk = walk
        self.cover = cover
        self.pmap = pmap
        self._point_cache: dict = {}
        self._batch_cache: dict = {}

    @property
    def N(self) -> int:
        return self.walk.N

    def rep(self, i: int) -> np.ndarray:
        """Parameter point x_i of the walk."""
        return self.cover.centers[self.walk.sequence[i]]

    def segment_of(self, s: float) -> tuple[int, float]:
        """Segment index and local coordinate for s in [0, 1].

        s = 1 maps to the last segment with t = 1, and near-breakpoint values
        snap so breakpoint sections are reproduced exactly.
        """
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"s={s} outside [0, 1]")
        n = self.N
        if n == 0:
            return 0, 0.0
        u = s * n
        k = round(u)
        if abs(u - k) <= _SNAP * max(1.0, n):
            k = int(k)
            if k >= n:
                return n - 1, 1.0
            return k, 0.0
        i = min(int(math.floor(u)), n - 1)
        return i, u - i

    def breakpoint_state(self, i: int, y: np.ndarray) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, float))
        key = (i, y.tobytes())
        hit = self._point_cache.get(key)
        if hit is None:
            hit = eval_map(self.pmap, self.rep(i), y)
            self._point_cache[key] = hit
        return hit

    def breakpoint_states(self, i: int, ys: np.ndarray) -> np.ndarray:
        """f(x_i, .) over a (k, m) batch of states, cached per batch."""
        ys = np.atleast_2d(np.asarray(ys, float))
        key = (i, ys.shape, hash(ys.tobytes()))
        hit = self._batch_cache.get(key)
        if hit is None:
            hit = eval_map_batch(self.pmap, self.rep(i), ys)
            self._batch_cache[key] = hit
        return hit


def eval_pl(pl: PLMap, s: float, y: np.ndarray) -> np.ndarray:
    """Evaluate the reduced map at (s, y)."""
    i, t = pl.segment_of(s)
    if pl.N == 0:
        return pl.breakpoint_state(0, y)
    if t == 0.0:
        return pl.breakpoint_state(i, y)
    if t == 1.0:
        return pl.breakpoint_state(i + 1, y)
    a = pl.breakpoint_state(i, y)
    b = pl.breakpoint_state(i + 1, y)
    return (1.0 - t) * a + t * b
