"""Finite covers, the refinement order, the intersection graph, k-neighbors.

Parameter-space covers are metric balls centered on a greedy net of the
sample; state-space covers are axis-aligned boxes (max-norm balls) from an
overlapping tiling, so every element is convex.  Representatives are element
centers: the construction allows an arbitrary interior point, and centers
keep the output reproducible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateRadius, DisconnectedCover
from .spaces import ParamSpace, StateSpace
from .unionfind import UnionFind

Space = Union[ParamSpace, StateSpace]


@dataclass(frozen=True)
class Cover:
    """Finite cover by balls (X, metric) or boxes (Y, max-norm).

    ``centers`` doubles as the representative of each element.  ``radii`` is
    per-element; covers built here use one radius throughout.  Immutable
    after construction; queries are safe to share across threads.
    """

    centers: np.ndarray          # (n, dim)
    radii: np.ndarray            # (n,)
    space_tag: str               # "X" or "Y"
    convex_flag: bool
    space: Space

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, float)))
        object.__setattr__(self, "radii", np.atleast_1d(np.asarray(self.radii, float)))
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii length mismatch")
        if self.space_tag not in ("X", "Y"):
            raise ValueError("space_tag must be 'X' or 'Y'")

    @property
    def size(self) -> int:
        return len(self.centers)

    @property
    def representatives(self) -> np.ndarray:
        return self.centers

    @property
    def nominal_radius(self) -> float:
        return float(self.radii.max())

    def _dist(self, p: np.ndarray, centers: np.ndarray) -> np.ndarray:
        """Element-norm distances from p to the given centers."""
        p = np.asarray(p, float)
        centers = np.atleast_2d(centers)
        if self.space_tag == "Y":
            return np.max(np.abs(centers - p[None, :]), axis=1)
        return self.space.distances_to(p, centers)

    def contains(self, idx: int, p: np.ndarray, closed: bool = False) -> bool:
        d = float(self._dist(p, self.centers[idx : idx + 1])[0])
        r = float(self.radii[idx])
        return d <= r if closed else d < r

    def elements_containing(self, p: np.ndarray, closed: bool = False) -> list[int]:
        d = self._dist(p, self.centers)
        mask = d <= self.radii if closed else d < self.radii
        return [int(i) for i in np.nonzero(mask)[0]]

    def element_in_element(self, other: "Cover", i: int, j: int) -> bool:
        """True when element i of self is geometrically inside element j of other."""
        d = float(other._dist(self.centers[i], other.centers[j : j + 1])[0])
        return d + float(self.radii[i]) <= float(other.radii[j]) + 1e-12

    def to_dict(self) -> dict:
        return {
            "space_tag": self.space_tag,
            "convex": self.convex_flag,
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "representatives": self.centers.tolist(),
        }


@dataclass(frozen=True)
class CoverGraph:
    """Intersection graph of a cover: one vertex per element, edges between
    elements with overlapping interiors."""

    cover: Cover
    edges: tuple          # sorted tuple of (i, j), i < j

    @property
    def n_vertices(self) -> int:
        return self.cover.size

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for lst in adj:
            lst.sort()
        return adj


def build_cover(space: Space, radius: float, min_elements: int = 1) -> Cover:
    """Cover the space with radius-``radius`` elements.

    For a ParamSpace: greedy net over the sample points, one metric ball per
    net point, so every sample lies in an element.  For a StateSpace: an
    overlapping box tiling with ceil(width/radius) elements per axis.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if isinstance(space, ParamSpace):
        if min_elements > 1 and radius > space.diameter:
            raise DegenerateRadius(
                f"radius {radius} exceeds space diameter {space.diameter}"
            )
        centers = _greedy_net(space, radius)
        return Cover(centers=centers, radii=np.full(len(centers), radius),
                     space_tag="X", convex_flag=False, space=space)
    if min_elements > 1 and radius > float(space.width.max()):
        raise DegenerateRadius(
            f"radius {radius} exceeds box diameter {float(space.width.max())}"
        )
    centers = _box_tiling(space, radius)
    return Cover(centers=centers, radii=np.full(len(centers), radius),
                 space_tag="Y", convex_flag=True, space=space)


def _greedy_net(space: ParamSpace, radius: float) -> np.ndarray:
    picked: list[int] = []
    pts = space.points
    if space.metric is None:
        covered = np.zeros(len(pts), dtype=bool)
        for i in range(len(pts)):
            if covered[i]:
                continue
            picked.append(i)
            covered |= np.linalg.norm(pts - pts[i], axis=1) < radius
    else:
        for i in range(len(pts)):
            if not any(space.metric(pts[i], pts[j]) < radius for j in picked):
                picked.append(i)
    return pts[picked]


def _box_tiling(space: StateSpace, radius: float) -> np.ndarray:
    axes = []
    for j in range(space.dims):
        w = float(space.width[j])
        n = max(1, math.ceil(w / radius - 1e-12))
        axes.append(space.lower[j] + w * (np.arange(n) + 0.5) / n)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def refine(cover: Cover, factor: float) -> Cover:
    """Shrink the cover: child radius = factor * parent radius, and every
    child is contained in its parent, so the result is finer in the subset
    order on covers."""
    if not 0.0 < factor < 1.0:
        raise ValueError("factor must lie in (0, 1)")
    if cover.space_tag == "Y":
        return _refine_box(cover, factor)
    return _refine_net(cover, factor)


def _refine_net(cover: Cover, factor: float) -> Cover:
    """Greedy subcover of pulled candidates.

    For each sample p inside a parent ball B(c, r), the point on the segment
    c -> p at distance <= (1-factor)*r from c is within factor*r of p, and a
    child ball there sits inside the parent.  Greedy selection keeps a child
    only when it covers a not-yet-covered sample, so degenerate spaces stay
    small.
    """
    space: ParamSpace = cover.space  # type: ignore[assignment]
    if space.metric is not None:
        return _refine_net_metric(cover, factor)
    pts = space.points
    new_r = cover.radii * factor
    kept_centers: list[np.ndarray] = []
    kept_radii: list[float] = []
    covered = np.zeros(len(pts), dtype=bool)
    for e in range(cover.size):
        c = cover.centers[e]
        r = float(cover.radii[e])
        slack = (1.0 - factor) * r
        d = np.linalg.norm(pts - c, axis=1)
        inside = np.nonzero(d < r)[0]
        candidates = [c]
        for i in inside:
            di = d[i]
            if di <= slack or di == 0.0:
                candidates.append(pts[i])
            else:
                candidates.append(c + (pts[i] - c) * (slack / di))
        for cand in candidates:
            gain = (np.linalg.norm(pts - cand, axis=1) < new_r[e]) & ~covered
            if np.any(gain):
                kept_centers.append(np.asarray(cand, float))
                kept_radii.append(float(new_r[e]))
                covered |= np.linalg.norm(pts - cand, axis=1) < new_r[e]
    if not np.all(covered):
        raise DisconnectedCover("refinement failed to cover every sample point")
    return Cover(centers=np.array(kept_centers), radii=np.array(kept_radii),
                 space_tag="X", convex_flag=cover.convex_flag, space=space)


def _refine_net_metric(cover: Cover, factor: float) -> Cover:
    # without vector structure, children can only sit at sample points
    space: ParamSpace = cover.space  # type: ignore[assignment]
    pts = space.points
    kept_centers: list[np.ndarray] = []
    kept_radii: list[float] = []
    covered = [False] * len(pts)
    for e in range(cover.size):
        c = cover.centers[e]
        r = float(cover.radii[e])
        slack = (1.0 - factor) * r
        cands = [c] + [pts[i] for i in range(len(pts))
                       if space.metric(pts[i], c) <= slack]
        for cand in cands:
            gain = [i for i in range(len(pts))
                    if not covered[i] and space.metric(pts[i], cand) < factor * r]
            if gain:
                kept_centers.append(np.asarray(cand, float))
                kept_radii.append(factor * r)
                for i in range(len(pts)):
                    if space.metric(pts[i], cand) < factor * r:
                        covered[i] = True
    if not all(covered):
        raise DisconnectedCover(
            "metric-table space too sparse for containment refinement at this factor"
        )
    return Cover(centers=np.array(kept_centers), radii=np.array(kept_radii),
                 space_tag="X", convex_flag=cover.convex_flag, space=space)


def _refine_box(cover: Cover, factor: float) -> Cover:
    """Per-axis subdivision of each box element by contained children."""
    space: StateSpace = cover.space  # type: ignore[assignment]
    new_centers: list[np.ndarray] = []
    new_radii: list[float] = []
    for e in range(cover.size):
        c = cover.centers[e]
        r = float(cover.radii[e])
        nr = factor * r
        slack = (1.0 - factor) * r
        if slack <= 0:
            offsets = np.array([0.0])
        else:
            # smallest child count per axis with strictly overlapping children
            k = 2
            while 2.0 * slack / (k - 1) >= 2.0 * nr:
                k += 1
            offsets = np.linspace(-slack, slack, k)
        grids = np.meshgrid(*([offsets] * space.dims), indexing="ij")
        offs = np.column_stack([g.ravel() for g in grids])
        for o in offs:
            new_centers.append(c + o)
            new_radii.append(nr)
    return Cover(centers=np.array(new_centers), radii=np.array(new_radii),
                 space_tag="Y", convex_flag=True, space=space)


def _intersecting_pairs(cover: Cover, closed: bool = False) -> list[tuple[int, int]]:
    """All element pairs with intersecting interiors (or closures)."""
    n = cover.size
    centers, radii = cover.centers, cover.radii
    pairs: list[tuple[int, int]] = []
    if cover.space_tag == "Y":
        for i in range(n):
            gap = np.max(np.abs(centers[i + 1:] - centers[i]), axis=1) if i + 1 < n else np.array([])
            thr = radii[i] + radii[i + 1:]
            hit = gap <= thr if closed else gap < thr
            pairs.extend((i, i + 1 + int(j)) for j in np.nonzero(hit)[0])
        return pairs
    space: ParamSpace = cover.space  # type: ignore[assignment]
    if space.metric is None and n > 64:
        tree = cKDTree(centers)
        cap = float(2.0 * radii.max())
        cand = tree.query_pairs(cap * (1.0 + 1e-9), output_type="set")
        for i, j in sorted(cand):
            d = float(np.linalg.norm(centers[i] - centers[j]))
            thr = float(radii[i] + radii[j])
            if (d <= thr) if closed else (d < thr):
                pairs.append((i, j))
        return pairs
    for i in range(n):
        for j in range(i + 1, n):
            d = space.distance(centers[i], centers[j])
            thr = float(radii[i] + radii[j])
            if (d <= thr) if closed else (d < thr):
                pairs.append((i, j))
    return pairs


def cover_graph(cover: Cover) -> CoverGraph:
    """Intersection graph; raises when disconnected, since every later stage
    assumes a connected graph."""
    if cover.size == 0:
        raise ValueError("cover is empty")
    pairs = _intersecting_pairs(cover)
    uf = UnionFind(cover.size)
    for i, j in pairs:
        uf.union(i, j)
    if uf.n_components != 1:
        raise DisconnectedCover(
            f"cover graph has {uf.n_components} components; "
            "radius too small for the sample density"
        )
    return CoverGraph(cover=cover, edges=tuple(sorted(pairs)))


def k_neighbor(cover: Cover, z: np.ndarray, z2: np.ndarray, k: int) -> bool:
    """Whether z and z2 are joined by a chain of at most k+1 pairwise
    intersecting elements, the first containing z and the last z2.

    Monotone in k: a shorter chain is also a longer one.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    start = cover.elements_containing(z)
    goal = set(cover.elements_containing(z2))
    if not start or not goal:
        return False
    if set(start) & goal:
        return True
    adj: dict[int, list[int]] = {i: [] for i in range(cover.size)}
    for i, j in _intersecting_pairs(cover):
        adj[i].append(j)
        adj[j].append(i)
    seen = {i: 0 for i in start}
    queue = deque(start)
    while queue:
        v = queue.popleft()
        if seen[v] >= k:
            continue
        for w in adj[v]:
            if w not in seen:
                seen[w] = seen[v] + 1
                if w in goal:
                    return True
                queue.append(w)
    return False


def calibrate_radii(pmap, epsilon: float,
                    default: tuple[float, float] = (0.25, 0.25)) -> tuple[float, float]:
    """Radii small enough that 4-neighbor moves in X and 2-neighbor moves in Y
    shift f by at most epsilon under the Lipschitz estimate.

    A k-neighbor chain spans at most 2(k+1) radii, giving the constraint
    8*rX*L + 4*rY*L <= epsilon.  With L = 0 any radii qualify and the
    requested defaults are returned.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    L = pmap.lipschitz_estimate
    if L is None:
        raise ValueError("lipschitz_estimate required; run estimate_lipschitz first")
    if L == 0.0:
        return default
    r = epsilon / (12.0 * L)
    return (r, r)
