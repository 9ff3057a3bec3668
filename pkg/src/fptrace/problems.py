"""Built-in test problems and the dense-grid verification oracle.

Each problem bundles spaces, the wrapped map, and (when known) a generator
for the true full-projection component, so end-to-end runs can be checked
against an independent brute-force computation.
"""

from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import OracleNoComponent, UnknownProblem
from .spaces import (ParamSpace, ParametricMap, StateSpace, grid_space_2d,
                     interval_space)
from .unionfind import UnionFind

# logistic best-response precision; at 8 the coordination game has a fold
# region with three equilibria at mid-parameters (verified by the oracle scan)
LOGIT_LAMBDA = 8.0


@dataclass
class Problem:
    name: str
    space_x: ParamSpace
    space_y: StateSpace
    map: ParametricMap
    analytic_component: Optional[Callable[[int], np.ndarray]] = None



def _wrap(core: Callable) -> Callable:
    """Adapt a batch evaluator core(x, (k, m)) -> (k, m) so single states
    (m,) come back as (m,)."""

    def evaluator(x, y):
        y = np.asarray(y, float)
        out = np.asarray(core(np.atleast_1d(x), np.atleast_2d(y)), float)
        return out.reshape(np.shape(y))

    return evaluator


def _constant(n_x: int = 129) -> Problem:
    y0 = 0.5
    sx = interval_space(0.0, 1.0, n_x)
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))

    def core(x, ys):
        return np.full_like(ys, y0)

    pmap = ParametricMap(evaluator=_wrap(core), space_x=sx, space_y=sy,
                         vectorized=True)

    def analytic(n: int) -> np.ndarray:
        xs = np.linspace(0.0, 1.0, n)
        return np.column_stack([xs, np.full(n, y0)])

    return Problem("constant", sx, sy, pmap, analytic)


def _diagonal(n_x: int = 129) -> Problem:
    sx = interval_space(0.0, 1.0, n_x)
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))

    def core(x, ys):
        return (float(x[0]) + ys) / 2.0

    pmap = ParametricMap(evaluator=_wrap(core), space_x=sx, space_y=sy,
                         vectorized=True)

    def analytic(n: int) -> np.ndarray:
        xs = np.linspace(0.0, 1.0, n)
        return np.column_stack([xs, xs])

    return Problem("diagonal", sx, sy, pmap, analytic)


def _square_param(n_axis: int = 65) -> Problem:
    sx = grid_space_2d(0.0, 1.0, n_axis)
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))

    def core(x, ys):
        return np.full_like(ys, (float(x[0]) + float(x[1])) / 2.0)

    pmap = ParametricMap(evaluator=_wrap(core), space_x=sx, space_y=sy,
                         vectorized=True)

    def analytic(n: int) -> np.ndarray:
        k = max(2, int(math.isqrt(n)))
        axis = np.linspace(0.0, 1.0, k)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel(),
                                (xx.ravel() + yy.ravel()) / 2.0])

    return Problem("square-param", sx, sy, pmap, analytic)


def _logit_coordination(n_x: int = 129, lam: float = LOGIT_LAMBDA) -> Problem:
    """2x2 coordination game with payoff asymmetry scaled by the parameter:
    action payoffs u1 = y + x and u2 = 1 - y, smoothed best response
    f = 1 / (1 + exp(-lam * (u1 - u2)))."""
    sx = interval_space(0.0, 1.0, n_x)
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))

    def core(x, ys):
        return 1.0 / (1.0 + np.exp(-lam * (2.0 * ys + float(x[0]) - 1.0)))

    pmap = ParametricMap(evaluator=_wrap(core), space_x=sx, space_y=sy,
                         vectorized=True)
    return Problem("logit-coordination", sx, sy, pmap, None)


_REGISTRY: dict[str, Callable[[], Problem]] = {
    "constant": _constant,
    "diagonal": _diagonal,
    "square-param": _square_param,
    "logit-coordination": _logit_coordination,
}


def builtin(name: str) -> Problem:
    """Instantiate a registered problem by name."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblem(
            f"unknown problem {name!r}; known: {sorted(_REGISTRY)}"
        ) from None
    return factory()


def builtin_names() -> list[str]:
    return sorted(_REGISTRY)


def fixed_point_count_1d(problem: Problem, x: float, grid: int = 10_000,
                         residual_tol: float = 1e-3) -> int:
    """Count fixed points of f(x, .) on a dense 1-D state grid as sign
    changes of f(x, y) - y, keeping only crossings with a small residual."""
    sy = problem.space_y
    if sy.dims != 1:
        raise ValueError("1-D state space required")
    ys = np.linspace(float(sy.lower[0]), float(sy.upper[0]), grid)[:, None]
    g = np.asarray(problem.map.evaluator(np.atleast_1d(x), ys)).reshape(-1)
    h = g - ys[:, 0]
    count = 0
    for i in range(len(h) - 1):
        if h[i] == 0.0 and abs(h[i]) <= residual_tol:
            count += 1
        elif h[i] * h[i + 1] < 0 and min(abs(h[i]), abs(h[i + 1])) <= residual_tol:
            count += 1
    if h[-1] == 0.0:
        count += 1
    return count


def oracle_component(problem: Problem, grid_density: int, tol: float) -> np.ndarray:
    """Brute-force full-projection component on a dense product grid.

    Marks every grid point with ||f(x, y) - y||_inf <= tol, joins marked
    points under face-and-corner adjacency, and returns the component whose
    projection hits every parameter grid point (smallest lexicographic
    tie-break, mirroring the 1-D solver).
    """
    sx, sy = problem.space_x, problem.space_y
    d, m = sx.dim, sy.dims
    x_lo = sx.points.min(axis=0)
    x_hi = sx.points.max(axis=0)
    x_axes = [np.linspace(x_lo[j], x_hi[j], grid_density) for j in range(d)]
    y_axes = [np.linspace(float(sy.lower[j]), float(sy.upper[j]), grid_density)
              for j in range(m)]
    shape = (grid_density,) * (d + m)
    if math.prod(shape) > 10_000_000:
        raise ValueError("oracle grid exceeds the 1e7 point budget")

    marked: list[tuple] = []
    y_grid = np.array(list(itertools.product(*y_axes)))
    for xi in itertools.product(*(range(grid_density) for _ in range(d))):
        x = np.array([x_axes[j][xi[j]] for j in range(d)])
        if problem.map.vectorized:
            out = np.atleast_2d(problem.map.evaluator(x, y_grid))
            if out.shape != y_grid.shape:
                out = out.reshape(y_grid.shape)
        else:
            out = np.array([np.asarray(problem.map.evaluator(x, y)).reshape(-1)
                            for y in y_grid])
        res = np.max(np.abs(out - y_grid), axis=1)
        for flat in np.nonzero(res <= tol)[0]:
            yi = np.unravel_index(int(flat), (grid_density,) * m)
            marked.append(xi + tuple(int(v) for v in yi))
    if not marked:
        raise OracleNoComponent("no grid point passed the residual test")

    index = {c: i for i, c in enumerate(marked)}
    uf = UnionFind(len(marked))
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=d + m)
               if any(o) and o > (0,) * (d + m)]
    for c in marked:
        for o in offsets:
            j = index.get(tuple(c[k] + o[k] for k in range(d + m)))
            if j is not None:
                uf.union(index[c], j)
    comps: dict[int, list[tuple]] = {}
    for c in marked:
        comps.setdefault(uf.find(index[c]), []).append(c)

    full_x = set(itertools.product(*(range(grid_density) for _ in range(d))))
    complete = [v for v in comps.values() if {c[:d] for c in v} == full_x]
    if not complete:
        raise OracleNoComponent("no component projects onto the full parameter grid")
    chosen = min(complete, key=lambda v: min(v))
    rows = []
    for c in sorted(chosen):
        x = [x_axes[j][c[j]] for j in range(d)]
        y = [y_axes[j][c[d + j]] for j in range(m)]
        rows.append(x + y)
    return np.array(rows)


# --- small expression evaluator for user-defined maps ----------------------

_ALLOWED_CALLS = {"exp": np.exp, "tanh": np.tanh, "min": np.minimum, "max": np.maximum}
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)


def _check_expr(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _check_expr(node.body)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        _check_expr(node.left)
        _check_expr(node.right)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _check_expr(node.operand)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_CALLS):
            raise ValueError(f"call to {ast.dump(node.func)} not allowed")
        if node.keywords:
            raise ValueError("keyword arguments not allowed")
        for a in node.args:
            _check_expr(a)
    elif isinstance(node, ast.Subscript):
        if not (isinstance(node.value, ast.Name) and node.value.id in ("x", "y")):
            raise ValueError("only x[i] and y[i] may be indexed")
        if not (isinstance(node.slice, ast.Constant) and isinstance(node.slice.value, int)):
            raise ValueError("indices must be integer literals")
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        pass
    else:
        raise ValueError(f"disallowed expression element: {ast.dump(node)}")


def compile_expression(expr: str) -> Callable:
    """Compile an arithmetic expression in x[i], y[j] into an evaluator.

    Supported: + - * /, unary minus, exp, tanh, min, max, numeric constants.
    """
    tree = ast.parse(expr, mode="eval")
    _check_expr(tree)
    code = compile(tree, "<expr>", "eval")

    def fn(x: np.ndarray, y: np.ndarray):
        return eval(code, {"__builtins__": {}},
                    {"x": np.atleast_1d(x), "y": np.atleast_1d(y), **_ALLOWED_CALLS})

    return fn


def problem_from_expressions(exprs: list[str], x_low: float, x_high: float,
                             x_samples: int, y_low: list[float],
                             y_high: list[float]) -> Problem:
    """User-defined problem: one expression per state axis."""
    fns = [compile_expression(e) for e in exprs]
    sx = interval_space(x_low, x_high, x_samples)
    sy = StateSpace(lower=np.array(y_low, float), upper=np.array(y_high, float))
    if len(fns) != sy.dims:
        raise ValueError("need one expression per state axis")

    def evaluator(x, y):
        return np.array([float(np.asarray(fn(x, y)).reshape(())) for fn in fns])

    pmap = ParametricMap(evaluator=evaluator, space_x=sx, space_y=sy, vectorized=False)
    return Problem("expression", sx, sy, pmap, None)
