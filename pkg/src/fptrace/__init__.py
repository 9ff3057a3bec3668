"""Connected fixed-point component tracing for parametric maps f : X x Y -> Y.

Pipeline: cover the parameter space, walk its cover graph, reduce the map to
one parameter along the walk, extract a grid component of the reduced map's
fixed points, lift it to a rectangle union over X x Y, and refine the covers
until the union stabilizes in Hausdorff distance.
"""

from .assembly import (RectUnion, RefinementSchedule, TraceResult,
                       build_rect_union, check_connected, check_coverage,
                       check_residual, hausdorff_distance, hausdorff_points,
                       rect_union_points, trace)
from .covers import (Cover, CoverGraph, build_cover, calibrate_radii,
                     cover_graph, k_neighbor, refine)
from .errors import (ConfigError, DegenerateRadius, DisconnectedCover,
                     DisconnectedGraph, EmptyUnion, FPTraceError, NoComponent,
                     OracleNoComponent, RangeViolation, UnknownProblem)
from .onedim import (ComponentGrid, GridSpec, extract_component, mark_cells,
                     solve_onedim)
from .plmap import PLMap, eval_pl
from .problems import (Problem, builtin, builtin_names, oracle_component,
                       problem_from_expressions)
from .spaces import (ParamSpace, ParametricMap, StateSpace, estimate_lipschitz,
                     eval_map, grid_space_2d, interval_space)
from .walk import Walk, covering_walk

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
