"""Exception hierarchy for fptrace."""


class FPTraceError(Exception):
    """Base class for all fptrace errors."""


class RangeViolation(FPTraceError):
    """The user map returned a state outside the state-space box."""


class DegenerateRadius(FPTraceError):
    """Cover radius too large for the requested number of elements."""


class DisconnectedCover(FPTraceError):
    """Cover intersection graph is disconnected; radius too small for the sample density."""


class DisconnectedGraph(FPTraceError):
    """Covering walk requested on a disconnected graph."""


class NoComponent(FPTraceError):
    """No cell passed the residual test; nothing to extract."""


class EmptyUnion(FPTraceError):
    """Operation on an empty rectangle union."""


class UnknownProblem(FPTraceError):
    """Built-in problem name is not registered."""


class OracleNoComponent(FPTraceError):
    """Brute-force oracle found no component with full parameter projection."""


class ConfigError(FPTraceError):
    """Run configuration failed to parse or validate."""
