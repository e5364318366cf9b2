"""Exception types shared across the toolkit."""


class TreelineError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(TreelineError):
    """Input points do not share a common dimension."""


class DegenerateInput(TreelineError):
    """Point set is affinely dependent; no full-dimensional triangulation exists."""


class AllZeroTerms(TreelineError):
    """Every PDF and gradient term vanished; edge weighting is undefined."""


class DisconnectedGraph(TreelineError):
    """Spanning tree requested on a graph that does not reach all vertices."""


class BudgetTooSmall(TreelineError):
    """Sample budget cannot accommodate the initial grid."""


class ModelEvaluationFailed(TreelineError):
    """One or more model evaluations failed; carries the offending points."""

    def __init__(self, message, failed_points=None):
        super().__init__(message)
        self.failed_points = failed_points if failed_points is not None else []


class SingleClass(TreelineError):
    """All samples share one label; there is no boundary to build."""


class UnsupportedDensity(TreelineError):
    """No orthonormal polynomial family is available for this density."""


class OutOfSupport(TreelineError):
    """Evaluation point lies outside the support box."""


class SchemaVersionMismatch(TreelineError):
    """Surrogate file was written with an unknown format version."""


class CorruptFile(TreelineError):
    """Surrogate file is truncated or structurally invalid."""


class DryState(TreelineError):
    """Riemann states would generate a vanishing water depth."""


class CflViolation(TreelineError):
    """Time step became invalid (non-positive or non-finite wave speeds)."""


class GenerationFailed(TreelineError):
    """Rejection sampling exhausted its retry budget."""


class ConfigError(TreelineError):
    """Run configuration is missing or invalid; names the offending field."""
