"""Einstein-Weyl structures from reductions of the heavenly equation.

Submodules: scalar, exterior, weyl, heavenly, reduction, twodim, catalog,
symmetries, lax, recursion, solver, cli.
"""
__version__ = "0.1.0"

from .scalar import DomainError, EvaluationError, Params  # noqa: E402

__all__ = ["DomainError", "EvaluationError", "Params", "__version__"]
