"""Error taxonomy.

Every failure mode that callers are expected to branch on gets its own
exception class with a stable machine-readable ``category`` string; the
CLI maps categories to exit codes.
"""

from __future__ import annotations


class NlsLabError(Exception):
    """Base class for all package errors."""

    category = "internal"


class ValidationError(NlsLabError):
    """Invalid parameters or malformed input (e.g. q >= p, a <= 0)."""

    category = "validation"


class RegimeError(NlsLabError):
    """Operation invoked outside the exponent/sign regime it is defined for."""

    category = "regime"


class ShootingError(NlsLabError):
    """Radial shooting failed to bracket or converge.

    Carries optional diagnostics about the height bracket searched.
    """

    category = "shooting"

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class StructureError(NlsLabError):
    """A fiber map lacks the critical-point structure the caller asked for."""

    category = "structure"


class BranchError(NlsLabError):
    """Requested solution branch does not exist at the given parameters."""

    category = "branch"


class FlowError(NlsLabError):
    """Constrained gradient descent left its basin or failed to converge."""

    category = "flow"


class EvolutionError(NlsLabError):
    """Time evolution contradicted what the caller asserted about the run.

    Carries the offending trace so the evidence survives the raise.
    """

    category = "evolution"

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class IOErrorCategory(NlsLabError):
    """File or format problems in CLI input/output."""

    category = "io"
