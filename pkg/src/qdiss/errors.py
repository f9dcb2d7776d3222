"""Exception types raised across the package."""

from __future__ import annotations


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class SupportMismatchError(ValueError):
    """A divergence or matrix function is undefined on the given supports.

    ``eigenvalue`` is the offending (near-zero) eigenvalue; ``checkpoint`` is
    filled in by trajectory-level callers so the failing time point is known.
    """

    def __init__(self, message: str, eigenvalue: float | None = None,
                 checkpoint: int | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.checkpoint = checkpoint

    def at_checkpoint(self, index: int) -> "SupportMismatchError":
        return SupportMismatchError(
            f"checkpoint {index}: {self.args[0]}", self.eigenvalue, index
        )


class DegenerateInputError(ValueError):
    """Input has no well-defined projection (e.g. a zero Bloch vector)."""
