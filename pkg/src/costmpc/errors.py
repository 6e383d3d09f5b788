"""Exception types shared across the package."""

from __future__ import annotations


class InvalidStateError(ValueError):
    """A car or world state contains non-finite fields."""


class ArityError(ValueError):
    """A sequence argument has the wrong length (controls, rollouts, grids)."""


class NormalizationError(ValueError):
    """Weight normalization was asked to normalize a zero vector."""


class ConfigurationError(ValueError):
    """A scenario or search configuration is invalid."""


class RolloutDivergedError(RuntimeError):
    """A rollout produced a non-finite state.

    Carries the partial log accumulated before divergence in
    ``partial_steps`` / ``partial_costs``.
    """

    def __init__(self, message: str, partial_steps=None, partial_costs=None):
        super().__init__(message)
        self.partial_steps = partial_steps if partial_steps is not None else []
        self.partial_costs = partial_costs if partial_costs is not None else []
