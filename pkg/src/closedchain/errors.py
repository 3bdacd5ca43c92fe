"""Exception types shared across the package."""
from __future__ import annotations


class TransmissionError(Exception):
    """Base class for every error raised by this package."""


class Infeasible(TransmissionError):
    """The closure constraint cannot be satisfied at the requested configuration.

    Raised when the crank/rod pair cannot reach the coupler point, or when
    the out-of-plane offset exceeds the rod length.
    """

    def __init__(self, message, q_s=None, side=None):
        super().__init__(message)
        self.q_s = q_s
        self.side = side


class Singular(TransmissionError):
    """The transmission is at (or numerically at) a fold of the geometric map.

    Jacobian-based quantities are unbounded here; callers that only need the
    forward map itself can still evaluate it.
    """

    def __init__(self, message, q_s=None, side=None):
        super().__init__(message)
        self.q_s = q_s
        self.side = side


class NoConvergence(TransmissionError):
    """The state estimator ran out of iterations before meeting tolerance."""

    def __init__(self, message, q_s=None, residual=None, iterations=None):
        super().__init__(message)
        self.q_s = q_s
        self.residual = residual
        self.iterations = iterations


class OutOfWorkspace(TransmissionError):
    """The measured motor position has no serial preimage.

    The estimator stalled with a residual that no configuration in range can
    reduce, which happens when the target lies outside the reachable set.
    """

    def __init__(self, message, q_s=None, residual=None, iterations=None):
        super().__init__(message)
        self.q_s = q_s
        self.residual = residual
        self.iterations = iterations


class ConfigError(TransmissionError):
    """A configuration file failed validation.

    The message always names the offending JSON path, e.g. ``$.fourbar.crank``.
    """
