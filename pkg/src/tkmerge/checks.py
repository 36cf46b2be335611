"""Opt-in runtime invariant checks.

The fitting loops call into this module after every concentration step.  In
the default (lenient) mode the calls are no-ops; under :func:`strict` they
raise :class:`~tkmerge.errors.InvariantViolation` on the first breach.  The
test suite runs entirely in strict mode.
"""

from __future__ import annotations

import contextlib

import numpy as np

from .constants import MONOTONE_RTOL, RATIO_RTOL
from .errors import InvariantViolation

_STRICT = False


def is_strict() -> bool:
    return _STRICT


def set_strict(flag: bool) -> bool:
    """Set strict mode globally; returns the previous setting."""
    global _STRICT
    previous = _STRICT
    _STRICT = bool(flag)
    return previous


@contextlib.contextmanager
def strict(flag: bool = True):
    previous = set_strict(flag)
    try:
        yield
    finally:
        set_strict(previous)


def non_increasing(prev: float, cur: float, what: str) -> None:
    if _STRICT and cur > prev + MONOTONE_RTOL * max(1.0, abs(prev)):
        raise InvariantViolation(f"{what} increased: {prev!r} -> {cur!r}")


def non_decreasing(prev: float, cur: float, what: str) -> None:
    if _STRICT and cur < prev - MONOTONE_RTOL * max(1.0, abs(prev)):
        raise InvariantViolation(f"{what} decreased: {prev!r} -> {cur!r}")


def eigen_ratio(covariances: np.ndarray, r: float) -> None:
    """Recompute eigenvalues of recomposed covariances and check max/min <= r."""
    if not _STRICT:
        return
    eigs = np.linalg.eigvalsh(covariances)
    lo, hi = eigs.min(), eigs.max()
    if lo <= 0 or hi > r * lo * (1 + RATIO_RTOL):
        raise InvariantViolation(f"eigenvalue ratio {hi / lo if lo > 0 else np.inf} exceeds r={r}")
    if r == 1 and hi - lo > RATIO_RTOL * hi:
        raise InvariantViolation("r=1 but eigenvalues are not all equal")
