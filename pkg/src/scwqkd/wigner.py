"""Wigner d-function rows d^S_{0k}(beta) for integer S.

The row is evaluated with the three-term recurrence in k, run downward from
k = S (Miller's method) and normalised with the row unitarity
sum_k d_{0k}^2 = 1. Downward recurrence is the stable direction in the
exponentially small tail |k| > S sin(beta), and the absolute sign is fixed by
d^S_{0S}(beta) > 0 for 0 < beta < pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DRow",
    "ConvergenceError",
    "beta_from_modulation",
    "d_row",
    "d00",
    "d00_converged",
]

_OVERFLOW_GUARD = 1e280
S_START = 64
S_MAX = 2**16


class ConvergenceError(RuntimeError):
    """Raised when the mode truncation does not converge below ``S_MAX``."""


@dataclass(frozen=True)
class DRow:
    """Row n = 0 of the Wigner d-matrix, ``values[k + S] = d^S_{0k}(beta)``."""

    S: int
    beta: float
    values: np.ndarray

    def __getitem__(self, k: int) -> float:
        if not -self.S <= k <= self.S:
            raise IndexError(f"k={k} outside [-{self.S}, {self.S}]")
        return float(self.values[k + self.S])

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.S, self.S + 1)


def beta_from_modulation(m: float, S: int) -> float:
    """Rotation angle produced by a phase modulator with index ``m``.

    cos(beta) = 1 - (m / (S + 1/2))^2 / 2, modulator dispersion ignored.
    Evaluated as beta = 2 asin(m / (2S + 1)), which is the same angle without
    the cancellation in 1 - cos(beta) at large S.
    """
    if m < 0:
        raise ValueError(f"modulation index must be >= 0, got {m}")
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    half_chord = m / (2.0 * S + 1.0)
    if half_chord > 1.0:
        cos_beta = 1.0 - 0.5 * (m / (S + 0.5)) ** 2
        raise ValueError(f"cos(beta) = {cos_beta} outside [-1, 1] for m={m}, S={S}")
    return 2.0 * math.asin(half_chord)


def _half_row(S: int, beta: float) -> np.ndarray:
    # d^S_{0k}(beta) for k = 0..S
    out = np.zeros(S + 1)
    if beta == 0.0:
        out[0] = 1.0
        return out
    if beta == math.pi:
        out[0] = -1.0 if S % 2 else 1.0
        return out

    cot = math.cos(beta) / math.sin(beta)
    # one step multiplies by at most ~2S|cot| + 2S; renormalise early enough
    # that the next step cannot overflow
    growth = 2.0 * S * (abs(cot) + 1.0)
    if growth > _OVERFLOW_GUARD:
        # beta below ~1e-270: off-centre elements are below double range relative to d_00
        out[0] = 1.0 if cot > 0 or S % 2 == 0 else -1.0
        return out
    limit = _OVERFLOW_GUARD / growth
    v = np.zeros(S + 2)
    v[S] = 1.0
    for k in range(S, 0, -1):
        v[k - 1] = (
            2.0 * k * cot * v[k] - math.sqrt((S - k) * (S + k + 1)) * v[k + 1]
        ) / math.sqrt((S + k) * (S - k + 1))
        if abs(v[k - 1]) > limit:
            v[k - 1 :] /= abs(v[k - 1])
    out = v[: S + 1]
    out /= np.max(np.abs(out))
    norm = out[0] ** 2 + 2.0 * np.sum(out[1:] ** 2)
    return out / math.sqrt(norm)


@lru_cache(maxsize=64)
def _cached_half_row(S: int, beta: float) -> np.ndarray:
    row = _half_row(S, beta)
    row.setflags(write=False)
    return row


def d_row(S: int, beta: float) -> DRow:
    """All d^S_{0k}(beta), k = -S..S.

    Negative k follow from d^S_{0,-k} = (-1)^k d^S_{0k}.
    """
    S = int(S)
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    beta = float(beta)
    if not 0.0 <= beta <= math.pi:
        raise ValueError(f"beta must lie in [0, pi], got {beta}")
    half = _cached_half_row(S, beta)
    sign = np.where(np.arange(1, S + 1) % 2 == 1, -1.0, 1.0)
    values = np.concatenate([(sign * half[1:])[::-1], half])
    values.setflags(write=False)
    return DRow(S=S, beta=beta, values=values)


def d00(S: int, beta: float) -> float:
    """Central element d^S_{00}(beta)."""
    return d_row(S, beta)[0]


@lru_cache(maxsize=256)
def d00_converged(m: float, angle_multiplier: int = 2, tol: float = 1e-9) -> tuple[float, int]:
    """d^S_{00}(angle_multiplier * beta_S) at a truncation S that has converged.

    S starts at 64 and doubles until the next doubling changes the value by
    less than ``tol``. Returns ``(value, S)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if angle_multiplier not in (1, 2):
        raise ValueError("angle_multiplier must be 1 or 2")

    def value(S: int) -> float:
        return d00(S, min(math.pi, angle_multiplier * beta_from_modulation(m, S)))

    S = S_START
    current = value(S)
    while 2 * S <= S_MAX:
        following = value(2 * S)
        if abs(following - current) < tol:
            return current, S
        S, current = 2 * S, following
    raise ConvergenceError(f"d00 not converged to {tol} by S={S_MAX} (m={m})")
