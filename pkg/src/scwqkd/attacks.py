"""Eavesdropping models: complementary-channel Holevo information of a general
two-state isometry, and unambiguous discrimination of symmetric SCW states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import error_and_detection_rates
from .params import LinkParams, ModulationParams
from .scw_state import binary_entropy, phase_overlap

__all__ = [
    "IsometryAttack",
    "USDModel",
    "complementary_holevo",
    "isometry_holevo",
    "isometry_scan",
    "usd_probability",
    "usd_attack_viable",
]


@dataclass(frozen=True)
class IsometryAttack:
    """Eve's unitary on the two-state span.

    |u> -> a X + b Y,  |v> -> b X + a Y  with X = |u~>|e_u>, Y = |v~>|e_v>.
    ``channel_overlap`` = <u~|v~>, ``ancilla_overlap`` = <e_u|e_v> (both real).
    """

    a: float
    b: float
    channel_overlap: float
    ancilla_overlap: float

    @property
    def joint_overlap(self) -> float:
        return self.channel_overlap * self.ancilla_overlap

    @property
    def norm(self) -> float:
        g = self.joint_overlap
        return self.a**2 + self.b**2 + 2 * self.a * self.b * g

    @property
    def source_overlap(self) -> float:
        g = self.joint_overlap
        return 2 * self.a * self.b + (self.a**2 + self.b**2) * g

    @classmethod
    def from_overlaps(cls, source_overlap: float, channel_overlap: float,
                      ancilla_overlap: float, swap: bool = False) -> "IsometryAttack":
        """Solve normalisation and overlap preservation for (a, b)."""
        s, g = source_overlap, channel_overlap * ancilla_overlap
        plus = math.sqrt((1 + s) / (1 + g))
        minus = math.sqrt((1 - s) / (1 - g)) if g < 1 else 0.0
        a, b = 0.5 * (plus + minus), 0.5 * (plus - minus)
        if swap:
            a, b = b, a
        return cls(a, b, channel_overlap, ancilla_overlap)


def complementary_holevo(source_overlap: float, ancilla_overlap: float) -> float:
    """Holevo information of Eve's two equiprobable pure ancillas.

    Requires ``ancilla_overlap >= source_overlap``: an isometry cannot make
    Eve's ancillas more distinguishable than Alice's states.
    """
    for name, v in (("source_overlap", source_overlap), ("ancilla_overlap", ancilla_overlap)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    if ancilla_overlap < source_overlap:
        raise ValueError("ancilla_overlap < source_overlap is not reachable by an isometry")
    return binary_entropy(0.5 * (1 - ancilla_overlap))


def _entropy_2x2(m00, m11, m01):
    # von Neumann entropy (bits) of real symmetric 2x2 density matrices, vectorised
    tr = m00 + m11
    disc = np.sqrt(np.maximum(0.0, (m00 - m11) ** 2 + 4 * m01**2))
    lam = np.stack([(tr + disc) / 2, (tr - disc) / 2])
    lam = np.clip(lam, 0.0, 1.0)
    safe = np.where(lam > 0, lam, 1.0)
    return -np.sum(np.where(lam > 0, lam * np.log2(safe), 0.0), axis=0)


def isometry_holevo(a, b, channel_overlap, ancilla_overlap):
    """Holevo information of Eve's reduced states for general (a, b).

    Works on arrays. Eve's states live in span{e_u, e_v}; with the
    orthonormal basis e_u = (1, 0), e_v = (e, sqrt(1 - e^2)) the reduced
    operator of a X + b Y is a^2 P_u + b^2 P_v + a b c (|e_u><e_v| + h.c.).
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    c, e = np.asarray(channel_overlap, float), np.asarray(ancilla_overlap, float)
    s_e = np.sqrt(np.maximum(0.0, 1 - e**2))

    def reduced(x, y):
        # x^2 |e_u><e_u| + y^2 |e_v><e_v| + x y c (|e_u><e_v| + |e_v><e_u|)
        m00 = x**2 + y**2 * e**2 + 2 * x * y * c * e
        m11 = y**2 * s_e**2
        m01 = y**2 * e * s_e + x * y * c * s_e
        return m00, m11, m01

    u = reduced(a, b)
    v = reduced(b, a)
    avg = tuple(0.5 * (p + q) for p, q in zip(u, v))
    return _entropy_2x2(*avg) - 0.5 * (_entropy_2x2(*u) + _entropy_2x2(*v))


def isometry_scan(source_overlap: float, grid: int = 100) -> tuple[float, IsometryAttack]:
    """Maximise Eve's Holevo information over two-state isometries.

    The scan runs over the joint output overlap g = c e (grid points in
    (-1, 1), always including g = source_overlap) and the channel overlap
    c in [|g|, 1]; (a, b) then follow from normalisation and overlap
    preservation, both orderings a >= b and b >= a. Ties at the maximum are
    resolved towards the untangled corner (smallest min(|a|, |b|)).
    """
    if grid < 100:
        raise ValueError("grid must have at least 100 points")
    s = float(source_overlap)
    if not 0 <= s <= 1:
        raise ValueError("source_overlap must lie in [0, 1]")
    if s == 1.0:
        return 0.0, IsometryAttack(1.0, 0.0, 1.0, 1.0)

    gs = np.unique(np.concatenate([np.linspace(-0.999, 0.999, grid), [s]]))
    fr = np.linspace(0.0, 1.0, grid)
    G, Fr = np.meshgrid(gs, fr, indexing="ij")
    C = np.abs(G) + (1 - np.abs(G)) * Fr
    C = np.where(C == 0, 1.0, C)
    Ean = G / C
    plus = np.sqrt((1 + s) / (1 + G))
    minus = np.sqrt((1 - s) / (1 - G))
    A, B = 0.5 * (plus + minus), 0.5 * (plus - minus)

    chis = []
    for a, b in ((A, B), (B, A)):
        chis.append(isometry_holevo(a, b, C, Ean))
    chi = np.stack(chis)
    best = float(np.max(chi))

    ties = np.argwhere(chi >= best - 1e-12)
    entangling = [min(abs(A[i, j]), abs(B[i, j])) for _, i, j in ties]
    o, i, j = ties[int(np.argmin(entangling))]
    a, b = (A[i, j], B[i, j]) if o == 0 else (B[i, j], A[i, j])
    return best, IsometryAttack(float(a), float(b), float(C[i, j]), float(Ean[i, j]))


@dataclass(frozen=True)
class USDModel:
    """Optimal unambiguous discrimination of M symmetric pure states."""

    M: int
    overlaps: np.ndarray
    eigenvalues: np.ndarray
    p_usd: float


def usd_probability(p: ModulationParams, M: int | None = None) -> USDModel:
    """Success probability of optimal USD of the M equiprobable phase states.

    The Gram matrix <psi(2 pi j/M)|psi(2 pi l/M)> is circulant, so its
    eigenvalues are the DFT of its first row; the optimal success probability
    is the smallest eigenvalue.
    """
    M = p.M if M is None else M
    if M < 2 or M % 2:
        raise ValueError("M must be an even integer >= 2")
    row = phase_overlap(p, 2 * np.pi * np.arange(M) / M)
    spectrum = np.fft.fft(row)
    if np.max(np.abs(spectrum.imag)) > 1e-9:
        raise ArithmeticError("Gram matrix spectrum is not real")
    eig = spectrum.real
    if eig.min() < -1e-12:
        raise ArithmeticError(f"negative Gram eigenvalue {eig.min():.3g}")
    eig = np.clip(eig, 0.0, None)
    return USDModel(M=M, overlaps=row, eigenvalues=eig, p_usd=float(min(1.0, eig.min())))


def usd_attack_viable(p: ModulationParams, lp: LinkParams, p_usd: float | None = None) -> bool:
    """True when 1 - G <= P_USD, i.e. the blocking attack escapes the detection-rate check."""
    if p_usd is None:
        p_usd = usd_probability(p).p_usd
    return error_and_detection_rates(p, lp).one_minus_G <= p_usd
