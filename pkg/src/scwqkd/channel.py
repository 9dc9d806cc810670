"""Channel transmission, Bob's interferometric demodulation and click statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .params import LinkParams, ModulationParams
from .wigner import d00

__all__ = [
    "MandelRegimeWarning",
    "DetectionRates",
    "channel_transmission",
    "beta_prime",
    "mean_photons_at_bob",
    "click_probability",
    "error_and_detection_rates",
]

MANDEL_LIMIT = 0.1


class MandelRegimeWarning(UserWarning):
    """Mean photon number at the detector is too large for P ~ eta n."""


def channel_transmission(xi: float, L: float) -> float:
    """eta(L) = 10^(-xi L / 10) for loss ``xi`` in dB/km over ``L`` km."""
    if xi < 0 or L < 0:
        raise ValueError("xi and L must be non-negative")
    return 10.0 ** (-xi * L / 10.0)


def beta_prime(beta: float, phase_diff: float) -> float:
    """Effective rotation angle after Bob's modulator.

    cos(beta') = cos^2(beta) - sin^2(beta) cos(phase_diff); phase_diff = 0
    doubles the angle and phase_diff = pi cancels it.
    """
    c = math.cos(beta) ** 2 - math.sin(beta) ** 2 * math.cos(phase_diff)
    if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
        raise ValueError(f"cos(beta') = {c} outside [-1, 1]")
    # 1 - cos(beta') = sin^2(beta) (1 + cos(phase_diff)); keeps small angles accurate
    one_minus = math.sin(beta) ** 2 * (1.0 + math.cos(phase_diff))
    return 2.0 * math.asin(min(1.0, math.sqrt(max(0.0, 0.5 * one_minus))))


def mean_photons_at_bob(p: ModulationParams, lp: LinkParams, phase_diff: float) -> float:
    """n_ph = mu0 eta eta_B (1 - (1 - vartheta) d_00(beta')^2)."""
    d = d00(p.S_eff, beta_prime(p.beta, phase_diff))
    return p.mu0 * lp.eta * lp.eta_B * (1.0 - (1.0 - lp.vartheta) * d * d)


def click_probability(p: ModulationParams, lp: LinkParams, phase_diff: float) -> float:
    """Mandel-approximation click probability in one detector gate."""
    n_ph = mean_photons_at_bob(p, lp, phase_diff)
    if n_ph > MANDEL_LIMIT:
        warnings.warn(
            f"n_ph = {n_ph:.3g} exceeds {MANDEL_LIMIT}; linear click model is inaccurate",
            MandelRegimeWarning,
            stacklevel=2,
        )
    prob = (lp.eta_D * n_ph / lp.T + lp.gamma_dark) * lp.gate
    return min(1.0, max(0.0, prob))


@dataclass(frozen=True)
class DetectionRates:
    E: float
    one_minus_G: float
    Q: float
    Q_defined: bool

    @property
    def G(self) -> float:
        return 1.0 - self.one_minus_G


def error_and_detection_rates(p: ModulationParams, lp: LinkParams) -> DetectionRates:
    """Error probability E, detection probability 1-G and QBER Q = E/(1-G).

    Bob's offset phi0 is absorbed; the phase instability shifts both the
    constructive and the destructive setting.
    """
    E = click_probability(p, lp, math.pi + lp.delta_phi)
    one_minus_G = click_probability(p, lp, lp.delta_phi) + E
    if one_minus_G == 0:
        return DetectionRates(E=E, one_minus_G=0.0, Q=math.nan, Q_defined=False)
    return DetectionRates(E=E, one_minus_G=one_minus_G, Q=E / one_minus_G, Q_defined=True)
