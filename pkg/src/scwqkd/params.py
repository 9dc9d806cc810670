"""Parameter blocks for the source, the link and the security budget.

Defaults are the operating point of the reference SCW setup: mu0 = 4,
m = 0.319, 16 phase states, 10 ns windows at 100 MHz, carrier leakage 1e-3,
5 degree phase instability, 6.4 dB loss inside Bob's module, an ID230-class
detector (25 % efficiency, 25 Hz dark counts) and all epsilons at 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .wigner import beta_from_modulation, d00_converged

__all__ = ["ModulationParams", "LinkParams", "SecurityParams", "ACCOUNTING_MODES", "DEFAULT_S_TOL"]

DEFAULT_S_TOL = 1e-9
ACCOUNTING_MODES = ("paper", "conservative")


@dataclass(frozen=True)
class ModulationParams:
    """Alice's subcarrier-wave source.

    ``S=None`` selects the mode truncation automatically (converged
    d^S_00(2 beta) to ``DEFAULT_S_TOL``). ``Omega`` is carried as metadata only.
    """

    mu0: float = 4.0
    m: float = 0.319
    S: int | None = None
    theta1: float = 0.0
    Omega: float = 4.8e9
    M: int = 16

    def __post_init__(self):
        if not self.mu0 >= 0:
            raise ValueError(f"mu0 must be >= 0, got {self.mu0}")
        if not self.m >= 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if self.M < 2 or self.M % 2:
            raise ValueError(f"M must be an even integer >= 2, got {self.M}")
        if self.S is not None and self.S < 1:
            raise ValueError(f"S must be >= 1, got {self.S}")
        if not (math.isfinite(self.theta1) and math.isfinite(self.Omega)):
            raise ValueError("phases must be finite")

    @property
    def S_eff(self) -> int:
        if self.S is not None:
            return self.S
        return d00_converged(self.m, 2, DEFAULT_S_TOL)[1]

    @property
    def beta(self) -> float:
        return beta_from_modulation(self.m, self.S_eff)

    @property
    def n_bases(self) -> int:
        return self.M // 2


@dataclass(frozen=True)
class LinkParams:
    """Quantum channel and Bob's receiver.

    The channel loss is ``xi * L`` dB unless ``loss_db`` is given, which then
    takes precedence. ``eta_B_db`` is the loss inside Bob's module in dB.
    ``delta_t=None`` means a free-running detector (gate equals the window T).
    """

    xi: float = 0.2
    L: float = 0.0
    loss_db: float | None = None
    eta_B_db: float = 6.4
    eta_D: float = 0.25
    gamma_dark: float = 25.0
    T: float = 10e-9
    delta_t: float | None = None
    vartheta: float = 1e-3
    delta_phi: float = math.radians(5.0)
    theta2: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        for name in ("xi", "L", "eta_B_db", "gamma_dark", "T", "delta_phi"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.loss_db is not None and not self.loss_db >= 0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")
        for name in ("eta_D", "vartheta"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.delta_t is not None and not 0 <= self.delta_t <= self.T:
            raise ValueError(f"delta_t must lie in [0, T], got {self.delta_t}")

    @property
    def channel_loss_db(self) -> float:
        return self.loss_db if self.loss_db is not None else self.xi * self.L

    @property
    def eta(self) -> float:
        return 10.0 ** (-self.channel_loss_db / 10.0)

    @property
    def eta_B(self) -> float:
        return 10.0 ** (-self.eta_B_db / 10.0)

    @property
    def gate(self) -> float:
        return self.T if self.delta_t is None else self.delta_t


@dataclass(frozen=True)
class SecurityParams:
    """Failure probabilities and post-processing settings.

    ``accounting`` selects how privacy amplification is charged in the key
    length: ``"paper"`` keeps the closed-form key length as published
    (log2(1/eps_EC) + log2(1/eps_PA) - 2); ``"conservative"`` charges the
    integer hash length and the shortening 2 log2(1/eps_PA) - 2 required by
    the leftover-hash trace-distance bound.
    """

    eps_s: float = 1e-10
    eps_EC: float = 1e-10
    eps_PA: float = 1e-10
    z: float = 3.0
    f_EC: float = 1.15
    ec_fail_target: float = 1e-6
    F: float = 1e8
    accounting: str = "paper"
    eps_qkd: float = field(init=False)

    def __post_init__(self):
        for name in ("eps_s", "eps_EC", "eps_PA", "ec_fail_target"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {getattr(self, name)}")
        if not self.z > 0:
            raise ValueError("z must be positive")
        if not self.f_EC >= 1:
            raise ValueError("f_EC must be >= 1")
        if not self.F > 0:
            raise ValueError("F must be positive")
        if self.accounting not in ACCOUNTING_MODES:
            raise ValueError(f"accounting must be one of {ACCOUNTING_MODES}")
        object.__setattr__(self, "eps_qkd", self.eps_EC + self.eps_s + self.eps_PA)
