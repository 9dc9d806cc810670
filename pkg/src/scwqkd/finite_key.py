"""Finite-key accounting: smooth min-entropy correction, sampling padding,
error-correction and privacy-amplification budgets, key length and rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import error_and_detection_rates
from .params import LinkParams, ModulationParams, SecurityParams
from .scw_state import binary_entropy, holevo_bound

__all__ = [
    "KeyBudget",
    "RatePoint",
    "qaep_delta",
    "serfling_delta_q",
    "ec_budget",
    "check_ec_length",
    "key_length",
    "optimize_sample_size",
    "rate_point",
    "key_rate",
    "privacy_amplification_distance",
]

_LOG2_2_PLUS_SQRT2 = math.log2(2.0 + math.sqrt(2.0))
K_MIN = 100
_EXHAUSTIVE_LIMIT = 5_000_000


def qaep_delta(eps_s: float) -> float:
    """delta(eps) = 4 log2(2 + sqrt 2) sqrt(log2(2 / eps^2)).

    The per-round min-entropy penalty is delta / sqrt(n). Valid for
    0 < eps < 1; ``eps = sqrt(2)`` is accepted as the formula's zero.
    """
    if not 0 < eps_s <= math.sqrt(2.0):
        raise ValueError(f"eps_s out of range: {eps_s}")
    arg = math.log2(2.0) - 2.0 * math.log2(eps_s)
    return 4.0 * _LOG2_2_PLUS_SQRT2 * math.sqrt(max(0.0, arg))


def serfling_delta_q(n: int, k: int, fail_target: float):
    """Smallest QBER padding with exp(-2 k dQ^2 / (1 - (k-1)/n)) <= fail_target.

    ``k`` may be an integer array, in which case an array is returned.
    """
    k_arr = np.asarray(k)
    if np.any(k_arr <= 0) or np.any(k_arr >= n):
        raise ValueError(f"sample size must satisfy 0 < k < n (n={n})")
    if not 0 < fail_target <= 1:
        raise ValueError("fail_target must lie in (0, 1]")
    out = np.sqrt((1.0 - (k_arr - 1.0) / n) * math.log(1.0 / fail_target) / (2.0 * k_arr))
    return float(out) if out.ndim == 0 else out


def ec_budget(n: int, q_plus: float, f_EC: float) -> int:
    """Syndrome length estimate ceil(n f_EC h(q_plus)).

    Only an estimate: a real session must charge the syndrome bits it sent.
    """
    if not 0 <= q_plus <= 0.5:
        raise ValueError(f"q_plus must lie in [0, 1/2], got {q_plus}")
    return int(math.ceil(n * f_EC * binary_entropy(q_plus) - 1e-9))


def check_ec_length(eps_EC: float) -> int:
    """Verification-hash length ceil(log2(1/eps_EC))."""
    if not 0 < eps_EC < 1:
        raise ValueError("eps_EC must lie in (0, 1)")
    return int(math.ceil(-math.log2(eps_EC) - 1e-12))


@dataclass(frozen=True)
class KeyBudget:
    """Bit accounting from the sifted string to the final key.

    Real-valued fields (``delta_qaep``, ``check_EC``, ``loss_PA``) are the
    exact terms entering ``l_raw``; ``l`` is floor(l_raw) clamped at 0.
    The identity l_raw + k + code_EC + check_EC + loss_PA + delta_qaep
    = n (1 - chi) + constant holds exactly.
    """

    n: int
    k: int
    chi: float
    delta_qaep: float
    code_EC: int
    check_EC: float
    loss_PA: float
    constant: float
    accounting: str
    l_raw: float
    l: int

    @property
    def has_key(self) -> bool:
        return self.l > 0

    @property
    def subtracted(self) -> float:
        return self.k + self.code_EC + self.check_EC + self.loss_PA + self.delta_qaep

    def residual(self) -> float:
        """l + subtracted terms - (n (1 - chi) + constant); within [-1, 0] before clamping."""
        return self.l + self.subtracted - (self.n * (1.0 - self.chi) + self.constant)


def key_length(
    p: ModulationParams | None,
    sec: SecurityParams,
    n: int,
    k: int,
    code_EC: int,
    chi: float | None = None,
    accounting: str | None = None,
) -> KeyBudget:
    """Extractable key length for ``n`` sifted bits.

    ``chi`` overrides the Holevo bound computed from ``p``.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if k < 0 or code_EC < 0:
        raise ValueError("k and code_EC must be non-negative")
    mode = accounting or sec.accounting
    chi = holevo_bound(p) if chi is None else chi
    delta = math.sqrt(n) * qaep_delta(sec.eps_s)
    if mode == "paper":
        check = -math.log2(sec.eps_EC)
        loss_pa = -math.log2(sec.eps_PA)
        const = 2.0
    elif mode == "conservative":
        check = float(check_ec_length(sec.eps_EC))
        loss_pa = float(math.ceil(2.0 * -math.log2(sec.eps_PA) - 2.0 - 1e-9))
        const = 0.0
    else:
        raise ValueError(f"unknown accounting mode {mode!r}")
    l_raw = n * (1.0 - chi) - delta - k - code_EC - check - loss_pa + const
    l = max(0, int(math.floor(l_raw)))
    return KeyBudget(
        n=n, k=k, chi=chi, delta_qaep=delta, code_EC=code_EC, check_EC=check,
        loss_PA=loss_pa, constant=const, accounting=mode, l_raw=l_raw, l=l,
    )


def _ec_objective(k, n, Q, sec):
    q_plus = np.minimum(0.5, Q + serfling_delta_q(n, k, sec.ec_fail_target))
    return n * sec.f_EC * binary_entropy(q_plus) + k


def optimize_sample_size(n: int, model_Q: float, sec: SecurityParams) -> int:
    """Sample size k in [100, n/2] minimising n f_EC h(Q + dQ(k)) + k."""
    if n < 1000:
        raise ValueError("sample-size optimisation needs n >= 1000")
    k_max = n // 2
    if k_max - K_MIN <= _EXHAUSTIVE_LIMIT:
        ks = np.arange(K_MIN, k_max + 1)
        return int(ks[np.argmin(_ec_objective(ks, n, model_Q, sec))])
    # unimodal in k; refine the continuous optimum on an integer window
    res = minimize_scalar(
        lambda x: float(_ec_objective(x, n, model_Q, sec)),
        bounds=(K_MIN, k_max), method="bounded", options={"xatol": 0.5},
    )
    ks = np.arange(max(K_MIN, int(res.x) - 1000), min(k_max, int(res.x) + 1000) + 1)
    return int(ks[np.argmin(_ec_objective(ks, n, model_Q, sec))])


@dataclass(frozen=True)
class RatePoint:
    loss_db: float
    n: int
    chi: float
    one_minus_G: float
    Q: float
    k_opt: int
    delta_Q: float
    code_EC: int
    budget: KeyBudget
    R: float

    @property
    def l(self) -> int:
        return self.budget.l


def rate_point(p: ModulationParams, lp: LinkParams, sec: SecurityParams, n: int,
               accounting: str | None = None) -> RatePoint:
    """Key length and average secret key rate for ``n`` detected bits.

    R = F (1-G) / M * l_raw / n, clamped at zero.
    """
    rates = error_and_detection_rates(p, lp)
    Q = rates.Q if rates.Q_defined else 0.5
    chi = holevo_bound(p)
    k = optimize_sample_size(n, Q, sec)
    dq = serfling_delta_q(n, k, sec.ec_fail_target)
    code = ec_budget(n, min(0.5, Q + dq), sec.f_EC)
    budget = key_length(p, sec, n, k, code, chi=chi, accounting=accounting)
    R = sec.F * rates.one_minus_G / p.M * max(0.0, budget.l_raw) / n
    return RatePoint(
        loss_db=lp.channel_loss_db, n=n, chi=chi, one_minus_G=rates.one_minus_G,
        Q=Q, k_opt=k, delta_Q=dq, code_EC=code, budget=budget, R=R,
    )


def key_rate(p: ModulationParams, lp: LinkParams, sec: SecurityParams, n: int,
             accounting: str | None = None) -> float:
    """Average secret key rate in bits per second."""
    return rate_point(p, lp, sec, n, accounting).R


def privacy_amplification_distance(l: float, smooth_min_entropy: float, eps_s: float) -> float:
    """Trace-distance bound eps_s + sqrt(2^(l - H_min)) / 2 of the hashed key."""
    if l > smooth_min_entropy:
        raise ValueError("key length exceeds the smooth min-entropy")
    return eps_s + 0.5 * 2.0 ** ((l - smooth_min_entropy) / 2.0)
