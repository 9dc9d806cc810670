"""Seeded Monte Carlo simulation of complete protocol sessions.

Round model: Alice sends one of M phase states, Bob sets his modulator to one
of M phases (one of M/2 bases plus a bit value) and a single detector clicks
with the Mandel-model probability for the phase difference. Rounds with
matching bases and a click are sifted; Bob's bit is the bit of his own setting,
so a click under the opposite setting is an error.

Random numbers come from Philox generators keyed by ``SeedSequence(seed,
spawn_key=(stream, index))``. Rounds are drawn in fixed chunks of
``CHUNK`` rounds, chunk i using stream ``ROUNDS`` index i, so transcripts do
not depend on how chunks are scheduled. Sampling, the two hash families and
Eve each own a separate stream.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import IO

import numpy as np

from .attacks import usd_probability
from .channel import MandelRegimeWarning, click_probability, error_and_detection_rates
from .finite_key import (
    KeyBudget,
    check_ec_length,
    ec_budget,
    key_length,
    optimize_sample_size,
    serfling_delta_q,
)
from .hashing import ToeplitzHasher, bits_to_hex
from .params import LinkParams, ModulationParams, SecurityParams

__all__ = [
    "EveConfig",
    "SessionConfig",
    "RoundRecords",
    "SessionTranscript",
    "MonitorResult",
    "ECResult",
    "KeyResult",
    "SessionReport",
    "substream",
    "run_session",
    "simulate_usd_eve",
    "monitor_detection_rate",
    "session_monitor",
    "estimate_and_correct",
    "extract_key",
    "run_protocol",
    "write_transcript_jsonl",
]

CHUNK = 1 << 20
ROUNDS, EVE, SAMPLE, EC_HASH, PA_HASH = range(5)
U64 = 1 << 64


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Philox generator for one (stream, index) substream of ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EveConfig:
    """Intercept-resend attack built on unambiguous state discrimination.

    Inconclusive rounds are blocked (vacuum); identified states are resent so
    that Bob clicks with probability ``ceiling`` under the matching setting and
    never under the opposite one. ``p_usd=None`` uses the optimal USD
    probability of the source.
    """

    p_usd: float | None = None
    ceiling: float = 1.0

    def __post_init__(self):
        if self.p_usd is not None and not 0 <= self.p_usd <= 1:
            raise ValueError("p_usd must lie in [0, 1]")
        if not 0 <= self.ceiling <= 1:
            raise ValueError("ceiling must lie in [0, 1]")


@dataclass(frozen=True)
class SessionConfig:
    N: int
    seed: int = 0
    modulation: ModulationParams = field(default_factory=ModulationParams)
    link: LinkParams = field(default_factory=LinkParams)
    security: SecurityParams = field(default_factory=SecurityParams)
    eve: EveConfig | None = None
    record_rounds: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 0 <= self.seed < U64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class RoundRecords:
    alice_phase: np.ndarray
    bob_setting: np.ndarray
    click: np.ndarray
    sifted: np.ndarray
    error: np.ndarray
    sample: np.ndarray | None = None


@dataclass
class SessionTranscript:
    config: SessionConfig
    E: float
    one_minus_G: float
    model_Q: float
    p_usd: float | None
    N_matched: int
    clicks: int
    eve_identified: int
    alice_bits: np.ndarray
    bob_bits: np.ndarray
    rounds: RoundRecords | None = None

    @property
    def N(self) -> int:
        return self.config.N

    @property
    def n(self) -> int:
        return int(self.alice_bits.size)

    @property
    def errors(self) -> int:
        return int(np.count_nonzero(self.alice_bits != self.bob_bits))

    @property
    def Q_real(self) -> float:
        return self.errors / self.n if self.n else math.nan


@lru_cache(maxsize=128)
def _click_tables(p: ModulationParams, lp: LinkParams, eve: EveConfig | None, p_usd: float | None):
    M = p.M
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MandelRegimeWarning)
        honest = np.array([click_probability(p, lp, 2 * np.pi * j / M + lp.delta_phi) for j in range(M)])
    dark = min(1.0, lp.gamma_dark * lp.gate)
    resent = np.full(M, dark)
    if eve is not None:
        resent[0] = eve.ceiling
    return honest, resent, dark


def run_session(cfg: SessionConfig) -> SessionTranscript:
    """Simulate the quantum phase: sending, detection and sifting."""
    p, lp = cfg.modulation, cfg.link
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MandelRegimeWarning)
        rates = error_and_detection_rates(p, lp)
    p_usd = None
    if cfg.eve is not None:
        p_usd = cfg.eve.p_usd if cfg.eve.p_usd is not None else usd_probability(p).p_usd
    honest, resent, dark = _click_tables(p, lp, cfg.eve, p_usd)
    M, h = p.M, p.n_bases

    alice_parts, bob_parts, rec_parts = [], [], []
    clicks = matched_total = identified = 0
    for index, start in enumerate(range(0, cfg.N, CHUNK)):
        size = min(CHUNK, cfg.N - start)
        rng = substream(cfg.seed, ROUNDS, index)
        a = rng.integers(0, M, size=size, dtype=np.int16)
        b = rng.integers(0, M, size=size, dtype=np.int16)
        u = rng.random(size)
        diff = (a - b) % M
        prob = honest[diff]
        if cfg.eve is not None:
            ok = substream(cfg.seed, EVE, index).random(size) < p_usd
            identified += int(np.count_nonzero(ok))
            prob = np.where(ok, resent[diff], dark)
        click = u < prob
        matched = (a % h) == (b % h)
        sifted = click & matched
        clicks += int(np.count_nonzero(click))
        matched_total += int(np.count_nonzero(matched))
        alice_parts.append((a[sifted] // h).astype(np.uint8))
        bob_parts.append((b[sifted] // h).astype(np.uint8))
        if cfg.record_rounds:
            rec_parts.append((a.astype(np.uint8), b.astype(np.uint8), click, sifted, sifted & (a != b)))

    rounds = None
    if cfg.record_rounds:
        cols = [np.concatenate(c) for c in zip(*rec_parts)]
        rounds = RoundRecords(*cols)
    return SessionTranscript(
        config=cfg, E=rates.E, one_minus_G=rates.one_minus_G,
        model_Q=rates.Q if rates.Q_defined else 0.5, p_usd=p_usd,
        N_matched=matched_total, clicks=clicks, eve_identified=identified,
        alice_bits=np.concatenate(alice_parts), bob_bits=np.concatenate(bob_parts),
        rounds=rounds,
    )


def simulate_usd_eve(cfg: SessionConfig) -> SessionTranscript:
    if cfg.eve is None:
        raise ValueError("configuration has no eavesdropper")
    return run_session(cfg)


@dataclass(frozen=True)
class MonitorResult:
    passed: bool
    n: int
    trials: int
    expected: float
    sigma: float
    threshold: float


def monitor_detection_rate(n: int, N: int, expected_one_minus_G: float, z: float) -> MonitorResult:
    """Abort iff n < N (1-G) - z sqrt(N G (1-G))."""
    if N <= 0:
        raise ValueError("N must be positive")
    p = expected_one_minus_G
    sigma = math.sqrt(N * p * (1.0 - p))
    threshold = N * p - z * sigma
    return MonitorResult(passed=not n < threshold, n=n, trials=N, expected=N * p,
                         sigma=sigma, threshold=threshold)


def session_monitor(tr: SessionTranscript, z: float | None = None) -> MonitorResult:
    """Detection-rate check over the matched-basis rounds.

    With one detector Bob's setting agrees with Alice's phase or is opposite
    to it with equal odds, so a matched round clicks with probability (1-G)/2.
    """
    z = tr.config.security.z if z is None else z
    return monitor_detection_rate(tr.n, max(1, tr.N_matched), 0.5 * tr.one_minus_G, z)


@dataclass
class ECResult:
    k: int
    sample_positions: np.ndarray
    Q_est: float
    delta_Q: float
    q_plus: float
    attempts: int
    syndrome_bits: int
    check_bits: int
    success: bool
    alice_material: np.ndarray
    bob_material: np.ndarray

    @property
    def code_EC(self) -> int:
        """Bits charged as error-correction leakage: all syndromes plus the
        verification hashes of failed attempts (the last hash is charged
        separately through eps_EC)."""
        return self.syndrome_bits + self.check_bits * (self.attempts - 1)


def _default_sample_size(n: int, model_Q: float, sec: SecurityParams) -> int:
    if n >= 1000:
        return optimize_sample_size(n, model_Q, sec)
    return max(1, n // 10)


def estimate_and_correct(
    tr: SessionTranscript,
    sec: SecurityParams | None = None,
    k: int | None = None,
    sample_positions=None,
) -> ECResult:
    """Parameter estimation on a random sample, then modelled error correction.

    The syndrome is charged as ceil(n f_EC h(Q_est + dQ)). Correction
    succeeds iff Q_real <= Q_est + dQ; a failed verification hash doubles dQ
    once before giving up. ``sample_positions`` replaces the random sample.
    """
    sec = tr.config.security if sec is None else sec
    n = tr.n
    if sample_positions is not None:
        pos = np.unique(np.asarray(sample_positions, dtype=np.int64))
        k = pos.size
    else:
        k = _default_sample_size(n, tr.model_Q, sec) if k is None else k
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if sample_positions is None:
        pos = np.sort(substream(tr.config.seed, SAMPLE).choice(n, size=k, replace=False))

    a, b = tr.alice_bits, tr.bob_bits
    Q_est = float(np.mean(a[pos] != b[pos]))
    dq = serfling_delta_q(n, k, sec.ec_fail_target)
    keep = np.ones(n, dtype=bool)
    keep[pos] = False
    alice_rem, bob_rem = a[keep], b[keep]
    check_len = check_ec_length(sec.eps_EC)

    syndrome = 0
    q_plus = Q_est
    bob_out = bob_rem
    success = False
    attempts = 0
    for attempts, factor in enumerate((1.0, 2.0), start=1):
        q_plus = min(0.5, Q_est + factor * dq)
        syndrome += ec_budget(n, q_plus, sec.f_EC)
        bob_out = alice_rem.copy() if tr.Q_real <= q_plus else bob_rem
        hasher = ToeplitzHasher.random(check_len, alice_rem.size, substream(tr.config.seed, EC_HASH, attempts))
        if np.array_equal(hasher(alice_rem), hasher(bob_out)):
            success = True
            break

    return ECResult(
        k=k, sample_positions=pos, Q_est=Q_est, delta_Q=dq, q_plus=q_plus,
        attempts=attempts, syndrome_bits=syndrome, check_bits=check_len, success=success,
        alice_material=alice_rem, bob_material=bob_out,
    )


@dataclass
class KeyResult:
    budget: KeyBudget
    alice_key: np.ndarray
    bob_key: np.ndarray

    @property
    def empty(self) -> bool:
        return self.alice_key.size == 0

    @property
    def keys_match(self) -> bool:
        return np.array_equal(self.alice_key, self.bob_key)


def extract_key(tr: SessionTranscript, ec: ECResult, sec: SecurityParams | None = None) -> KeyResult:
    """Privacy amplification of the corrected strings with a random Toeplitz hash."""
    sec = tr.config.security if sec is None else sec
    if not ec.success:
        raise ValueError("error correction did not succeed")
    budget = key_length(tr.config.modulation, sec, tr.n, ec.k, ec.code_EC)
    if budget.l == 0:
        empty = np.zeros(0, dtype=np.uint8)
        return KeyResult(budget, empty, empty)
    if budget.l > ec.alice_material.size:
        raise ArithmeticError("key length exceeds the remaining key material")
    hasher = ToeplitzHasher.random(budget.l, ec.alice_material.size, substream(tr.config.seed, PA_HASH))
    return KeyResult(budget, hasher(ec.alice_material), hasher(ec.bob_material))


@dataclass
class SessionReport:
    transcript: SessionTranscript
    monitor: MonitorResult
    ec: ECResult | None
    key: KeyResult | None
    outcome: str

    def summary(self) -> dict:
        tr = self.transcript
        out = {
            "outcome": self.outcome,
            "seed": tr.config.seed,
            "N": tr.N,
            "N_matched": tr.N_matched,
            "clicks": tr.clicks,
            "n": tr.n,
            "model": {"E": tr.E, "one_minus_G": tr.one_minus_G, "Q": tr.model_Q, "p_usd": tr.p_usd},
            "Q_real": None if tr.n == 0 else tr.Q_real,
            "monitor": asdict(self.monitor),
            "eve": None if tr.config.eve is None else {**asdict(tr.config.eve), "identified": tr.eve_identified},
        }
        if self.ec is not None:
            ec = self.ec
            out["estimation"] = {
                "k": ec.k, "Q_est": ec.Q_est, "delta_Q": ec.delta_Q, "q_plus": ec.q_plus,
                "attempts": ec.attempts, "code_EC": ec.code_EC, "check_EC": ec.check_bits,
                "success": ec.success,
            }
        if self.key is not None:
            out["budget"] = asdict(self.key.budget)
            out["l"] = self.key.budget.l
            out["keys_match"] = self.key.keys_match
            out["key_sha256"] = hashlib.sha256(bits_to_hex(self.key.alice_key).encode()).hexdigest()
        else:
            out["l"] = 0
        return out


def run_protocol(cfg: SessionConfig) -> SessionReport:
    """Session, detection-rate monitor, estimation/correction and key extraction."""
    tr = run_session(cfg)
    mon = session_monitor(tr)
    if not mon.passed:
        return SessionReport(tr, mon, None, None, "abort: detection-rate monitor")
    if tr.n < 2:
        return SessionReport(tr, mon, None, None, "abort: too few detections")
    ec = estimate_and_correct(tr)
    if not ec.success:
        return SessionReport(tr, mon, ec, None, "abort: error-correction verification")
    key = extract_key(tr, ec)
    return SessionReport(tr, mon, ec, key, "no key" if key.empty else "key")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_transcript_jsonl(report: SessionReport, fh: IO[str], rounds: bool = False) -> None:
    """One aggregate record, then (optionally) one record per round.

    Key material is written as lowercase hex.
    """
    agg = {"type": "aggregate", **report.summary()}
    if report.key is not None:
        agg["key_hex"] = bits_to_hex(report.key.alice_key)
    fh.write(json.dumps(_jsonable(agg), sort_keys=True) + "\n")
    rec = report.transcript.rounds
    if not rounds or rec is None:
        return
    sample = np.zeros(rec.sifted.size, dtype=bool)
    if report.ec is not None:
        sifted_idx = np.flatnonzero(rec.sifted)
        sample[sifted_idx[report.ec.sample_positions]] = True
    for i in range(rec.sifted.size):
        fh.write(json.dumps({
            "type": "round", "i": i,
            "alice_phase": int(rec.alice_phase[i]), "bob_setting": int(rec.bob_setting[i]),
            "click": bool(rec.click[i]), "sifted": bool(rec.sifted[i]),
            "error": bool(rec.error[i]), "sample": bool(sample[i]),
        }) + "\n")
