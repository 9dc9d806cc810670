"""Command-line interface: ``rate-sweep``, ``simulate`` and ``verify``.

Exit codes: 0 success (a protocol abort is a reported outcome, not an
error), 1 a verification check failed, 2 usage or configuration error.
``QKD_THREADS`` caps the worker threads used by the rate sweep.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .attacks import isometry_scan, usd_attack_viable
from .channel import MandelRegimeWarning
from .config import Config, ConfigError, load_config
from .finite_key import rate_point
from .params import LinkParams
from .scw_state import density_eigenvalues, holevo_bound, overlap, overlap_direct, shannon_entropy, sideband_photon_number
from .session import SessionConfig, _jsonable, run_protocol, write_transcript_jsonl
from .wigner import d_row

CSV_HEADER = ["loss_db", "n", "chi", "one_minus_G", "Q", "k_opt", "code_EC", "l", "R"]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.12g}"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QKD_THREADS", "1")))
    except ValueError:
        return 1


def sweep_rows(cfg: Config, accounting: str | None = None) -> list[list]:
    """Rate-sweep rows, n-major then loss, in grid order."""
    mode = accounting or cfg.sweep.accounting or cfg.security.accounting
    grid = [(n, loss) for n in cfg.sweep.n_values for loss in cfg.sweep.losses()]

    def evaluate(point):
        n, loss = point
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MandelRegimeWarning)
            rp = rate_point(cfg.modulation, replace(cfg.link, loss_db=loss), cfg.security, n, mode)
        return [loss, n, rp.chi, rp.one_minus_G, rp.Q, rp.k_opt, rp.code_EC, rp.l, rp.R]

    cfg.modulation.S_eff  # resolve the cached truncation before threads start
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(evaluate, grid))


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(args) -> Config:
    return load_config(args.config) if args.config else Config()


def cmd_rate_sweep(args) -> int:
    cfg = _load(args)
    _write(format_csv(sweep_rows(cfg, args.accounting)), args.out)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    spec = cfg.session
    seed = spec.seed if args.seed is None else args.seed
    security = cfg.security if args.accounting is None else replace(cfg.security, accounting=args.accounting)
    scfg = SessionConfig(
        N=spec.N, seed=seed, modulation=cfg.modulation, link=cfg.link, security=security,
        eve=spec.eve_config(), record_rounds=spec.record_rounds or args.rounds,
    )
    report = run_protocol(scfg)
    _write(json.dumps(_jsonable(report.summary()), sort_keys=True, indent=2) + "\n", args.out)
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8") as fh:
            write_transcript_jsonl(report, fh, rounds=args.rounds)
    return 0


@dataclass
class Check:
    name: str
    measured: float
    expected: str
    tolerance: str
    tag: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: measured={self.measured:.6g} expected={self.expected} tol={self.tolerance} [{self.tag}]"


def run_checks(cfg: Config | None = None) -> list[Check]:
    cfg = cfg or Config()
    p, sec = cfg.modulation, cfg.security
    checks = []

    mu_sb = sideband_photon_number(p)
    checks.append(Check("sideband photon number", mu_sb, "0.2", "0.002", "reference", abs(mu_sb - 0.2) <= 0.002))

    dev = max(
        abs(float(np.sum(d_row(S, b).values ** 2)) - 1.0)
        for S in (8, 64, 256) for b in (0.0, 0.01, 0.1, 1.0, math.pi / 2)
    )
    checks.append(Check("d-row unitarity", dev, "0", "1e-10", "reference", dev < 1e-10))

    chi = holevo_bound(p)
    gap = abs(chi - shannon_entropy(density_eigenvalues(p)))
    checks.append(Check("Holevo closed form vs eigenvalue entropy", gap, "0", "1e-12", "derived", gap < 1e-12))
    gap = abs(overlap(p) - overlap_direct(p))
    checks.append(Check("overlap closed form vs mode product", gap, "0", "1e-9", "derived", gap < 1e-9))

    best, arg = isometry_scan(overlap(p), 100)
    checks.append(Check("isometry scan max - chi", best - chi, "<= 0", "1e-9", "derived",
                        best <= chi + 1e-9 and abs(arg.b) < 1e-12))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MandelRegimeWarning)
        worst = max(rate_point(p, LinkParams(loss_db=x), sec, 10**5).budget.l_raw for x in range(0, 41, 5))
        checks.append(Check("n=1e5 key length (max over 0..40 dB)", worst, "<= 0", "0", "reference", worst <= 0))
        for n, lo, hi in ((10**6, 0.02, 0.08), (10**7, 0.01, 0.04)):
            rp = rate_point(p, LinkParams(loss_db=0.0), sec, n)
            checks.append(Check(f"R at 0 dB, n={n:.0e}", rp.R, "> 0", "0", "reference", rp.R > 0))
            frac = rp.k_opt / n
            checks.append(Check(f"k*/n at n={n:.0e}", frac, f"[{lo}, {hi}]", "range", "reference", lo <= frac <= hi))
        viable = usd_attack_viable(p, LinkParams(loss_db=0.0))
    checks.append(Check(f"USD attack viable at 0 dB (M={p.M})", float(viable), "0", "exact", "derived", not viable))
    return checks


def cmd_verify(args) -> int:
    cfg = _load(args)
    checks = run_checks(cfg)
    text = "\n".join(c.line() for c in checks) + "\n"
    _write(text, args.out)
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scwqkd", description="Finite-key analysis and simulation of SCW QKD.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="TOML configuration file")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")

    sp = sub.add_parser("rate-sweep", help="key rate versus channel loss, CSV output")
    common(sp)
    sp.add_argument("--accounting", choices=["paper", "conservative"])
    sp.set_defaults(func=cmd_rate_sweep)

    sp = sub.add_parser("simulate", help="simulate one protocol session, JSON report")
    common(sp)
    sp.add_argument("--seed", type=_u64, help="RNG seed (unsigned 64-bit)")
    sp.add_argument("--accounting", choices=["paper", "conservative"])
    sp.add_argument("--transcript", metavar="PATH", help="write a JSON Lines transcript")
    sp.add_argument("--rounds", action="store_true", help="include per-round records in the transcript")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run the built-in reproduction checks")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
