"""Abort rate of the detection-rate monitor against a USD intercept-resend
attacker, as a function of the margin (1-G)/P_USD and the number of states.

Usage: python scripts/usd_monitor_study.py [--N 1000000] [--runs 200]
"""

import argparse

from scwqkd.attacks import usd_probability
from scwqkd.params import ModulationParams
from scwqkd.session import EveConfig, SessionConfig, run_session, session_monitor


def abort_rate(mod, N, runs, p_usd):
    eve = EveConfig(p_usd=p_usd)
    aborts = sum(not session_monitor(run_session(SessionConfig(N=N, seed=s, modulation=mod, eve=eve))).passed
                 for s in range(runs))
    return aborts / runs


def main(argv=None):
    ap = argparse.ArgumentParser(description="USD attacker vs detection-rate monitor")
    ap.add_argument("--N", type=int, default=10**6)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--margins", type=float, nargs="+", default=[1.0, 1.02, 1.05, 1.1, 1.2])
    args = ap.parse_args(argv)

    print("M  margin  p_usd        abort_rate")
    for M in (2, 16):
        mod = ModulationParams(M=M)
        one_minus_G = run_session(SessionConfig(N=1, modulation=mod)).one_minus_G
        for margin in args.margins:
            p = one_minus_G / margin
            print(f"{M:<2d} {margin:<7.3g} {p:<12.5g} {abort_rate(mod, args.N, args.runs, p):.3f}")
        p_opt = usd_probability(mod).p_usd
        print(f"{M:<2d} optimal {p_opt:<12.5g} {abort_rate(mod, args.N, args.runs, None):.3f}")


if __name__ == "__main__":
    main()
