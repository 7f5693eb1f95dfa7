#!/usr/bin/env python3
"""Run every built-in scenario and summarize the outcomes."""

import argparse
import sys
import time

from elgal.scenarios import BUILTIN_SCENARIOS, run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out")
    parser.add_argument("--only", nargs="*", help="subset of scenario names")
    args = parser.parse_args()

    names = args.only or sorted(BUILTIN_SCENARIOS)
    failures = 0
    for name in names:
        scenario = BUILTIN_SCENARIOS[name]()
        t0 = time.time()
        outcome = run_scenario(scenario, args.outdir)
        status = "ok" if outcome.exit_code == 0 else "FAILED"
        print(f"{name:24s} {status}  ({time.time() - t0:.1f}s)")
        for line in outcome.messages:
            print("   ", line)
        failures += outcome.exit_code != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
