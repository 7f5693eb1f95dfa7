#!/usr/bin/env python3
"""Self-convergence study for a scenario config: dt, dt/2, dt/4 against a
dt/64 reference. Expect ~4th-order state error and ~2nd-order ledger
residual; exactly-linear scenarios report 'exact'."""

import argparse
import sys

from elgal.config import parse_config
from elgal.scenarios import convergence_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config")
    args = parser.parse_args()
    print(convergence_suite(parse_config(args.config)).table())
    return 0


if __name__ == "__main__":
    sys.exit(main())
