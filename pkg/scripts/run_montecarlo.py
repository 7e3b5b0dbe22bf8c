#!/usr/bin/env python3
"""Precision-bound study: success rate of the estimate over random phases.

Delegates to the ``montecarlo`` subcommand:

    python scripts/run_montecarlo.py --bits 3 --trials 10000
    python scripts/run_montecarlo.py --bits 5 --provider matrix --dyadic
"""

import sys

from ipea_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["montecarlo", *sys.argv[1:]]))
