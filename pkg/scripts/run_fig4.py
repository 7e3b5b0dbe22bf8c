#!/usr/bin/env python3
"""Twelve-setting waveplate sweep: estimate each composite's eigenphase.

Delegates to the ``fig4`` subcommand, so every CLI flag works here too:

    python scripts/run_fig4.py --exact --provider matrix
    python scripts/run_fig4.py --seed 7 --out sweep.csv
"""

import sys

from ipea_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig4", *sys.argv[1:]]))
