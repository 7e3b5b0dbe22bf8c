#!/usr/bin/env python3
"""Nine eigenstate-generation panels with single-qubit tomography.

Delegates to the ``fig5`` subcommand:

    python scripts/run_fig5.py --shots 0 --no-noise     # exact, ideal
    python scripts/run_fig5.py --noise-p 0.9 --format json
"""

import sys

from ipea_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig5", *sys.argv[1:]]))
