#!/usr/bin/env python3
"""Refinement study for the Riemann shock against the exact solution.
Equivalent to `clawlab study configs/uniqueness_burgers.cfg --levels 3`."""

import sys
from pathlib import Path

from clawlab.cli import main

if __name__ == "__main__":
    cfg = Path(__file__).resolve().parent.parent / "configs" / "uniqueness_burgers.cfg"
    sys.exit(main(["study", str(cfg), "--levels", "3", "--force",
                   "--out", "runs/convergence_burgers", *sys.argv[1:]]))
