#!/usr/bin/env python3
"""Run the bundled uniqueness experiment (three scheme variants chasing the
same limit).  Equivalent to `clawlab run configs/uniqueness_burgers.cfg`."""

import sys
from pathlib import Path

from clawlab.cli import main

if __name__ == "__main__":
    cfg = Path(__file__).resolve().parent.parent / "configs" / "uniqueness_burgers.cfg"
    sys.exit(main(["run", str(cfg), "--force", *sys.argv[1:]]))
