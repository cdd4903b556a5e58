#!/usr/bin/env python3
"""Run the bundled shrinking-ball contraction experiment and print the
profile.  Equivalent to `clawlab run configs/burgers_contraction.cfg`."""

import sys
from pathlib import Path

from clawlab.cli import main

if __name__ == "__main__":
    cfg = Path(__file__).resolve().parent.parent / "configs" / "burgers_contraction.cfg"
    sys.exit(main(["run", str(cfg), "--force", *sys.argv[1:]]))
