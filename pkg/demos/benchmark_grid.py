"""
A small benchmark grid
======================

Drive the command-line harness from Python: a two-image, two-subrate grid
on 64x64 crops, written as CSV and printed as a table.
"""

import tempfile
from pathlib import Path

from tvcs.cli import main

work = Path(tempfile.mkdtemp())
spec = work / "grid.txt"
spec.write_text(
    "images = barbara, monarch\n"
    "subrates = 0.2, 0.3\n"
    "variants = tval3, nllm, tvnlr1\n"
    "block_size = 32\n"
    "crop = 64\n"
)

# flags override the spec file
code = main(["bench", "--spec", str(spec), "--max-outer", "20", "--out", str(work / "grid.csv")])
print("exit code", code)
print((work / "grid.csv").read_text())
