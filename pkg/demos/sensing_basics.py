"""
Block Gaussian sensing
======================

Measure an image block by block with one shared Gaussian matrix, save the
measurements to a CSM1 file, and read them back.
"""

import tempfile
from pathlib import Path

import numpy as np

from tvcs.data import load_image
from tvcs.sensing import build_block_gaussian, read_measurements, write_measurements

x = load_image("barbara")

# 32x32 blocks, 30% of the samples: each block gives round(0.3 * 1024) = 307 values
op = build_block_gaussian(32, 0.3, *x.shape, seed=0)
b = op.forward(x)
print(f"{op.n_blocks} blocks x {op.matrix.shape[0]} samples = {b.size} measurements")

# the adjoint is the exact transpose
rng = np.random.default_rng(0)
u, y = rng.standard_normal(x.shape), rng.standard_normal(b.size)
print("adjoint gap:", abs(op.forward(u) @ y - np.vdot(u, op.adjoint(y))))

# only (kind, sizes, seed) are stored: the matrix is regenerated on reading
path = Path(tempfile.mkdtemp()) / "barbara.csm"
write_measurements(path, op, b)
op2, b2 = read_measurements(path)
print(f"{path.stat().st_size} bytes on disk, matrix identical: {np.array_equal(op.matrix, op2.matrix)}")
