"""Gaussian measurement operators ``b = A u`` and the CSM1 measurement file.

Two operator kinds are provided:

``dense``
    A full ``M x N`` matrix with i.i.d. N(0, 1/M) entries, applied to the
    row-major flattened image. Limited to ``N <= 4096``.
``block``
    One ``M_B x B**2`` matrix with i.i.d. N(0, 1/M_B) entries applied to
    every non-overlapping ``B x B`` block. Blocks are visited in row-major
    block order, and each block is itself flattened row-major.

Gaussian variates come from NumPy's ``Generator(PCG64(seed))`` via
``standard_normal`` (the ziggurat method). The same seed and parameters
always give a bitwise identical matrix for a given NumPy version.

A third kind, ``matrix``, wraps an explicit matrix and is meant for tests
(for example ``A = I``). It can be written to a CSM1 file only when the
matrix is the identity.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_DENSE_N",
    "MeasurementOperator",
    "build_dense_gaussian",
    "build_block_gaussian",
    "block_subsamples",
    "forward",
    "adjoint",
    "write_measurements",
    "read_measurements",
    "MeasurementFileError",
]

MAX_DENSE_N = 4096

_KIND_CODES = {"dense": 0, "block": 1, "identity": 2}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}
_MAGIC = b"CSM1"
_HEADER = struct.Struct("<4s9I")


class MeasurementFileError(ValueError):
    """Malformed or inconsistent CSM1 file."""


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """Linear sensing operator with forward and adjoint application.

    Attributes
    ----------
    kind : str
        ``"dense"``, ``"block"`` or ``"matrix"``.
    matrix : ndarray
        ``(M, N)`` for dense/matrix kinds, ``(M_B, B*B)`` for block.
    shape : tuple of int
        Image shape ``(height, width)`` the operator acts on.
    block_size : int
        Block edge ``B`` (0 for non-block kinds).
    seed : int
        Seed used to draw the matrix (0 for the matrix kind).
    """

    kind: str
    matrix: np.ndarray
    shape: tuple
    block_size: int = 0
    seed: int = 0

    @classmethod
    def from_matrix(cls, matrix, shape):
        """Wrap an explicit ``(M, H*W)`` matrix, acting on images of `shape`."""
        mat = np.array(matrix, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != shape[0] * shape[1]:
            raise ValueError(f"matrix {mat.shape} incompatible with image shape {shape}")
        return cls("matrix", mat, tuple(shape))

    @classmethod
    def identity(cls, shape):
        n = shape[0] * shape[1]
        return cls.from_matrix(np.eye(n), shape)

    @property
    def n_signal(self):
        return self.shape[0] * self.shape[1]

    @property
    def n_blocks(self):
        if self.kind != "block":
            return 1
        return (self.shape[0] // self.block_size) * (self.shape[1] // self.block_size)

    @property
    def n_measurements(self):
        return self.matrix.shape[0] * self.n_blocks

    @property
    def is_identity(self):
        m = self.matrix
        return (
            self.kind == "matrix"
            and m.shape[0] == m.shape[1]
            and np.array_equal(m, np.eye(m.shape[0]))
        )

    def _blocks(self, u):
        h, w = self.shape
        b = self.block_size
        return (
            u.reshape(h // b, b, w // b, b)
            .transpose(0, 2, 1, 3)
            .reshape(-1, b * b)
        )

    def _unblocks(self, blocks):
        h, w = self.shape
        b = self.block_size
        return (
            blocks.reshape(h // b, w // b, b, b)
            .transpose(0, 2, 1, 3)
            .reshape(h, w)
        )

    def forward(self, u):
        """Apply ``A`` to an image; returns a length-M vector."""
        u = np.asarray(u, dtype=np.float64)
        if u.shape != self.shape:
            raise ValueError(f"image shape {u.shape} does not match operator {self.shape}")
        if self.kind == "block":
            return (self._blocks(u) @ self.matrix.T).ravel()
        return self.matrix @ u.ravel()

    def adjoint(self, b):
        """Apply ``A^T`` to a measurement vector; returns an image-shaped array."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.n_measurements,):
            raise ValueError(
                f"measurement vector of shape {b.shape}, expected ({self.n_measurements},)"
            )
        if self.kind == "block":
            return self._unblocks(b.reshape(self.n_blocks, -1) @ self.matrix)
        return (self.matrix.T @ b).reshape(self.shape)

    def to_dense(self):
        """Equivalent full ``(M, N)`` matrix acting on row-major flattened images."""
        if self.kind != "block":
            return self.matrix.copy()
        n = self.n_signal
        cols = np.empty((self.n_measurements, n))
        eye = np.zeros(n)
        for k in range(n):
            eye[k] = 1.0
            cols[:, k] = self.forward(eye.reshape(self.shape))
            eye[k] = 0.0
        return cols


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def build_dense_gaussian(m, n, seed, shape=None):
    """Dense ``m x n`` Gaussian operator, entries N(0, 1/m).

    `shape` defaults to ``(1, n)``; pass the image shape when the
    operator will be applied to 2-D images.
    """
    if shape is None:
        shape = (1, n)
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= M <= N, got M={m}, N={n}")
    if n > MAX_DENSE_N:
        raise ValueError(f"dense operator limited to N <= {MAX_DENSE_N}, got {n}")
    if shape[0] * shape[1] != n:
        raise ValueError(f"image shape {shape} has {shape[0] * shape[1]} pixels, not {n}")
    mat = _rng(seed).standard_normal((m, n)) / math.sqrt(m)
    return MeasurementOperator("dense", mat, tuple(shape), 0, seed)


def block_subsamples(block_size, subrate):
    """Measurements per block, ``round(subrate * B**2)``."""
    if not 0.0 < subrate <= 1.0:
        raise ValueError(f"subrate must lie in (0, 1], got {subrate}")
    mb = int(round(subrate * block_size * block_size))
    if mb < 1:
        raise ValueError(f"subrate {subrate} gives no measurements for B={block_size}")
    return mb


def build_block_gaussian(block_size, subrate, height, width, seed):
    """Shared per-block Gaussian operator for a ``height x width`` image."""
    if block_size < 1:
        raise ValueError(f"block size must be positive, got {block_size}")
    if height % block_size or width % block_size:
        raise ValueError(
            f"image {height}x{width} is not divisible into {block_size}x{block_size} blocks"
        )
    return _block_operator(block_size, block_subsamples(block_size, subrate),
                           height, width, seed)


def _block_operator(block_size, mb, height, width, seed):
    mat = _rng(seed).standard_normal((mb, block_size * block_size)) / math.sqrt(mb)
    return MeasurementOperator("block", mat, (height, width), block_size, seed)


def forward(op, u):
    return op.forward(u)


def adjoint(op, b):
    return op.adjoint(b)


def write_measurements(path, op, b):
    """Write a CSM1 file: header fields then M little-endian float64 samples.

    The operator itself is not stored; :func:`read_measurements`
    regenerates it from the kind, dimensions and seed.
    """
    b = np.asarray(b, dtype="<f8")
    if b.shape != (op.n_measurements,):
        raise ValueError("measurement vector does not match operator")
    if op.kind == "matrix":
        if not op.is_identity:
            raise ValueError("only identity test matrices can be stored in CSM1")
        kind = "identity"
    else:
        kind = op.kind
    seed = int(op.seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    mb = op.matrix.shape[0]
    header = _HEADER.pack(
        _MAGIC, _KIND_CODES[kind], op.n_measurements, op.n_signal, op.block_size,
        mb, seed & 0xFFFFFFFF, seed >> 32, op.shape[0], op.shape[1],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(b.tobytes())


def read_measurements(path):
    """Read a CSM1 file and regenerate its operator.

    Returns
    -------
    (MeasurementOperator, ndarray)
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size or data[:4] != _MAGIC:
        raise MeasurementFileError("not a CSM1 measurement file")
    magic, code, m, n, bsize, mb, seed_lo, seed_hi, h, w = _HEADER.unpack_from(data)
    if code not in _CODE_KINDS:
        raise MeasurementFileError(f"unknown operator kind code {code}")
    if h * w != n:
        raise MeasurementFileError(f"header dims {h}x{w} inconsistent with N={n}")
    payload = data[_HEADER.size:]
    if len(payload) != 8 * m:
        raise MeasurementFileError(f"expected {m} samples, file holds {len(payload) // 8}")
    b = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    seed = seed_lo | (seed_hi << 32)
    kind = _CODE_KINDS[code]
    if kind == "dense":
        op = build_dense_gaussian(m, n, seed, shape=(h, w))
    elif kind == "block":
        if bsize < 1 or h % bsize or w % bsize:
            raise MeasurementFileError(f"bad block size {bsize} for {h}x{w}")
        if not 1 <= mb <= bsize * bsize:
            raise MeasurementFileError(f"bad per-block count {mb} for B={bsize}")
        op = _block_operator(bsize, mb, h, w, seed)
    else:
        op = MeasurementOperator.identity((h, w))
    if op.n_measurements != m:
        raise MeasurementFileError("regenerated operator disagrees with header M")
    return op, b
