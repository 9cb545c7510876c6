"""Nonlocal means filtering of real 2-D fields.

The filter works on any finite real field, including multiplier fields
with negative entries; `h` is applied to raw values without rescaling.

For an output pixel ``i`` and a candidate ``j`` in the ``(2S+1)^2`` search
window around ``i`` (clipped to the field), the weight is
``exp(-d2(i, j) / h**2)`` where ``d2`` is the mean squared difference of the
``(2W+1)^2`` patches centred at ``i`` and ``j``. Patches that overhang the
border read mirror-padded values (``numpy.pad(mode="symmetric")``). The
centre pixel takes part with weight 1.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["NlmParams", "nlm_filter", "patch_distance", "nlm_cost"]


@dataclass(frozen=True)
class NlmParams:
    """Search radius `S`, patch radius `W` and filtering parameter `h`."""

    search_radius: int = 6
    patch_radius: int = 3
    h: float = 0.19
    center_weight: str = "one"

    def __post_init__(self):
        if self.center_weight not in ("one", "max"):
            raise ValueError(f"center_weight must be 'one' or 'max', got {self.center_weight!r}")
        if self.patch_radius < 0 or self.search_radius < self.patch_radius:
            raise ValueError(
                f"need S >= W >= 0, got S={self.search_radius}, W={self.patch_radius}"
            )
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")


def _box_sum(d, r, rows, cols):
    # Exact (2r+1)x(2r+1) window sums of d, shape (rows + 2r, cols + 2r) -> (rows, cols).
    k = 2 * r + 1
    acc = d[0:rows].copy()
    for t in range(1, k):
        acc += d[t:t + rows]
    out = acc[:, 0:cols].copy()
    for t in range(1, k):
        out += acc[:, t:t + cols]
    return out


def nlm_filter(f, params):
    """Nonlocal means filter of field `f`.

    Parameters
    ----------
    f : array_like
        Finite real 2-D field.
    params : NlmParams

    Returns
    -------
    ndarray
        Filtered field, same shape as `f`. Every output pixel is a convex
        combination of the input values in its search window.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError(f"expected a 2-D field, got shape {f.shape}")
    if f.size == 1:
        return f.copy()
    height, width = f.shape
    S, W = params.search_radius, params.patch_radius
    inv = 1.0 / (params.h * params.h * (2 * W + 1) ** 2)
    padded = np.pad(f, W, mode="symmetric")
    num = np.zeros_like(f)
    den = np.zeros_like(f)
    use_max = params.center_weight == "max"
    wmax = np.zeros_like(f)
    for dy in range(-S, S + 1):
        i0, i1 = max(0, -dy), min(height, height - dy)
        if i0 >= i1:
            continue
        for dx in range(-S, S + 1):
            j0, j1 = max(0, -dx), min(width, width - dx)
            if j0 >= j1 or (use_max and dy == 0 and dx == 0):
                continue
            a = padded[i0:i1 + 2 * W, j0:j1 + 2 * W]
            b = padded[i0 + dy:i1 + dy + 2 * W, j0 + dx:j1 + dx + 2 * W]
            diff = a - b
            ssd = _box_sum(diff * diff, W, i1 - i0, j1 - j0)
            w = np.exp(-ssd * inv)
            num[i0:i1, j0:j1] += w * f[i0 + dy:i1 + dy, j0 + dx:j1 + dx]
            den[i0:i1, j0:j1] += w
            if use_max:
                np.maximum(wmax[i0:i1, j0:j1], w, out=wmax[i0:i1, j0:j1])
    if use_max:
        num += wmax * f
        den += wmax
    return num / den


def patch_distance(f, i, j, patch_radius):
    """Mean squared difference between the patches centred at pixels `i` and `j`.

    `i` and `j` are ``(row, col)`` tuples inside the field.
    """
    f = np.asarray(f, dtype=np.float64)
    W = patch_radius
    padded = np.pad(f, W, mode="symmetric")
    k = 2 * W + 1
    pi = padded[i[0]:i[0] + k, i[1]:i[1] + k]
    pj = padded[j[0]:j[0] + k, j[1]:j[1] + k]
    return float(np.mean((pi - pj) ** 2))


def nlm_cost(n, params):
    """Operation count model ``N^2 (2S+1)^2 (2W+1)^2`` for an ``N x N`` field."""
    return n * n * (2 * params.search_radius + 1) ** 2 * (2 * params.patch_radius + 1) ** 2
