"""Forward-difference image gradients with periodic boundaries.

A gradient field is stored as one ``(2, H, W)`` array: component 0 is the
horizontal difference ``D_x u`` and component 1 the vertical difference
``D_y u``. :func:`grad_adjoint` is the exact transpose of :func:`grad`
(a negative periodic divergence built from backward differences).
"""

import numpy as np

__all__ = ["grad", "grad_adjoint", "pixel_norm"]


def grad(u):
    """Periodic forward differences of image `u`, shape ``(2, H, W)``.

    ``g[0, i, j] = u[i, (j+1) % W] - u[i, j]`` and
    ``g[1, i, j] = u[(i+1) % H, j] - u[i, j]``.
    """
    u = np.asarray(u, dtype=np.float64)
    g = np.empty((2,) + u.shape)
    np.subtract(np.roll(u, -1, axis=1), u, out=g[0])
    np.subtract(np.roll(u, -1, axis=0), u, out=g[1])
    return g


def grad_adjoint(g):
    """Transpose of :func:`grad`: ``<grad(u), g> == <u, grad_adjoint(g)>``."""
    g = np.asarray(g, dtype=np.float64)
    gx, gy = g[0], g[1]
    return (np.roll(gx, 1, axis=1) - gx) + (np.roll(gy, 1, axis=0) - gy)


def pixel_norm(g):
    """Pixelwise Euclidean norm of a ``(2, H, W)`` field."""
    return np.sqrt(g[0] * g[0] + g[1] * g[1])
