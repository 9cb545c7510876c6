"""Augmented Lagrangian total-variation recovery with three variants.

The recovered image ``u`` minimises isotropic TV subject to ``A u = b``
through the augmented Lagrangian

    sum_p |w_p| - v.(D u - w) + beta/2 |D u - w|^2
        - lam.(A u - b) + mu/2 |A u - b|^2

optimised by alternating a pixelwise shrinkage for ``w`` with
Barzilai-Borwein steepest descent for ``u`` (inner loop), followed by
multiplier updates (outer loop). Variants differ only in the outer step:

``TVAL3``
    classical updates ``v -= beta (D u - w)``, ``lam -= mu (A u - b)``.
``NLLM``
    classical updates, then each component of ``v`` is passed through the
    nonlocal means filter.
``TVNLR1``
    adds ``- gamma.(u - F u) + theta/2 |u - F u|^2`` to the objective with
    ``F u`` frozen at the value cached from the previous outer iteration,
    so the ``u`` gradient needs no derivative of the filter. ``gamma``
    stays at zero (pure penalty) unless ``tvnlr1_gamma_update`` is set:
    ``u = F u`` has no solution for natural images, and a multiplier chasing
    it grows without bound and stalls the iteration.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .gradient import grad, grad_adjoint, pixel_norm
from .image import psnr as _psnr
from .nlm import NlmParams, nlm_filter

__all__ = [
    "Variant",
    "SolverConfig",
    "SolverState",
    "RecoveryReport",
    "SolverDivergenceError",
    "shrink_isotropic",
    "augmented_lagrangian_value",
    "u_gradient",
    "bb_step",
    "u_step",
    "update_multipliers",
    "recover",
    "identity_filter",
]

log = logging.getLogger(__name__)

BB_MIN, BB_MAX = 1e-8, 1e8
RESIDUAL_STOP = 1e-6


class Variant(str, enum.Enum):
    TVAL3 = "tval3"
    NLLM = "nllm"
    TVNLR1 = "tvnlr1"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown variant {name!r} (choose from {choices})") from None


# Filtering parameter per variant on the unit intensity scale.
DEFAULT_H = {Variant.NLLM: 0.19, Variant.TVNLR1: 0.03}


class SolverDivergenceError(FloatingPointError):
    """Raised when an iterate becomes non-finite."""


@dataclass(frozen=True)
class SolverConfig:
    """Penalties, step control, filter settings and stopping rules.

    ``h=None`` selects the per-variant default (0.19 for NLLM, 0.03 for
    TVNLR1).
    """

    mu: float = 512.0
    beta: float = 32.0
    alpha0: float = 1.0
    theta: float = 4.0
    search_radius: int = 6
    patch_radius: int = 3
    h: float = None
    tol_inner: float = 1e-4
    tol_outer: float = 1e-4
    max_inner: int = 20
    max_outer: int = 50
    backtrack_max: int = 20
    center_weight: str = "one"
    tvnlr1_gamma_update: bool = False

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0 and self.alpha0 > 0):
            raise ValueError("mu, beta and alpha0 must be positive")
        if not self.theta >= 0:
            raise ValueError("theta must be non-negative")
        if not (self.tol_inner > 0 and self.tol_outer > 0):
            raise ValueError("tolerances must be positive")
        if min(self.max_inner, self.max_outer) < 1 or self.backtrack_max < 0:
            raise ValueError("iteration caps must be >= 1")
        if self.h is not None and not self.h > 0:
            raise ValueError("h must be positive")
        # validates S >= W >= 0
        NlmParams(self.search_radius, self.patch_radius, 1.0)

    def nlm_params(self, variant):
        h = self.h if self.h is not None else DEFAULT_H.get(Variant.parse(variant), 0.19)
        return NlmParams(self.search_radius, self.patch_radius, h, self.center_weight)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass
class SolverState:
    """All iterates and multipliers of one recovery run.

    ``w`` and ``v`` are ``(2, H, W)`` gradient fields; ``lam`` has the
    length of ``b``. ``gamma`` and ``fu_cache`` stay ``None`` unless the
    variant is TVNLR1.
    """

    u: np.ndarray
    w: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray = None
    fu_cache: np.ndarray = None
    prev_u: np.ndarray = None
    prev_grad: np.ndarray = None
    inner_iters: int = 0
    outer_iters: int = 0
    nlm_calls: int = 0
    stagnations: int = 0

    @classmethod
    def initial(cls, u0, n_measurements):
        u0 = np.array(u0, dtype=np.float64)
        zeros = np.zeros((2,) + u0.shape)
        return cls(u=u0, w=zeros, v=zeros.copy(), lam=np.zeros(n_measurements))

    def copy(self):
        def c(a):
            return None if a is None else a.copy()

        return replace(
            self, u=c(self.u), w=c(self.w), v=c(self.v), lam=c(self.lam),
            gamma=c(self.gamma), fu_cache=c(self.fu_cache),
            prev_u=c(self.prev_u), prev_grad=c(self.prev_grad),
        )


@dataclass
class RecoveryReport:
    variant: str
    psnr: float
    outer_iters: int
    total_inner_iters: int
    nlm_calls: int
    final_residual: float
    wall_time: float
    stagnations: int = 0
    history: list = field(default_factory=list, repr=False)


def identity_filter(f, params):
    """Stand-in for :func:`tvcs.nlm.nlm_filter` that returns a copy of `f`."""
    return np.array(f, dtype=np.float64, copy=True)


def shrink_isotropic(du, v, beta):
    """Closed-form minimiser of ``|w| - v.(du - w) + beta/2 |du - w|^2`` per pixel.

    Returns ``max(r - 1/beta, 0) * t / r`` with ``t = du - v/beta`` and
    ``r = |t|``; pixels with ``r == 0`` map to zero.
    """
    t = du - v / beta
    r = pixel_norm(t)
    scale = np.zeros_like(r)
    nz = r > 0
    scale[nz] = np.maximum(r[nz] - 1.0 / beta, 0.0) / r[nz]
    return t * scale


def _value(u, du, au, state, config, b, variant):
    r = du - state.w
    val = pixel_norm(state.w).sum() - np.vdot(state.v, r) + 0.5 * config.beta * np.vdot(r, r)
    ra = au - b
    val += -np.vdot(state.lam, ra) + 0.5 * config.mu * np.vdot(ra, ra)
    if variant is Variant.TVNLR1:
        e = u - state.fu_cache
        val += -np.vdot(state.gamma, e) + 0.5 * config.theta * np.vdot(e, e)
    return float(val)


def augmented_lagrangian_value(state, config, op, b, variant):
    """Objective of `variant` at the current state (``w`` and multipliers fixed)."""
    variant = Variant.parse(variant)
    return _value(state.u, grad(state.u), op.forward(state.u), state, config, b, variant)


def _gradient(u, du, au, state, config, op, b, variant):
    d = grad_adjoint(config.beta * (du - state.w) - state.v)
    d += op.adjoint(config.mu * (au - b) - state.lam)
    if variant is Variant.TVNLR1:
        d += config.theta * (u - state.fu_cache) - state.gamma
    return d


def u_gradient(state, config, op, b, variant):
    """Gradient of :func:`augmented_lagrangian_value` with respect to ``u``."""
    variant = Variant.parse(variant)
    u = state.u
    return _gradient(u, grad(u), op.forward(u), state, config, op, b, variant)


def bb_step(s, y, alpha0):
    """Barzilai-Borwein step ``<s,s>/<s,y>``, or `alpha0` when ``<s,y> <= 0``."""
    sy = float(np.vdot(s, y))
    if not sy > 0:
        return alpha0
    alpha = float(np.vdot(s, s)) / sy
    if not math.isfinite(alpha):
        return alpha0
    return min(max(alpha, BB_MIN), BB_MAX)


def u_step(state, config, op, b, variant):
    """One backtracked BB steepest-descent step on ``u``, in place.

    The step starts from the BB length (or ``alpha0`` on the first step)
    and is halved up to ``backtrack_max`` times until the objective does
    not increase. If no trial is accepted the iterate is left unchanged
    and ``state.stagnations`` is incremented.
    """
    variant = Variant.parse(variant)
    u = state.u
    du, au = grad(u), op.forward(u)
    d = _gradient(u, du, au, state, config, op, b, variant)
    if state.prev_u is None:
        alpha = config.alpha0
    else:
        alpha = bb_step(u - state.prev_u, d - state.prev_grad, config.alpha0)

    f0 = _value(u, du, au, state, config, b, variant)
    dd, ad = grad(d), op.forward(d)
    new_u = None
    for _ in range(config.backtrack_max + 1):
        trial = u - alpha * d
        ft = _value(trial, du - alpha * dd, au - alpha * ad, state, config, b, variant)
        if ft <= f0:
            new_u = trial
            break
        alpha *= 0.5
    if new_u is None:
        new_u = u.copy()
        state.stagnations += 1
    state.prev_u = u
    state.prev_grad = d
    state.u = new_u
    state.inner_iters += 1
    return state


def update_multipliers(state, config, op, b, variant, filter_fn=None, refresh_cache=True):
    """Outer-loop multiplier update, in place.

    All variants apply ``v -= beta (D u - w)`` and ``lam -= mu (A u - b)``.
    NLLM then filters ``v[0]`` and ``v[1]`` independently (two filter
    calls). TVNLR1 recomputes the cached ``F u`` from the new ``u`` when
    `refresh_cache` is true (one filter call); with
    ``config.tvnlr1_gamma_update`` it first applies
    ``gamma -= theta (u - F u)`` using the cache the inner loop just used.
    """
    variant = Variant.parse(variant)
    if filter_fn is None:
        filter_fn = nlm_filter
    u = state.u
    state.v = state.v - config.beta * (grad(u) - state.w)
    state.lam = state.lam - config.mu * (op.forward(u) - b)
    if variant is Variant.NLLM:
        params = config.nlm_params(variant)
        state.v = np.stack([filter_fn(state.v[0], params), filter_fn(state.v[1], params)])
        state.nlm_calls += 2
    elif variant is Variant.TVNLR1:
        if config.tvnlr1_gamma_update:
            state.gamma = state.gamma - config.theta * (u - state.fu_cache)
        if refresh_cache:
            state.fu_cache = filter_fn(u, config.nlm_params(variant))
            state.nlm_calls += 1
    state.outer_iters += 1
    return state


def _rel_change(new, old):
    return float(np.linalg.norm(new - old)) / max(float(np.linalg.norm(old)), 1.0)


def _residual(op, u, b):
    nb = float(np.linalg.norm(b))
    r = float(np.linalg.norm(op.forward(u) - b))
    return r / nb if nb > 0 else r


def _check_finite(state, where):
    if not np.all(np.isfinite(state.u)):
        raise SolverDivergenceError(
            f"non-finite iterate in {where} at outer {state.outer_iters}, "
            f"inner {state.inner_iters}"
        )


def recover(b, op, config=None, variant=Variant.TVAL3, reference=None,
            filter_fn=None, callback=None):
    """Reconstruct an image from measurements ``b = A u``.

    Parameters
    ----------
    b : ndarray
        Measurement vector.
    op : MeasurementOperator
    config : SolverConfig, optional
    variant : Variant or str
    reference : ndarray, optional
        Ground truth; when given the report carries its PSNR.
    filter_fn : callable, optional
        Replacement for :func:`tvcs.nlm.nlm_filter` with the same
        ``(field, params)`` signature.
    callback : callable, optional
        Called as ``callback(state)`` after every inner step.

    Returns
    -------
    u : ndarray
        Recovered image clamped to [0, 1].
    report : RecoveryReport
        ``final_residual`` is ``|A u - b| / |b|`` for the last iterate
        before clamping.
    """
    config = config or SolverConfig()
    variant = Variant.parse(variant)
    if filter_fn is None:
        filter_fn = nlm_filter
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.n_measurements,):
        raise ValueError(f"b has shape {b.shape}, operator expects ({op.n_measurements},)")

    start = time.perf_counter()
    state = SolverState.initial(op.adjoint(b), b.size)
    if variant is Variant.TVNLR1:
        state.gamma = np.zeros_like(state.u)
        state.fu_cache = filter_fn(state.u, config.nlm_params(variant))
        state.nlm_calls += 1
    _check_finite(state, "initialisation")
    history = []

    while True:
        outer_start = state.u.copy()
        for _ in range(config.max_inner):
            before = state.u
            state.w = shrink_isotropic(grad(before), state.v, config.beta)
            u_step(state, config, op, b, variant)
            _check_finite(state, "u step")
            if callback is not None:
                callback(state)
            if _rel_change(state.u, before) < config.tol_inner:
                break
        residual = _residual(op, state.u, b)
        change = _rel_change(state.u, outer_start)
        done = (
            change < config.tol_outer
            or residual < RESIDUAL_STOP
            or state.outer_iters + 1 >= config.max_outer
        )
        update_multipliers(state, config, op, b, variant, filter_fn, refresh_cache=not done)
        _check_finite(state, "multiplier update")
        history.append((state.outer_iters, state.inner_iters, residual, change))
        log.debug("outer %d inner %d residual %.3e change %.3e",
                  state.outer_iters, state.inner_iters, residual, change)
        if done:
            break

    final_residual = _residual(op, state.u, b)
    u = np.clip(state.u, 0.0, 1.0)
    report = RecoveryReport(
        variant=variant.value,
        psnr=_psnr(reference, u) if reference is not None else None,
        outer_iters=state.outer_iters,
        total_inner_iters=state.inner_iters,
        nlm_calls=state.nlm_calls,
        final_residual=final_residual,
        wall_time=time.perf_counter() - start,
        stagnations=state.stagnations,
        history=history,
    )
    return u, report
