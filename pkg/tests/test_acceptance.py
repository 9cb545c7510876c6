"""Acceptance suite: one test per criterion, each reporting PASS or FAIL.

Run ``pytest tests/test_acceptance.py -v`` for the verdict table at the end
of the session; add ``--runslow`` for the full-scale criterion.
"""

import time

import numpy as np
import pytest

from tvcs import data
from tvcs.gradient import grad, grad_adjoint
from tvcs.image import center_crop, load_pgm, psnr
from tvcs.nlm import NlmParams, nlm_filter
from tvcs.sensing import MeasurementOperator, build_block_gaussian, build_dense_gaussian
from tvcs.solver import (
    SolverConfig,
    SolverState,
    Variant,
    augmented_lagrangian_value,
    identity_filter,
    recover,
    shrink_isotropic,
    u_gradient,
)

from oracles import (
    brute_nlm,
    central_difference_gradient,
    projected_subgradient_tv,
    shrink_by_search,
)

ROLES = ("barbara", "leaves", "monarch", "boats")


def role_image(role, crop=None):
    img = load_pgm(data.role_path(role))
    return center_crop(img, crop) if crop else img


def stand_in_note(role):
    return f"[stand-in {data.BENCHMARK_ROLES[role]}]" if data.is_stand_in(role) else ""


def four_quadrants(n=32):
    x = np.empty((n, n))
    m = n // 2
    x[:m, :m], x[:m, m:], x[m:, :m], x[m:, m:] = 0.2, 0.8, 0.6, 0.4
    return x


def test_criterion_1_adjoints(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    ops = [build_dense_gaussian(200, 256, 1, shape=(16, 16)),
           build_block_gaussian(32, 0.3, 64, 96, 1)]
    worst = 0.0
    for op in ops:
        for _ in range(100):
            u = rng.standard_normal(op.shape)
            b = rng.standard_normal(op.n_measurements)
            gap = abs(op.forward(u) @ b - np.vdot(u, op.adjoint(b)))
            worst = max(worst, gap / (np.linalg.norm(u) * np.linalg.norm(b)))
    for n in (8, 64):
        for _ in range(100):
            u, g = rng.standard_normal((n, n)), rng.standard_normal((2, n, n))
            gap = abs(np.vdot(grad(u), g) - np.vdot(u, grad_adjoint(g)))
            worst = max(worst, gap / (np.linalg.norm(u) * np.linalg.norm(g)))
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-10 and elapsed < 5,
            f"worst relative adjoint gap {worst:.2e} (<= 1e-10), {elapsed:.2f}s (< 5s)")


def test_criterion_2_gradient(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    op = build_dense_gaussian(32, 64, 2, shape=(8, 8))
    b = op.forward(rng.random((8, 8)))
    cfg = SolverConfig(mu=8.0, beta=4.0)
    worst = 0.0
    for variant in Variant:
        for _ in range(20):
            st = SolverState.initial(rng.random((8, 8)), op.n_measurements)
            st.w = 0.1 * rng.standard_normal((2, 8, 8))
            st.v = rng.standard_normal((2, 8, 8))
            st.lam = rng.standard_normal(op.n_measurements)
            if variant is Variant.TVNLR1:
                st.gamma, st.fu_cache = rng.standard_normal((8, 8)), rng.random((8, 8))
            d = u_gradient(st, cfg, op, b, variant)
            fd = central_difference_gradient(
                lambda: augmented_lagrangian_value(st, cfg, op, b, variant), st.u)
            worst = max(worst, np.linalg.norm(d - fd) / np.linalg.norm(d))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-5 and elapsed < 30,
            f"worst relative finite-difference error {worst:.2e} (<= 1e-5), {elapsed:.2f}s (< 30s)")


def test_criterion_3_shrinkage(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        beta = rng.uniform(0.5, 40)
        du, v = rng.standard_normal(2) * rng.uniform(0.01, 2), rng.standard_normal(2)
        got = shrink_isotropic(du.reshape(2, 1, 1), v.reshape(2, 1, 1), beta).ravel()
        worst = max(worst, np.abs(got - shrink_by_search(du, v, beta)).max())
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-6 and elapsed < 5,
            f"worst deviation from numerical minimiser {worst:.2e} (<= 1e-6), {elapsed:.2f}s (< 5s)")


def test_criterion_4_nlm(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    p = NlmParams(2, 1, 0.19)
    worst = 0.0
    for _ in range(5):
        f = rng.standard_normal((8, 8)) * 0.5
        worst = max(worst, np.abs(nlm_filter(f, p) - brute_nlm(f, 2, 1, 0.19)).max())
    const_gap = max(np.abs(nlm_filter(np.full((8, 8), c), q) - c).max()
                    for c in (-0.7, 0.0, 0.31) for q in (p, NlmParams()))
    elapsed = time.perf_counter() - t0
    verdict(4, worst <= 1e-12 and const_gap <= 1e-12 and elapsed < 5,
            f"brute-force gap {worst:.2e}, constant-field gap {const_gap:.2e} (<= 1e-12), "
            f"{elapsed:.2f}s (< 5s)")


def test_criterion_5_exact_regime(verdict):
    t0 = time.perf_counter()
    x = np.random.default_rng(4).random((32, 32))
    op = MeasurementOperator.identity(x.shape)
    _, rep_id = recover(op.forward(x), op, SolverConfig(), "tval3", reference=x)

    phantom = four_quadrants()
    dense = build_dense_gaussian(512, 1024, 0, shape=phantom.shape)
    b = dense.forward(phantom)
    _, rep = recover(b, dense, SolverConfig(), "tval3", reference=phantom)
    ref, _ = projected_subgradient_tv(dense.matrix, b, phantom.shape, iterations=100_000, scale=0.1)
    ref_psnr = psnr(phantom, np.clip(ref, 0, 1))
    elapsed = time.perf_counter() - t0
    ok = (rep_id.psnr > 60 and rep.psnr >= 40 and abs(rep.psnr - ref_psnr) <= 1
          and elapsed < 120)
    verdict(5, ok, f"identity {rep_id.psnr:.2f} dB (> 60), phantom TVAL3 {rep.psnr:.2f} dB (>= 40), "
                   f"subgradient reference {ref_psnr:.2f} dB (within 1 dB), {elapsed:.1f}s (< 120s)")


def test_criterion_6_desk_trend(verdict):
    t0 = time.perf_counter()
    gains, lines = [], []
    for role in ROLES:
        x = role_image(role, 128)
        scores = {v: [] for v in ("tval3", "nllm")}
        for seed in range(3):
            op = build_block_gaussian(32, 0.3, 128, 128, seed)
            b = op.forward(x)
            for variant in scores:
                scores[variant].append(recover(b, op, SolverConfig(), variant, reference=x)[1].psnr)
        t, n = np.mean(scores["tval3"]), np.mean(scores["nllm"])
        gains.append(n - t)
        lines.append(f"{role}{stand_in_note(role)} {t:.2f}->{n:.2f}")
    elapsed = time.perf_counter() - t0
    mean_gain, wins = float(np.mean(gains)), sum(g >= 0 for g in gains)
    verdict(6, mean_gain >= 0.3 and wins >= 3 and elapsed < 1200,
            f"mean NLLM gain {mean_gain:+.2f} dB (>= +0.3), NLLM >= TVAL3 on {wins}/4 (>= 3), "
            f"{elapsed:.0f}s (< 1200s); " + ", ".join(lines))


@pytest.mark.slow
def test_criterion_7_full_scale(verdict):
    if data.is_stand_in("boats"):
        verdict(7, False, "needs the real Boats image at $TVCS_IMAGE_DIR/boats.pgm", skip=True)
    t0 = time.perf_counter()
    x = role_image("boats")
    op = build_block_gaussian(32, 0.3, *x.shape, 0)
    _, rep = recover(op.forward(x), op, SolverConfig(), "nllm", reference=x)
    elapsed = time.perf_counter() - t0
    verdict(7, 31.8 <= rep.psnr <= 35.8 and elapsed < 3600,
            f"Boats NLLM {rep.psnr:.2f} dB (in [31.8, 35.8]), {elapsed:.0f}s (< 3600s)")


def test_criterion_8_cost(verdict):
    x = role_image("boats")
    op = build_block_gaussian(32, 0.15, *x.shape, 0)
    b = op.forward(x)
    reports = {v: recover(b, op, SolverConfig(), v, reference=x)[1] for v in ("tval3", "tvnlr1", "nllm")}
    counters = all(reports[v].nlm_calls == k * reports[v].outer_iters
                   for v, k in (("tval3", 0), ("tvnlr1", 1), ("nllm", 2)))
    t = {v: r.wall_time for v, r in reports.items()}
    ordered = t["tval3"] < t["nllm"] < t["tvnlr1"]
    calls = ", ".join(f"{v} {r.nlm_calls} calls/{r.outer_iters} outer" for v, r in reports.items())
    times = ", ".join(f"{v} {s:.1f}s" for v, s in t.items())
    verdict(8, counters,
            f"counter contract {'holds' if counters else 'broken'} ({calls}); wall-time ordering "
            f"TVAL3 < NLLM < TVNLR1 {'met' if ordered else 'not met (soft)'} ({times}) on boats{stand_in_note('boats')}")


def test_criterion_9_identity_filter(verdict):
    t0 = time.perf_counter()
    x = role_image("barbara", 64)
    op = build_block_gaussian(32, 0.3, 64, 64, 5)
    b = op.forward(x)
    runs = {}
    for variant, fn in (("tval3", None), ("nllm", identity_filter)):
        seq = []
        u, _ = recover(b, op, SolverConfig(), variant, filter_fn=fn,
                       callback=lambda s: seq.append(s.u.copy()))
        runs[variant] = (seq, u)
    (s1, u1), (s2, u2) = runs["tval3"], runs["nllm"]
    same = len(s1) == len(s2) and all(np.array_equal(a, c) for a, c in zip(s1, s2))
    same = same and np.array_equal(u1, u2)
    elapsed = time.perf_counter() - t0
    verdict(9, same and elapsed < 60,
            f"{len(s1)} inner iterates {'bitwise identical' if same else 'differ'}, "
            f"{elapsed:.1f}s (< 60s)")
