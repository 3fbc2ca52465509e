"""Randomized equivalence trials: engines against their brute-force oracles.

Each runner returns a list of mismatch descriptions (empty means pass) and
takes the engine as a parameter so harness sensitivity can be tested by
injecting a broken one.  Trial RNG streams derive from (seed, trial index),
so a failure message pinpoints a reproducible instance.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .barcode import Barcode
from .imaging import GrayImage
from .pipeline import logreg_loss_grad
from .persistence import cubical_persistence, rips_persistence
from .persistence.oracles import oracle_betti_cubical, oracle_rips_h0, oracle_rips_reduction
from .ulbp import PointCloud


def alive_count(barcode: Barcode, t: float) -> int:
    """Bars alive at threshold t: birth <= t < death, essential ones birth <= t."""
    return sum(1 for bar in barcode
               if bar.birth <= t and (bar.essential or t < bar.death))


def run_cubical_trials(trials: int, seed: int,
                       engine: Callable = cubical_persistence) -> list[str]:
    """Engine Betti counts vs the Euler-characteristic oracle at every threshold.

    Random integer images up to 8x8 with intensities 0..7, checked exactly.
    """
    failures = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        h, w = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        values = rng.integers(0, 8, size=(h, w)).astype(np.float64)
        img = GrayImage(w, h, values, id=f"trial{trial}")
        b0, b1 = engine(img)
        for t in range(8):
            want = oracle_betti_cubical(img, float(t))
            got = (alive_count(b0, float(t)), alive_count(b1, float(t)))
            if got != want:
                failures.append(
                    f"cubical trial {trial} (seed {seed}): {h}x{w} image, "
                    f"t={t}: engine {got} != oracle {want}")
                break
    return failures


def run_rips_trials(trials: int, seed: int,
                    engine: Callable = rips_persistence) -> list[str]:
    """Engine Rips barcodes vs the Prim MST and full-reduction oracles.

    Random clouds of 2..8 points in [0,10]^2, occasionally with a duplicated
    point; dim-0 deaths within 1e-9, dim-1 pairs exactly.
    """
    failures = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        n = int(rng.integers(2, 9))
        pts = rng.uniform(0.0, 10.0, size=(n, 2))
        if n >= 3 and rng.random() < 0.2:
            pts[1] = pts[0]  # exercise zero-length dim-0 drops
        cloud = PointCloud(tuple((float(x), float(y)) for x, y in pts), f"trial{trial}")

        b0, b1 = engine(cloud)
        got_h0 = sorted(bar.death for bar in b0 if not bar.essential)
        want_h0 = [w for w in oracle_rips_h0(cloud) if w > 0.0]
        if len(got_h0) != len(want_h0) or any(
                abs(a - b) > 1e-9 for a, b in zip(got_h0, want_h0)):
            failures.append(f"rips trial {trial} (seed {seed}): H0 deaths "
                            f"{got_h0} != MST oracle {want_h0}")
            continue

        full = oracle_rips_reduction(cloud)
        got_h1 = sorted((bar.birth, bar.death) for bar in b1 if not bar.essential)
        want_h1 = sorted(full["h1"])
        got_h1_ess = sorted(bar.birth for bar in b1 if bar.essential)
        want_h1_ess = sorted(full["h1_essential"])
        if got_h1 != want_h1 or got_h1_ess != want_h1_ess:
            failures.append(f"rips trial {trial} (seed {seed}): H1 pairs "
                            f"{got_h1}+{got_h1_ess} != reduction oracle "
                            f"{want_h1}+{want_h1_ess}")
    return failures


def run_gradient_trials(trials: int, seed: int,
                        loss_grad: Callable = logreg_loss_grad) -> list[str]:
    """Analytic logistic-regression gradient vs central finite differences.

    Step h = 1e-5; the norm-relative error must stay below 1e-5.
    """
    failures = []
    h = 1e-5
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        n, d = int(rng.integers(5, 30)), int(rng.integers(1, 10))
        X = rng.normal(size=(n, d))
        y01 = rng.integers(0, 2, size=n).astype(np.float64)
        wb = rng.normal(size=d + 1)
        l2 = float(rng.uniform(0.0, 0.1))
        _, grad = loss_grad(wb, X, y01, l2)
        fd = np.empty_like(wb)
        for i in range(len(wb)):
            hi, lo = wb.copy(), wb.copy()
            hi[i] += h
            lo[i] -= h
            fd[i] = (loss_grad(hi, X, y01, l2)[0] - loss_grad(lo, X, y01, l2)[0]) / (2 * h)
        rel = np.linalg.norm(fd - grad) / max(np.linalg.norm(grad), 1e-8)
        if rel >= 1e-5:
            failures.append(f"gradient trial {trial} (seed {seed}): "
                            f"relative error {rel:.3e} >= 1e-5")
    return failures
