"""Quantities attached to an exponent set: Muntz-Szasz sums, theta, density."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_int
from .frame_ops import ExponentSet

DIVERGENT_ANALYTIC = "divergent_analytic"
DIVERGENT_NUMERIC = "divergent_numeric_threshold"
INCONCLUSIVE = "inconclusive"


def _prefix_values(lam, K):
    K = lam.count if K is None else check_int(K, "K", 1)
    if K > lam.count:
        raise ValueError(f"K={K} exceeds the materialized count {lam.count}")
    return lam.values[:K]


def ms_sum(lam, K=None, threshold=10.0):
    """Partial Muntz-Szasz sum ``sum lambda / (lambda**2 + 1)`` and a verdict.

    A partial sum can never certify convergence, so the verdict is one of
    divergent (analytically for jittered arithmetic sets, which compare with
    the harmonic series), divergent past ``threshold``, or inconclusive.
    """
    v = _prefix_values(lam, K)
    partial = float(np.sum(v / (v * v + 1.0)))
    if lam.kind == "jittered_arithmetic":
        verdict = DIVERGENT_ANALYTIC
    elif partial > threshold:
        verdict = DIVERGENT_NUMERIC
    else:
        verdict = INCONCLUSIVE
    return partial, verdict


@dataclass(frozen=True)
class ThetaValue:
    value: float
    tail_bound: Optional[float]

    @property
    def upper(self):
        return self.value + (self.tail_bound or 0.0)


def theta(lam, z, K=None):
    """Partial sum of ``sum_k z**lambda_k`` with ``0**0 = 1``.

    For jittered arithmetic sets the remainder is bounded by
    ``z**(N K) / (1 - z**N)`` because ``lambda_k >= N k``.
    """
    z = float(z)
    if not 0.0 <= z < 1.0:
        raise ValueError(f"z must lie in [0, 1), got {z}")
    v = _prefix_values(lam, K)
    if z == 0.0:
        value = float(np.sum(v == 0.0))
    else:
        value = float(np.sum(np.exp(v * np.log(z))))
    tail = None
    if lam.kind == "jittered_arithmetic":
        N, n = lam.N, v.size
        tail = 0.0 if z == 0.0 else float(z ** (N * n) / (1.0 - z**N))
    return ThetaValue(value, tail)


def theta_sup_check(lam, grid=None, K=None):
    """max over the grid of ``(1 - z) * theta(z)``."""
    if grid is None:
        grid = np.concatenate([[0.0], 1.0 - 2.0 ** -np.arange(1, 30)])
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    return float(max((1.0 - z) * theta(lam, z, K).value for z in grid))


def gamma_const(spec, lam, J, K=None, include_tail=False):
    """``sqrt((1 - z**2) * theta(z**2))`` at ``z = z_{J-1}``."""
    if not spec.real_positive:
        raise ValueError("gamma is defined for real positive spectra")
    J = check_int(J, "J", 1)
    if J > len(spec):
        raise ValueError(f"J={J} exceeds the spectrum length {len(spec)}")
    z = float(spec.r[J - 1])
    th = theta(lam, z * z, K)
    value = th.upper if include_tail else th.value
    return float(np.sqrt((1.0 - z * z) * value))


@dataclass
class DensityReport:
    ms_partial_sums: list
    ms_verdict: str
    L_estimate: float
    mu_grid: list
    t_grid: list
    t_max: float
    per_mu_sup: list
    table: list
    lambda_tag: str = ""
    warnings: list = None

    def to_dict(self):
        return {
            "lambda": self.lambda_tag,
            "L_estimate": self.L_estimate,
            "ms_partial_sums": self.ms_partial_sums,
            "ms_verdict": self.ms_verdict,
            "mu_grid": self.mu_grid,
            "t_grid": self.t_grid,
            "t_max": self.t_max,
            "per_mu_sup": self.per_mu_sup,
            "table": self.table,
            "warnings": self.warnings or [],
        }


DEFAULT_MU_GRID = (2.0, 4.0, 8.0, 16.0)
DEFAULT_T_GRID = tuple(np.geomspace(1e3, 1e4, 41))


def block_sums(lam, mu, t_grid):
    """``sum_{lambda in [t, mu t]} 1/lambda`` for each t (zero exponents skipped)."""
    v = lam.values
    pos = v > 0
    inv = np.where(pos, 1.0 / np.where(pos, v, 1.0), 0.0)
    csum = np.concatenate([[0.0], np.cumsum(inv)])
    t = np.asarray(t_grid, dtype=float)
    lo = np.searchsorted(v, t, side="left")
    hi = np.searchsorted(v, mu * t, side="right")
    return csum[hi] - csum[lo]


def log_block_density(lam, mu_grid=DEFAULT_MU_GRID, t_grid=DEFAULT_T_GRID, ms_threshold=10.0):
    """Finite-grid estimate of the logarithmic block density.

    limsup over t becomes a max over ``t_grid`` and the infimum over mu a min
    over ``mu_grid``; the full (mu, t, block sum) table is kept.
    """
    mu_grid = [float(m) for m in mu_grid]
    t_grid = [float(t) for t in t_grid]
    if not mu_grid or any(m <= 1 for m in mu_grid):
        raise ValueError("mu values must exceed 1")
    if not t_grid or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t grid must be nonempty and increasing")
    notes = []
    reach = max(mu_grid) * t_grid[-1]
    if lam.values[-1] < reach:
        msg = (f"materialized exponents end at {lam.values[-1]:.6g} but blocks reach "
               f"{reach:.6g}; block sums are truncated")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    table, per_mu_sup = [], []
    for mu in mu_grid:
        sums = block_sums(lam, mu, t_grid)
        per_mu_sup.append(float(sums.max()))
        table.extend([mu, t, float(s)] for t, s in zip(t_grid, sums))
    L = min(s / np.log(mu) for s, mu in zip(per_mu_sup, mu_grid))
    partial, verdict = ms_sum(lam, threshold=ms_threshold)
    checkpoints = sorted({min(c, lam.count) for c in (10, 100, 1000, 10000, lam.count)})
    ms_partials = [ms_sum(lam, c, ms_threshold)[0] for c in checkpoints]
    return DensityReport(
        ms_partial_sums=ms_partials,
        ms_verdict=verdict,
        L_estimate=float(L),
        mu_grid=mu_grid,
        t_grid=t_grid,
        t_max=t_grid[-1],
        per_mu_sup=per_mu_sup,
        table=table,
        lambda_tag=lam.tag,
        warnings=notes,
    )


def _block_counts(lam, N, k_max):
    edges = N * np.arange(k_max + 2, dtype=float)
    idx = np.searchsorted(lam.values, edges, side="left")
    return np.diff(idx)


def block_count_check(lam, N, M, k_max):
    """Every block ``[N k, N (k+1))``, ``k <= k_max``, holds 1 to M-1 points."""
    N = check_int(N, "N", 1)
    M = check_int(M, "M", 1)
    k_max = check_int(k_max, "k_max", 0)
    if lam.values[-1] < N * (k_max + 1) and lam.kind == "explicit":
        warnings.warn("exponents are not materialized past the last block", RuntimeWarning,
                      stacklevel=2)
    counts = _block_counts(lam, N, k_max)
    return bool(np.all((counts >= 1) & (counts < M)))


def select_subsequence(lam, N, k_max):
    """Smallest element of each block ``[N k, N (k+1))``, as a jittered set."""
    N = check_int(N, "N", 1)
    k_max = check_int(k_max, "k_max", 0)
    edges = N * np.arange(k_max + 2, dtype=float)
    idx = np.searchsorted(lam.values, edges, side="left")
    counts = np.diff(idx)
    if np.any(counts == 0):
        k = int(np.argmax(counts == 0))
        raise ValueError(f"block [{N * k}, {N * (k + 1)}) contains no exponent")
    picked = lam.values[idx[:-1]]
    jitters = picked - N * np.arange(k_max + 1)
    return ExponentSet.jittered(N, k_max + 1, jitters=jitters)
