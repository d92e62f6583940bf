"""Discrete frame-bound formula and the continuous family ``{D^t g}_{t >= 0}``."""

from __future__ import annotations

import csv
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._validation import as_vector, check_int
from .carleson import canonical_vector, carleson_delta
from .frame_ops import ExponentSet, bounds_for


def delta_frame_bound(delta):
    """``2 (1 - 2 log delta) / delta**4`` for a Carleson constant in (0, 1]."""
    delta = float(delta)
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return 2.0 * (1.0 - 2.0 * np.log(delta)) / delta**4


@dataclass
class SandwichReport:
    A_hat: float
    B_hat: float
    delta_n: float
    Delta: float
    window: tuple
    contained: bool
    n: int
    K: int
    lambda_tag: str
    reference_delta: Optional[float] = None
    reference_window: Optional[tuple] = None

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["reference_window"] = None if self.reference_window is None else list(self.reference_window)
        return d


def discrete_sandwich_check(spec, n, K, lam=None, tol=0.0):
    """Do the truncated bounds lie in ``[1/Delta, Delta]`` built from ``delta_n``?

    ``delta_n`` can only decrease as points are added, so this window is never
    wider than the one for the infinite sequence. When more points are
    materialized than ``n``, the window from the full prefix is reported too.
    """
    n = check_int(n, "n", 1)
    lam = ExponentSet.naturals(K) if lam is None else lam
    delta_n = carleson_delta(spec, n).delta_n
    Delta = delta_frame_bound(delta_n)
    est = bounds_for(spec, lam, 0, n, K)
    lo, hi = 1.0 / Delta, Delta
    contained = bool(lo - tol <= est.A_hat and est.B_hat <= hi + tol)
    ref_delta = ref_window = None
    if len(spec) > n:
        ref_delta = carleson_delta(spec).delta_n
        ref_D = delta_frame_bound(ref_delta)
        ref_window = (1.0 / ref_D, ref_D)
    return SandwichReport(est.A_hat, est.B_hat, delta_n, Delta, (lo, hi), contained, n, K,
                          lam.tag, ref_delta, ref_window)


def continuous_bounds(spec, n=None):
    """Lower and upper bounds of the continuous family on an increasing real spectrum.

    lower = ``(z0**2 - 1) / (2 log z0) / Delta``, upper = ``Delta`` with
    ``z0`` the smallest point and ``Delta`` from ``delta_n``.
    """
    if not (spec.real_positive and spec.strictly_increasing_modulus):
        raise ValueError("continuous bounds need an increasing positive real spectrum")
    n = len(spec) if n is None else check_int(n, "n", 1)
    Delta = delta_frame_bound(carleson_delta(spec, n).delta_n)
    z0 = float(spec.r[0])
    return _middle_factor(z0) / Delta, Delta


def _middle_factor(z0):
    # (z0^2 - 1) / (2 log z0), evaluated stably near z0 = 1
    x = np.log(z0)
    return float(np.expm1(2 * x) / (2 * x))


@dataclass
class EnergyValue:
    value: float
    tail_bound: float
    dt: float
    T: float
    rule: str
    n_samples: int


def _support(spec, f):
    f = as_vector(f, "f")
    if f.size > len(spec):
        raise ValueError("f has more coordinates than the spectrum")
    idx = np.nonzero(f)[0]
    return f, idx


def default_T(spec, f):
    _, idx = _support(spec, f)
    r_max = float(spec.r[idx].max()) if idx.size else float(spec.r[0])
    return 200.0 / -np.log(r_max)


def riemann_energy(spec, f, dt=1e-3, T=None, rule="trapezoid"):
    """Uniform-grid quadrature of ``int_0^T |<f, D^t g>|**2 dt``.

    ``rule="left"`` is the left-endpoint sum ``sum_{m dt < T} dt |h(m dt)|**2``;
    ``"trapezoid"`` adds the endpoint correction ``dt/2 (|h(M dt)|**2 - |h(0)|**2)``.
    Both are evaluated exactly through geometric series: with
    ``h(t) = sum_j beta_j exp(t L_j)``, ``beta_j = f_j g_j`` and
    ``L_j = log r_j - i theta_j``, each pair (i, j) contributes
    ``beta_i conj(beta_j) sum_m q**m`` with ``q = exp(dt (L_i + conj(L_j)))``.
    """
    if rule not in ("left", "trapezoid"):
        raise ValueError(f"unknown rule {rule!r}")
    dt = float(dt)
    if not 0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01]")
    f, idx = _support(spec, f)
    T = default_T(spec, f) if T is None else float(T)
    if T <= 0:
        raise ValueError("T must be positive")
    M = int(np.ceil(T / dt))
    if idx.size == 0:
        return EnergyValue(0.0, 0.0, dt, T, rule, M)
    g = canonical_vector(spec).entries[idx]
    beta = f[idx] * g
    L = np.log(spec.r[idx]) - 1j * spec.theta[idx]
    E = L[:, None] + np.conj(L)[None, :]
    W = np.outer(beta, np.conj(beta))
    geo = np.expm1(M * dt * E) / np.expm1(dt * E)
    value = dt * np.real(np.sum(W * geo))
    if rule == "trapezoid":
        h0 = abs(np.sum(beta)) ** 2
        hM = abs(np.sum(beta * np.exp(M * dt * L))) ** 2
        value += 0.5 * dt * (hM - h0)
    r_max = float(spec.r[idx].max())
    f2 = float(np.sum(np.abs(f[idx]) ** 2))
    g2 = float(np.sum(g * g))
    tail = f2 * g2 * r_max ** (2 * T) / (-2 * np.log(r_max))
    if tail > 1e-6 * value:
        warnings.warn(f"tail bound {tail:.3e} exceeds 1e-6 of the quadrature value",
                      RuntimeWarning, stacklevel=2)
    return EnergyValue(float(value), float(tail), dt, T, rule, M)


def energy_samples(spec, f, dt, T, chunk=1 << 16):
    """``(t_m, |<f, D^{t_m} g>|**2)`` for ``t_m = m dt < T``, by direct evaluation."""
    f, idx = _support(spec, f)
    M = int(np.ceil(float(T) / float(dt)))
    t = np.arange(M) * float(dt)
    if idx.size == 0:
        return t, np.zeros(M)
    beta = f[idx] * canonical_vector(spec).entries[idx]
    L = np.log(spec.r[idx]) - 1j * spec.theta[idx]
    out = np.empty(M)
    for lo in range(0, M, chunk):
        tt = t[lo:lo + chunk]
        out[lo:lo + chunk] = np.abs(np.exp(np.outer(tt, L)) @ beta) ** 2
    return t, out


def write_samples_csv(path, t, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "energy_density"])
        for a, b in zip(t, values):
            w.writerow([repr(float(a)), repr(float(b))])


@dataclass
class ContinuousBoundReport:
    delta_used: float
    Delta: float
    lower_const: float
    z0: float
    per_vector_energies: list = field(default_factory=list)
    tol: float = 1e-6
    all_within: bool = True

    def to_dict(self):
        return asdict(self)


def continuous_report(spec, vectors, n=None, dt=1e-3, T=None, tol=1e-6, tags=None,
                      rule="trapezoid"):
    """Check ``lower ||f||^2 <= energy <= Delta ||f||^2`` for each vector."""
    n = len(spec) if n is None else n
    lower, upper = continuous_bounds(spec, n)
    delta_used = carleson_delta(spec, n).delta_n
    entries = []
    ok_all = True
    for i, f in enumerate(vectors):
        f = as_vector(f, "f")
        if f.size > n:
            raise ValueError(f"vector {i} has support beyond the first {n} coordinates")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            e = riemann_energy(spec, f, dt, T, rule)
        norm2 = float(np.sum(np.abs(f) ** 2))
        slack = tol + e.tail_bound
        ok = lower * norm2 - slack <= e.value <= upper * norm2 + slack
        ok_all &= ok
        entries.append({
            "f_tag": tags[i] if tags else f"vector-{i}",
            "riemann_value": e.value,
            "norm_sq": norm2,
            "ratio": e.value / norm2 if norm2 else None,
            "T_cut": e.T,
            "dt": e.dt,
            "rule": e.rule,
            "tail_bound": e.tail_bound,
            "within": bool(ok),
        })
    return ContinuousBoundReport(delta_used, upper, lower, float(spec.r[0]), entries, tol,
                                 bool(ok_all))
