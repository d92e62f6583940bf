"""Truncated synthesis/analysis operators of ``{D^lambda g}`` and frame bounds.

Rows of a synthesis matrix are spectrum coordinates ``j`` (starting at
``row_offset``), columns are exponents ``lambda_k``; entry ``(j, k)`` is
``z_j**lambda_k * sqrt(1 - |z_j|**2)`` with the power taken on the stored
angle representative in ``[-pi, pi)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import DEFAULT_TOL, as_vector, check_int
from .carleson import DiskPoint, canonical_vector

# Above this many matrix entries bounds come from a chunked Gram matrix.
SVD_ENTRY_LIMIT = 4_000_000
_CHUNK = 1 << 16


class RankDeficientError(ValueError):
    def __init__(self, message, sigma_min):
        super().__init__(message)
        self.sigma_min = sigma_min


@dataclass(frozen=True, eq=False)
class ExponentSet:
    """Sorted finite prefix of an exponent set ``Lambda``.

    ``kind`` is ``"jittered_arithmetic"`` (then ``N`` and ``jitters`` are set and
    ``values == N * k + jitters``) or ``"explicit"``.
    """

    values: np.ndarray
    kind: str = "explicit"
    N: Optional[int] = None
    jitters: Optional[np.ndarray] = None
    tag: str = "explicit"

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=1)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("an exponent set needs at least one value")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("exponents must be finite and nonnegative")
        if np.any(np.diff(values) <= 0):
            raise ValueError("exponents must be strictly increasing")
        if self.kind == "jittered_arithmetic":
            N = check_int(self.N, "N", 1)
            jit = np.array(self.jitters, dtype=float)
            if jit.shape != values.shape:
                raise ValueError("one jitter per exponent is required")
            if np.any(jit < 0) or np.any(jit >= N):
                raise ValueError(f"jitters must lie in [0, {N})")
            if not np.allclose(values, N * np.arange(values.size) + jit, rtol=0, atol=0):
                raise ValueError("values do not equal N*k + j_k")
            jit.setflags(write=False)
            object.__setattr__(self, "jitters", jit)
        elif self.kind != "explicit":
            raise ValueError(f"unknown exponent kind {self.kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def jittered(cls, N, count, jitters=None, rule="random", seed=0):
        """``lambda_k = N k + j_k``.

        ``jitters`` may be given explicitly; otherwise ``rule`` picks them:
        ``"zero"``, ``"random"`` (uniform on [0, N)), ``"integer"`` (uniform on
        {0, ..., N-1}) or ``"max"`` (just below N). Random draws are prefix
        consistent: the first m jitters do not depend on ``count``.
        """
        N = check_int(N, "N", 1)
        count = check_int(count, "count", 1)
        if jitters is None:
            jitters = _jitter_rule(rule, N, count, seed)
            tag = f"arith:N={N},jitter={rule}" + (f",seed={seed}" if rule in ("random", "integer") else "")
        else:
            jitters = np.asarray(jitters, dtype=float)[:count]
            if jitters.size < count:
                raise ValueError(f"need {count} jitters, got {jitters.size}")
            tag = f"arith:N={N},jitter=explicit"
        values = N * np.arange(count, dtype=float) + jitters
        return cls(values, "jittered_arithmetic", N, jitters, tag)

    @classmethod
    def naturals(cls, count, N=1):
        return cls.jittered(N, count, rule="zero")

    @classmethod
    def explicit(cls, values, tag="explicit"):
        return cls(np.asarray(values, dtype=float), "explicit", tag=tag)

    @classmethod
    def dyadic(cls, count=60):
        return cls(2.0 ** np.arange(count), "explicit", tag="dyadic")

    @property
    def count(self):
        return self.values.size

    @property
    def is_integer(self):
        return bool(np.all(self.values == np.round(self.values)))

    def prefix(self, K):
        K = check_int(K, "K", 1)
        if K > self.count:
            raise ValueError(f"K={K} exceeds the materialized count {self.count}")
        if self.kind == "jittered_arithmetic":
            return ExponentSet(self.values[:K], self.kind, self.N, self.jitters[:K], self.tag)
        return ExponentSet(self.values[:K], self.kind, tag=self.tag)

    def to_dict(self, max_values=None):
        vals = self.values if max_values is None else self.values[:max_values]
        out = {"kind": self.kind, "tag": self.tag, "materialized_count": self.count,
               "values": [float(v) for v in vals]}
        if self.kind == "jittered_arithmetic":
            out["N"] = self.N
        return out


def _jitter_rule(rule, N, count, seed):
    if rule == "zero":
        return np.zeros(count)
    if rule == "max":
        return np.full(count, np.nextafter(float(N), 0.0))
    u = np.random.default_rng(seed).random(count)
    if rule == "random":
        return np.minimum(N * u, np.nextafter(float(N), 0.0))
    if rule == "integer":
        return np.floor(N * u)
    raise ValueError(f"unknown jitter rule {rule!r}")


@dataclass(frozen=True, eq=False)
class SynthesisMatrix:
    entries: np.ndarray
    row_offset: int
    spectrum_tag: str = ""
    lambda_tag: str = ""

    @property
    def J_rows(self):
        return self.entries.shape[0]

    @property
    def K_cols(self):
        return self.entries.shape[1]

    def header(self):
        return {
            "row_offset": self.row_offset,
            "J_rows": self.J_rows,
            "K_cols": self.K_cols,
            "spectrum": self.spectrum_tag,
            "lambda": self.lambda_tag,
        }

    def to_csv(self, path):
        """One line per spectrum index; each entry as adjacent re, im columns."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j"] + [f"{p}{k}" for k in range(self.K_cols) for p in ("re", "im")])
            for i, row in enumerate(self.entries):
                pairs = np.column_stack([row.real, row.imag]).ravel()
                writer.writerow([self.row_offset + i] + [repr(float(v)) for v in pairs])
        with open(str(path) + ".json", "w") as fh:
            json.dump(self.header(), fh, sort_keys=True, indent=2)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        offsets = [int(r[0]) for r in rows]
        data = np.array([[float(v) for v in r[1:]] for r in rows])
        entries = data[:, 0::2] + 1j * data[:, 1::2]
        return cls(entries, offsets[0] if offsets else 0)


@dataclass
class FrameBoundEstimate:
    """Squared extreme singular values of a truncated synthesis matrix.

    ``K_cols`` is None when the estimate covers all columns (closed form).
    """

    A_hat: float
    B_hat: float
    J_rows: int
    K_cols: Optional[int]
    converged: bool = False
    history: list = field(default_factory=list)
    row_offset: int = 0
    method: str = "svd"

    @property
    def condition(self):
        return np.sqrt(self.B_hat / self.A_hat) if self.A_hat > 0 else np.inf

    def to_dict(self):
        return {
            "A_hat": self.A_hat,
            "B_hat": self.B_hat,
            "J_rows": self.J_rows,
            "K_cols": self.K_cols,
            "row_offset": self.row_offset,
            "converged": self.converged,
            "method": self.method,
            "history": [[int(k), float(a)] for k, a in self.history],
        }


def power(z, lam):
    """``z**lam = exp(lam * (log r + i theta))`` on the stored angle."""
    if not isinstance(z, DiskPoint):
        z = DiskPoint.from_complex(z)
    lam = float(lam)
    if lam < 0:
        raise ValueError("exponent must be nonnegative")
    return complex(np.exp(lam * (np.log(z.r) + 1j * z.theta)))


def _block(log_z, g, lam_values):
    return np.exp(np.outer(log_z, lam_values)) * g[:, None]


def _rows(spec, row_offset, J_rows):
    row_offset = check_int(row_offset, "row_offset", 0)
    J_rows = check_int(J_rows, "J_rows", 1)
    if row_offset + J_rows > len(spec):
        raise ValueError(
            f"rows {row_offset}..{row_offset + J_rows - 1} exceed the spectrum length {len(spec)}"
        )
    sl = slice(row_offset, row_offset + J_rows)
    log_z = spec.log_z[sl]
    g = canonical_vector(spec).entries[sl]
    if spec.real_positive:
        log_z = log_z.real
    return log_z, g


def _cols(lam, K_cols):
    K_cols = check_int(K_cols, "K_cols", 1)
    if K_cols > lam.count:
        raise ValueError(f"K_cols={K_cols} exceeds the materialized exponent count {lam.count}")
    return lam.values[:K_cols]


def synthesis_matrix(spec, lam, row_offset=0, J_rows=None, K_cols=None):
    if J_rows is None:
        J_rows = len(spec) - row_offset
    if K_cols is None:
        K_cols = lam.count
    log_z, g = _rows(spec, row_offset, J_rows)
    entries = _block(log_z, g, _cols(lam, K_cols)).astype(complex)
    return SynthesisMatrix(entries, row_offset, spec.generator_tag, lam.tag)


def synthesis_gram(spec, lam, row_offset=0, J_rows=None, K_cols=None, start=0, chunk=_CHUNK):
    """``Phi Phi^*`` over columns ``start <= k < K_cols``, accumulated in chunks."""
    if J_rows is None:
        J_rows = len(spec) - row_offset
    if K_cols is None:
        K_cols = lam.count
    log_z, g = _rows(spec, row_offset, J_rows)
    values = _cols(lam, K_cols)
    dtype = float if np.isrealobj(log_z) else complex
    G = np.zeros((J_rows, J_rows), dtype=dtype)
    for lo in range(start, K_cols, chunk):
        P = _block(log_z, g, values[lo:lo + chunk])
        G += P @ P.conj().T
    return G


def _gram_bounds(G):
    w = np.linalg.eigvalsh(G)
    return max(float(w[0]), 0.0), float(w[-1])


def frame_bounds(m):
    """``(sigma_min**2, sigma_max**2)`` of the truncated synthesis matrix."""
    if m.entries.size == 0:
        raise ValueError("empty synthesis matrix")
    s = np.linalg.svd(m.entries, compute_uv=False)
    A = float(s[-1] ** 2) if m.J_rows <= m.K_cols else 0.0
    B = float(s[0] ** 2)
    return FrameBoundEstimate(A, B, m.J_rows, m.K_cols, False, [(m.K_cols, A)], m.row_offset, "svd")


def bounds_for(spec, lam, row_offset=0, J_rows=None, K_cols=None):
    """Frame bounds of a truncation, choosing SVD or Gram by size."""
    if J_rows is None:
        J_rows = len(spec) - row_offset
    if K_cols is None:
        K_cols = lam.count
    if J_rows * K_cols <= SVD_ENTRY_LIMIT:
        return frame_bounds(synthesis_matrix(spec, lam, row_offset, J_rows, K_cols))
    A, B = _gram_bounds(synthesis_gram(spec, lam, row_offset, J_rows, K_cols))
    return FrameBoundEstimate(A, B, J_rows, K_cols, False, [(K_cols, A)], row_offset, "gram")


def arithmetic_frame_bounds(spec, N, row_offset=0, J_rows=None):
    """All-column bounds of ``{D^{Nk} g}_{k>=0}`` from the closed-form Gram.

    ``sum_k (z_i conj(z_j))**(N k) = 1 / (1 - (z_i conj(z_j))**N)``.
    """
    N = check_int(N, "N", 1)
    if J_rows is None:
        J_rows = len(spec) - row_offset
    log_z, g = _rows(spec, row_offset, J_rows)
    L = N * (log_z[:, None] + np.conj(log_z)[None, :])
    G = np.outer(g, g) / -np.expm1(L)
    A, B = _gram_bounds(G)
    return FrameBoundEstimate(A, B, J_rows, None, True, [], row_offset, "closed_form")


def frame_bounds_converged(
    spec,
    lam,
    J_rows,
    K_start=64,
    growth_factor=2.0,
    rel_tol=0.05,
    row_offset=0,
    max_cols=None,
    abs_floor=None,
    return_gram=False,
):
    """Grow the column count until ``A_hat`` stabilizes.

    ``A_hat`` is nondecreasing in the number of columns, so the run stops once
    one growth step moves it by less than ``rel_tol`` (relative to
    ``max(A_hat, abs_floor)``; the floor defaults to ``1e-14 * B_hat`` so
    that a numerically singular system settles at zero instead of chasing
    rounding noise) and no squared row norm grows by more than ``rel_tol``.
    If the cap is reached first ``converged`` is False.
    """
    if growth_factor <= 1:
        raise ValueError("growth_factor must exceed 1")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    cap = lam.count if max_cols is None else min(check_int(max_cols, "max_cols", 1), lam.count)
    K = min(check_int(K_start, "K_start", 1), cap)
    G = synthesis_gram(spec, lam, row_offset, J_rows, K)
    A, B = _gram_bounds(G)
    history = [(K, A)]
    converged = False
    while K < cap:
        K_next = min(max(int(np.ceil(K * growth_factor)), K + 1), cap)
        diag = np.real(np.diag(G)).copy()
        G = G + synthesis_gram(spec, lam, row_offset, J_rows, K_next, start=K)
        A_next, B = _gram_bounds(G)
        history.append((K_next, A_next))
        floor = 1e-14 * B if abs_floor is None else abs_floor
        # row norms must have settled too, or a tiny A_hat can look stable
        row_drift = np.max((np.real(np.diag(G)) - diag) / np.real(np.diag(G)))
        drift = max(abs(A_next - A) / max(A, floor), row_drift)
        K, A = K_next, A_next
        if drift < rel_tol:
            converged = True
            break
    if J_rows * K <= SVD_ENTRY_LIMIT:
        # refine the final pair with an SVD of the explicit matrix
        est = frame_bounds(synthesis_matrix(spec, lam, row_offset, J_rows, K))
        A, B = est.A_hat, est.B_hat
        history[-1] = (K, A)
        method = "svd"
    else:
        method = "gram"
    est = FrameBoundEstimate(A, B, J_rows, K, converged, history, row_offset, method)
    return (est, G) if return_gram else est


def analysis_apply(spec, lam, f, K, row_offset=0):
    """Samples ``<f, D^{lambda_k} g>`` for ``k < K``."""
    f = as_vector(f, "f")
    m = synthesis_matrix(spec, lam, row_offset, f.size, K)
    return m.entries.conj().T @ f


def reconstruct(samples, m, rcond=None):
    """Minimal-norm least-squares preimage of ``samples`` under the analysis map."""
    samples = as_vector(samples, "samples")
    if samples.size != m.K_cols:
        raise ValueError(f"expected {m.K_cols} samples, got {samples.size}")
    if m.J_rows > m.K_cols:
        raise RankDeficientError("fewer samples than coordinates", 0.0)
    U, s, Vh = np.linalg.svd(m.entries, full_matrices=False)
    rcond = DEFAULT_TOL if rcond is None else rcond
    if s[-1] <= rcond * s[0]:
        raise RankDeficientError(
            f"synthesis matrix is rank deficient (sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e})",
            float(s[-1]),
        )
    # analysis = Phi^H = V S U^H, so its pseudo-inverse is U S^-1 V^H
    return U @ ((Vh @ samples) / s)
