"""Finite-truncation certificates for frames of the form ``{D^lambda g}``.

The pieces fit together as follows. ``perturbation_J`` finds a cutoff J past
which a jittered system is an outer frame (its tail perturbation is smaller
than the lower bound of the arithmetic system). ``extension_step`` then adds
coordinate ``J - 1`` back by producing an explicit preimage of ``delta_{J-1}``,
and ``extension_chain`` repeats this down to the first coordinate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._validation import DEFAULT_TOL, check_int, wrap_angle
from .carleson import canonical_vector, tail_defect
from .exponents import gamma_const
from .frame_ops import (
    arithmetic_frame_bounds,
    bounds_for,
    frame_bounds_converged,
    synthesis_gram,
    synthesis_matrix,
)

EPS_FRACTION = 0.9
KERNEL_TOL = 1e-10
DEGENERACY_TOL = 1e-12


class CertificationError(RuntimeError):
    pass


def _require_real_increasing(spec):
    if not (spec.real_positive and spec.strictly_increasing_modulus):
        raise ValueError("this certificate needs a real positive, strictly increasing spectrum")


@dataclass
class PerturbationCertificate:
    J: int
    tail_value: float
    A_reference: float
    N: int
    n: int
    frame_rows: Optional[int]
    tail_remainder_bound: Optional[float]
    satisfied: bool

    def to_dict(self):
        return asdict(self)


def perturbation_J(spec, N, n=None, frame_rows=None, A_reference=None):
    """Least J with ``sum_{J <= j < n} (1 - z_j**2) < A``.

    ``A`` is the lower frame bound of ``{D^{N k} g}`` on the first
    ``frame_rows`` coordinates, taken over all columns via the closed-form
    Gram matrix, unless ``A_reference`` is supplied. Only ``J < n`` is
    searched: the cutoff has to leave at least one materialized coordinate.
    """
    _require_real_increasing(spec)
    N = check_int(N, "N", 1)
    n = len(spec) if n is None else check_int(n, "n", 1)
    if n > len(spec):
        raise ValueError(f"n={n} exceeds the spectrum length {len(spec)}")
    if A_reference is None:
        frame_rows = min(n, 20) if frame_rows is None else check_int(frame_rows, "frame_rows", 1)
        A_reference = arithmetic_frame_bounds(spec, N, 0, frame_rows).A_hat
    else:
        frame_rows = None
    A_reference = float(A_reference)
    defects = 1.0 - spec.r[:n] ** 2
    tails = np.cumsum(defects[::-1])[::-1]  # tails[J] = sum_{j >= J}
    hits = np.nonzero(tails < A_reference)[0]
    if hits.size == 0:
        raise CertificationError(
            f"no J < {n} has tail below A={A_reference:.3e}; materialize more points"
        )
    J = int(hits[0])
    tail_value = tail_defect(spec, J, n)
    return PerturbationCertificate(
        J=J,
        tail_value=tail_value,
        A_reference=A_reference,
        N=N,
        n=n,
        frame_rows=frame_rows,
        tail_remainder_bound=spec.analytic_tail_bound(n),
        satisfied=tail_value < A_reference,
    )


@dataclass
class ChainReport:
    """The tail-estimate chain, row by row, for ``j >= J``.

    ``lhs`` is the squared norm of the summed differences; ``perturbation_sum``
    is ``sum_k ||P_V (D^{Nk} - D^{Nk + j_k}) g||**2`` (the quantity the
    perturbation cutoff relies on); ``geometric_bound`` and ``tail`` are the two
    closed-form upper bounds.
    """

    lhs: float
    perturbation_sum: float
    geometric_bound: float
    tail: float
    holds: bool
    termwise: dict
    k_terms: int
    k_remainder_bound: float

    def to_dict(self):
        return asdict(self)


def verify_chps_chain(spec, N, jitters, J, n=None, tol=DEFAULT_TOL, chunk=1 << 16):
    _require_real_increasing(spec)
    N = check_int(N, "N", 1)
    J = check_int(J, "J", 0)
    n = len(spec) if n is None else check_int(n, "n", 1)
    jit = np.asarray(jitters, dtype=float)
    if jit.ndim != 1 or jit.size == 0:
        raise ValueError("jitters must be a nonempty 1-d array")
    if np.any(jit < 0) or np.any(jit >= N):
        raise ValueError(f"jitters must lie in [0, {N})")
    z = spec.r[J:n]
    log_z = np.log(z)
    K = jit.size
    s1 = np.zeros(z.size)
    s2 = np.zeros(z.size)
    for lo in range(0, K, chunk):
        k = np.arange(lo, min(lo + chunk, K))
        # z^{N k} (1 - z^{j_k})
        a = np.exp(np.outer(log_z, N * k)) * -np.expm1(np.outer(log_z, jit[lo:lo + chunk]))
        s1 += a.sum(axis=1)
        s2 += (a * a).sum(axis=1)
    d = 1.0 - z * z
    zN = np.exp(N * log_z)
    line1 = d * s1 * s1
    line2 = d * s2
    line3 = d * (1.0 - zN) ** 2 / (1.0 - zN * zN)
    line4 = d
    slack = tol * max(float(line4.sum()), 1.0)
    termwise = {
        "lhs<=perturbation_sum": bool(np.all(line1 <= line2 + slack)),
        "perturbation_sum<=geometric_bound": bool(np.all(line2 <= line3 + slack)),
        "geometric_bound<=tail": bool(np.all(line3 <= line4 + slack)),
        "lhs<=tail": bool(np.all(line1 <= line4 + slack)),
    }
    lhs, tail = float(line1.sum()), float(line4.sum())
    return ChainReport(
        lhs=lhs,
        perturbation_sum=float(line2.sum()),
        geometric_bound=float(line3.sum()),
        tail=tail,
        holds=lhs <= tail + slack,
        termwise=termwise,
        k_terms=K,
        k_remainder_bound=float(np.max(np.exp(N * K * log_z))) if z.size else 0.0,
    )


@dataclass
class ExtensionStepReport:
    J: int
    n: int
    K: int
    epsilon: float
    A_hat: float
    B_hat: float
    M: float
    gamma: float
    b_support: list
    b_coefficients: list
    fit_target_error: float
    fit_max_off: float
    c_norm: float
    c_norm_bound: float
    rho: complex
    off_target_residual: float
    lower_bound_check: float
    residual_tol: float
    success: bool
    message: str = ""

    def to_dict(self):
        d = asdict(self)
        d["rho"] = [float(np.real(self.rho)), float(np.imag(self.rho))]
        return d


DEFAULT_ALPHA_ROUNDS = (
    (1.0,),
    (0.5, 1.0, 2.0),
    (0.25, 0.5, 1.0, 2.0, 4.0),
    (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0),
)


def _support_for(lam, s_points, alphas):
    """Exponent indices with ``lambda ~ alpha / s`` for each constraint scale s."""
    idx = {0}
    for s in s_points:
        for a in alphas:
            k = int(np.searchsorted(lam.values, a / s))
            if k < lam.count:
                idx.add(k)
    return np.array(sorted(idx))


def _fit_b(spec, lam, J, n, eps, alpha_rounds):
    """Finitely supported b with ``g_{J-1} theta_b(z_{J-1}) ~ 1`` and small
    ``|theta_b(z_j)|`` for ``J <= j < n``.

    Least squares on column-normalized monomials; the support spreads over
    the scales ``1 / -log z_j`` of the constraint points and is enlarged until
    every constraint holds with margin for rounding.
    """
    g = canonical_vector(spec).entries
    pts = np.arange(J - 1, n)
    s = -np.log(spec.r[pts])
    rhs = np.zeros(pts.size)
    rhs[0] = 1.0 / g[J - 1]
    last = None
    for alphas in alpha_rounds:
        idx = _support_for(lam, s, alphas)
        V = np.exp(-np.outer(s, lam.values[idx]))
        scale = np.linalg.norm(V, axis=0)
        coef, *_ = np.linalg.lstsq(V / scale, rhs, rcond=None)
        b = coef / scale
        vals = V @ b
        rounding = np.finfo(float).eps * (np.abs(V) @ np.abs(b)) * idx.size
        target_err = abs(g[J - 1] * vals[0] - 1.0) + g[J - 1] * rounding[0]
        off = float(np.max(np.abs(vals[1:]) + rounding[1:])) if pts.size > 1 else 0.0
        last = (idx, b, vals, target_err, off)
        if target_err < eps and off < eps:
            return last, True
    return last, False


def extension_step(spec, lam, J, n, K=None, gram=None, alpha_rounds=DEFAULT_ALPHA_ROUNDS,
                   residual_tol=1e-9):
    """Show ``delta_{J-1}`` lies in the range of the synthesis map on rows ``>= J-1``.

    Requires the rows ``J..n-1`` to form a frame (``A_hat > 0``). ``gram`` may
    be the precomputed ``n x n`` Gram matrix over the first K columns; then
    ``c = Phi_J^T (Phi_J Phi_J^T)^{-1} Phi_J b`` never has to be materialized:
    its norm, its effect on rows ``>= J`` and ``theta_c(z_{J-1})`` are all
    Gram expressions.
    """
    _require_real_increasing(spec)
    J = check_int(J, "J", 1)
    n = check_int(n, "n", 2)
    if not J < n <= len(spec):
        raise ValueError(f"need 1 <= J < n <= {len(spec)}, got J={J}, n={n}")
    K = lam.count if K is None else check_int(K, "K", 1)
    if gram is None:
        gram = synthesis_gram(spec, lam, 0, n, K)
    gram = np.real(gram)
    GJ = gram[J:, J:]
    w = np.linalg.eigvalsh(GJ)
    A, B = float(w[0]), float(w[-1])
    g = canonical_vector(spec).entries
    M = float(np.sqrt(tail_defect(spec, 0, n)))
    gamma = gamma_const(spec, lam, J, K, include_tail=True)
    base = dict(J=J, n=n, K=K, A_hat=A, B_hat=B, M=M, gamma=gamma, residual_tol=residual_tol)
    if A <= 0:
        return ExtensionStepReport(
            epsilon=0.0, b_support=[], b_coefficients=[], fit_target_error=np.inf,
            fit_max_off=np.inf, c_norm=np.nan, c_norm_bound=np.nan, rho=0j,
            off_target_residual=np.nan, lower_bound_check=np.nan, success=False,
            message="rows >= J do not form a frame on this truncation", **base)
    ratio = np.sqrt(B) / A
    eps = EPS_FRACTION * 0.5 / (1.0 + gamma * M * ratio)
    (idx, b, vals, target_err, off), fitted = _fit_b(spec, lam, J, n, eps, alpha_rounds)
    # Phi_J b, restricted to rows J..n-1
    y = g[J:n] * vals[1:]
    coeffs = np.linalg.solve(GJ, y)
    c_norm = float(np.sqrt(max(y @ coeffs, 0.0)))
    # g_{J-1} theta_c(z_{J-1}) = row J-1 of Phi applied to c
    g_theta_c = float(gram[J - 1, J:] @ coeffs)
    rho = complex(g[J - 1] * vals[0] - g_theta_c)
    residual = float(np.linalg.norm(y - GJ @ coeffs))
    lower = 1.0 - eps - gamma * eps * M * ratio
    c_bound = ratio * eps * M
    success = bool(
        fitted
        and lower > 0
        and abs(rho) >= lower - 1e-9
        and residual <= residual_tol
        and c_norm <= c_bound
    )
    message = "" if fitted else "fit could not meet the epsilon constraints; enlarge the support"
    return ExtensionStepReport(
        epsilon=eps,
        b_support=[int(i) for i in idx],
        b_coefficients=[float(v) for v in b],
        fit_target_error=float(target_err),
        fit_max_off=float(off),
        c_norm=c_norm,
        c_norm_bound=float(c_bound),
        rho=rho,
        off_target_residual=residual,
        lower_bound_check=float(lower),
        success=success,
        message=message,
        **base,
    )


def explicit_c(spec, lam, J, n, K, b_support, b_coefficients):
    """Materialize ``c = Phi_J^T (Phi_J Phi_J^T)^{-1} Phi_J b`` column by column."""
    m = synthesis_matrix(spec, lam, J, n - J, K).entries.real
    g = canonical_vector(spec).entries
    lam_b = lam.values[np.asarray(b_support)]
    theta_b = np.exp(np.outer(np.log(spec.r[J:n]), lam_b)) @ np.asarray(b_coefficients)
    y = g[J:n] * theta_b
    return m.T @ np.linalg.solve(m @ m.T, y)


@dataclass
class ExtensionChainReport:
    J_start: int
    n: int
    K: int
    steps: list
    final_bounds: dict
    success: bool

    def to_dict(self):
        return {
            "J_start": self.J_start,
            "n": self.n,
            "K": self.K,
            "steps": [s.to_dict() for s in self.steps],
            "final_bounds": self.final_bounds,
            "success": self.success,
        }


def extension_chain(spec, lam, J_start, n, K_start=1024, rel_tol=1e-3, max_cols=None):
    """Run ``extension_step`` for ``J = J_start, ..., 1`` on one converged Gram matrix."""
    est, gram = frame_bounds_converged(
        spec, lam, n, K_start=K_start, rel_tol=rel_tol, max_cols=max_cols, return_gram=True
    )
    K = est.K_cols
    steps = []
    for J in range(J_start, 0, -1):
        steps.append(extension_step(spec, lam, J, n, K, gram=gram))
    return ExtensionChainReport(
        J_start=J_start,
        n=n,
        K=K,
        steps=steps,
        final_bounds=est.to_dict(),
        success=bool(est.converged and est.A_hat > 0 and all(s.success for s in steps)),
    )


def degenerate_check(spec, N, tol=DEGENERACY_TOL):
    """Index pairs ``(k, l)``, ``k < l``, with ``z_k**N == z_l**N`` to ``tol``."""
    N = check_int(N, "N", 1)
    zN = np.exp(N * spec.log_z)
    diff = np.abs(zN[:, None] - zN[None, :])
    ks, ls = np.nonzero(np.triu(diff < tol, k=1))
    return [(int(k), int(l)) for k, l in zip(ks, ls)]


def degenerate_null_vector(spec, pair, n=None):
    """``f = g_l delta_k - g_k delta_l``: orthogonal to every ``D^{N m} g``
    when ``z_k**N == z_l**N``."""
    k, l = pair
    n = len(spec) if n is None else n
    g = canonical_vector(spec).entries
    f = np.zeros(n, dtype=complex)
    f[k] = g[l]
    f[l] = -g[k]
    return f


@dataclass
class ZeroSetGuard:
    theta_c_value: complex
    safe: bool
    kernel_residual: float
    kernel_vector: np.ndarray = field(repr=False)
    J: int = 0
    tol: float = KERNEL_TOL

    def to_dict(self):
        return {
            "theta_c_value": [self.theta_c_value.real, self.theta_c_value.imag],
            "safe": self.safe,
            "kernel_residual": self.kernel_residual,
            "J": self.J,
            "tol": self.tol,
            "kernel_vector": [[float(v.real), float(v.imag)] for v in self.kernel_vector],
        }


def kernel_vector(spec, lam, J, n, K):
    """Right singular vector of the rows ``J..n-1`` truncation for its zero
    singular value (needs ``K > n - J``)."""
    m = synthesis_matrix(spec, lam, J, n - J, K).entries
    if m.shape[1] <= m.shape[0]:
        raise ValueError("the truncation must have more columns than rows")
    _, s, Vh = np.linalg.svd(m, full_matrices=True)
    return Vh[-1].conj(), m


def theta_c(lam, c, z):
    """``sum_k c_k z**lambda_k`` on the stored angle of z."""
    z = complex(z)
    log_z = np.log(abs(z)) + 1j * float(wrap_angle(np.angle(z)))
    return complex(np.exp(lam.values[: c.size] * log_z) @ c)


def zero_set_guard(spec, lam, J, n, K, tol=KERNEL_TOL):
    J = check_int(J, "J", 1)
    c, m = kernel_vector(spec, lam, J, n, K)
    residual = float(np.linalg.norm(m @ c) / np.linalg.norm(c))
    value = theta_c(lam, c, spec.z[J - 1])
    return ZeroSetGuard(value, abs(value) > tol, residual, c, J, tol)


def psi_eval(spec, b, omega):
    """``psi(omega) = <b, D^omega g> = sum_j b_j g_j exp(omega (log r_j - i theta_j))``."""
    b = np.asarray(b, dtype=complex)
    n = b.size
    beta = b * canonical_vector(spec, n).entries
    omega = np.asarray(omega, dtype=complex)
    log_conj = np.log(spec.r[:n]) - 1j * spec.theta[:n]
    return np.exp(np.multiply.outer(omega, log_conj)) @ beta


def psi_growth_exponent(spec, b, y_grid):
    """Largest observed ``log(|psi(iy)| / ||beta||_1) / |y|``; at most the
    sector half-angle because ``|exp(i y (log r - i theta))| = exp(y theta)``."""
    b = np.asarray(b, dtype=complex)
    beta_l1 = float(np.sum(np.abs(b * canonical_vector(spec, b.size).entries)))
    y = np.asarray(y_grid, dtype=float)
    y = y[y != 0]
    vals = np.abs(psi_eval(spec, b, 1j * y))
    return float(np.max(np.log(np.maximum(vals, 1e-300) / beta_l1) / np.abs(y)))


@dataclass
class CompletenessCertificate:
    L_estimate: float
    sector_half_angle: float
    density_hypothesis: bool
    A_hat: float
    n: int
    K: int
    complete_on_truncation: bool

    def to_dict(self):
        return asdict(self)


def completeness_certificate(spec, lam, n, K, density_report=None, rank_tol=DEFAULT_TOL):
    """Density hypothesis ``L(Lambda) > c / pi`` alongside the truncated
    injectivity of the analysis map on the first n coordinates."""
    from .exponents import log_block_density

    report = density_report or log_block_density(lam)
    c = spec.sector_half_angle_c
    if c is None:
        c = float(np.max(np.abs(spec.theta[:n])))
    est = bounds_for(spec, lam, 0, n, K)
    return CompletenessCertificate(
        L_estimate=report.L_estimate,
        sector_half_angle=float(c),
        density_hypothesis=report.L_estimate > c / np.pi,
        A_hat=est.A_hat,
        n=n,
        K=K,
        complete_on_truncation=est.A_hat > rank_tol * est.B_hat,
    )


__all__ = [
    "CertificationError",
    "ChainReport",
    "CompletenessCertificate",
    "ExtensionChainReport",
    "ExtensionStepReport",
    "PerturbationCertificate",
    "ZeroSetGuard",
    "completeness_certificate",
    "degenerate_check",
    "degenerate_null_vector",
    "explicit_c",
    "extension_chain",
    "extension_step",
    "kernel_vector",
    "perturbation_J",
    "psi_eval",
    "psi_growth_exponent",
    "theta_c",
    "verify_chps_chain",
    "zero_set_guard",
]
