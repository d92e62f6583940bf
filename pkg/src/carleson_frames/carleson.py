"""Carleson spectra on the unit disk.

A spectrum is an ordered, finite prefix of points ``z_j = r_j exp(i theta_j)``
of the open unit disk. Everything downstream (synthesis matrices, frame
bounds, certificates) is computed on such prefixes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._validation import DEFAULT_TOL, check_int, check_open_unit, wrap_angle


class NotCarlesonError(ValueError):
    """Raised when a prefix cannot belong to a Carleson sequence."""


@dataclass(frozen=True)
class DiskPoint:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"modulus must lie in (0, 1), got {self.r}")
        if not -np.pi <= self.theta < np.pi:
            raise ValueError(f"theta must lie in [-pi, pi), got {self.theta}")

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(abs(z), float(wrap_angle(np.angle(z))))

    @property
    def re(self):
        return self.r * np.cos(self.theta)

    @property
    def im(self):
        return self.r * np.sin(self.theta)

    def __complex__(self):
        return complex(self.re, self.im)


def _as_complex(z):
    if isinstance(z, DiskPoint):
        return complex(z)
    return complex(z)


@dataclass(frozen=True, eq=False)
class CarlesonSpectrum:
    """Materialized prefix of a Carleson spectrum.

    ``tail_model`` optionally describes how the unmaterialized tail behaves,
    e.g. ``{"kind": "geometric", "base": b, "ratio": q}`` for
    ``r_j = 1 - b q**j``; it is what lets callers bound sums beyond the prefix.
    """

    r: np.ndarray
    theta: np.ndarray
    real_positive: bool = False
    strictly_increasing_modulus: bool = False
    sector_half_angle_c: Optional[float] = None
    generator_tag: str = "explicit"
    tail_model: Optional[dict] = field(default=None)

    def __post_init__(self):
        r = np.array(self.r, dtype=float, ndmin=1)
        theta = np.array(self.theta, dtype=float, ndmin=1)
        if r.ndim != 1 or r.shape != theta.shape:
            raise ValueError("r and theta must be 1-d arrays of equal length")
        if r.size == 0:
            raise ValueError("a spectrum needs at least one point")
        if not np.all((r > 0) & (r < 1)):
            raise ValueError("every modulus must lie in (0, 1)")
        if not np.all((theta >= -np.pi) & (theta < np.pi)):
            raise ValueError("every angle must lie in [-pi, pi)")
        if self.real_positive and np.any(theta != 0):
            raise ValueError("real_positive spectrum has a nonzero angle")
        if self.strictly_increasing_modulus and np.any(np.diff(r) <= 0):
            raise ValueError("moduli are not strictly increasing")
        c = self.sector_half_angle_c
        if c is not None:
            if not 0 <= c < np.pi:
                raise ValueError(f"sector half-angle must lie in [0, pi), got {c}")
            if np.any(np.abs(theta) > c):
                raise ValueError("a point lies outside the sector |theta| <= c")
        r.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_points(cls, points, **kwargs):
        """Build from complex numbers or DiskPoints; flags not given are inferred."""
        pts = [p if isinstance(p, DiskPoint) else DiskPoint.from_complex(p) for p in points]
        r = np.array([p.r for p in pts])
        theta = np.array([p.theta for p in pts])
        kwargs.setdefault("real_positive", bool(np.all(theta == 0)))
        kwargs.setdefault("strictly_increasing_modulus", bool(np.all(np.diff(r) > 0)))
        return cls(r, theta, **kwargs)

    def __len__(self):
        return self.r.size

    @property
    def z(self):
        return self.r * np.exp(1j * self.theta)

    @property
    def log_z(self):
        """Principal logarithm ``log r + i theta`` with the stored angle."""
        return np.log(self.r) + 1j * self.theta

    @property
    def points(self):
        return tuple(DiskPoint(float(r), float(t)) for r, t in zip(self.r, self.theta))

    @property
    def flags(self):
        return {
            "real_positive": self.real_positive,
            "strictly_increasing_modulus": self.strictly_increasing_modulus,
            "sector_half_angle_c": self.sector_half_angle_c,
        }

    def prefix(self, n):
        n = check_int(n, "n", 1)
        if n > len(self):
            raise ValueError(f"prefix length {n} exceeds materialized length {len(self)}")
        return CarlesonSpectrum(
            self.r[:n],
            self.theta[:n],
            real_positive=self.real_positive,
            strictly_increasing_modulus=self.strictly_increasing_modulus,
            sector_half_angle_c=self.sector_half_angle_c,
            generator_tag=self.generator_tag,
            tail_model=self.tail_model,
        )

    def analytic_tail_bound(self, n):
        """Upper bound on ``sum_{j >= n} (1 - r_j**2)``, or None without a model."""
        model = self.tail_model
        if not model or model.get("kind") != "geometric":
            return None
        base, ratio = model["base"], model["ratio"]
        # 1 - r^2 = (1 - r)(1 + r) <= 2 (1 - r)
        return 2.0 * base * ratio**n / (1.0 - ratio)

    def to_dict(self):
        return {
            "points": [
                {"r": float(r), "theta": float(t)} for r, t in zip(self.r, self.theta)
            ],
            "flags": self.flags,
            "generator_tag": self.generator_tag,
            "tail_model": self.tail_model,
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "points" not in data:
            raise ValueError("spectrum JSON needs a 'points' array")
        r, theta = [], []
        for i, p in enumerate(data["points"]):
            try:
                r.append(float(p["r"]))
                theta.append(float(p.get("theta", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"points[{i}]: expected numeric 'r' and 'theta'") from exc
        flags = data.get("flags") or {}
        return cls(
            np.array(r),
            np.array(theta),
            real_positive=bool(flags.get("real_positive", False)),
            strictly_increasing_modulus=bool(flags.get("strictly_increasing_modulus", False)),
            sector_half_angle_c=flags.get("sector_half_angle_c"),
            generator_tag=str(data.get("generator_tag", "explicit")),
            tail_model=data.get("tail_model"),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CarlesonDeltaEstimate:
    delta_n: float
    truncation_n: int
    per_k_products: tuple

    def to_dict(self):
        return {
            "delta_n": self.delta_n,
            "truncation_n": self.truncation_n,
            "per_k_products": list(self.per_k_products),
        }


@dataclass(frozen=True)
class FrameVector:
    entries: np.ndarray
    truncation_n: int

    def __len__(self):
        return self.truncation_n


def pseudo_hyperbolic(z, w):
    """|z - w| / |1 - conj(w) z| for two points of the open disk."""
    z, w = _as_complex(z), _as_complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise ValueError("both points must lie in the open unit disk")
    return abs(z - w) / abs(1 - w.conjugate() * z)


def _pseudo_hyperbolic_matrix(z):
    zk = z[:, None]
    zj = z[None, :]
    return np.abs(zk - zj) / np.abs(1 - np.conj(zj) * zk)


def _check_n(spec, n):
    n = check_int(n, "n", 1)
    if n > len(spec):
        raise ValueError(f"n={n} exceeds the materialized length {len(spec)}")
    return n


def carleson_delta(spec, n=None):
    """Finite-truncation Carleson constant.

    For each ``k < n`` the product of pseudo-hyperbolic distances from ``z_k``
    to the other ``n - 1`` points; ``delta_n`` is their minimum. Nested
    truncations give non-increasing values, so ``delta_n`` bounds the
    infinite constant from above.
    """
    n = len(spec) if n is None else _check_n(spec, n)
    z = spec.z[:n]
    rho = _pseudo_hyperbolic_matrix(z)
    np.fill_diagonal(rho, 1.0)
    off = ~np.eye(n, dtype=bool)
    if np.any(rho[off] == 0.0):
        k, j = np.argwhere((rho == 0.0) & off)[0]
        raise NotCarlesonError(f"points {k} and {j} coincide; the product vanishes")
    per_k = np.prod(rho, axis=1)
    return CarlesonDeltaEstimate(float(per_k.min()), n, tuple(float(p) for p in per_k))


def tail_defect(spec, J, n):
    """sum_{J <= j < n} (1 - r_j**2)."""
    n = _check_n(spec, n)
    J = check_int(J, "J", 0)
    if J > n:
        raise ValueError(f"J={J} exceeds n={n}")
    r = spec.r[J:n]
    return float(np.sum(1.0 - r * r))


def blaschke_product(spec, z, n=None):
    n = len(spec) if n is None else _check_n(spec, n)
    z = _as_complex(z)
    if abs(z) >= 1:
        raise ValueError("evaluation point must lie in the open unit disk")
    zj = spec.z[:n]
    factors = (zj / np.abs(zj)) * (z - zj) / (1 - np.conj(zj) * z)
    return complex(np.prod(factors))


def canonical_vector(spec, n=None):
    """Entries ``sqrt(1 - r_j**2)`` of the canonical generating vector."""
    n = len(spec) if n is None else _check_n(spec, n)
    r = spec.r[:n]
    return FrameVector(np.sqrt(1.0 - r * r), n)


def make_geometric_real(base=0.5, ratio=0.5, count=20):
    """Points ``z_j = 1 - base * ratio**j`` on (0, 1)."""
    base = check_open_unit(base, "base")
    ratio = check_open_unit(ratio, "ratio")
    count = check_int(count, "count", 1)
    r = 1.0 - base * ratio ** np.arange(count)
    if np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("parameters produce points outside (0, 1)")
    if count > 1 and np.any(np.diff(r) <= 0):
        raise ValueError(
            f"count={count} exceeds double precision: consecutive points coincide"
        )
    return CarlesonSpectrum(
        r,
        np.zeros(count),
        real_positive=True,
        strictly_increasing_modulus=True,
        generator_tag=f"geometric(base={base!r},ratio={ratio!r},count={count})",
        tail_model={"kind": "geometric", "base": base, "ratio": ratio},
    )


ANGLE_RULES = ("zero", "alternating", "sweep")


def make_sector(moduli: Sequence[float], half_angle_c: float, angle_rule: str = "alternating"):
    """Spectrum with prescribed moduli inside the sector ``|theta| <= c``.

    Rules: ``zero`` puts every point on (0, 1); ``alternating`` uses
    ``+c, -c, +c, ...``; ``sweep`` spreads angles linearly from ``-c`` to ``c``.
    """
    r = np.asarray(moduli, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("moduli must be a nonempty 1-d sequence")
    if np.any(np.diff(r) <= 0):
        raise ValueError("moduli must be strictly increasing")
    c = float(half_angle_c)
    if not 0 <= c < np.pi:
        raise ValueError(f"half-angle must lie in [0, pi), got {c}")
    n = r.size
    if angle_rule == "zero":
        theta = np.zeros(n)
    elif angle_rule == "alternating":
        theta = c * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    elif angle_rule == "sweep":
        theta = np.linspace(-c, c, n) if n > 1 else np.zeros(1)
    else:
        raise ValueError(f"unknown angle rule {angle_rule!r}; choose from {ANGLE_RULES}")
    theta = theta + 0.0  # drop negative zeros
    return CarlesonSpectrum(
        r,
        theta,
        real_positive=bool(np.all(theta == 0)),
        strictly_increasing_modulus=True,
        sector_half_angle_c=c,
        generator_tag=f"sector(c={c!r},rule={angle_rule})",
    )


def check_invariants(spec, tol=DEFAULT_TOL):
    """Re-verify derived quantities; returns a list of violation messages."""
    problems = []
    z = spec.z
    if np.any(np.abs(np.abs(z) - spec.r) > tol * np.maximum(spec.r, 1.0)):
        problems.append("re/im inconsistent with (r, theta)")
    if not np.isfinite(tail_defect(spec, 0, len(spec))):
        problems.append("defect sum is not finite")
    return problems
