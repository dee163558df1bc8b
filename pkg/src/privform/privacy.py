"""Gaussian-mechanism calibration for trajectory privacy.

The noise scale an agent needs is ``sigma >= kappa(delta, epsilon) * b`` where
``b`` is the adjacency radius (two trajectories within l2-distance ``b`` must
be near-indistinguishable) and ``kappa`` is derived from the tail of the
standard normal.  Everything here is a pure function; random sampling takes a
caller-owned generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Rational approximation to the standard normal quantile (Acklam); max error
# ~1.15e-9, then polished below by Newton steps on the tail integral.
_ACKLAM_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_ACKLAM_SPLIT = 0.02425


def q_function(y: float) -> float:
    """Upper tail of the standard normal, Q(y) = P[Z > y]."""
    return 0.5 * math.erfc(y / _SQRT2)


def _std_normal_pdf(y: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * y * y)


def _acklam_quantile(p: float) -> float:
    """Rational-approximation inverse of the standard normal CDF."""
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if p < _ACKLAM_SPLIT:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    if p <= 1.0 - _ACKLAM_SPLIT:
        q = p - 0.5
        r = q * q
        return (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    q = math.sqrt(-2.0 * math.log(1.0 - p))
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
        (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    )


def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` on (0, 1).

    Rational-approximation initial guess refined by Newton iterations on the
    tail integral itself; |Q(q_inverse(p)) - p| stays below 1e-10 over the
    usable range.
    """
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise ValueError(f"q_inverse requires p in (0, 1), got {p}")
    y = -_acklam_quantile(p)
    for _ in range(3):
        pdf = _std_normal_pdf(y)
        if pdf == 0.0:
            break
        y += (q_function(y) - p) / pdf
    return y


def kappa(delta: float, epsilon: float) -> float:
    """Gaussian-mechanism noise multiplier per unit adjacency radius.

    kappa = (K + sqrt(K^2 + 2*epsilon)) / (2*epsilon) with K the standard
    normal tail quantile at ``delta``.  Strictly decreasing in ``epsilon``.
    """
    if not (0.0 < delta < 0.5):
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    k = q_inverse(delta)
    return (k + math.sqrt(k * k + 2.0 * epsilon)) / (2.0 * epsilon)


def kappa_derivative(delta: float, epsilon: float) -> float:
    """d(kappa)/d(epsilon) at fixed delta (always negative)."""
    if not (0.0 < delta < 0.5):
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    k = q_inverse(delta)
    r = math.sqrt(k * k + 2.0 * epsilon)
    return -(k * k + r * k + epsilon) / (2.0 * epsilon * epsilon * r)


@dataclass(frozen=True)
class PrivacySpec:
    """Per-agent privacy parameters (epsilon, delta) and adjacency radius."""

    epsilon: float
    delta: float
    adjacency_bound: float

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (0.0 < self.delta < 0.5):
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not self.adjacency_bound > 0.0:
            raise ValueError(
                f"adjacency bound must be positive, got {self.adjacency_bound}"
            )

    @property
    def min_sigma(self) -> float:
        return min_sigma(self)


def min_sigma(spec: PrivacySpec) -> float:
    """Smallest noise scale that still meets the spec's guarantee."""
    return kappa(spec.delta, spec.epsilon) * spec.adjacency_bound


@dataclass(frozen=True)
class NoiseModel:
    """Per-agent privacy noise scales sigma_i and process noise scales s_i."""

    privacy_sigmas: np.ndarray
    process_sigmas: np.ndarray
    specs: tuple[PrivacySpec | None, ...] | None = None

    def __init__(
        self,
        privacy_sigmas,
        process_sigmas,
        specs: Sequence[PrivacySpec | None] | None = None,
    ):
        sig = np.asarray(privacy_sigmas, dtype=float).copy()
        proc = np.asarray(process_sigmas, dtype=float).copy()
        if sig.ndim != 1 or proc.shape != sig.shape:
            raise ValueError("privacy and process sigma vectors must match in length")
        if np.any(sig < 0.0) or np.any(proc < 0.0):
            raise ValueError("noise scales must be nonnegative")
        if specs is not None:
            specs = tuple(specs)
            if len(specs) != sig.shape[0]:
                raise ValueError("one PrivacySpec entry per agent (None allowed)")
            for i, spec in enumerate(specs):
                if spec is not None and sig[i] < min_sigma(spec):
                    raise ValueError(
                        f"agent {i + 1}: sigma {sig[i]} below calibrated "
                        f"minimum {min_sigma(spec)}"
                    )
        sig.setflags(write=False)
        proc.setflags(write=False)
        object.__setattr__(self, "privacy_sigmas", sig)
        object.__setattr__(self, "process_sigmas", proc)
        object.__setattr__(self, "specs", specs)

    @classmethod
    def from_specs(
        cls, specs: Sequence[PrivacySpec], process_sigmas
    ) -> "NoiseModel":
        """Calibrate each sigma_i at exact equality with its spec's minimum."""
        sig = np.array([min_sigma(s) for s in specs], dtype=float)
        return cls(sig, process_sigmas, specs=specs)

    @property
    def n(self) -> int:
        return int(self.privacy_sigmas.shape[0])


def sample_privacy_noise(sigma: float, d: int, rng: np.random.Generator) -> np.ndarray:
    """One i.i.d. zero-mean Gaussian noise vector at scale ``sigma``."""
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return rng.standard_normal(d) * sigma


def check_adjacency(v, w, bound: float) -> bool:
    """Whether two finite-horizon trajectories are within l2-distance ``bound``.

    Trajectories are arrays with time on the first axis; the comparison uses
    the cumulative squared 2-norm over the stored horizon (an inclusive <=).
    """
    if bound <= 0.0:
        raise ValueError("adjacency bound must be positive")
    va = np.asarray(v, dtype=float)
    wa = np.asarray(w, dtype=float)
    if va.shape != wa.shape:
        raise ValueError(f"trajectory shapes differ: {va.shape} vs {wa.shape}")
    return float(np.sum((va - wa) ** 2)) <= bound * bound
