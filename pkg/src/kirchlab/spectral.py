"""Diagonal model of a nonnegative self-adjoint operator.

The operator is represented purely by its eigenvalues; eigenvectors are
implicit coordinates. Coefficient vectors ("modal vectors") live in that
basis, so every fractional power acts diagonally and every Sobolev-type
norm reduces to a weighted sum of squared coefficients. Zero eigenvalues
are allowed and model an operator with a kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigurationError",
    "Spectrum",
    "as_modal",
    "sobolev_norm_sq",
    "apply_A",
    "coercivity",
    "spectrum_from_config",
]


class ConfigurationError(ValueError):
    """Inputs violate a documented shape or schema contract."""


@dataclass(frozen=True)
class Spectrum:
    """Nondecreasing list of nonnegative eigenvalues.

    Multiplicity is expressed by repetition. The coercivity constant is
    the smallest eigenvalue; the operator is coercive exactly when it is
    strictly positive.
    """

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size < 1:
            raise ConfigurationError("spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(lam)):
            raise ConfigurationError("eigenvalues must be finite")
        if lam[0] < 0.0:
            raise ConfigurationError("eigenvalues must be nonnegative")
        if np.any(np.diff(lam) < 0.0):
            raise ConfigurationError("eigenvalues must be nondecreasing")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def as_modal(spec: Spectrum, x, name: str = "vector") -> np.ndarray:
    """Validate and return ``x`` as a modal coefficient vector of ``spec``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size != spec.size:
        raise ConfigurationError(
            f"{name} has length {arr.size}, spectrum has {spec.size} modes"
        )
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite")
    return arr


def sobolev_norm_sq(spec: Spectrum, x, order: float) -> float:
    """Squared norm of the fractional power ``order`` applied to ``x``.

    Computes sum_k lambda_k^(2*order) x_k^2 with the convention 0^0 = 1,
    so kernel modes contribute x_k^2 at order 0 and nothing at any
    positive order. Summation is compensated.
    """
    xv = as_modal(spec, x, "x")
    if order < 0.0:
        raise ValueError("order must be nonnegative")
    # IEEE pow gives 0.0**0.0 == 1.0, which is exactly the convention needed.
    weights = spec.eigenvalues ** (2.0 * order)
    return math.fsum(weights * xv * xv)


def apply_A(spec: Spectrum, x) -> np.ndarray:
    """Diagonal action of the operator: coefficient k maps to lambda_k x_k."""
    xv = as_modal(spec, x, "x")
    return spec.eigenvalues * xv


def coercivity(spec: Spectrum) -> float:
    """Smallest eigenvalue; strictly positive iff the operator is coercive."""
    return float(spec.eigenvalues[0])


def spectrum_from_config(cfg: dict) -> Spectrum:
    """Build a spectrum from its configuration mapping.

    Two forms are accepted:
      {"kind": "explicit", "values": [l1, ..., lN]}
      {"kind": "power", "a": a, "q": q, "n": N}   # lambda_k = a * k^q
    """
    if not isinstance(cfg, dict):
        raise ConfigurationError("spectrum must be a mapping")
    kind = cfg.get("kind")
    if kind == "explicit":
        _reject_unknown(cfg, {"kind", "values"}, "spectrum")
        if "values" not in cfg:
            raise ConfigurationError("spectrum.values is required")
        return Spectrum(np.asarray(cfg["values"], dtype=float))
    if kind == "power":
        _reject_unknown(cfg, {"kind", "a", "q", "n"}, "spectrum")
        try:
            a = float(cfg["a"])
            q = float(cfg["q"])
            n = int(cfg["n"])
        except KeyError as exc:
            raise ConfigurationError(f"spectrum.{exc.args[0]} is required") from None
        if n < 1:
            raise ConfigurationError("spectrum.n must be at least 1")
        if a < 0.0:
            raise ConfigurationError("spectrum.a must be nonnegative")
        k = np.arange(1, n + 1, dtype=float)
        return Spectrum(a * k**q)
    raise ConfigurationError(f"spectrum.kind must be 'explicit' or 'power', got {kind!r}")


def _reject_unknown(cfg: dict, allowed: set, context: str) -> None:
    extra = sorted(set(cfg) - allowed)
    if extra:
        raise ConfigurationError(f"unknown key {extra[0]!r} in {context}")
