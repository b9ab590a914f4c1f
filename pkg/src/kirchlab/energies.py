"""Energy functionals evaluated along trajectories, and the a-priori
inequality diagnostics that separate the tractable dissipation regimes.

Channels that divide by a quantity that can legitimately vanish along
degenerate runs (the stiffness coefficient, or the half-order norm)
carry NaN sentinels at the affected samples instead of raising; the
analysis layer needs to see where a run degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .integrate import Trajectory, sigma_half
from .model import Dissipation, Nonlinearity
from .spectral import Spectrum, as_modal

__all__ = [
    "UNDEFINED",
    "EnergySeries",
    "hamiltonian",
    "energy_suite",
    "apriori_margin",
    "AprioriMargins",
    "apriori_satisfied",
]

UNDEFINED = float("nan")


@dataclass
class EnergySeries:
    """Named scalar channels sampled on a common time grid."""

    times: np.ndarray
    channels: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels


def hamiltonian(spec: Spectrum, nl: Nonlinearity, eps: float, u, uprime) -> float:
    """eps |u'|^2 + M(|A^(1/2)u|^2), with M the primitive of m.

    Nonincreasing along second-order solutions; its decay rate is
    exactly -2 b(t) |u'(t)|^2.
    """
    uv = as_modal(spec, u, "u")
    upv = as_modal(spec, uprime, "uprime")
    sigma = sigma_half(spec.eigenvalues, uv)
    return eps * math.fsum(upv * upv) + nl.integral(sigma)


def energy_suite(
    traj: Trajectory,
    spec: Spectrum,
    nl: Nonlinearity,
    eps: float,
    ks=(0, 1),
) -> EnergySeries:
    """Evaluate the energy channels at every sample of a trajectory.

    With eps > 0 (second-order run) the full set is produced: the
    Hamiltonian, the stiffness-normalized energies E_eps_k and G_eps,
    the second-energy pair P_eps / Q_eps, the plain norms E_k, the
    parabolic quotient P_par, the coefficient channel c_eps, and the
    squared velocity v. With eps = 0 only the first-order channels
    (E_k, P_par, v) are kept.

    P_eps contains a difference of near-equal products; all inner
    products feeding it use compensated summation.
    """
    lam = spec.eigenvalues
    mpts = traj.times.size
    parabolic = eps == 0.0

    names_k_eps = [f"E_eps_{k:g}" for k in ks]
    names_k = [f"E_{k:g}" for k in ks]
    out = {}
    if not parabolic:
        for name in ["H_eps", *names_k_eps, "G_eps", "P_eps", "Q_eps"]:
            out[name] = np.empty(mpts)
    for name in [*names_k, "P_par", "c_eps", "v"]:
        out[name] = np.empty(mpts)

    for i in range(mpts):
        u = traj.u[i]
        up = traj.uprime[i]
        sigma = sigma_half(lam, u)
        c = nl.value(sigma)
        v = math.fsum(up * up)
        norm_u = {k: math.fsum(lam**k * u * u) for k in ks}

        out["c_eps"][i] = c
        out["v"][i] = v
        for k, name in zip(ks, names_k):
            out[name][i] = norm_u[k]
        one_u = math.fsum(lam**2 * u * u)
        out["P_par"][i] = one_u / sigma if sigma > 0.0 else UNDEFINED

        if parabolic:
            continue

        out["H_eps"][i] = eps * v + nl.integral(sigma)
        for k, name in zip(ks, names_k_eps):
            if c > 0.0:
                norm_up_k = math.fsum(lam**k * up * up)
                norm_u_k1 = math.fsum(lam ** (k + 1) * u * u)
                out[name][i] = eps * norm_up_k / c + norm_u_k1
            else:
                out[name][i] = UNDEFINED
        # Guard the composed denominators too: they can underflow to 0.0
        # on deeply decayed samples even while c and sigma stay positive.
        c_sq = c * c
        out["G_eps"][i] = v / c_sq if c_sq > 0.0 else UNDEFINED
        sigma_sq = sigma * sigma
        den_q = c_sq * sigma
        if c > 0.0 and sigma > 0.0 and sigma_sq > 0.0:
            half_up = math.fsum(lam * up * up)
            cross = math.fsum(lam * u * up)
            gram = sigma * half_up - cross * cross
            out["P_eps"][i] = (eps / c) * gram / sigma_sq + one_u / sigma
        else:
            out["P_eps"][i] = UNDEFINED
        out["Q_eps"][i] = v / den_q if den_q > 0.0 else UNDEFINED

    return EnergySeries(traj.times.copy(), out)


class AprioriMargins(NamedTuple):
    times: np.ndarray
    lhs_basic: np.ndarray
    lhs_basic_plus: np.ndarray
    rhs: np.ndarray


def apriori_margin(
    traj: Trajectory,
    spec: Spectrum,
    nl: Nonlinearity,
    dis: Dissipation,
    eps: float,
) -> AprioriMargins:
    """Both sides of the a-priori dissipation inequalities per sample.

    lhs_basic   = eps |m'(sigma)| / m(sigma) * |Au| * |u'|
    lhs_basic_plus = eps |Au| |u'| / sigma          (sigma = |A^(1/2)u|^2)
    rhs         = b(t)

    For powers, sigma m'(sigma)/m(sigma) = gamma so lhs_basic is exactly
    gamma times lhs_basic_plus. Vanishing denominators give NaN. A run
    sits inside the tractable regime when lhs <= rhs at every sample
    past the boundary layer (t >= 10 eps); see ``apriori_satisfied``.
    """
    lam = spec.eigenvalues
    mpts = traj.times.size
    basic = np.empty(mpts)
    plus = np.empty(mpts)
    rhs = np.empty(mpts)
    for i in range(mpts):
        u = traj.u[i]
        up = traj.uprime[i]
        sigma = sigma_half(lam, u)
        norm_au = math.sqrt(math.fsum(lam**2 * u * u))
        norm_up = math.sqrt(math.fsum(up * up))
        mval = nl.value(sigma)
        mprime = nl.derivative(sigma)
        rhs[i] = dis.b(traj.times[i])
        plus[i] = eps * norm_au * norm_up / sigma if sigma > 0.0 else UNDEFINED
        if mval > 0.0:
            basic[i] = eps * abs(mprime) / mval * norm_au * norm_up
        else:
            basic[i] = UNDEFINED
    return AprioriMargins(traj.times.copy(), basic, plus, rhs)


def apriori_satisfied(margins: AprioriMargins, eps: float) -> bool:
    """True when lhs_basic <= b(t) at every defined sample with t >= 10 eps."""
    mask = margins.times >= 10.0 * eps
    lhs = margins.lhs_basic[mask]
    rhs = margins.rhs[mask]
    defined = np.isfinite(lhs)
    return bool(np.all(lhs[defined] <= rhs[defined]))
