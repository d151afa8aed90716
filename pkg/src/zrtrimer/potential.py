"""Effective hyper-radial potential built from a traced angular branch.

The hyper-radial equation reads  (-d^2/drho^2 + W(rho) - 2mE/hbar^2) f = 0,
and W is stored directly in 2mE/hbar^2 units (1/bohr^2).  Two conventions
for the diagonal coupling term are supported:

  leading_term   W = u(rho)/rho^2          (the -1/(4 rho^2) Langer-type
                                            leading term of the coupling
                                            cancels the -1/4 in u - 1/4)
  none           W = (u(rho) - 1/4)/rho^2  (no coupling correction at all)

leading_term is the default and is the convention that reproduces the
published helium-trimer energies.

Between grid nodes u(rho) is interpolated by a monotone cubic in log(rho).
Inside the first node u follows a power law fitted to the first two nodes
(the extended boundary condition gives u ~ rho^(3/2) there, i.e. W ~
rho^(-1/2)).  Beyond the last node the dimer-channel asymptote continues
the branch; its pole momentum comes from the extended two-body equation so
that the tail joins the traced branch without a seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .angular import SQRT3, AngularProblem, NuBranch, dimer_channel_u
from .system import PairParams, dimer_binding_energy, dimer_pole_kappa

Q_CONVENTIONS = ("leading_term", "none")


def yukawa_tail(rho: float, pair: PairParams, mu: float) -> float:
    """Analytic large-rho form of the potential (q_convention = none).

    threshold - 1/(4 rho^2) - (16 sqrt3/pi) exp(-rho/b)/(b rho), with
    threshold = -1/(mu a^2) and b = 3 sqrt(mu)|a|/pi.  Valid when a bound
    dimer exists (a < 0); used for validation and for extending W beyond
    the traced grid.
    """
    if not pair.has_bound_dimer:
        raise ValueError("yukawa tail requires a bound dimer (a < 0)")
    a = abs(pair.a)
    b = 3.0 * math.sqrt(mu) * a / math.pi
    threshold = -1.0 / (mu * a * a)
    return (threshold - 1.0 / (4.0 * rho * rho)
            - (16.0 * SQRT3 / math.pi) * math.exp(-rho / b) / (b * rho))


@dataclass(frozen=True)
class EffectivePotential:
    """Sampled hyper-radial potential with analytic continuation.

    threshold is the bare dimer threshold -2mB/hbar^2 (B = 1/(2 mu m a^2))
    or 0 without a bound dimer; w_inf is the actual large-rho limit of the
    traced branch, which under the extended boundary condition sits at
    -kappa_d^2/mu with a kappa_d slightly above 1/|a|.
    """

    rho: np.ndarray
    w: np.ndarray
    threshold: float
    yukawa_range_b: float | None
    q_convention: str
    problem: AngularProblem
    w_inf: float
    bound_kappa: float | None
    bound_mu: float | None
    _u_interp: PchipInterpolator = field(repr=False)
    _inner: tuple[float, float, str] = field(repr=False)
    _u_last: float = field(repr=False)

    @property
    def shift(self) -> float:
        return 0.0 if self.q_convention == "leading_term" else 0.25

    def u_at(self, rho: float) -> float:
        """Angular eigenvalue u = nu^2 at any rho (interpolated/extended)."""
        if rho <= 0.0:
            raise ValueError("rho must be positive")
        grid = self.rho
        if rho < grid[0]:
            c, p, kind = self._inner
            if kind == "power":
                return c * rho ** p
            return c + p * rho
        if rho > grid[-1]:
            if self.bound_kappa is not None:
                return dimer_channel_u(rho, self.bound_kappa, self.bound_mu)
            return 4.0 - (4.0 - self._u_last) * (grid[-1] / rho)
        return float(self._u_interp(math.log(rho)))

    def value(self, rho: float) -> float:
        """W(rho) in 2mE/hbar^2 units."""
        return (self.u_at(rho) - self.shift) / (rho * rho)

    def values(self, rhos) -> np.ndarray:
        """Vectorized W over an array of rho values."""
        rhos = np.asarray(rhos, dtype=float)
        flat = rhos.ravel()
        if flat.size and flat.min() <= 0.0:
            raise ValueError("rho must be positive")
        u = np.empty_like(flat)
        lo = flat < self.rho[0]
        hi = flat > self.rho[-1]
        mid = ~(lo | hi)
        if mid.any():
            u[mid] = self._u_interp(np.log(flat[mid]))
        if lo.any():
            c, p, kind = self._inner
            u[lo] = c * flat[lo] ** p if kind == "power" else c + p * flat[lo]
        if hi.any():
            u[hi] = np.array([self.u_at(r) for r in flat[hi]])
        w = (u - self.shift) / (flat * flat)
        return w.reshape(rhos.shape)

    # -- energy unit plumbing -------------------------------------------
    @property
    def mass_scale(self) -> float:
        return self.problem.system.units.mass_scale

    def eps_from_hartree(self, energy: float) -> float:
        """2mE/hbar^2 from E in hartree."""
        return 2.0 * self.mass_scale * energy

    def hartree_from_eps(self, eps: float) -> float:
        return eps / (2.0 * self.mass_scale)

    @property
    def threshold_hartree(self) -> float:
        return self.hartree_from_eps(self.threshold)

    @property
    def threshold_mk(self) -> float:
        return self.problem.system.units.hartree_to_mk(self.threshold_hartree)


def _bound_channel(problem: AngularProblem) -> tuple[int | None, float]:
    """Index of the pair giving the deepest dimer threshold, and -2mB/hbar^2."""
    best_i, best_thr = None, 0.0
    for i in range(3):
        pair = problem.effective_pair(i)
        mu = problem.kinematics.mu[i]
        b_energy = dimer_binding_energy(pair, mu, problem.system.units)
        if b_energy is None:
            continue
        thr = -2.0 * problem.system.units.mass_scale * b_energy
        if thr < best_thr:
            best_i, best_thr = i, thr
    return best_i, best_thr


def _inner_law(rho: np.ndarray, u: np.ndarray) -> tuple[float, float, str]:
    """Continuation below the first node: u = c rho^p through the first two
    nodes when their signs allow it, a straight line otherwise."""
    r1, r2 = float(rho[0]), float(rho[1])
    u1, u2 = float(u[0]), float(u[1])
    if u1 * u2 > 0.0:
        p = math.log(u2 / u1) / math.log(r2 / r1)
        p = min(max(p, -0.5), 3.0)
        return (u1 / r1 ** p, p, "power")
    slope = (u2 - u1) / (r2 - r1)
    return (u1 - slope * r1, slope, "linear")


def effective_potential(branch: NuBranch, problem: AngularProblem,
                        q_convention: str = "leading_term") -> EffectivePotential:
    """Build the effective potential W from a traced branch.

    W = (u - shift)/rho^2 with shift = 0 (leading_term) or 1/4 (none).
    The threshold and Yukawa range are filled from the deepest bound pair,
    if any; the outer analytic tail uses the extended-model dimer pole so
    that it continues the traced branch smoothly.
    """
    if q_convention not in Q_CONVENTIONS:
        raise ValueError(f"q_convention must be one of {Q_CONVENTIONS}")
    if len(branch) == 0:
        raise ValueError("branch is empty")
    rho = np.asarray(branch.rho, dtype=float)
    u = np.asarray(branch.u, dtype=float)
    shift = 0.0 if q_convention == "leading_term" else 0.25
    w = (u - shift) / (rho * rho)

    bound_i, threshold = _bound_channel(problem)
    if bound_i is not None:
        pair = problem.effective_pair(bound_i)
        mu = problem.kinematics.mu[bound_i]
        b_range = 3.0 * math.sqrt(mu) * abs(pair.a) / math.pi
        kappa = dimer_pole_kappa(pair)
        w_inf = -kappa * kappa / mu
    else:
        b_range, kappa, mu, w_inf = None, None, None, 0.0

    if len(rho) >= 2:
        inner = _inner_law(rho, u)
        interp = PchipInterpolator(np.log(rho), u, extrapolate=False)
    else:
        inner = (float(u[0]), 0.0, "linear")
        interp = PchipInterpolator(np.log([rho[0], rho[0] * 1.0001]),
                                   [u[0], u[0]], extrapolate=True)

    return EffectivePotential(
        rho=rho, w=w, threshold=threshold, yukawa_range_b=b_range,
        q_convention=q_convention, problem=problem, w_inf=w_inf,
        bound_kappa=kappa, bound_mu=mu,
        _u_interp=interp, _inner=inner, _u_last=float(u[-1]))
