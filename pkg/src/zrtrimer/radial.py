"""Numerov bound-state solver for the hyper-radial equation.

The equation (-d^2/drho^2 + W(rho) - eps) f = 0 with eps = 2mE/hbar^2 is
integrated on a log grid: with t = ln(rho) and f = sqrt(rho) g(t) it turns
into g'' = q(t) g, q = 1/4 + rho^2 (W - eps), which Numerov handles with a
uniform step in t at fourth order.  Eigenvalues are isolated by node-count
bisection on the outward solution and refined on the two-sided
log-derivative matching residual at the outer classical turning point.

Trial energies far below threshold make the outer region a huge barrier;
integration is cut off once the accumulated barrier action passes ~60
e-folds (any admixture beyond that is below double precision anyway), which
also keeps the Numerov step well inside its stability range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .angular import efimov_constant
from .system import UnitSystem

_BIG = 1e140
_TINY = 1e-140

#: Barrier action (in e-folds) after which outward/inward sweeps are cut off.
_ACTION_CAP = 60.0


def count_nodes(f) -> int:
    """Number of strict sign changes of the samples, ignoring zeros.

    Endpoint zeros imposed by boundary conditions therefore never count,
    and touching zeros ([1, 0, 1]) do not count as crossings.
    """
    vals = [float(v) for v in np.asarray(f, dtype=float).ravel() if v != 0.0]
    if not vals:
        return 0
    nodes = 0
    prev_neg = vals[0] < 0.0
    for v in vals[1:]:
        neg = v < 0.0
        if neg != prev_neg:
            nodes += 1
        prev_neg = neg
    return nodes


def _numerov(q: np.ndarray, h: float, y0: float, y1: float,
             record: bool = False):
    """Propagate g'' = q g over the uniform grid that carries q.

    Returns (nodes, y[-3], y[-2], y[-1], ys) where ys is the full record or
    None.  The solution is rescaled by 1e-140 whenever it passes 1e140; the
    recorded history is rescaled with it, so relative structure survives.
    """
    n = len(q)
    h2_12 = h * h / 12.0
    c = (1.0 - h2_12 * q).tolist()
    a = [12.0 - 10.0 * ci for ci in c]
    ym, yb = y0, y1
    yp = y0
    nodes = 0
    if ym != 0.0 and yb != 0.0 and (ym < 0.0) != (yb < 0.0):
        nodes += 1
    ys = [y0, y1] if record else None
    for i in range(1, n - 1):
        yc = (a[i] * yb - c[i - 1] * ym) / c[i + 1]
        if yc != 0.0 and yb != 0.0 and (yc < 0.0) != (yb < 0.0):
            nodes += 1
        yp, ym, yb = ym, yb, yc
        if record:
            ys.append(yb)
        if abs(yb) > _BIG:
            ym *= _TINY
            yb *= _TINY
            yp *= _TINY
            if record:
                for k in range(len(ys)):
                    ys[k] *= _TINY
    return nodes, yp, ym, yb, ys


@dataclass(frozen=True)
class RadialSweep:
    """One-directional Numerov sweep: samples plus the end log-derivative."""

    rho: np.ndarray
    f: np.ndarray
    end_log_derivative: float


def _end_logderiv_t(ys: list[float], h: float) -> float:
    """d(ln g)/dt at the last node, one-sided fourth-order stencil."""
    g = ys
    d = (25.0 * g[-1] - 48.0 * g[-2] + 36.0 * g[-3]
         - 16.0 * g[-4] + 3.0 * g[-5]) / (12.0 * h)
    return d / g[-1]


def integrate(potential, energy: float, direction: str,
              bounds: tuple[float, float], n: int = 4001) -> RadialSweep:
    """Numerov integration of the hyper-radial equation at fixed energy.

    energy is in hartree and must lie below the potential threshold.
    Outward sweeps start from the free-equation regular solution
    f(rho_min) = rho_min, f'(rho_min) = 1; inward sweeps start from the
    decaying exponential exp(-kappa rho) with
    kappa = sqrt(2m(-E) - |threshold|).  The returned log-derivative
    d(ln f)/drho is taken at the final node of the sweep.
    """
    if direction not in ("outward", "inward"):
        raise ValueError(f"direction must be 'outward' or 'inward', got {direction!r}")
    lo, hi = bounds
    if not 0.0 < lo < hi:
        raise ValueError("bounds must satisfy 0 < rho_lo < rho_hi")
    if n < 8:
        raise ValueError("need at least 8 grid points")
    eps = potential.eps_from_hartree(energy)
    if eps >= potential.threshold:
        raise ValueError("energy must lie below the dissociation threshold")
    t = np.linspace(math.log(lo), math.log(hi), n)
    h = t[1] - t[0]
    rho = np.exp(t)
    w = potential.values(rho)
    q = 0.25 + rho * rho * (w - eps)

    if direction == "outward":
        # g = f / sqrt(rho) with f = rho over the first step
        y0 = math.sqrt(rho[0])
        y1 = math.sqrt(rho[1])
        _, _, _, _, ys = _numerov(q, h, y0, y1, record=True)
        g = np.array(ys)
        f = g * np.sqrt(rho)
        dg = _end_logderiv_t(ys, h)
        dlogf = (dg + 0.5) / rho[-1]
        return RadialSweep(rho=rho, f=f, end_log_derivative=dlogf)

    kappa = math.sqrt(potential.threshold - eps)
    # exact asymptotic-form values at the last two nodes, scale-free
    y_end = 1.0
    y_prev = math.exp(kappa * (rho[-1] - rho[-2]) + 0.5 * h)
    _, _, _, _, ys = _numerov(q[::-1], h, y_end, y_prev, record=True)
    g = np.array(ys[::-1])
    f = g * np.sqrt(rho)
    scale = math.exp(-kappa * rho[-1]) if kappa * rho[-1] < 650.0 else 1.0
    f = f * (scale / f[-1])
    dg = _end_logderiv_t(ys, h)          # d(ln g)/ds at rho_lo, s = -t
    dlogf = (-dg + 0.5) / rho[0]
    return RadialSweep(rho=rho, f=f, end_log_derivative=dlogf)


@dataclass(frozen=True)
class RadialSolution:
    """One bound state: energy, node count and the sampled wave function."""

    energy: float
    energy_mk: float
    node_count: int
    rho: np.ndarray
    f: np.ndarray
    match_residual: float


class _Shooter:
    """Node counting and two-sided matching on a fixed radial grid."""

    def __init__(self, potential, rho_min: float, rho_max: float, n: int):
        self.pot = potential
        self.t = np.linspace(math.log(rho_min), math.log(rho_max), n)
        self.h = float(self.t[1] - self.t[0])
        self.rho = np.exp(self.t)
        self.w = potential.values(self.rho)
        self.r2 = self.rho * self.rho
        self.n = n
        self.w_min = float(self.w.min())
        self.search_top = min(potential.w_inf, potential.threshold)

    def _q(self, eps: float) -> np.ndarray:
        return 0.25 + self.r2 * (self.w - eps)

    def _turning_and_stop(self, eps: float, q: np.ndarray) -> tuple[int, int]:
        s = self.w - eps
        idx = np.nonzero(s[:-1] * s[1:] < 0.0)[0]
        im = int(idx[-1]) if len(idx) else self.n // 2
        im = min(max(im, 3), self.n - 4)
        action = 0.0
        i = im
        while i < self.n - 1:
            if q[i] > 0.0:
                action += math.sqrt(q[i]) * self.h
                if action > _ACTION_CAP:
                    break
            i += 1
        return im, i

    def _outward_start(self) -> tuple[float, float]:
        return math.exp(self.t[0] / 2.0), math.exp(self.t[1] / 2.0)

    def count(self, eps: float) -> int:
        q = self._q(eps)
        _, stop = self._turning_and_stop(eps, q)
        y0, y1 = self._outward_start()
        nodes, _, _, _, _ = _numerov(q[:stop + 1], self.h, y0, y1)
        return nodes

    def _inward_seed(self, eps: float, stop: int) -> tuple[float, float]:
        w_stop = self.pot.w_inf if stop == self.n - 1 else float(self.w[stop])
        kappa = math.sqrt(max(w_stop - eps, 0.0))
        y_end = 1.0
        y_prev = math.exp(kappa * (self.rho[stop] - self.rho[stop - 1]) + 0.5 * self.h)
        return y_end, y_prev

    def match(self, eps: float, want_wave: bool = False):
        """Normalized difference of outward/inward log-derivatives at the
        turning point; optionally also the stitched, normalized f."""
        q = self._q(eps)
        im, stop = self._turning_and_stop(eps, q)
        y0, y1 = self._outward_start()
        _, o_m1, o_m, o_p1, o_rec = _numerov(q[:im + 2], self.h, y0, y1,
                                             record=want_wave)
        y_end, y_prev = self._inward_seed(eps, stop)
        _, i_p1, i_m, i_m1, i_rec = _numerov(q[im - 1:stop + 1][::-1], self.h,
                                             y_end, y_prev, record=want_wave)
        d_out = (o_p1 - o_m1) / (2.0 * self.h * o_m)
        d_in = (i_p1 - i_m1) / (2.0 * self.h * i_m)
        resid = (d_out - d_in) / (abs(d_out) + abs(d_in) + 1.0)
        if not want_wave:
            return resid
        inward = i_rec[::-1]              # grid indices im-1 .. stop
        scale = o_m / inward[1]
        g = list(o_rec[:im + 1]) + [v * scale for v in inward[2:]]
        g += [0.0] * (self.n - stop - 1)
        f = np.array(g) * np.sqrt(self.rho)
        f /= f[np.abs(f).argmax()]        # max|f| = 1, dominant lobe positive
        return resid, f

    def isolate(self, n_state: int, max_iter: int = 220) -> tuple[float, float]:
        """Bisect until [lo, hi] contains exactly the n_state-th eigenvalue."""
        lo, hi = self.w_min, self.search_top - abs(self.search_top) * 1e-12
        c_lo, c_hi = self.count(lo), self.count(hi)
        if not (c_lo <= n_state < c_hi):
            raise RuntimeError(f"state {n_state} not contained in search window")
        for _ in range(max_iter):
            if (c_lo == n_state and c_hi == n_state + 1
                    and hi - lo <= 1e-3 * abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            c_mid = self.count(mid)
            if c_mid > n_state:
                hi, c_hi = mid, c_mid
            else:
                lo, c_lo = mid, c_mid
        return lo, hi

    def refine(self, lo: float, hi: float) -> float:
        """Polish the eigenvalue inside an isolating bracket."""
        f_lo, f_hi = self.match(lo), self.match(hi)
        while f_lo * f_hi > 0.0:
            # residual pole inside: shrink toward the node-count flip
            mid = 0.5 * (lo + hi)
            if hi - lo <= 1e-13 * abs(hi) or mid in (lo, hi):
                return mid
            if self.count(mid) > self.count(lo):
                hi, f_hi = mid, self.match(mid)
            else:
                lo, f_lo = mid, self.match(mid)
        return brentq(self.match, lo, hi, xtol=1e-300, rtol=8.9e-16)


def default_rho_max(potential) -> float:
    """max(4000 au, 20 |a|) over all pairs of the underlying system."""
    amax = max(abs(p.a) for p in potential.problem.system.pairs
               if math.isfinite(p.a))
    return max(4000.0, 20.0 * amax)


def solve_bound_states(potential, max_states: int = 4, *,
                       rho_min: float = 0.05, rho_max: float | None = None,
                       n: int = 8000) -> list[RadialSolution]:
    """All bound states of the effective potential, deepest first.

    Returns up to max_states solutions ordered by node count; an empty list
    when the potential binds nothing.  Energies are converged to machine
    precision relative tolerance and validated against match_residual.
    """
    if max_states <= 0:
        return []
    if rho_max is None:
        rho_max = default_rho_max(potential)
    shooter = _Shooter(potential, rho_min, rho_max, n)
    if shooter.w_min >= shooter.search_top:
        return []
    top = shooter.search_top - abs(shooter.search_top) * 1e-12
    n_states = min(shooter.count(top), max_states)
    units = potential.problem.system.units
    out = []
    for n_state in range(n_states):
        lo, hi = shooter.isolate(n_state)
        eps = shooter.refine(lo, hi)
        resid, f = shooter.match(eps, want_wave=True)
        energy = potential.hartree_from_eps(eps)
        out.append(RadialSolution(
            energy=energy,
            energy_mk=units.hartree_to_mk(energy),
            node_count=count_nodes(f),
            rho=shooter.rho,
            f=f,
            match_residual=abs(resid)))
    return out


@dataclass(frozen=True)
class ThomasSpectrum:
    """Hard-wall spectrum of the attractive inverse-square potential.

    energies (hartree, default mass scale) are strictly negative and
    ascend toward zero; ratios[k] = energies[k] / energies[k+1] tends to
    exp(2 pi / g) in the scale-invariant regime.
    """

    cutoff_rho0: float
    outer_rho: float
    g: float
    energies: tuple[float, ...]
    ratios: tuple[float, ...]


def thomas_spectrum(g: float | None = None, cutoff_rho0: float = 0.1,
                    outer_rho: float = 3e6, n_states: int = 5,
                    n: int = 12000,
                    units: UnitSystem | None = None) -> ThomasSpectrum:
    """Deepest bound states of W = -(g^2 + 1/4)/rho^2 between hard walls.

    This is the collapse scenario of the bare contact interaction: with the
    inner wall as the only scale, successive levels are spaced by the
    geometric factor exp(2 pi / g).  One-sided shooting with node-count
    bisection; the endpoint condition f(outer wall) = 0 is applied at the
    adaptive barrier cutoff, which is equivalent within double precision.
    """
    if g is None:
        g = efimov_constant()
    if not 0.0 < cutoff_rho0 < outer_rho:
        raise ValueError("need 0 < cutoff_rho0 < outer_rho")
    if outer_rho < 100.0 * cutoff_rho0:
        raise ValueError("outer_rho must be well outside cutoff_rho0")
    units = units or UnitSystem()
    coef = g * g + 0.25
    t = np.linspace(math.log(cutoff_rho0), math.log(outer_rho), n)
    h = float(t[1] - t[0])
    rho = np.exp(t)
    r2 = rho * rho

    def q_of(eps: float) -> np.ndarray:
        return 0.25 - coef - r2 * eps

    def stop_of(eps: float, q: np.ndarray) -> int:
        turn2 = coef / abs(eps)           # turning point squared
        i = int(np.searchsorted(r2, turn2))
        i = min(max(i, 2), n - 1)
        action = 0.0
        while i < n - 1:
            if q[i] > 0.0:
                action += math.sqrt(q[i]) * h
                if action > _ACTION_CAP:
                    break
            i += 1
        return i

    def nodes_end(eps: float) -> tuple[int, float]:
        q = q_of(eps)
        stop = stop_of(eps, q)
        nodes, _, _, y_end, _ = _numerov(q[:stop + 1], h, 0.0, h)
        return nodes, y_end

    w_min = -coef / (cutoff_rho0 * cutoff_rho0)
    top = -1e-300
    available = nodes_end(top)[0]
    n_states = min(n_states, available)
    energies = []
    for n_state in range(n_states):
        lo, hi = w_min, top
        c_lo, c_hi = nodes_end(lo)[0], available
        for _ in range(300):
            if c_lo == n_state and c_hi == n_state + 1:
                break
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            c_mid = nodes_end(mid)[0]
            if c_mid > n_state:
                hi, c_hi = mid, c_mid
            else:
                lo, c_lo = mid, c_mid
        f_lo, f_hi = nodes_end(lo)[1], nodes_end(hi)[1]
        if f_lo * f_hi < 0.0:
            eps = brentq(lambda e: nodes_end(e)[1], lo, hi,
                         xtol=1e-300, rtol=8.9e-16)
        else:
            eps = 0.5 * (lo + hi)
        energies.append(eps / (2.0 * units.mass_scale))
    ratios = tuple(energies[k] / energies[k + 1]
                   for k in range(len(energies) - 1))
    return ThomasSpectrum(cutoff_rho0=cutoff_rho0, outer_rho=outer_rho, g=g,
                          energies=tuple(energies), ratios=ratios)
