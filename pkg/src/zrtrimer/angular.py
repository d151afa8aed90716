"""Hyperangular eigenvalue equation of the zero-range three-body problem.

The lowest hyperangular eigenvalue lambda(rho) enters the hyper-radial
equation through u(rho) = nu^2(rho) = lambda(rho) + 4.  A nontrivial angular
solution exists where the 3x3 boundary-condition matrix M(nu, rho) is
singular; for three identical bosons det M = 0 factorizes and the symmetric
root solves a single transcendental equation.

Everything here works on the real variable u = nu^2.  All transcendental
combinations are even in nu, so u < 0 (imaginary nu = i*kappa) is evaluated
with hyperbolic forms and no complex arithmetic appears anywhere.  The
normalization of every matrix row by sin(nu pi/2) introduces poles at
u = (2n)^2, n >= 1, which are excluded by a guard band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .system import KinematicConstants, PairParams, ParticleSystem, reduced_masses

SQRT3 = math.sqrt(3.0)

#: Exclusion half-width around the normalization poles u = (2n)^2.
POLE_GUARD = 1e-6

#: Default solver tolerances (see AngularProblem).
TOL_RES = 1e-10
TOL_U = 1e-10


class PoleProximityError(ValueError):
    """Evaluation requested inside the guard band of a pole u = (2n)^2."""


class RootSearchError(RuntimeError):
    """No sign change found in the maximal search window."""


def _check_pole(u: float) -> None:
    if u < 4.0 - POLE_GUARD:
        return
    n = max(1, round(math.sqrt(u) / 2.0))
    for m in (n - 1, n, n + 1):
        # strict comparison: the guard-band edge itself stays evaluable, so
        # root brackets clipped to a cell boundary never trip the guard
        if m >= 1 and abs(u - 4.0 * m * m) < POLE_GUARD:
            raise PoleProximityError(
                f"u = {u!r} lies within the guard band of the pole u = {4 * m * m}")


def _cell_interval(u: float) -> tuple[float, float]:
    """Pole-free open interval containing u (clipped by guard bands)."""
    if u < 4.0:
        return (-math.inf, 4.0 - POLE_GUARD)
    n = math.floor(math.sqrt(u) / 2.0)
    return (4.0 * n * n + POLE_GUARD, 4.0 * (n + 1) ** 2 - POLE_GUARD)


def _sinh_ratio(x: float, y: float) -> float:
    """sinh(x)/sinh(y) for 0 <= x <= y, safe against overflow."""
    if x == 0.0:
        return 0.0
    return math.exp(x - y) * (-math.expm1(-2.0 * x)) / (-math.expm1(-2.0 * y))


def nu_cot_half_pi(u: float) -> float:
    """C(u) = nu cos(nu pi/2) / sin(nu pi/2), even in nu, u = nu^2.

    For u > 0 this is sqrt(u) cot(sqrt(u) pi/2); for u < 0 it turns into
    kappa coth(kappa pi/2) with kappa = sqrt(-u); the u -> 0 limit is 2/pi.
    """
    _check_pole(u)
    if u == 0.0:
        return 2.0 / math.pi
    if u > 0.0:
        nu = math.sqrt(u)
        return nu / math.tan(nu * math.pi / 2.0)
    kappa = math.sqrt(-u)
    e = math.exp(-kappa * math.pi)
    return kappa * (1.0 + e) / (1.0 - e)


def sin_ratio(u: float, phi: float) -> float:
    """S(u, phi) = sin(nu (phi - pi/2)) / sin(nu pi/2), even in nu.

    phi must lie in (0, pi/2).  For u < 0 the value is
    -sinh(kappa (pi/2 - phi)) / sinh(kappa pi/2); for u -> 0 it tends to
    (phi - pi/2) / (pi/2).
    """
    if not 0.0 < phi < math.pi / 2.0:
        raise ValueError(f"phi = {phi!r} outside (0, pi/2)")
    _check_pole(u)
    if u == 0.0:
        return (phi - math.pi / 2.0) / (math.pi / 2.0)
    if u > 0.0:
        nu = math.sqrt(u)
        return math.sin(nu * (phi - math.pi / 2.0)) / math.sin(nu * math.pi / 2.0)
    kappa = math.sqrt(-u)
    return -_sinh_ratio(kappa * (math.pi / 2.0 - phi), kappa * math.pi / 2.0)


@lru_cache(maxsize=1)
def efimov_constant() -> float:
    """Positive root g of  g cosh(g pi/2) = (8/sqrt3) sinh(g pi/6).

    The imaginary roots nu = +-i g of the unitary boson equation drive the
    scale-invariant 1/rho^2 attraction; g is about 1.00624.
    """

    def f(g: float) -> float:
        return (g * math.cosh(g * math.pi / 2.0)
                - (8.0 / SQRT3) * math.sinh(g * math.pi / 6.0))

    return brentq(f, 0.5, 2.0, xtol=1e-14, rtol=8.9e-16)


@dataclass(frozen=True)
class AngularProblem:
    """A three-body system prepared for the angular eigenvalue equation.

    With regularized=False the effective-range and shape terms are dropped
    (bare 1/a boundary condition) regardless of the stored pair parameters.
    tol_res and tol_u are guaranteed upper bounds on the residual and the
    root bracket width of accepted eigenvalues; root refinement actually
    converges to machine precision, well inside both.
    """

    system: ParticleSystem
    regularized: bool = True
    tol_res: float = TOL_RES
    tol_u: float = TOL_U
    kinematics: KinematicConstants = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kinematics is None:
            object.__setattr__(self, "kinematics", reduced_masses(self.system))

    def effective_pair(self, i: int) -> PairParams:
        pair = self.system.pairs[i]
        if self.regularized:
            return pair
        return PairParams(a=pair.a, r_eff=0.0, p_shape=0.0)

    @property
    def is_identical_bosons(self) -> bool:
        return self.system.is_identical

    @property
    def is_unitary_bare(self) -> bool:
        return (not self.regularized and self.is_identical_bosons
                and math.isinf(self.system.pairs[0].a))


def _bc_bracket(u: float, rho: float, pair: PairParams, mu: float) -> float:
    """rho/sqrt(mu) * [1/a + (R/2)(mu u/rho^2) + P R^3 (mu u/rho^2)^2].

    This is the boundary-condition side of the diagonal, written in u so
    that (sqrt(mu) nu / rho)^2 = mu u / rho^2 stays real for u < 0.
    """
    inv_a = 0.0 if math.isinf(pair.a) else 1.0 / pair.a
    if pair.r_eff == 0.0:
        return rho / math.sqrt(mu) * inv_a
    if rho == 0.0:
        if u == 0.0:
            return 0.0
        raise ValueError("rho = 0 admits only u = 0 under the extended "
                         "boundary condition")
    k2 = mu * u / (rho * rho)
    return (rho / math.sqrt(mu)) * (inv_a + 0.5 * pair.r_eff * k2
                                    + pair.p_shape * pair.r_eff ** 3 * k2 * k2)


def boson_lhs(u: float) -> float:
    """-C(u) + (8/sqrt3) sin(nu pi/6)/sin(nu pi/2)  (even in nu)."""
    # sin_ratio(u, pi/3) = -sin(nu pi/6)/sin(nu pi/2)
    return -nu_cot_half_pi(u) - (8.0 / SQRT3) * sin_ratio(u, math.pi / 3.0)


def boson_residual(u: float, rho: float, pair: PairParams, mu: float) -> float:
    """LHS(u) - RHS(u, rho) of the identical-boson eigenvalue equation.

    Zero residual means u is an angular eigenvalue at hyper-radius rho.
    The extended boundary condition enters through the pair's R and P.
    """
    return boson_lhs(u) - _bc_bracket(u, rho, pair, mu)


def build_matrix(u: float, rho: float, problem: AngularProblem) -> np.ndarray:
    """3x3 boundary-condition matrix, rows normalized by sin(nu pi/2).

    Diagonal: C(u) + rho/sqrt(mu_i) [1/a_i + (R_i/2) mu_i u/rho^2
    + P_i R_i^3 (mu_i u/rho^2)^2]; off-diagonal (i != j):
    2 S(u, phi_ij) / sin(2 phi_ij).  Its singularity encodes the three
    two-body boundary conditions simultaneously.
    """
    kin = problem.kinematics
    m = np.empty((3, 3))
    c = nu_cot_half_pi(u)
    for i in range(3):
        pair = problem.effective_pair(i)
        m[i, i] = c + _bc_bracket(u, rho, pair, kin.mu[i])
        for j in range(3):
            if i != j:
                phi = kin.phi[i][j]
                m[i, j] = 2.0 * sin_ratio(u, phi) / math.sin(2.0 * phi)
    return m


def _det3(m: np.ndarray) -> float:
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


def _solver_residual(problem: AngularProblem):
    """Scaled residual function used for bracketing and root refinement.

    Identical bosons: the boson equation scaled by max(1, |LHS|, |RHS|).
    General case: det of the normalized matrix scaled by the product of
    row maxima.  Scaling keeps magnitudes O(1) without moving any root.
    """
    if problem.is_identical_bosons:
        pair0 = problem.effective_pair(0)
        mu0 = problem.kinematics.mu[0]

        def resid(u: float, rho: float) -> float:
            lhs = boson_lhs(u)
            rhs = _bc_bracket(u, rho, pair0, mu0)
            return (lhs - rhs) / max(1.0, abs(lhs), abs(rhs))

        return resid

    def resid(u: float, rho: float) -> float:
        m = build_matrix(u, rho, problem)
        scale = 1.0
        for i in range(3):
            scale *= max(abs(m[i, 0]), abs(m[i, 1]), abs(m[i, 2]))
        return _det3(m) / max(scale, 1e-300)

    return resid


def _refine(f, lo: float, hi: float) -> float:
    # converge to machine precision so the branch residual invariant holds
    # with margin even where the residual is steep in u
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)


def _nearest_root(f, guess: float, h0: float | None = None,
                  max_steps: int = 400) -> float:
    """Root of f nearest to guess, by two-sided ladder bracketing.

    Walks outward from the guess in both directions with geometrically
    growing steps, clipped to the pole-free cell containing the guess, and
    refines the first bracket that shows a sign change.  If both directions
    bracket at the same ladder level the root closer to the guess wins.
    """
    lo_cell, hi_cell = _cell_interval(guess)
    if h0 is None:
        h0 = max(1e-9, 1e-4 * (1.0 + abs(guess)))
    if math.isfinite(lo_cell):
        guess = max(guess, lo_cell + h0)
    guess = min(guess, hi_cell - h0)
    f0 = f(guess)
    if f0 == 0.0:
        return guess
    xp = xm = guess
    fp = fm = f0
    h = h0
    for _ in range(max_steps):
        brackets = []
        if xp < hi_cell:
            x2 = min(xp + h, hi_cell)
            f2 = f(x2)
            if f2 == 0.0:
                return x2
            if fp * f2 < 0.0:
                brackets.append((xp, x2))
            xp, fp = x2, f2
        if xm > lo_cell:
            x2 = max(xm - h, lo_cell)
            f2 = f(x2)
            if f2 == 0.0:
                return x2
            if fm * f2 < 0.0:
                brackets.append((x2, xm))
            xm, fm = x2, f2
        if brackets:
            roots = [_refine(f, a, b) for a, b in brackets]
            return min(roots, key=lambda r: abs(r - guess))
        h *= 1.4
    raise RootSearchError(
        f"no sign change near u = {guess:g} (searched [{xm:g}, {xp:g}])")


def solve_at_rho(rho: float, problem: AngularProblem, guess: float) -> float:
    """Angular eigenvalue u = nu^2 at one hyper-radius, continuing a branch.

    Returns the root of the eigenvalue condition closest to `guess`.
    Raises RootSearchError when the maximal search window around the guess
    shows no sign change, and PoleProximityError on pole collision.
    """
    f = _solver_residual(problem)
    return _nearest_root(lambda u: f(u, rho), guess)


def _downward_root(f, start: float = -1e-14,
                   floor: float = -1e12) -> float:
    """First root below `start`, scanning down with geometric steps."""
    u_hi, f_hi = start, f(start)
    u = -1e-7 if start > -1e-7 else start * 1.25
    while u > floor:
        fv = f(u)
        if fv == 0.0:
            return u
        if fv * f_hi < 0.0:
            return _refine(f, u, u_hi)
        u_hi, f_hi = u, fv
        u *= 1.25
    raise RootSearchError(f"no root found scanning down to u = {floor:g}")


def _lowest_in_window(f, lo: float, hi: float,
                      samples: int = 800) -> float:
    """Most negative root: first sign change scanning up from the window floor."""
    xs = np.linspace(lo, hi, samples)
    fprev = f(xs[0])
    for x, xnext in zip(xs[:-1], xs[1:]):
        fnext = f(xnext)
        if fprev == 0.0:
            return float(x)
        if fprev * fnext < 0.0:
            return _refine(f, float(x), float(xnext))
        fprev = fnext
    raise RootSearchError(f"no root in window [{lo:g}, {hi:g}]")


def _bound_pair_scale(problem: AngularProblem) -> float:
    """max over bound pairs of 1/(sqrt(mu_i)|a_i|), or 0 if none bound."""
    best = 0.0
    for i in range(3):
        pair = problem.effective_pair(i)
        if pair.has_bound_dimer and math.isfinite(pair.a):
            best = max(best, 1.0 / (math.sqrt(problem.kinematics.mu[i]) * abs(pair.a)))
    return best


def _first_node_u(rho: float, problem: AngularProblem) -> float:
    """Lowest-branch root at the first grid node.

    Seeding is analytic: the regularized branch passes through u(0) = 0 and
    heads negative, so a downward scan from zero finds it; the bare unitary
    problem sits at u = -g^2 for every rho; otherwise the most negative root
    inside u in [-(rho/(sqrt(mu)|a|) + 20)^2, 4) is taken.
    """
    f = _solver_residual(problem)
    if problem.is_unitary_bare:
        g = efimov_constant()
        return _nearest_root(lambda u: f(u, rho), -g * g)
    scale = _bound_pair_scale(problem)
    extended = problem.regularized and any(
        problem.effective_pair(i).r_eff > 0.0 for i in range(3))
    if extended and rho * scale < 0.3:
        return _downward_root(lambda u: f(u, rho))
    lo = -((rho * scale + 20.0) ** 2)
    return _lowest_in_window(lambda u: f(u, rho), lo, 4.0 - POLE_GUARD)


@dataclass(frozen=True)
class NuBranch:
    """Lowest angular branch u(rho) = nu^2(rho) sampled on a rho grid.

    residuals holds the scaled solver residual at each accepted node;
    lam is lambda = u - 4 exactly.
    """

    rho: np.ndarray
    u: np.ndarray
    residuals: np.ndarray
    branch_id: str = "lowest"

    @property
    def lam(self) -> np.ndarray:
        return self.u - 4.0

    def __len__(self) -> int:
        return len(self.rho)


def trace_branch(grid, problem: AngularProblem,
                 max_halvings: int = 12) -> NuBranch:
    """Trace the lowest branch over a strictly increasing rho grid.

    Each solve is seeded by linear extrapolation from the two previous
    nodes (the first analytically).  If the root is lost or jumps between
    nodes, the step toward the next node is bisected, up to `max_halvings`
    times, before giving up.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) <= 0.0) or grid[0] <= 0.0:
        raise ValueError("grid must be positive and strictly increasing")

    f = _solver_residual(problem)
    us = np.empty_like(grid)
    res = np.empty_like(grid)

    # continuation state: last two accepted (rho, u) points
    hist: list[tuple[float, float]] = []

    def extrapolate(rho_target: float) -> float:
        if len(hist) >= 2 and hist[-1][0] != hist[-2][0]:
            (r2, u2), (r1, u1) = hist[-2], hist[-1]
            return u1 + (u1 - u2) / (r1 - r2) * (rho_target - r1)
        return hist[-1][1]

    def advance(rho_target: float) -> float:
        """Continue the branch from hist[-1] to rho_target, subdividing on
        failure; the step may be halved down to 2^-max_halvings of the gap."""
        gap0 = rho_target - hist[-1][0]
        min_step = gap0 / (2.0 ** max_halvings)
        pending = [rho_target]
        while pending:
            tgt = pending[-1]
            guess = extrapolate(tgt)
            du_pred = guess - hist[-1][1]
            try:
                u_new = solve_at_rho(tgt, problem, guess)
                trust = max(0.5, 0.25 * abs(guess), 8.0 * abs(du_pred))
                ok = abs(u_new - guess) <= trust
            except RootSearchError:
                ok = False
            if ok:
                pending.pop()
                hist.append((tgt, u_new))
                if len(hist) > 2:
                    del hist[0]
            else:
                mid = 0.5 * (hist[-1][0] + tgt)
                if mid - hist[-1][0] < min_step:
                    raise RootSearchError(
                        f"branch continuation failed near rho = {tgt:g} "
                        f"(step refined below gap/2^{max_halvings})")
                pending.append(mid)
        return hist[-1][1]

    for k, rho in enumerate(grid):
        if k == 0:
            u = _first_node_u(rho, problem)
            hist.append((float(rho), u))
        else:
            u = advance(float(rho))
        us[k] = u
        res[k] = f(u, float(rho))
    return NuBranch(rho=grid, u=us, residuals=res)


def nu2_asymptotic(rho: float, pair: PairParams, mu: float,
                   branch: str = "bound") -> float:
    """Large-rho expansion of u = nu^2 on the bare (1/a only) equation.

    branch="free" (no bound dimer): nu = 2 - (12/pi) sqrt(mu) a / rho, so
    u = 4 - (48/pi) sqrt(mu) a / rho to the order kept.  branch="bound":
    u = -x^2 - (16/sqrt3) x exp(-x pi/3) with x = rho/(sqrt(mu)|a|), the
    dimer-channel parabola plus its exponential correction.  Valid for
    rho >> max(|a|, R); the caller is responsible for the domain.
    """
    if branch == "free":
        return 4.0 - (48.0 / math.pi) * math.sqrt(mu) * pair.a / rho
    if branch == "bound":
        if not pair.has_bound_dimer:
            raise ValueError("bound-branch asymptote requires a < 0")
        return dimer_channel_u(rho, 1.0 / abs(pair.a), mu)
    raise ValueError(f"unknown branch {branch!r}")


def dimer_channel_u(rho: float, kappa: float, mu: float) -> float:
    """u(rho) of the dimer channel for pole momentum kappa: the asymptote
    -x^2 - (16/sqrt3) x e^(-x pi/3), x = kappa rho / sqrt(mu)."""
    x = kappa * rho / math.sqrt(mu)
    return -(x * x) - (16.0 / SQRT3) * x * math.exp(-x * math.pi / 3.0)
