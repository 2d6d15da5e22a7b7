"""Closed-form and semi-analytic reference solutions.

These are the comparison targets for the error tables: linear transport of
smooth and square-wave profiles, the pre-/post-shock solution of the Burgers
benchmark, and the exact Riemann solution of the 1D Euler equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import SolverError


def advection_exact(x, t, profile="smooth"):
    """Unit-speed transport of the initial profile on the domain (-1, 1).

    ``smooth`` is sin(pi x), transported periodically. ``step`` is a front
    entering through the left boundary: the solution is 2 behind x = t - 1
    and -1 ahead of it, so the domain starts uniformly at -1 and the jump
    reaches x = 0 at t = 1.
    """
    x = np.asarray(x, dtype=float)
    if profile == "smooth":
        return np.sin(np.pi * (x - t))
    if profile == "step":
        return np.where(x - t < -1.0, 2.0, -1.0)
    raise SolverError(f"unknown advection profile {profile!r}")


def _wave_foot_limit(s: float) -> float:
    """Largest characteristic foot y0 in [0, 1] still reaching x before the shock.

    For v_t + v v_x = 0 with v(y, 0) = sin(pi y), characteristics from feet in
    [0, y0*] cover [0, 1) injectively; feet beyond y0* have crossed into the
    shock that sits at y = 1 once s >= 1/pi.
    """
    if s <= 1.0 / np.pi:
        return 1.0
    ym = np.arccos(-1.0 / (np.pi * s)) / np.pi
    lo, hi = 0.0, float(ym)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if mid + s * np.sin(np.pi * mid) - 1.0 >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def burgers_wave(y, s):
    """Entropy solution v(y, s) of v_t + v v_x = 0 with v(y, 0) = sin(pi y).

    Odd and 2-periodic in y; a stationary shock forms at y = +-1 once
    s >= 1/pi. Solved by bisecting the characteristic relation
    y0 + s sin(pi y0) = y on the pre-shock branch, then Newton-polishing the
    implicit relation v = sin(pi (y - v s)).
    """
    y = np.asarray(y, dtype=float)
    s = float(s)
    w = y - 2.0 * np.floor((y + 1.0) / 2.0)
    sign = np.where(w < 0.0, -1.0, 1.0)
    z = np.abs(w)
    foot_hi = _wave_foot_limit(s)
    lo = np.zeros_like(z)
    hi = np.full_like(z, foot_hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        f = mid + s * np.sin(np.pi * mid) - z
        hi = np.where(f >= 0.0, mid, hi)
        lo = np.where(f < 0.0, mid, lo)
    v = np.sin(np.pi * 0.5 * (lo + hi))
    for _ in range(3):
        arg = np.pi * (z - v * s)
        F = v - np.sin(arg)
        dF = 1.0 + np.pi * s * np.cos(arg)
        v = np.where(np.abs(dF) > 1e-12, v - F / np.where(dF == 0.0, 1.0, dF), v)
    return sign * v


def burgers_exact(x, t):
    """Benchmark solution w(x, t) with w(x, 0) = 1/4 + sin(pi x)/2.

    Built from the unit-amplitude wave by the shift/scale family
    w = c + b v(x - c t, b t) with c = 1/4, b = 1/2; its shock travels at
    speed 1/4 from x = 1.
    """
    x = np.asarray(x, dtype=float)
    return 0.25 + 0.5 * burgers_wave(x - 0.25 * t, 0.5 * t)


def burgers_shock_time() -> float:
    """Time at which the benchmark solution forms its shock."""
    return 2.0 / np.pi


def burgers_shock_position(t: float) -> float:
    """Shock location wrapped into [-1, 1) (meaningful for t >= shock time)."""
    xs = 1.0 + 0.25 * t
    return ((xs + 1.0) % 2.0) - 1.0


@dataclass(frozen=True)
class RiemannSolution:
    """Self-similar solution of one Riemann problem in primitives (rho, q, P)."""

    left: tuple[float, float, float]
    right: tuple[float, float, float]
    gamma: float
    p_star: float
    q_star: float

    def sample(self, xi):
        """Primitive state at similarity coordinates xi = x / t, shape (n, 3)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        g = self.gamma
        gm = (g - 1.0) / (g + 1.0)
        rho = np.empty_like(xi)
        q = np.empty_like(xi)
        P = np.empty_like(xi)

        rhoL, qL, PL = self.left
        cL = np.sqrt(g * PL / rhoL)
        rhoR, qR, PR = self.right
        cR = np.sqrt(g * PR / rhoR)
        ps = self.p_star
        qs = self.q_star

        lhs = xi <= qs
        if ps > PL:
            SL = qL - cL * np.sqrt((g + 1.0) / (2.0 * g) * ps / PL
                                   + (g - 1.0) / (2.0 * g))
            rs = rhoL * ((ps / PL + gm) / (gm * ps / PL + 1.0))
            pre = lhs & (xi <= SL)
            post = lhs & (xi > SL)
            rho[pre], q[pre], P[pre] = rhoL, qL, PL
            rho[post], q[post], P[post] = rs, qs, ps
        else:
            cs = cL * (ps / PL) ** ((g - 1.0) / (2.0 * g))
            head = qL - cL
            tail = qs - cs
            pre = lhs & (xi <= head)
            star = lhs & (xi >= tail)
            fan = lhs & ~pre & ~star
            rho[pre], q[pre], P[pre] = rhoL, qL, PL
            rho[star] = rhoL * (ps / PL) ** (1.0 / g)
            q[star], P[star] = qs, ps
            cf = (2.0 / (g + 1.0)) * (cL + 0.5 * (g - 1.0) * (qL - xi[fan]))
            rho[fan] = rhoL * (cf / cL) ** (2.0 / (g - 1.0))
            q[fan] = xi[fan] + cf
            P[fan] = PL * (cf / cL) ** (2.0 * g / (g - 1.0))

        rhs = ~lhs
        if ps > PR:
            SR = qR + cR * np.sqrt((g + 1.0) / (2.0 * g) * ps / PR
                                   + (g - 1.0) / (2.0 * g))
            rs = rhoR * ((ps / PR + gm) / (gm * ps / PR + 1.0))
            post = rhs & (xi < SR)
            pre = rhs & (xi >= SR)
            rho[pre], q[pre], P[pre] = rhoR, qR, PR
            rho[post], q[post], P[post] = rs, qs, ps
        else:
            cs = cR * (ps / PR) ** ((g - 1.0) / (2.0 * g))
            head = qR + cR
            tail = qs + cs
            pre = rhs & (xi >= head)
            star = rhs & (xi <= tail)
            fan = rhs & ~pre & ~star
            rho[pre], q[pre], P[pre] = rhoR, qR, PR
            rho[star] = rhoR * (ps / PR) ** (1.0 / g)
            q[star], P[star] = qs, ps
            cf = (2.0 / (g + 1.0)) * (cR - 0.5 * (g - 1.0) * (qR - xi[fan]))
            rho[fan] = rhoR * (cf / cR) ** (2.0 / (g - 1.0))
            q[fan] = xi[fan] - cf
            P[fan] = PR * (cf / cR) ** (2.0 * g / (g - 1.0))

        return np.stack([rho, q, P], axis=-1)


def _pressure_fn(P, rhoK, PK, cK, g):
    """Toro-style f_K(P) and its derivative for one side of the star region."""
    if P > PK:
        AK = 2.0 / ((g + 1.0) * rhoK)
        BK = (g - 1.0) / (g + 1.0) * PK
        root = np.sqrt(AK / (P + BK))
        f = (P - PK) * root
        df = root * (1.0 - 0.5 * (P - PK) / (BK + P))
    else:
        f = 2.0 * cK / (g - 1.0) * ((P / PK) ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = (P / PK) ** (-(g + 1.0) / (2.0 * g)) / (rhoK * cK)
    return f, df


def solve_riemann(left, right, gamma=1.4, tol=1e-12, max_iter=100):
    """Star-region pressure/velocity via Newton iteration on the pressure function.

    ``left``/``right`` are primitive triples (rho, q, P). The initial guess is
    the two-rarefaction approximation; iteration stops when the relative
    pressure change drops below ``tol``.

    Raises
    ------
    SolverError
        If the data would generate vacuum or the iteration fails to converge.
    """
    rhoL, qL, PL = map(float, left)
    rhoR, qR, PR = map(float, right)
    g = float(gamma)
    if min(rhoL, rhoR, PL, PR) <= 0.0:
        raise SolverError("Riemann data must have positive density and pressure")
    cL = np.sqrt(g * PL / rhoL)
    cR = np.sqrt(g * PR / rhoR)
    if 2.0 * (cL + cR) / (g - 1.0) <= qR - qL:
        raise SolverError("Riemann data generates vacuum")

    z = (g - 1.0) / (2.0 * g)
    p = ((cL + cR - 0.5 * (g - 1.0) * (qR - qL))
         / (cL / PL ** z + cR / PR ** z)) ** (1.0 / z)
    p = max(p, 1e-14)
    for _ in range(max_iter):
        fL, dL = _pressure_fn(p, rhoL, PL, cL, g)
        fR, dR = _pressure_fn(p, rhoR, PR, cR, g)
        dp = (fL + fR + (qR - qL)) / (dL + dR)
        p_new = max(p - dp, 1e-14)
        change = abs(p_new - p) / (0.5 * (p_new + p))
        p = p_new
        if change <= tol:
            break
    else:
        raise SolverError("Riemann star-pressure iteration did not converge")
    fL, _ = _pressure_fn(p, rhoL, PL, cL, g)
    fR, _ = _pressure_fn(p, rhoR, PR, cR, g)
    q_star = 0.5 * (qL + qR) + 0.5 * (fR - fL)
    return RiemannSolution(left=(rhoL, qL, PL), right=(rhoR, qR, PR),
                           gamma=g, p_star=float(p), q_star=float(q_star))


def euler_riemann_exact(left, right, gamma, xi):
    """Primitive states (rho, q, P) at similarity coordinates xi = x / t."""
    return solve_riemann(left, right, gamma).sample(xi)
