"""Conservation-law models and numerical interface fluxes.

Each model exposes the physical flux, pointwise wave speeds, and (for the
gas-dynamics system) the characteristic decomposition used by the limiter.
States are stored with the variable axis last, so every routine broadcasts
over arbitrary leading axes.
"""

from __future__ import annotations

import numpy as np


class SolverError(RuntimeError):
    """Unrecoverable state encountered while building or advancing a solution."""


FLUX_KINDS = ("lax_friedrichs", "local_lax_friedrichs", "godunov", "engquist_osher")


class Advection:
    """Linear transport u_t + u_x = 0 with unit speed."""

    name = "advection"
    nvars = 1

    def flux(self, u):
        return u

    def wave_speed(self, u):
        return np.ones(u.shape[:-1])

    def bad_mask(self, u):
        return None

    def to_primitive(self, u):
        return u


class Burgers:
    """Inviscid Burgers equation u_t + (u^2/2)_x = 0."""

    name = "burgers"
    nvars = 1

    def flux(self, u):
        return 0.5 * u * u

    def wave_speed(self, u):
        return np.abs(u[..., 0])

    def bad_mask(self, u):
        return None

    def to_primitive(self, u):
        return u


class Euler:
    """1D compressible Euler equations in conserved variables (rho, m, E).

    Parameters
    ----------
    gamma : float
        Ratio of specific heats. Pressure closure is
        P = (gamma - 1) (E - m^2 / (2 rho)).
    """

    name = "euler"
    nvars = 3

    def __init__(self, gamma: float = 1.4):
        self.gamma = float(gamma)

    def pressure(self, u):
        rho = u[..., 0]
        m = u[..., 1]
        E = u[..., 2]
        return (self.gamma - 1.0) * (E - 0.5 * m * m / rho)

    def flux(self, u):
        rho = u[..., 0]
        m = u[..., 1]
        E = u[..., 2]
        q = m / rho
        P = (self.gamma - 1.0) * (E - 0.5 * m * q)
        return np.stack([m, m * q + P, q * (E + P)], axis=-1)

    def wave_speed(self, u):
        rho = u[..., 0]
        q = u[..., 1] / rho
        c = np.sqrt(self.gamma * self.pressure(u) / rho)
        return np.abs(q) + c

    def bad_mask(self, u):
        with np.errstate(invalid="ignore"):
            bad = (u[..., 0] <= 0.0) | (self.pressure(u) <= 0.0)
        return bad | ~np.isfinite(u).all(axis=-1)

    def to_primitive(self, u):
        rho = u[..., 0]
        q = u[..., 1] / rho
        return np.stack([rho, q, self.pressure(u)], axis=-1)

    def from_primitive(self, w):
        rho = w[..., 0]
        q = w[..., 1]
        P = w[..., 2]
        E = P / (self.gamma - 1.0) + 0.5 * rho * q * q
        return np.stack([rho, rho * q, E], axis=-1)

    def reflect(self, u):
        """State seen across a solid wall: normal momentum flips sign."""
        out = u.copy()
        out[..., 1] = -out[..., 1]
        return out

    def char_basis(self, u):
        """Right/left eigenvector matrices of the flux Jacobian at states ``u``.

        Parameters
        ----------
        u : ndarray, shape (n, 3)
            Conserved states (typically cell means). Must be physical.

        Returns
        -------
        R, Rinv : ndarray, shape (n, 3, 3)
            ``R`` holds right eigenvectors as columns ordered by eigenvalue
            (q - c, q, q + c); ``Rinv`` is its inverse.
        """
        u = np.asarray(u, dtype=float)
        rho = u[..., 0]
        q = u[..., 1] / rho
        E = u[..., 2]
        P = self.pressure(u)
        c = np.sqrt(self.gamma * P / rho)
        H = (E + P) / rho
        n = u.shape[0]
        R = np.empty((n, 3, 3))
        R[:, 0, 0] = 1.0
        R[:, 1, 0] = q - c
        R[:, 2, 0] = H - q * c
        R[:, 0, 1] = 1.0
        R[:, 1, 1] = q
        R[:, 2, 1] = 0.5 * q * q
        R[:, 0, 2] = 1.0
        R[:, 1, 2] = q + c
        R[:, 2, 2] = H + q * c
        b1 = (self.gamma - 1.0) / (c * c)
        b2 = 0.5 * b1 * q * q
        Rinv = np.empty((n, 3, 3))
        Rinv[:, 0, 0] = 0.5 * (b2 + q / c)
        Rinv[:, 0, 1] = -0.5 * (b1 * q + 1.0 / c)
        Rinv[:, 0, 2] = 0.5 * b1
        Rinv[:, 1, 0] = 1.0 - b2
        Rinv[:, 1, 1] = b1 * q
        Rinv[:, 1, 2] = -b1
        Rinv[:, 2, 0] = 0.5 * (b2 - q / c)
        Rinv[:, 2, 1] = -0.5 * (b1 * q - 1.0 / c)
        Rinv[:, 2, 2] = 0.5 * b1
        return R, Rinv


def make_model(name: str, gamma: float = 1.4):
    if name == "advection":
        return Advection()
    if name == "burgers":
        return Burgers()
    if name == "euler":
        return Euler(gamma)
    raise SolverError(f"unknown model {name!r}")


def _godunov_scalar(model, a, b):
    if model.name == "advection":
        return a.copy()
    if model.name == "burgers":
        fa = 0.5 * a * a
        fb = 0.5 * b * b
        hmin = np.where((a <= 0.0) & (b >= 0.0), 0.0, np.minimum(fa, fb))
        return np.where(a <= b, hmin, np.maximum(fa, fb))
    raise SolverError(f"godunov flux not available for model {model.name!r}")


def _engquist_osher_scalar(model, a, b):
    if model.name == "advection":
        return a.copy()
    if model.name == "burgers":
        ap = np.maximum(a, 0.0)
        bm = np.minimum(b, 0.0)
        return 0.5 * ap * ap + 0.5 * bm * bm
    raise SolverError(f"engquist_osher flux not available for model {model.name!r}")


def numerical_flux(model, kind, a, b, alpha):
    """Interface flux h(a, b) for left/right traces ``a``/``b`` (..., nvars).

    ``alpha`` is the dissipation speed for the global Lax-Friedrichs flux,
    fixed by the caller for one whole step so repeated evaluations with the
    same traces are bitwise identical.
    """
    if kind == "lax_friedrichs":
        return 0.5 * (model.flux(a) + model.flux(b)) - 0.5 * alpha * (b - a)
    if kind == "local_lax_friedrichs":
        s = np.maximum(model.wave_speed(a), model.wave_speed(b))
        return 0.5 * (model.flux(a) + model.flux(b)) - 0.5 * s[..., None] * (b - a)
    if kind == "godunov":
        if model.nvars != 1:
            raise SolverError("godunov flux is scalar-only")
        return _godunov_scalar(model, a, b)
    if kind == "engquist_osher":
        if model.nvars != 1:
            raise SolverError("engquist_osher flux is scalar-only")
        return _engquist_osher_scalar(model, a, b)
    raise SolverError(f"unknown flux kind {kind!r}")
