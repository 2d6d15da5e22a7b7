"""Strong-stability-preserving Runge-Kutta schemes and the single-rate step.

Schemes are stored in Shu-Osher form: stage i (1-based) is
U^(i) = sum_nu alpha[i-1][nu] U^(nu) + dt * beta[i-1][nu] L(U^(nu)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dg, limiters
from .models import SolverError


@dataclass(frozen=True)
class RKScheme:
    order: int
    stages: int
    alpha: tuple[tuple[float, ...], ...]
    beta: tuple[tuple[float, ...], ...]

    @property
    def ssp_coeff(self) -> float:
        c = np.inf
        for arow, brow in zip(self.alpha, self.beta):
            for a, b in zip(arow, brow):
                if b != 0.0:
                    c = min(c, a / b)
        return c


_RK22 = RKScheme(
    order=2,
    stages=2,
    alpha=((1.0,), (0.5, 0.5)),
    beta=((1.0,), (0.0, 0.5)),
)

_RK33 = RKScheme(
    order=3,
    stages=3,
    alpha=((1.0,), (0.75, 0.25), (1.0 / 3.0, 0.0, 2.0 / 3.0)),
    beta=((1.0,), (0.0, 0.25), (0.0, 0.0, 2.0 / 3.0)),
)

_RK54 = RKScheme(
    order=4,
    stages=5,
    alpha=(
        (1.0,),
        (0.261216512493821, 0.738783487506179),
        (0.623613752757655, 0.0, 0.376386247242345),
        (0.444745181201454, 0.120932584902288, 0.0, 0.434322233896258),
        (0.213357715199957, 0.209928473023448, 0.063353148180384, 0.0,
         0.513360663596212),
    ),
    beta=(
        (0.605491839566400,),
        (0.0, 0.447327372891397),
        (0.000000844149769, 0.0, 0.227898801230261),
        (0.002856233144485, 0.073223693296006, 0.0, 0.262978568366434),
        (0.002362549760441, 0.127109977308333, 0.038359814234063, 0.0,
         0.310835692561898),
    ),
)

_SCHEMES = {2: _RK22, 3: _RK33, 4: _RK54}


def scheme_for_order(order: int) -> RKScheme:
    try:
        return _SCHEMES[order]
    except KeyError:
        raise SolverError(f"no SSP scheme registered for order {order}") from None


def _combine(scheme, i, states, dt, ls):
    """Stage i (1-based) from prior states and operator evaluations."""
    arow = scheme.alpha[i - 1]
    brow = scheme.beta[i - 1]
    new = None
    for nu, (a, b) in enumerate(zip(arow, brow)):
        term = None
        if a != 0.0:
            term = a * states[nu]
        if b != 0.0:
            piece = (dt * b) * ls[nu]
            term = piece if term is None else term + piece
        if term is not None:
            new = term if new is None else new + term
    return new


def _mesh_lh(coeffs, mesh, model, flux_kind, alpha):
    if mesh.periodic:
        L, _ = dg.compute_lh(
            coeffs, mesh.sizes, model, flux_kind, alpha, periodic_wrap=True
        )
        return L
    um, up = dg.edge_values(coeffs)
    ext_l = dg.ghost_trace(up[0], mesh.boundary_kind, model, mesh.bc_left)
    ext_r = dg.ghost_trace(um[-1], mesh.boundary_kind, model, mesh.bc_right)
    L, _ = dg.compute_lh(
        coeffs, mesh.sizes, model, flux_kind, alpha,
        ext_left=ext_l, ext_right=ext_r,
    )
    return L


def gts_step(coeffs, dt, scheme, model, mesh, limcfg, flux_kind, alpha=None):
    """One single-rate SSP-RK step of the whole mesh, limiting after each stage."""
    if alpha is None:
        alpha = float(model.wave_speed(dg.nodal_values(coeffs)).max())
    states = [coeffs]
    ls = []
    for i in range(1, scheme.stages + 1):
        ls.append(_mesh_lh(states[i - 1], mesh, model, flux_kind, alpha))
        new = _combine(scheme, i, states, dt, ls)
        new = limiters.limit_mesh(new, mesh, limcfg, model)
        states.append(new)
    return states[scheme.stages]
