"""Modal Legendre DG core.

Cell data is stored as coefficient arrays of shape (ncells, nvars, k+1) in
the basis P_l(2 (x - x_j) / dx_j), so the cell mean is coefficient l = 0, the
right-edge trace is the plain coefficient sum and the left-edge trace is the
alternating sum.
"""

from __future__ import annotations

import numpy as np

from .models import SolverError, numerical_flux

# Gauss-Lobatto rules on [-1, 1]; n points integrate degree <= 2n - 3 exactly.
_LOBATTO = {
    2: (np.array([-1.0, 1.0]), np.array([1.0, 1.0])),
    3: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, 4.0, 1.0]) / 3.0),
    4: (
        np.array([-1.0, -1.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0), 1.0]),
        np.array([1.0, 5.0, 5.0, 1.0]) / 6.0,
    ),
    5: (
        np.array([-1.0, -np.sqrt(3.0 / 7.0), 0.0, np.sqrt(3.0 / 7.0), 1.0]),
        np.array([0.1, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 0.1]),
    ),
}


def lobatto_rule(n: int):
    """Nodes and weights of the n-point Gauss-Lobatto rule on [-1, 1]."""
    try:
        return _LOBATTO[n]
    except KeyError:
        raise SolverError(f"Gauss-Lobatto rule with {n} points not tabulated") from None


def legendre_eval(l: int, xi):
    """P_l evaluated at xi (any array), by the three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    if l == 0:
        return np.ones_like(xi)
    pm, p = np.ones_like(xi), xi.copy()
    for n in range(1, l):
        pm, p = p, ((2 * n + 1) * xi * p - n * pm) / (n + 1)
    return p


def legendre_deriv(l: int, xi):
    """dP_l/dxi at xi, via P'_{n+1} = P'_{n-1} + (2n + 1) P_n."""
    xi = np.asarray(xi, dtype=float)
    if l == 0:
        return np.zeros_like(xi)
    dm, d = np.zeros_like(xi), np.ones_like(xi)  # P'_0, P'_1
    for n in range(1, l):
        dm, d = d, dm + (2 * n + 1) * legendre_eval(n, xi)
    return d


class _Basis:
    """Cached per-degree quadrature/basis matrices for the volume term."""

    def __init__(self, k: int):
        nodes, weights = lobatto_rule(k + 2)
        ls = np.arange(k + 1)
        self.nodes = nodes
        self.weights = weights
        self.val = np.stack([legendre_eval(l, nodes) for l in ls], axis=1)
        self.dw = np.stack(
            [weights * legendre_deriv(l, nodes) for l in ls], axis=1
        )
        self.sign = np.where(ls % 2 == 0, 1.0, -1.0)
        self.twol1 = 2.0 * ls + 1.0


_BASIS: dict[int, _Basis] = {}


def _basis(k: int) -> _Basis:
    if k not in _BASIS:
        _BASIS[k] = _Basis(k)
    return _BASIS[k]


def project_initial(u0, mesh, k: int, nvars: int):
    """L2-project ``u0`` onto the broken polynomial space of degree k.

    ``u0`` maps a flat array of points to values of shape (npoints, nvars).
    Uses a Gauss-Legendre rule with k + 3 points per cell (exact for
    polynomial data of degree up to 2k + 5).
    """
    nq = k + 3
    xq, wq = np.polynomial.legendre.leggauss(nq)
    B = np.stack([legendre_eval(l, xq) for l in range(k + 1)], axis=1)
    x = mesh.centers[:, None] + 0.5 * mesh.sizes[:, None] * xq[None, :]
    vals = np.asarray(u0(x.ravel()), dtype=float).reshape(mesh.ncells, nq, nvars)
    moments = np.einsum("jqv,q,ql->jvl", vals, wq, B)
    return moments * (0.5 * (2.0 * np.arange(k + 1) + 1.0))


def edge_values(coeffs):
    """Right-edge and left-edge traces of every cell: (um, up)."""
    k = coeffs.shape[2] - 1
    sg = _basis(k).sign
    um = coeffs.sum(axis=2)
    up = np.einsum("jvl,l->jv", coeffs, sg)
    return um, up


def eval_at(coeffs, xi):
    """Evaluate the cell polynomials at reference points xi: (n, len(xi), nvars)."""
    k = coeffs.shape[2] - 1
    B = np.stack([legendre_eval(l, np.asarray(xi, dtype=float)) for l in range(k + 1)], axis=1)
    return np.einsum("jvl,ql->jqv", coeffs, B)


def nodal_values(coeffs):
    """Values at the volume quadrature nodes (endpoints included)."""
    k = coeffs.shape[2] - 1
    return np.einsum("jvl,ql->jqv", coeffs, _basis(k).val)


def _check_states(model, u, base_index, per_cell):
    mask = model.bad_mask(u)
    if mask is None or not mask.any():
        return
    flat = int(np.flatnonzero(mask.ravel())[0])
    cell = base_index + flat // per_cell
    raise SolverError(f"nonphysical state in cell {cell}")


def volume_term(coeffs, model):
    """Unscaled volume contribution: integral of f(u_h) dP_l over the cell."""
    k = coeffs.shape[2] - 1
    bas = _basis(k)
    u = np.einsum("jvl,ql->jqv", coeffs, bas.val)
    F = model.flux(u)
    return np.einsum("jqv,ql->jvl", F, bas.dw)


def compute_lh(
    coeffs,
    sizes,
    model,
    flux_kind,
    alpha,
    *,
    periodic_wrap=False,
    ext_left=None,
    ext_right=None,
    base_index=0,
):
    """Semi-discrete operator on a contiguous block of cells.

    The two outer edges either wrap periodically or use prescribed exterior
    traces ``ext_left``/``ext_right`` (shape (nvars,)). Returns the operator
    values L (same shape as ``coeffs``) and the interface fluxes h at all
    block edges (n + 1, nvars); h[0] == h[-1] bitwise under periodic wrap.
    """
    n, nvars, K1 = coeffs.shape
    k = K1 - 1
    bas = _basis(k)
    um, up = edge_values(coeffs)

    u_q = np.einsum("jvl,ql->jqv", coeffs, bas.val)
    _check_states(model, u_q, base_index, u_q.shape[1])
    F = model.flux(u_q)
    vol = np.einsum("jqv,ql->jvl", F, bas.dw)

    if periodic_wrap:
        left_states = np.concatenate([um[-1:], um[:-1]], axis=0)
    else:
        if ext_left is None or ext_right is None:
            raise SolverError("exterior traces required for a non-periodic block")
        left_states = np.concatenate([np.asarray(ext_left)[None], um[:-1]], axis=0)
    h_main = numerical_flux(model, flux_kind, left_states, up, alpha)
    if periodic_wrap:
        h_last = h_main[0]
    else:
        h_last = numerical_flux(
            model, flux_kind, um[-1], np.asarray(ext_right), alpha
        )
    h = np.concatenate([h_main, h_last[None]], axis=0)

    scale = bas.twol1[None, None, :] / sizes[:, None, None]
    L = scale * (vol - h[1:, :, None] + bas.sign[None, None, :] * h[:-1, :, None])
    return L, h


def ghost_trace(trace, boundary_kind, model, fixed=None):
    """Exterior trace just outside a physical boundary edge.

    ``fixed`` is the prescribed exterior state of that side for the
    'dirichlet' kind; a dirichlet side left unprescribed is zero-gradient.
    """
    if boundary_kind == "outflow":
        return trace
    if boundary_kind == "dirichlet":
        return trace if fixed is None else np.asarray(fixed, dtype=float)
    if boundary_kind == "reflective":
        if model.nvars == 1:
            raise SolverError("reflective boundaries need a momentum variable")
        return model.reflect(trace)
    raise SolverError(f"no ghost rule for boundary kind {boundary_kind!r}")


def ghost_mean(mean, boundary_kind, model, fixed=None):
    """Cell mean of the implied ghost cell outside a physical boundary."""
    return ghost_trace(mean, boundary_kind, model, fixed)
