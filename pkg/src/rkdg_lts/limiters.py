"""TVB minmod limiting of modal DG states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dg


@dataclass(frozen=True)
class LimiterConfig:
    enabled: bool = True
    cm: float = 0.0          # TVB constant; slopes within cm * h^2 pass through
    characteristic: bool = True  # limit systems in characteristic variables


def minmod(*args):
    a = np.stack(np.broadcast_arrays(*args))
    pos = (a > 0.0).all(axis=0)
    neg = (a < 0.0).all(axis=0)
    mag = np.abs(a).min(axis=0)
    return np.where(pos, mag, np.where(neg, -mag, 0.0))


def modified_minmod(a1, a2, a3, cm, h):
    """minmod(a1, a2, a3) except a1 passes through when |a1| <= cm * h^2."""
    return np.where(np.abs(a1) <= cm * h * h, a1, minmod(a1, a2, a3))


def _to_char(Rinv, v):
    return np.einsum("nij,nj->ni", Rinv, v)


def _from_char(R, v):
    return np.einsum("nij,nj->ni", R, v)


def apply_limiter(coeffs, sizes, mean_left, mean_right, cfg, model):
    """Limit a block of cells given the neighbor means on each side.

    Cell means are never modified. Cells the limiter leaves alone keep their
    coefficients bitwise. Degree >= 2 cells whose modified edge traces differ
    from the originals fall back to a limited linear polynomial.
    """
    k = coeffs.shape[2] - 1
    if not cfg.enabled or k == 0:
        return coeffs.copy()
    mean = coeffs[:, :, 0]
    slope = coeffs[:, :, 1]
    dp = mean_right - mean
    dm = mean - mean_left
    h = sizes[:, None]

    char = cfg.characteristic and model.nvars > 1
    if char:
        R, Rinv = model.char_basis(mean)
        slope_w = _to_char(Rinv, slope)
        dp_w = _to_char(Rinv, dp)
        dm_w = _to_char(Rinv, dm)
    else:
        slope_w, dp_w, dm_w = slope, dp, dm

    out = coeffs.copy()
    if k == 1:
        lim_w = modified_minmod(slope_w, dp_w, dm_w, cfg.cm, h)
        hit = (lim_w != slope_w).any(axis=1)
        if hit.any():
            lim = _from_char(R, lim_w) if char else lim_w
            out[hit, :, 1] = lim[hit]
        return out

    um, up = dg.edge_values(coeffs)
    d_hi = um - mean
    d_lo = mean - up
    if char:
        d_hi_w = _to_char(Rinv, d_hi)
        d_lo_w = _to_char(Rinv, d_lo)
    else:
        d_hi_w, d_lo_w = d_hi, d_lo
    lim_hi = modified_minmod(d_hi_w, dp_w, dm_w, cfg.cm, h)
    lim_lo = modified_minmod(d_lo_w, dp_w, dm_w, cfg.cm, h)
    hit = ((lim_hi != d_hi_w) | (lim_lo != d_lo_w)).any(axis=1)
    if hit.any():
        lin_w = modified_minmod(slope_w, dp_w, dm_w, cfg.cm, h)
        lin = _from_char(R, lin_w) if char else lin_w
        out[hit, :, 1] = lin[hit]
        out[hit, :, 2:] = 0.0
    return out


def neighbor_means(coeffs, mesh, model):
    """Per-cell left/right neighbor means with the mesh boundary rule applied."""
    mean = coeffs[:, :, 0]
    if mesh.periodic:
        return np.roll(mean, 1, axis=0), np.roll(mean, -1, axis=0)
    left = np.empty_like(mean)
    right = np.empty_like(mean)
    left[1:] = mean[:-1]
    right[:-1] = mean[1:]
    left[0] = dg.ghost_mean(mean[0], mesh.boundary_kind, model, mesh.bc_left)
    right[-1] = dg.ghost_mean(mean[-1], mesh.boundary_kind, model, mesh.bc_right)
    return left, right


def limit_mesh(coeffs, mesh, cfg, model):
    """Limit every cell of a whole-mesh state."""
    ml, mr = neighbor_means(coeffs, mesh, model)
    return apply_limiter(coeffs, mesh.sizes, ml, mr, cfg, model)
