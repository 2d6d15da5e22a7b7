"""Multirate time stepping with per-region refinement ratios.

One coarse step of size dt proceeds in three phases. First every interface
cell (a ratio-1 cell touching a refined island) evolves its own Runge-Kutta
stage states locally, closing both edges with its interior traces. Those
stage states are then combined, per fine substep p and stage i, into
predicted interface polynomials by precomputed weight tables, which hand the
island a time-accurate exterior trace at every substage. Regular coarse
cells take one ordinary step; island cells take M substeps of dt/M, with
every flux they compute against a predicted trace recorded. Finally each
interface cell is re-advanced by a corrector that consumes the recorded
fine-side fluxes (bitwise, so interface totals telescope) together with
frozen coarse-side fluxes, and the whole mesh is limited at the new time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dg, limiters, ssprk
from .limiters import modified_minmod
from .models import SolverError, numerical_flux


class InternalConsistencyError(RuntimeError):
    """A bookkeeping invariant of the multirate step was violated."""


@dataclass(frozen=True)
class PredictorTable:
    """Weights over interface stage states, indexed (substep p, stage i)."""

    order: int
    substeps: int
    weights: np.ndarray  # (M, stages, stages)


_TABLES: dict[tuple[int, int], PredictorTable] = {}


def _order2_weights(M: int) -> np.ndarray:
    p = np.arange(M, dtype=float)
    theta = p / M
    eta = (p + 1.0) / M
    W = np.zeros((M, 2, 2))
    W[:, 0, 0] = 1.0 - theta
    W[:, 0, 1] = theta
    W[:, 1, 0] = 1.0 - eta
    W[:, 1, 1] = eta
    return W


def _order3_weights(M: int) -> np.ndarray:
    p = np.arange(M, dtype=float)
    M2 = float(M * M)
    theta = p / M
    theta2 = p * p / M2
    eta = (p + 1.0) / M
    eta2 = p * (p + 2.0) / M2
    gam = (2.0 * p + 1.0) / (2.0 * M)
    gam2 = (2.0 * p * p + 2.0 * p + 1.0) / (2.0 * M2)
    W = np.zeros((M, 3, 3))
    for row, (lin, quad) in enumerate(((theta, theta2), (eta, eta2), (gam, gam2))):
        W[:, row, 0] = 1.0 - lin - quad
        W[:, row, 1] = lin - quad
        W[:, row, 2] = 2.0 * quad
    return W


def _stage_series(al, be, s: int, scale: float, tau: float) -> list:
    """Per-stage expansion coefficients over the derivative basis.

    Basis: (dt u', dt^2 u'', dt^3 H[u',u'], dt^3 J J u') where J and H are
    the first and second derivatives of the right-hand side at the step
    start. Each stage value of a Runge-Kutta pass of step size scale*dt,
    started from the exact solution at offset tau*dt, equals the start state
    plus coefs . basis up to fourth-order terms. The two dt^3 quantities
    must stay separate: a stage value samples the exact solution only to
    first order, so its slope picks up the Jacobian and Hessian pieces with
    unequal weights.
    """
    coefs = [np.array([tau, 0.5 * tau * tau, tau ** 3 / 6.0, tau ** 3 / 6.0])]
    for i in range(1, s):
        acc = np.zeros(4)
        for nu, (a, b) in enumerate(zip(al[i - 1], be[i - 1])):
            if a != 0.0:
                acc = acc + a * coefs[nu]
            if b != 0.0:
                c = coefs[nu]
                acc = acc + (b * scale) * np.array([1.0, c[0], 0.5 * c[0] * c[0], c[1]])
        coefs.append(acc)
    return coefs


def _order4_weights(scheme, M: int) -> np.ndarray:
    # Reconstruct the four derivative-basis quantities as linear
    # functionals of the five stage states (the coarse-stage expansions form
    # an exactly determined system), then rebuild every substage value by
    # running the stage recursion on the basis.
    al = scheme.alpha
    be = scheme.beta
    s = scheme.stages
    e = np.eye(s)
    dw = (e[1] - e[0]) / be[0][0]  # dt * du/dt at the step start
    coarse = _stage_series(al, be, s, 1.0, 0.0)
    rec = np.array([coarse[i][1:] for i in range(2, s)])
    if abs(np.linalg.det(rec)) < 1e-12:
        raise InternalConsistencyError("singular derivative reconstruction")
    data = np.stack([e[i] - e[0] - coarse[i][0] * dw for i in range(2, s)])
    basis = np.vstack([dw, np.linalg.solve(rec, data)])

    W = np.zeros((M, s, s))
    for p in range(M):
        coefs = _stage_series(al, be, s, 1.0 / M, p / M)
        for i, c in enumerate(coefs):
            row = e[0] + c @ basis
            row[0] += 1.0 - row.sum()
            W[p, i] = row
    return W


def build_predictor_table(scheme, M: int) -> PredictorTable:
    """Weight table mapping interface stage states to substage predictions."""
    M = int(M)
    if M < 1:
        raise SolverError("substep count must be >= 1")
    key = (scheme.order, M)
    if key in _TABLES:
        return _TABLES[key]
    if scheme.order == 2:
        W = _order2_weights(M)
    elif scheme.order == 3:
        W = _order3_weights(M)
    elif scheme.order == 4:
        W = _order4_weights(scheme, M)
    else:
        raise SolverError(f"no predictor for order {scheme.order}")
    if np.abs(W.sum(axis=-1) - 1.0).max() > 1e-14:
        raise InternalConsistencyError("predictor weights do not sum to one")
    table = PredictorTable(order=scheme.order, substeps=M, weights=W)
    _TABLES[key] = table
    return table


def predict_interface(stage_states, table: PredictorTable):
    """Predicted interface-cell polynomials for all (substep, stage) pairs.

    ``stage_states`` has shape (stages, nvars, k+1); the result has shape
    (M, stages, nvars, k+1).
    """
    return np.einsum("pim,mvk->pivk", table.weights, stage_states)


def _neighbor(mesh, j, side):
    n = mesh.ncells
    if side == "left":
        if j > 0:
            return j - 1
        return n - 1 if mesh.periodic else None
    if j < n - 1:
        return j + 1
    return 0 if mesh.periodic else None


def _trace_right(cell):  # right-edge trace of one cell state (nvars, k+1)
    return cell.sum(axis=-1)


def _trace_left(cell):
    k = cell.shape[-1] - 1
    return cell @ dg._basis(k).sign


@dataclass
class _Pred:
    j0: int
    end: str                 # 'left': island right of j0; 'right': island left of j0
    traces: np.ndarray       # (M, stages, nvars), re-limited in place
    means: np.ndarray        # (M, stages, nvars)
    coarse_means: np.ndarray  # (stages, nvars) stage means on j0's coarse side
    size: float              # width of cell j0


def _relimit_trace(pred: _Pred, p: int, i: int, fine_block, limcfg, model):
    """Clip the predicted trace (p, i) against the adjacent means."""
    if not limcfg.enabled:
        return
    pm = pred.means[p, i]
    tr = pred.traces[p, i]
    cn = pred.coarse_means[i]
    if pred.end == "left":
        fm = fine_block[0, :, 0]
        args = (tr - pm, fm - pm, pm - cn)
        sign = 1.0
    else:
        fm = fine_block[-1, :, 0]
        args = (pm - tr, cn - pm, pm - fm)
        sign = -1.0
    char = limcfg.characteristic and model.nvars > 1
    if char:
        bad = model.bad_mask(pm[None])
        if bad is not None and bad.any():
            char = False
    if char:
        R, Rinv = model.char_basis(pm[None])
        w = [Rinv[0] @ a for a in args]
        m = modified_minmod(w[0], w[1], w[2], limcfg.cm, pred.size)
        delta = R[0] @ m
    else:
        delta = modified_minmod(args[0], args[1], args[2], limcfg.cm, pred.size)
    pred.traces[p, i] = pm + sign * delta


def _local_stages(coeffs, j0, dt, scheme, model, mesh, limcfg, flux_kind,
                  alpha, iface_limit):
    """Stage states 0..s-1 of one interface cell, both edges self-closed."""
    s = scheme.stages
    cell = coeffs[j0:j0 + 1]
    sizes = mesh.sizes[j0:j0 + 1]
    if iface_limit:
        jl = _neighbor(mesh, j0, "left")
        jr = _neighbor(mesh, j0, "right")
        ml = (coeffs[jl, :, 0] if jl is not None
              else dg.ghost_mean(coeffs[j0, :, 0], mesh.boundary_kind, model,
                                 mesh.bc_left))[None]
        mr = (coeffs[jr, :, 0] if jr is not None
              else dg.ghost_mean(coeffs[j0, :, 0], mesh.boundary_kind, model,
                                 mesh.bc_right))[None]
    states = [cell]
    ls = []
    for i in range(1, s):
        prev = states[i - 1]
        um, up = dg.edge_values(prev)
        L, _ = dg.compute_lh(
            prev, sizes, model, flux_kind, alpha,
            ext_left=up[0], ext_right=um[0], base_index=j0,
        )
        ls.append(L)
        new = ssprk._combine(scheme, i, states, dt, ls)
        if iface_limit:
            new = limiters.apply_limiter(new, sizes, ml, mr, limcfg, model)
        states.append(new)
    return np.concatenate(states, axis=0)


def _coarse_blocks(mesh):
    regular = mesh.ratios == 1
    for j0 in mesh.interface_indices:
        regular[j0] = False
    idx = np.flatnonzero(regular)
    if idx.size == 0:
        return []
    runs = np.split(idx, np.flatnonzero(np.diff(idx) != 1) + 1)
    if (mesh.periodic and len(runs) > 1
            and runs[0][0] == 0 and runs[-1][-1] == mesh.ncells - 1):
        runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
    return runs


def advance_coarse(coeffs, dt, scheme, model, mesh, limcfg, flux_kind, alpha,
                   iface_stages):
    """Advance all regular coarse cells one full step.

    Returns the partially updated solution (regular cells at the new time)
    and the per-stage global state arrays G[nu] (nu = 0..s-1) holding stage
    states for regular and interface cells.
    """
    s = scheme.stages
    bk = mesh.boundary_kind
    out = coeffs.copy()
    G = [coeffs] + [np.full_like(coeffs, np.nan) for _ in range(s - 1)]
    for j0, st in iface_stages.items():
        for nu in range(1, s):
            G[nu][j0] = st[nu]
    for run in _coarse_blocks(mesh):
        blk = coeffs[run]
        sizes = mesh.sizes[run]
        jl = _neighbor(mesh, int(run[0]), "left")
        jr = _neighbor(mesh, int(run[-1]), "right")
        states = [blk]
        ls = []
        for i in range(1, s + 1):
            nu = i - 1
            prev = states[nu]
            um, up = dg.edge_values(prev)
            ext_l = (_trace_right(G[nu][jl]) if jl is not None
                     else dg.ghost_trace(up[0], bk, model, mesh.bc_left))
            ext_r = (_trace_left(G[nu][jr]) if jr is not None
                     else dg.ghost_trace(um[-1], bk, model, mesh.bc_right))
            L, _ = dg.compute_lh(
                prev, sizes, model, flux_kind, alpha,
                ext_left=ext_l, ext_right=ext_r, base_index=int(run[0]),
            )
            ls.append(L)
            new = ssprk._combine(scheme, i, states, dt, ls)
            if i <= s - 1:
                mean = new[:, :, 0]
                ml = np.empty_like(mean)
                mr = np.empty_like(mean)
                ml[1:] = mean[:-1]
                mr[:-1] = mean[1:]
                ml[0] = (G[i][jl][:, 0] if jl is not None
                         else dg.ghost_mean(mean[0], bk, model, mesh.bc_left))
                mr[-1] = (G[i][jr][:, 0] if jr is not None
                          else dg.ghost_mean(mean[-1], bk, model, mesh.bc_right))
                new = limiters.apply_limiter(new, sizes, ml, mr, limcfg, model)
                G[i][run] = new
            states.append(new)
        out[run] = states[s]
    return out, G


def _make_pred(j0, end, iface_stages, table, mesh, model, G, coeffs):
    pred = predict_interface(iface_stages[j0], table)
    k = pred.shape[-1] - 1
    if end == "left":
        traces = pred.sum(axis=-1)
    else:
        traces = pred @ dg._basis(k).sign
    s = pred.shape[1]
    jn = _neighbor(mesh, j0, "left" if end == "left" else "right")
    cm = np.empty((s, model.nvars))
    bc = mesh.bc_left if end == "left" else mesh.bc_right
    for nu in range(s):
        if jn is None:
            cm[nu] = dg.ghost_mean(G[nu][j0, :, 0], mesh.boundary_kind, model, bc)
        elif mesh.ratios[jn] > 1:
            cm[nu] = coeffs[jn, :, 0]  # fine neighbor: frozen start-of-step mean
        else:
            cm[nu] = G[nu][jn, :, 0]
    return _Pred(
        j0=j0, end=end, traces=traces.copy(), means=pred[..., 0].copy(),
        coarse_means=cm, size=float(mesh.sizes[j0]),
    )


def advance_fine(coeffs, dt, scheme, model, mesh, island, preds, limcfg,
                 flux_kind, alpha):
    """Advance one refined island through M substeps of dt/M.

    ``preds`` maps 'left'/'right' island ends to their predictions. Fluxes
    computed against predicted traces are recorded per (substep, stage) and
    returned for the corrector. Limiting runs after every stage of substeps
    p < M-1; the closing global limit handles the final substep.
    """
    M = island.ratio
    s = scheme.stages
    lo, hi = island.lo, island.hi
    bk = mesh.boundary_kind
    sub = coeffs[lo:hi + 1]
    sizes = mesh.sizes[lo:hi + 1]
    pl = preds.get("left")
    pr = preds.get("right")
    rec_l = np.full((M, s, model.nvars), np.nan) if pl is not None else None
    rec_r = np.full((M, s, model.nvars), np.nan) if pr is not None else None
    dts = dt / M
    if pl is not None:
        _relimit_trace(pl, 0, 0, sub, limcfg, model)
    if pr is not None:
        _relimit_trace(pr, 0, 0, sub, limcfg, model)
    for p in range(M):
        states = [sub]
        ls = []
        for i in range(1, s + 1):
            nu = i - 1
            prev = states[nu]
            um, up = dg.edge_values(prev)
            ext_l = (pl.traces[p, nu] if pl is not None
                     else dg.ghost_trace(up[0], bk, model, mesh.bc_left))
            ext_r = (pr.traces[p, nu] if pr is not None
                     else dg.ghost_trace(um[-1], bk, model, mesh.bc_right))
            for tr in (ext_l, ext_r):
                bad = model.bad_mask(tr[None])
                if bad is not None and bad.any():
                    raise SolverError(
                        f"nonphysical interface trace near cell {lo} "
                        f"(substep {p}, stage {i})"
                    )
            L, h = dg.compute_lh(
                prev, sizes, model, flux_kind, alpha,
                ext_left=ext_l, ext_right=ext_r, base_index=lo,
            )
            ls.append(L)
            if rec_l is not None:
                rec_l[p, nu] = h[0]
            if rec_r is not None:
                rec_r[p, nu] = h[-1]
            new = ssprk._combine(scheme, i, states, dts, ls)
            if i <= s - 1 or p < M - 1:
                # The closing stage of the last substep is limited by the
                # whole-mesh pass at the end of the step instead.
                mean = new[:, :, 0]
                ml = np.empty_like(mean)
                mr = np.empty_like(mean)
                ml[1:] = mean[:-1]
                mr[:-1] = mean[1:]
                pi = (p, i) if i <= s - 1 else (p + 1, 0)
                ml[0] = (pl.means[pi] if pl is not None
                         else dg.ghost_mean(mean[0], bk, model, mesh.bc_left))
                mr[-1] = (pr.means[pi] if pr is not None
                          else dg.ghost_mean(mean[-1], bk, model, mesh.bc_right))
                new = limiters.apply_limiter(new, sizes, ml, mr, limcfg, model)
                if pl is not None:
                    _relimit_trace(pl, *pi, new, limcfg, model)
                if pr is not None:
                    _relimit_trace(pr, *pi, new, limcfg, model)
            states.append(new)
        sub = states[s]
    return sub, rec_l, rec_r


def _frozen_series(mesh, j0, side, G, model, flux_kind, alpha):
    """Coarse-side edge fluxes of an interface cell at every stage."""
    s = len(G)
    nv = model.nvars
    a = np.empty((s, nv))
    b = np.empty((s, nv))
    jn = _neighbor(mesh, j0, side)
    for nu in range(s):
        own = G[nu][j0]
        if side == "left":
            b[nu] = _trace_left(own)
            a[nu] = (_trace_right(G[nu][jn]) if jn is not None
                     else dg.ghost_trace(b[nu], mesh.boundary_kind, model,
                                         mesh.bc_left))
        else:
            a[nu] = _trace_right(own)
            b[nu] = (_trace_left(G[nu][jn]) if jn is not None
                     else dg.ghost_trace(a[nu], mesh.boundary_kind, model,
                                         mesh.bc_right))
    return numerical_flux(model, flux_kind, a, b, alpha)


def correct_interface(cell_state, dt, M, scheme, model, size, stage_states,
                      left_flux, right_flux):
    """Re-advance one interface cell using per-substep interface fluxes.

    ``left_flux``/``right_flux`` are ('recorded', array (M, s, nvars)) for a
    refined side or ('frozen', array (s, nvars)) for the coarse side. The
    volume term of stage nu is frozen across substeps.
    """
    s = scheme.stages

    def side_sum(spec):
        kind, arr = spec
        if kind == "frozen":
            return M * arr
        if kind == "recorded":
            if not np.isfinite(arr).all():
                raise InternalConsistencyError("missing recorded interface flux")
            return arr.sum(axis=0)
        raise InternalConsistencyError(f"unknown flux series kind {kind!r}")

    sum_l = side_sum(left_flux)   # (s, nvars)
    sum_r = side_sum(right_flux)
    vol = dg.volume_term(stage_states, model)  # (s, nvars, k+1)
    k = cell_state.shape[-1] - 1
    bas = dg._basis(k)
    scale = bas.twol1 / size
    ltil = [
        scale[None, :] * (M * vol[nu] - sum_r[nu][:, None]
                          + bas.sign[None, :] * sum_l[nu][:, None])
        for nu in range(s)
    ]
    states = [cell_state]
    for i in range(1, s + 1):
        arow = scheme.alpha[i - 1]
        brow = scheme.beta[i - 1]
        new = np.zeros_like(cell_state)
        for nu, (a, b) in enumerate(zip(arow, brow)):
            if a != 0.0:
                new = new + a * states[nu]
            if b != 0.0:
                new = new + (dt / M * b) * ltil[nu]
        states.append(new)
    return states[s]


def lts_step(coeffs, dt, scheme, model, mesh, limcfg, flux_kind="lax_friedrichs",
             alpha=None, iface_limit=False):
    """One multirate step of the partitioned mesh.

    Falls back to the single-rate step when the partition has no refined
    regions (so a ratio-1 partition reproduces it bitwise).
    """
    if not mesh.islands:
        return ssprk.gts_step(coeffs, dt, scheme, model, mesh, limcfg,
                              flux_kind, alpha)
    if alpha is None:
        alpha = float(model.wave_speed(dg.nodal_values(coeffs)).max())
    s = scheme.stages

    iface_stages = {
        j0: _local_stages(coeffs, j0, dt, scheme, model, mesh, limcfg,
                          flux_kind, alpha, iface_limit)
        for j0 in mesh.interface_indices
    }

    out, G = advance_coarse(coeffs, dt, scheme, model, mesh, limcfg,
                            flux_kind, alpha, iface_stages)

    preds = {}
    for isl in mesh.islands:
        table = build_predictor_table(scheme, isl.ratio)
        d = {}
        if isl.left_iface is not None:
            d["left"] = _make_pred(isl.left_iface, "left", iface_stages,
                                   table, mesh, model, G, coeffs)
        if isl.right_iface is not None:
            d["right"] = _make_pred(isl.right_iface, "right", iface_stages,
                                    table, mesh, model, G, coeffs)
        preds[isl] = d

    recs = {}
    for isl in mesh.islands:
        fine, rec_l, rec_r = advance_fine(coeffs, dt, scheme, model, mesh,
                                          isl, preds[isl], limcfg, flux_kind,
                                          alpha)
        out[isl.lo:isl.hi + 1] = fine
        recs[isl] = (rec_l, rec_r)

    by_left = {isl.left_iface: isl for isl in mesh.islands
               if isl.left_iface is not None}
    by_right = {isl.right_iface: isl for isl in mesh.islands
                if isl.right_iface is not None}
    for j0 in mesh.interface_indices:
        isl_r = by_left.get(j0)    # island to the right of j0
        isl_l = by_right.get(j0)   # island to the left of j0
        M = (isl_r or isl_l).ratio
        if isl_l is not None:
            left_flux = ("recorded", recs[isl_l][1])
        else:
            left_flux = ("frozen",
                         _frozen_series(mesh, j0, "left", G, model,
                                        flux_kind, alpha))
        if isl_r is not None:
            right_flux = ("recorded", recs[isl_r][0])
        else:
            right_flux = ("frozen",
                          _frozen_series(mesh, j0, "right", G, model,
                                         flux_kind, alpha))
        out[j0] = correct_interface(
            coeffs[j0], dt, M, scheme, model, float(mesh.sizes[j0]),
            iface_stages[j0], left_flux, right_flux,
        )

    return limiters.limit_mesh(out, mesh, limcfg, model)
