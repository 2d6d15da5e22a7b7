"""Benchmark case registry, time marching, and CSV output."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import dg, diagnostics, exact, limiters, lts, mesh, ssprk
from .limiters import LimiterConfig
from .models import FLUX_KINDS, SolverError, make_model

GAMMA = 1.4
TIME_MODES = ("lts", "gts_fine", "gts_coarse")
_TARGET_TOL = 1e-12
_EULER = make_model("euler", GAMMA)


@dataclass(frozen=True)
class CaseSpec:
    name: str
    model_name: str
    domain: tuple
    boundary_kind: str
    t_end: float
    dx_coarse: float
    limiter_cm: float
    iface_limit: bool
    speed: float | None  # fixed wave speed for dt; None -> recompute per step
    layouts: dict  # layout name -> tuple of (xl, xr, is_fine)
    default_layout: str
    var_names: tuple
    error_names: tuple
    initial: object  # x -> (npts, nvars) conserved values
    reference: object  # (x, t) -> (npts, nvars) conserved values, or None
    exclude: object  # t -> (a, b) interval dropped from the error, or None
    flux: str = "lax_friedrichs"
    bc_left: tuple | None = None  # fixed exterior states, dirichlet cases only
    bc_right: tuple | None = None


def _scalar_initial(fn):
    def initial(x):
        return np.asarray(fn(np.asarray(x, dtype=float)), dtype=float)[:, None]

    return initial


def _euler_piecewise(cuts, prim_states):
    cuts = np.asarray(cuts, dtype=float)
    prim = np.asarray(prim_states, dtype=float)

    def initial(x):
        idx = np.searchsorted(cuts, np.asarray(x, dtype=float), side="right")
        return _EULER.from_primitive(prim[idx])

    return initial


def _riemann_reference(left, right):
    def reference(x, t):
        sol = exact.solve_riemann(left, right, GAMMA)
        return _EULER.from_primitive(sol.sample(np.asarray(x, dtype=float) / t))

    return reference


def _burgers_exclude(t):
    if t <= exact.burgers_shock_time():
        return None
    xs = exact.burgers_shock_position(t)
    return (xs - 0.1, xs + 0.1)


_SOD_L = (1.0, 0.0, 1.0)
_SOD_R = (0.125, 0.0, 0.1)
_LAX_L = (0.445, 0.698, 3.528)
_LAX_R = (0.5, 0.0, 0.571)

CASES = {
    "advection_smooth": CaseSpec(
        name="advection_smooth", model_name="advection", domain=(-1.0, 1.0),
        boundary_kind="periodic", t_end=2.0, dx_coarse=0.1, limiter_cm=20.0,
        iface_limit=False, speed=1.0,
        layouts={"default": ((-1.0, 0.0, True), (0.0, 1.0, False))},
        default_layout="default", var_names=("u",), error_names=("u",),
        initial=_scalar_initial(lambda x: np.sin(np.pi * x)),
        reference=lambda x, t: exact.advection_exact(x, t, "smooth")[:, None],
        exclude=None,
    ),
    "advection_step": CaseSpec(
        name="advection_step", model_name="advection", domain=(-1.0, 1.0),
        boundary_kind="dirichlet", t_end=1.0, dx_coarse=0.025, limiter_cm=0.0,
        iface_limit=True, speed=1.0,
        layouts={"default": ((-1.0, 0.0, True), (0.0, 1.0, False))},
        default_layout="default", var_names=("u",), error_names=("u",),
        initial=_scalar_initial(lambda x: exact.advection_exact(x, 0.0, "step")),
        reference=lambda x, t: exact.advection_exact(x, t, "step")[:, None],
        exclude=None, bc_left=(2.0,),
    ),
    "burgers": CaseSpec(
        name="burgers", model_name="burgers", domain=(-1.0, 1.0),
        boundary_kind="periodic", t_end=0.3, dx_coarse=0.025, limiter_cm=20.0,
        iface_limit=False, speed=1.0,
        layouts={"default": ((-1.0, 0.0, True), (0.0, 1.0, False))},
        default_layout="default", var_names=("u",), error_names=("u",),
        initial=_scalar_initial(lambda x: 0.25 + 0.5 * np.sin(np.pi * x)),
        reference=lambda x, t: exact.burgers_exact(x, t)[:, None],
        exclude=_burgers_exclude,
        flux="godunov",
    ),
    "sod": CaseSpec(
        name="sod", model_name="euler", domain=(-4.9, 5.1),
        boundary_kind="outflow", t_end=2.0, dx_coarse=0.2, limiter_cm=0.0,
        iface_limit=True, speed=None,
        layouts={
            "2dom": ((-4.9, -0.5, False), (-0.5, 5.1, True)),
            "3dom": ((-4.9, -2.9, False), (-2.9, 4.0, True), (4.0, 5.1, False)),
        },
        default_layout="2dom", var_names=("rho", "m", "E"),
        error_names=("rho", "q", "P"),
        initial=_euler_piecewise([0.0], [_SOD_L, _SOD_R]),
        reference=_riemann_reference(_SOD_L, _SOD_R),
        exclude=None,
        flux="local_lax_friedrichs",
    ),
    "lax": CaseSpec(
        name="lax", model_name="euler", domain=(-4.9, 5.1),
        boundary_kind="outflow", t_end=1.3, dx_coarse=0.2, limiter_cm=0.0,
        iface_limit=True, speed=None,
        layouts={"default": ((-4.9, 0.0, False), (0.0, 5.1, True))},
        default_layout="default", var_names=("rho", "m", "E"),
        error_names=("rho", "q", "P"),
        initial=_euler_piecewise([0.0], [_LAX_L, _LAX_R]),
        reference=_riemann_reference(_LAX_L, _LAX_R),
        exclude=None,
    ),
    "blast": CaseSpec(
        name="blast", model_name="euler", domain=(0.0, 1.0),
        boundary_kind="reflective", t_end=0.038, dx_coarse=0.005,
        limiter_cm=0.0, iface_limit=True, speed=None,
        layouts={"default": ((0.0, 0.2, False), (0.2, 0.9, True), (0.9, 1.0, False))},
        default_layout="default", var_names=("rho", "m", "E"),
        error_names=("rho", "q", "P"),
        initial=_euler_piecewise(
            [0.1, 0.9], [(1.0, 0.0, 1e3), (1.0, 0.0, 1e-2), (1.0, 0.0, 1e2)]
        ),
        reference=None,
        exclude=None,
        flux="local_lax_friedrichs",
    ),
}


@dataclass
class RunConfig:
    """One solver run. Unset optional fields fall back to case defaults."""

    case: str
    order: int = 2
    dx_coarse: float | None = None
    ratio: int = 1
    regions: tuple | None = None  # explicit (xl, xr, ratio) triples
    layout: str | None = None
    t_end: float | None = None
    cfl: float = 1.0
    limiter_cm: float | None = None
    characteristic: bool = True
    flux: str | None = None  # None -> case default
    iface_limit: bool | None = None
    time_mode: str = "lts"
    snapshots: tuple = ()
    out_dir: str | None = None
    max_steps: int = 2_000_000


@dataclass
class RunResult:
    config: RunConfig
    partition: mesh.MeshPartition
    var_names: tuple
    error_names: tuple
    coeffs: np.ndarray
    time: float
    steps: int
    diverged: bool
    message: str
    series_times: np.ndarray
    series_mass: np.ndarray  # (nt, nvars)
    series_tv: np.ndarray  # (nt, nvars)
    mass0: np.ndarray
    mass_scale: np.ndarray  # initial L1 norm of the means, per variable
    errors: np.ndarray | None  # relative L1 per compared variable at final time
    errors_simpson: np.ndarray | None = None  # same norm on edge+midpoint nodes
    snapshots: dict = field(default_factory=dict)

    @property
    def mass_drift(self) -> np.ndarray:
        """Max relative mass drift over the recorded series, per variable."""
        drift = np.abs(self.series_mass - self.mass0[None, :]).max(axis=0)
        return drift / self.mass_scale


def _snap_regions(spec_regions, domain, dx, ratio):
    a, b = domain
    out = []
    for xl, xr, is_fine in spec_regions:
        sl = a + round((xl - a) / dx) * dx
        sr = a + round((xr - a) / dx) * dx
        out.append((max(sl, a), min(sr, b), ratio if is_fine else 1))
    return tuple(out)


def resolve(config: RunConfig):
    """Fill case defaults; returns (spec, model, partition, resolved values)."""
    if config.case not in CASES:
        raise SolverError(f"unknown case {config.case!r}")
    spec = CASES[config.case]
    if config.order not in (2, 3, 4):
        raise SolverError(f"order must be 2, 3, or 4, got {config.order}")
    flux = spec.flux if config.flux is None else config.flux
    if flux not in FLUX_KINDS:
        raise SolverError(f"unknown flux kind {flux!r}")
    if config.time_mode not in TIME_MODES:
        raise SolverError(f"unknown time mode {config.time_mode!r}")
    dx = spec.dx_coarse if config.dx_coarse is None else float(config.dx_coarse)
    if config.regions is not None:
        regions = tuple((float(xl), float(xr), int(r)) for xl, xr, r in config.regions)
    else:
        layout = config.layout or spec.default_layout
        if layout not in spec.layouts:
            raise SolverError(f"case {spec.name!r} has no layout {layout!r}")
        regions = _snap_regions(spec.layouts[layout], spec.domain, dx, int(config.ratio))
    partition = mesh.build_partition(spec.domain, dx, regions, spec.boundary_kind,
                                     bc_left=spec.bc_left, bc_right=spec.bc_right)
    model = make_model(spec.model_name, GAMMA)
    t_end = spec.t_end if config.t_end is None else float(config.t_end)
    cm = spec.limiter_cm if config.limiter_cm is None else float(config.limiter_cm)
    iface = spec.iface_limit if config.iface_limit is None else bool(config.iface_limit)
    return spec, model, partition, t_end, cm, iface, flux


def config_hash(config: RunConfig) -> str:
    blob = json.dumps(asdict(config), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def run_case(config: RunConfig) -> RunResult:
    """March one configuration from t=0 to t_end; optionally write CSVs."""
    spec, model, partition, t_end, cm, iface, flux = resolve(config)
    if not (t_end > 0.0):
        raise SolverError("t_end must be positive")
    k = config.order - 1
    nvars = len(spec.var_names)
    scheme = ssprk.scheme_for_order(config.order)
    limcfg = LimiterConfig(enabled=True, cm=cm, characteristic=config.characteristic)

    coeffs = dg.project_initial(spec.initial, partition, k, nvars)
    coeffs = limiters.limit_mesh(coeffs, partition, limcfg, model)
    mass0 = diagnostics.total_mass(coeffs, partition.sizes)
    mass_scale = np.einsum(
        "jv,j->v", np.abs(coeffs[:, :, 0]), partition.sizes
    )
    mass_scale = np.maximum(mass_scale, 1e-300)
    blow_limit = 100.0 * max(1.0, float(np.abs(dg.nodal_values(coeffs)).max()))

    targets = sorted({round(float(s), 15) for s in config.snapshots} | {t_end})
    targets = [s for s in targets if 0.0 < s <= t_end]
    # dt = cfl * C / (2k+1) * dx / speed. C is the scheme's SSP coefficient,
    # capped for order 4: the five-stage scheme paired with the k=3 operator
    # is linearly stable only up to dt/dx = 0.2201 single-rate and 0.1269
    # across a multirate interface (measured spectral radii of the full step
    # operator), both below C/(2k+1) = 0.2359 at the nominal coefficient, so
    # order 4 runs at dt/dx = 0.12 multirate and 0.20 single-rate.
    multirate = config.time_mode == "lts" and partition.max_ratio > 1
    if scheme.order == 4:
        cap = 0.84 if multirate else 1.4
    else:
        cap = 1.5
    base_cfl = config.cfl * min(scheme.ssp_coeff, cap) / (2.0 * k + 1.0)

    times = [0.0]
    mass_rows = [mass0]
    tv_rows = [diagnostics.total_variation_means(coeffs, partition)]
    snapshots = {}
    t = 0.0
    steps = 0
    diverged = False
    message = ""
    next_i = 0
    while next_i < len(targets) and steps < config.max_steps:
        if spec.speed is not None:
            speed = spec.speed
        else:
            speed = float(model.wave_speed(dg.nodal_values(coeffs)).max())
        dt = base_cfl * partition.dx_coarse / speed
        if config.time_mode == "gts_fine":
            dt /= partition.max_ratio
        dt = min(dt, targets[next_i] - t)
        try:
            if config.time_mode == "lts":
                coeffs = lts.lts_step(coeffs, dt, scheme, model, partition,
                                      limcfg, flux, iface_limit=iface)
            else:
                coeffs = ssprk.gts_step(coeffs, dt, scheme, model, partition,
                                        limcfg, flux)
        except SolverError as err:
            diverged = True
            message = str(err)
            break
        t += dt
        steps += 1
        if abs(t - targets[next_i]) <= _TARGET_TOL * max(1.0, targets[next_i]):
            t = targets[next_i]
            snapshots[t] = coeffs.copy()
            next_i += 1
        times.append(t)
        mass_rows.append(diagnostics.total_mass(coeffs, partition.sizes))
        tv_rows.append(diagnostics.total_variation_means(coeffs, partition))
        if not np.isfinite(coeffs).all() or np.abs(coeffs[:, :, 0]).max() > blow_limit:
            diverged = True
            message = f"solution diverged at t={t:.6g}"
            break
    if not diverged and next_i < len(targets):
        diverged = True
        message = "step budget exhausted before reaching t_end"

    errors = None
    errors_simpson = None
    if spec.reference is not None and not diverged:
        ref = lambda x: spec.reference(x, t_end)
        excl = spec.exclude(t_end) if spec.exclude is not None else None
        to_cmp = model.to_primitive if spec.model_name == "euler" else None
        errors = diagnostics.l1_rel_error(coeffs, partition, ref,
                                          to_compare=to_cmp, exclude=excl)
        errors_simpson = diagnostics.l1_rel_error(
            coeffs, partition, ref, to_compare=to_cmp, exclude=excl,
            quad="simpson")

    result = RunResult(
        config=config, partition=partition, var_names=spec.var_names,
        error_names=spec.error_names, coeffs=coeffs, time=t, steps=steps,
        diverged=diverged, message=message,
        series_times=np.asarray(times), series_mass=np.asarray(mass_rows),
        series_tv=np.asarray(tv_rows), mass0=mass0, mass_scale=mass_scale,
        errors=errors, errors_simpson=errors_simpson, snapshots=snapshots,
    )
    if config.out_dir is not None:
        write_outputs(result, Path(config.out_dir))
    return result


def _fmt(v) -> str:
    return f"{v:.15g}"


def _write_csv(path: Path, header, rows, tag):
    lines = [f"# config {tag}", ",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def write_outputs(result: RunResult, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = config_hash(result.config)
    names = result.var_names

    header = ["time"] + [f"mass_{v}" for v in names] + [f"tv_{v}" for v in names]
    rows = [
        [t, *m, *tv]
        for t, m, tv in zip(result.series_times, result.series_mass, result.series_tv)
    ]
    _write_csv(out_dir / "series.csv", header, rows, tag)

    cfg = result.config
    if result.errors is not None:
        header = ["case", "order", "dx_coarse", "M", "variable", "rel_l1", "rate"]
        rows = [
            [cfg.case, str(cfg.order), result.partition.dx_coarse,
             str(result.partition.max_ratio), v, e, ""]
            for v, e in zip(result.error_names, result.errors)
        ]
        _write_csv(out_dir / "errors.csv", header, rows, tag)

    for t, coeffs in result.snapshots.items():
        um, up = dg.edge_values(coeffs)
        header = (["x_left", "x_right"] + [f"mean_{v}" for v in names]
                  + [f"trace_left_{v}" for v in names]
                  + [f"trace_right_{v}" for v in names])
        edges = result.partition.edges
        rows = [
            [edges[j], edges[j + 1], *coeffs[j, :, 0], *up[j], *um[j]]
            for j in range(result.partition.ncells)
        ]
        _write_csv(out_dir / f"snapshot_{t:g}.csv", header, rows, tag)


def convergence_study(case, order, dx_list, ratio, out_dir=None, **overrides):
    """Run a dx sweep; returns dict with errors (len(dx), nvars) and rates."""
    results = []
    errs = []
    for dx in dx_list:
        cfg = RunConfig(case=case, order=order, dx_coarse=dx, ratio=ratio,
                        **overrides)
        res = run_case(cfg)
        if res.errors is None:
            raise SolverError(
                f"case {case!r} has no error oracle or diverged: {res.message}")
        results.append(res)
        errs.append(res.errors)
    errs = np.asarray(errs)
    rates = diagnostics.convergence_rates(errs)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        tag = config_hash(results[0].config)
        header = ["case", "order", "dx_coarse", "M", "variable", "rel_l1", "rate"]
        rows = []
        for i, (dx, res) in enumerate(zip(dx_list, results)):
            for j, v in enumerate(res.error_names):
                rate = "" if i == 0 else _fmt(rates[i - 1, j])
                rows.append([case, str(order), dx, str(ratio), v,
                             errs[i, j], rate])
        _write_csv(out_dir / "errors.csv", header, rows, tag)
    return {"dx": np.asarray(dx_list, dtype=float), "errors": errs,
            "rates": rates, "results": results}
