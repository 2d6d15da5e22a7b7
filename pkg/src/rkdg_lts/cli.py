"""Command-line interface: run one case or sweep a mesh sequence."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .mesh import MeshError
from .models import FLUX_KINDS, SolverError
from .runner import CASES, TIME_MODES, RunConfig, convergence_study, run_case


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (argparse default is 2, reserved here for divergence)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _regions(text):
    out = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise argparse.ArgumentTypeError(
                f"bad region {part!r}, expected xl:xr:ratio")
        out.append((float(bits[0]), float(bits[1]), int(bits[2])))
    return tuple(out)


def _floats(text):
    return tuple(float(p) for p in text.split(",") if p.strip())


def _bool(text):
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise SolverError(f"expected a boolean, got {text!r}")


# config-file keys and their parsers; names match the flags with '-' -> '_'
_CONFIG_TYPES = {
    "case": str, "order": int, "ratio": int, "regions": _regions,
    "layout": str, "t_end": float, "cfl": float, "limiter_cm": float,
    "no_characteristic": _bool, "iface_limit": _bool, "flux": str,
    "time_mode": str, "out": str, "dx_coarse": float, "snapshots": _floats,
    "dx_list": _floats,
}


def load_config_file(path):
    """Read 'key = value' defaults; '#' comments and blank lines allowed."""
    values = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if not key or not val:
            raise SolverError(f"{path}:{ln}: expected 'key = value'")
        if key not in _CONFIG_TYPES:
            raise SolverError(f"{path}:{ln}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](val)
        except (ValueError, argparse.ArgumentTypeError) as err:
            raise SolverError(f"{path}:{ln}: bad value for {key!r}: {err}")
    return values


def _find_config(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _add_common(p):
    p.add_argument("--config", default=None,
                   help="key-value file of defaults; flags override")
    p.add_argument("--case", default=None, choices=sorted(CASES))
    p.add_argument("--order", type=int, default=2, choices=(2, 3, 4))
    p.add_argument("--ratio", "-M", type=int, default=1, dest="ratio",
                   help="time/space refinement ratio of the fine region")
    p.add_argument("--regions", type=_regions, default=None,
                   help="explicit regions as xl:xr:ratio[,xl:xr:ratio...]")
    p.add_argument("--layout", default=None,
                   help="named region layout (e.g. sod: 2dom or 3dom)")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--cfl", type=float, default=1.0)
    p.add_argument("--limiter-cm", type=float, default=None,
                   help="TVB constant; None uses the case default")
    p.add_argument("--no-characteristic", action="store_true",
                   help="limit conserved components instead of characteristic")
    p.add_argument("--iface-limit", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="extra limiting of interface-cell stages")
    p.add_argument("--flux", default=None, choices=FLUX_KINDS,
                   help="numerical flux (default: per-case choice)")
    p.add_argument("--time-mode", default="lts", choices=TIME_MODES)
    p.add_argument("--out", default=None, help="directory for CSV output")


def build_parser(file_defaults=None):
    parser = _Parser(prog="rkdg-lts",
                     description="RKDG solver with local time stepping for "
                                 "1D conservation laws")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one configuration")
    _add_common(runp)
    runp.add_argument("--dx-coarse", type=float, default=None)
    runp.add_argument("--snapshots", type=_floats, default=(),
                      help="comma-separated times to dump snapshot CSVs")
    sweepp = sub.add_parser("sweep", help="run a coarse-dx refinement sweep")
    _add_common(sweepp)
    sweepp.add_argument("--dx-list", type=_floats, default=None)
    if file_defaults:
        runp.set_defaults(**file_defaults)
        sweepp.set_defaults(**file_defaults)
    return parser


def _config(args, dx):
    return RunConfig(
        case=args.case, order=args.order, dx_coarse=dx, ratio=args.ratio,
        regions=args.regions, layout=args.layout, t_end=args.t_end,
        cfl=args.cfl, limiter_cm=args.limiter_cm,
        characteristic=not args.no_characteristic, flux=args.flux,
        iface_limit=args.iface_limit, time_mode=args.time_mode,
        snapshots=getattr(args, "snapshots", ()), out_dir=args.out,
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg_path = _find_config(argv)
        defaults = load_config_file(cfg_path) if cfg_path else None
    except (OSError, SolverError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    parser = build_parser(defaults)
    args = parser.parse_args(argv)
    if args.case is None:
        parser.error("--case is required (flag or config file)")
    if args.command == "sweep" and args.dx_list is None:
        parser.error("--dx-list is required (flag or config file)")
    try:
        if args.command == "run":
            res = run_case(_config(args, args.dx_coarse))
            print(f"case={args.case} order={args.order} "
                  f"cells={res.partition.ncells} M={res.partition.max_ratio} "
                  f"mode={args.time_mode} steps={res.steps} t={res.time:.6g}")
            if res.diverged:
                print(f"DIVERGED: {res.message}", file=sys.stderr)
                return 2
            drift = res.mass_drift
            print("mass drift: " + "  ".join(
                f"{v}={d:.3e}" for v, d in zip(res.var_names, drift)))
            if res.errors is not None:
                print("rel L1 error: " + "  ".join(
                    f"{v}={e:.6e}" for v, e in zip(res.error_names, res.errors)))
            return 0
        study = convergence_study(
            args.case, args.order, list(args.dx_list), args.ratio,
            regions=args.regions, layout=args.layout, t_end=args.t_end,
            cfl=args.cfl, limiter_cm=args.limiter_cm,
            characteristic=not args.no_characteristic, flux=args.flux,
            iface_limit=args.iface_limit, time_mode=args.time_mode,
            out_dir=args.out,
        )
        names = study["results"][0].error_names
        for i, dx in enumerate(study["dx"]):
            cells = []
            for j, v in enumerate(names):
                rate = "" if i == 0 else f" [{study['rates'][i - 1, j]:.2f}]"
                cells.append(f"{v}={study['errors'][i, j]:.3e}{rate}")
            print(f"dx={dx:g}  " + "  ".join(cells))
        return 0
    except (MeshError, SolverError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
