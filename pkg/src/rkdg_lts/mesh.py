"""Partitioned 1D meshes: a uniform coarse lattice with refined regions.

A partition is described by sub-intervals of the domain, each carrying an
integer refinement ratio. Ratio-1 regions keep the coarse spacing; a ratio-M
region splits every coarse slot into M equal cells. Region boundaries must
land on coarse-lattice edges (snapped within SNAP_TOL). Every maximal run of
refined cells forms an "island"; the ratio-1 cells touching an island are the
interface cells the local time stepper treats specially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SNAP_TOL = 1e-12

BOUNDARY_KINDS = ("periodic", "reflective", "outflow", "dirichlet")


class MeshError(ValueError):
    """Inconsistent partition request."""


@dataclass(frozen=True)
class Region:
    xl: float
    xr: float
    ratio: int
    lo: int  # first cell index
    hi: int  # last cell index, inclusive


@dataclass(frozen=True)
class FineIsland:
    lo: int
    hi: int
    ratio: int
    left_iface: int | None  # coarse neighbor cell index, None at a physical boundary
    right_iface: int | None


@dataclass(frozen=True)
class MeshPartition:
    domain: tuple[float, float]
    dx_coarse: float
    boundary_kind: str
    edges: np.ndarray
    sizes: np.ndarray
    centers: np.ndarray
    ratios: np.ndarray
    regions: tuple[Region, ...]
    islands: tuple[FineIsland, ...]
    interface_indices: tuple[int, ...]
    bc_left: tuple | None = None  # fixed exterior state, dirichlet kind only
    bc_right: tuple | None = None

    @property
    def ncells(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def periodic(self) -> bool:
        return self.boundary_kind == "periodic"

    @property
    def max_ratio(self) -> int:
        return int(self.ratios.max())


def _snap_slot(x: float, a: float, dx: float, what: str) -> int:
    slot = round((x - a) / dx)
    if abs(a + slot * dx - x) > SNAP_TOL:
        raise MeshError(
            f"{what} {x!r} does not lie on the coarse lattice (dx={dx!r})"
        )
    return int(slot)


def build_partition(domain, dx_coarse, region_spec, boundary_kind="periodic",
                    bc_left=None, bc_right=None):
    """Build a MeshPartition.

    Parameters
    ----------
    domain : (float, float)
    dx_coarse : float
        Coarse cell size; must tile the domain.
    region_spec : sequence of (xl, xr, ratio)
        Consecutive sub-intervals covering the domain exactly, each with an
        integer refinement ratio >= 1. Adjacent regions with equal ratio are
        merged; adjacent refined regions with different ratios are rejected.
    boundary_kind : str
        One of 'periodic', 'reflective', 'outflow', 'dirichlet'.
    bc_left, bc_right : sequence of float, optional
        Fixed exterior states for the 'dirichlet' kind. A side left as None
        falls back to zero-gradient there.
    """
    a, b = float(domain[0]), float(domain[1])
    dx = float(dx_coarse)
    if not (b > a):
        raise MeshError("domain must have positive width")
    if not (dx > 0.0):
        raise MeshError("dx_coarse must be positive")
    if boundary_kind not in BOUNDARY_KINDS:
        raise MeshError(f"unknown boundary kind {boundary_kind!r}")
    if boundary_kind == "dirichlet":
        if bc_left is None and bc_right is None:
            raise MeshError("dirichlet boundaries need a fixed state on "
                            "at least one side")
        bc_left = None if bc_left is None else tuple(float(v) for v in bc_left)
        bc_right = None if bc_right is None else tuple(float(v) for v in bc_right)
    elif bc_left is not None or bc_right is not None:
        raise MeshError("fixed boundary states require the 'dirichlet' kind")
    nslots = round((b - a) / dx)
    if nslots < 1 or abs(a + nslots * dx - b) > SNAP_TOL:
        raise MeshError(f"dx_coarse={dx!r} does not tile the domain ({a!r}, {b!r})")

    spec = []
    for item in region_spec:
        xl, xr, ratio = item
        r = int(ratio)
        if r < 1 or r != ratio:
            raise MeshError(f"refinement ratio must be a positive integer, got {ratio!r}")
        sl = _snap_slot(float(xl), a, dx, "region boundary")
        sr = _snap_slot(float(xr), a, dx, "region boundary")
        if sr <= sl:
            raise MeshError(f"region ({xl!r}, {xr!r}) is empty or reversed")
        spec.append((sl, sr, r))
    if not spec:
        raise MeshError("region_spec is empty")
    if spec[0][0] != 0:
        raise MeshError("regions do not start at the left domain boundary")
    if spec[-1][1] != nslots:
        raise MeshError("regions do not end at the right domain boundary")
    for (sl0, sr0, _), (sl1, _, _) in zip(spec, spec[1:]):
        if sl1 != sr0:
            raise MeshError("regions must tile the domain without gaps or overlap")

    # Merge adjacent equal-ratio regions; forbid touching refined regions of
    # different ratio (no nested refinement).
    merged: list[list[int]] = []
    for sl, sr, r in spec:
        if merged and merged[-1][2] == r:
            merged[-1][1] = sr
        elif merged and merged[-1][2] > 1 and r > 1:
            raise MeshError("refined regions must be separated by ratio-1 cells")
        else:
            merged.append([sl, sr, r])
    if boundary_kind == "periodic" and len(merged) > 1:
        if merged[0][2] > 1 and merged[-1][2] > 1:
            raise MeshError(
                "refined regions at both periodic ends would join across the wrap"
            )
    if len(merged) == 1 and merged[0][2] > 1 and boundary_kind == "periodic":
        raise MeshError("a fully refined periodic mesh has no coarse cells; "
                        "reduce dx_coarse instead")

    edges_parts = []
    sizes_parts = []
    ratios_parts = []
    regions = []
    lo = 0
    for sl, sr, r in merged:
        xl = a + sl * dx
        xr = a + sr * dx
        count = (sr - sl) * r
        h = dx / r
        cell_edges = xl + h * np.arange(count + 1)
        cell_edges[-1] = xr
        edges_parts.append(cell_edges[:-1])
        sizes_parts.append(np.full(count, h))
        ratios_parts.append(np.full(count, r, dtype=int))
        regions.append(Region(xl, xr, r, lo, lo + count - 1))
        lo += count
    edges = np.concatenate(edges_parts + [np.array([b])])
    sizes = np.concatenate(sizes_parts)
    ratios = np.concatenate(ratios_parts)
    centers = 0.5 * (edges[:-1] + edges[1:])
    ncells = sizes.shape[0]

    periodic = boundary_kind == "periodic"
    islands = []
    for reg in regions:
        if reg.ratio == 1:
            continue
        if reg.lo > 0:
            left = reg.lo - 1
        elif periodic:
            left = ncells - 1
        else:
            left = None
        if reg.hi < ncells - 1:
            right = reg.hi + 1
        elif periodic:
            right = 0
        else:
            right = None
        islands.append(FineIsland(reg.lo, reg.hi, reg.ratio, left, right))

    touching: dict[int, list[int]] = {}
    for isl in islands:
        for j0 in (isl.left_iface, isl.right_iface):
            if j0 is not None:
                touching.setdefault(j0, []).append(isl.ratio)
    for j0, rs in touching.items():
        if len(rs) == 2 and rs[0] != rs[1]:
            raise MeshError(
                f"cell {j0} touches refined regions with different ratios {rs}"
            )

    return MeshPartition(
        domain=(a, b),
        dx_coarse=dx,
        boundary_kind=boundary_kind,
        edges=edges,
        sizes=sizes,
        centers=centers,
        ratios=ratios,
        regions=tuple(regions),
        islands=tuple(islands),
        interface_indices=tuple(sorted(touching)),
        bc_left=bc_left if boundary_kind == "dirichlet" else None,
        bc_right=bc_right if boundary_kind == "dirichlet" else None,
    )
