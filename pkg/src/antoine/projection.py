"""
Orthogonal projections of necklaces onto planes.

Three per-plane statistics stand in for the claim that every projection is
a connected one-dimensional set:

* the rasterized shadow area of the prelimit cover ``M_lam``, which decays
  like ``(sum s_i**2) ** lam`` (each torus shadow is covered by the disk of
  radius ``diam / 2`` about its projected center);
* the box-counting slope of a projected attractor sample, which must stay
  below 2;
* the number of 8-connected components of the rasterized projected sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .errors import InsufficientData
from .geometry import Plane, project_point
from .ifs import CoverLevel, IfsSystem, attractor_sample, iterate_cover

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
HEMI_ZMIN = -0.05


# -- plane families ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PlaneSweep:
    planes: tuple[Plane, ...]
    scheme: str

    def __len__(self) -> int:
        return len(self.planes)

    @classmethod
    def fibonacci_sphere(cls, n: int, origin=(0.0, 0.0, 0.0)) -> "PlaneSweep":
        """``n`` planes whose normals form a Fibonacci spiral over the upper hemisphere.

        A plane's normal matters only up to sign, so the spiral covers
        ``z`` in ``[HEMI_ZMIN, 1]``; the thin band below the equator closes the
        seam where the hemisphere meets its antipodal image.
        """
        if n < 1:
            raise ValueError("n must be positive")
        i = np.arange(n)
        z = 1.0 - (i + 0.5) * (1.0 - HEMI_ZMIN) / n
        rad = np.sqrt(1.0 - z * z)
        phi = GOLDEN_ANGLE * i
        normals = np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)
        return cls(tuple(Plane(origin, nv) for nv in normals), f"fibonacci_sphere({n})")

    @classmethod
    def axis_aligned(cls, origin=(0.0, 0.0, 0.0)) -> "PlaneSweep":
        return cls(tuple(Plane(origin, nv) for nv in np.eye(3)), "axis_aligned")

    @classmethod
    def explicit(cls, normals, origin=(0.0, 0.0, 0.0)) -> "PlaneSweep":
        return cls(tuple(Plane(origin, nv) for nv in np.atleast_2d(normals)), "explicit")

    @classmethod
    def default(cls, origin=(0.0, 0.0, 0.0), n: int = 200) -> "PlaneSweep":
        """Fibonacci sphere of ``n`` normals followed by the three coordinate planes."""
        fib = cls.fibonacci_sphere(n, origin)
        ax = cls.axis_aligned(origin)
        return cls(fib.planes + ax.planes, f"fibonacci_sphere({n})+axis_aligned")

    def normals(self) -> np.ndarray:
        return np.array([p.unit_normal for p in self.planes])


# -- shadow area ---------------------------------------------------------------


def _raster_geometry(cover: CoverLevel, plane: Plane, raster_n: int):
    half = cover.ambient.R + cover.ambient.r
    cell = 2.0 * half / raster_n
    _, uv0 = project_point(plane, cover.ambient.center)
    _, uv = project_point(plane, cover.centers)
    return uv - uv0, cell, half


def rasterize_disks(uv: np.ndarray, radii: np.ndarray, half: float, raster_n: int,
                    chunk: int = 1 << 22) -> np.ndarray:
    """Boolean ``raster_n`` x ``raster_n`` mask of cells whose center lies in some disk.

    The raster covers the square ``[-half, half]**2``.
    """
    cell = 2.0 * half / raster_n
    mask = np.zeros((raster_n, raster_n), dtype=bool)
    U = (uv[:, 0] + half) / cell - 0.5
    V = (uv[:, 1] + half) / cell - 0.5
    rc = radii / cell
    w_all = np.ceil(rc).astype(int) + 1
    for w in np.unique(w_all):
        sel = np.flatnonzero(w_all == w)
        off = np.arange(-w, w + 1)
        di, dj = np.meshgrid(off, off, indexing="ij")
        di, dj = di.ravel(), dj.ravel()
        step = max(1, chunk // di.size)
        for s0 in range(0, sel.size, step):
            q = sel[s0:s0 + step]
            I = np.rint(U[q])[:, None].astype(int) + di
            J = np.rint(V[q])[:, None].astype(int) + dj
            inside = (I - U[q, None]) ** 2 + (J - V[q, None]) ** 2 <= rc[q, None] ** 2
            inside &= (I >= 0) & (I < raster_n) & (J >= 0) & (J < raster_n)
            mask[I[inside], J[inside]] = True
    return mask


def project_cover_area(cover: CoverLevel, plane: Plane, raster_n: int = 1024) -> float:
    """Rasterized area of the union of cover-torus shadow disks on ``plane``.

    Every torus of the cover contributes the disk of radius ``R + r`` (half
    its diameter) about its projected center, which contains its shadow.
    The raster spans the square circumscribing the ambient torus shadow.
    """
    if raster_n < 64:
        raise ValueError("raster_n must be at least 64")
    uv, cell, half = _raster_geometry(cover, plane, raster_n)
    mask = rasterize_disks(uv, cover.R + cover.r, half, raster_n)
    return float(mask.sum()) * cell * cell


def raster_slack(cover: CoverLevel, raster_n: int = 1024) -> float:
    """Upper bound on how much the raster can overstate the disk-union area.

    A cell whose center lies in a disk of radius ``a`` is contained in the
    disk of radius ``a + delta``, ``delta`` the half cell diagonal; summing the
    dilation areas gives ``sum_i (2 pi a_i delta + pi delta**2)``. The same
    quantity bounds how much the raster can understate a single disk.
    """
    half = cover.ambient.R + cover.ambient.r
    delta = (2.0 * half / raster_n) * math.sqrt(0.5)
    a = cover.R + cover.r
    return float(np.sum(2.0 * math.pi * a * delta + math.pi * delta * delta))


def moran_envelope(sys: IfsSystem, lam: int) -> float:
    """``pi (diam T / 2)**2 (sum s_i**2)**lam``: total area of the level-``lam`` shadow disks."""
    return math.pi * (sys.ambient.diameter / 2.0) ** 2 * sys.sum_sq**lam


def area_ratio_bound(sys: IfsSystem, lam: int, area0: float, raster_n: int = 1024) -> float:
    """Largest admissible ``area(lam) / area(0)`` given raster error.

    From ``area(lam) <= q**lam * pi a0**2 + slack(lam)`` and
    ``pi a0**2 <= area(0) + slack(0)``, with ``q = sum s_i**2``.
    """
    q = sys.sum_sq**lam
    c0 = iterate_cover(sys, 0)
    # slack(lam) without enumerating: disk radii are a0 * prod(s); sum over words
    half = sys.ambient.R + sys.ambient.r
    delta = (2.0 * half / raster_n) * math.sqrt(0.5)
    a0 = half
    sum_a = a0 * np.sum(sys.scales) ** lam
    slack_lam = 2.0 * math.pi * delta * sum_a + math.pi * delta**2 * sys.k**lam
    return q + (slack_lam + q * raster_slack(c0, raster_n)) / area0


# -- box counting ---------------------------------------------------------------


class BoxCount(NamedTuple):
    slope: float
    fit_residual: float
    counts: np.ndarray


def _occupied(coords: np.ndarray, eps: float) -> int:
    idx = np.floor(coords / eps).astype(np.int64)
    idx -= idx.min(axis=0)
    span = idx.max(axis=0) + 1
    key = idx[:, 0].copy()
    mult = 1
    for d in range(1, idx.shape[1]):
        mult *= int(span[d - 1])
        key += idx[:, d] * mult
    return int(np.unique(key).size)


def box_count_dimension(points, plane: Plane | None, scales: Sequence[float],
                        min_points: int = 10_000) -> BoxCount:
    """Least-squares slope of ``log N(eps)`` against ``log(1/eps)``.

    Points are projected onto ``plane`` first; with ``plane=None`` the boxes
    are counted in 3-space.

    Raises
    ------
    InsufficientData
        Fewer than ``min_points`` points, fewer than 4 scales, or scales
        spanning less than 1.5 decades.
    """
    pts = np.asarray(points, dtype=float)
    eps = np.asarray(scales, dtype=float)
    if len(pts) < min_points:
        raise InsufficientData(f"need at least {min_points} points, got {len(pts)}")
    if eps.size < 4 or math.log10(eps.max() / eps.min()) < 1.5:
        raise InsufficientData("need at least 4 scales spanning 1.5 decades")
    coords = pts if plane is None else project_point(plane, pts)[1]
    counts = np.array([_occupied(coords, e) for e in eps])
    x, y = np.log(1.0 / eps), np.log(counts)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return BoxCount(float(slope), resid, counts)


def dyadic_scales(diameter: float, first: int = 3, last: int = 10) -> np.ndarray:
    """``diameter / 2**j`` for ``j = first .. last``."""
    return diameter / 2.0 ** np.arange(first, last + 1)


# -- connectivity ---------------------------------------------------------------


def projection_connectivity(points, plane: Plane, cell: float, max_cells: int = 50_000_000) -> int:
    """Number of 8-connected components of the cells hit by the projected points."""
    if cell <= 0:
        raise ValueError("cell must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        return 0
    _, uv = project_point(plane, pts)
    idx = np.floor(uv / cell).astype(np.int64)
    idx -= idx.min(axis=0)
    shape = tuple(int(v) for v in idx.max(axis=0) + 1)
    if shape[0] * shape[1] > max_cells:
        raise ValueError(f"raster of {shape} cells exceeds max_cells; increase cell")
    img = np.zeros(shape, dtype=bool)
    img[idx[:, 0], idx[:, 1]] = True
    _, n = ndimage.label(img, structure=np.ones((3, 3), dtype=int))
    return int(n)


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    lam: int = 3
    raster_n: int = 1024
    n_points: int = 100_000
    depth: int = 8
    scales: tuple[float, ...] | None = None
    seed: int = 0
    connect_depth: int = 2
    cell_factor: float = 2.0


@dataclass(frozen=True, eq=False)
class ProjectionReport:
    plane: Plane
    lam: int
    raster_area: float
    moran_envelope: float
    raster_slack: float
    box_count_slope: float
    fit_residual: float
    component_count: int
    n_points: int


def sweep(sys: IfsSystem, planes: PlaneSweep, cfg: SweepConfig = SweepConfig()) -> list[ProjectionReport]:
    """Run shadow area, box counting and connectivity on every plane, in input order.

    The cover and the attractor sample are computed once; each plane is then
    independent. Connectivity uses cells of size
    ``cell_factor * diam(T) * max(s)**connect_depth``.
    """
    cover = iterate_cover(sys, cfg.lam)
    slack = raster_slack(cover, cfg.raster_n)
    env = moran_envelope(sys, cfg.lam)
    pts = attractor_sample(sys, cfg.n_points, cfg.depth, cfg.seed)
    diam = sys.ambient.diameter
    scales = np.asarray(cfg.scales) if cfg.scales is not None else dyadic_scales(diam)
    cell = cfg.cell_factor * diam * float(sys.scales.max()) ** cfg.connect_depth
    reports = []
    for pl in planes.planes:
        area = project_cover_area(cover, pl, cfg.raster_n)
        bc = box_count_dimension(pts, pl, scales)
        comps = projection_connectivity(pts, pl, cell)
        reports.append(ProjectionReport(pl, cfg.lam, area, env, slack, bc.slope,
                                        bc.fit_residual, comps, len(pts)))
    return reports
