"""
Simple and regular simple chains of solid tori.

Two constructions are provided: the direct parametric family
(:func:`regular_chain_from_params`), and the constructive bend-and-close
procedure that starts from a linked pair of congruent tori
(:func:`build_initial_link`, :func:`find_psi0`, :func:`build_theorem2_chain`).
:func:`validate_chain` checks any chain against the defining conditions.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InvalidParams, NotFound, PreconditionFailed, ValidationFailed
from .geometry import (
    EPS_GEO,
    Circle3,
    MinimizeOpts,
    Similarity,
    SolidTorus,
    _frames,
    apply_similarity,
    circle_pair_distances,
    cross,
    dot,
    containment_margins_batch,
    link_crossings,
    rotation_matrix,
    torus_contains_torus,
)

Z = np.array([0.0, 0.0, 1.0])


class _LazyLinks(Sequence):
    """Link tori of stacked arrays, built on first access.

    Batched validation reads only the arrays, so a scan never pays for the
    per-link objects.
    """

    def __init__(self, centers, normals, R, r):
        self._args = (centers, normals, R, r)
        self._tori = None

    def __len__(self) -> int:
        return len(self._args[0])

    def __getitem__(self, i):
        if self._tori is None:
            self._tori = tuple(SolidTorus._trusted_many(*self._args))
        return self._tori[i]

    def __repr__(self) -> str:
        return repr(tuple(self))


@dataclass(frozen=True, eq=False)
class Chain:
    """An ambient solid torus and the ordered tori of a chain inside it."""

    ambient: SolidTorus
    links: tuple[SolidTorus, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.links, _LazyLinks):
            object.__setattr__(self, "links", tuple(self.links))
        if len(self.links) < 3:
            raise InvalidParams(f"a chain needs at least 3 links, got {len(self.links)}")

    @property
    def k(self) -> int:
        return len(self.links)

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        centers = np.array([t.center for t in self.links])
        normals = np.array([t.normal for t in self.links])
        e1, e2 = _frames(normals)
        return {
            "centers": centers,
            "normals": normals,
            "e1": e1,
            "e2": e2,
            "R": np.array([t.R for t in self.links]),
            "r": np.array([t.r for t in self.links]),
        }


@dataclass(frozen=True)
class RegularChainParams:
    R_T: float
    r_T: float
    m: int
    s: float

    def __post_init__(self):
        if not (0.0 < self.r_T < self.R_T):
            raise InvalidParams(f"need 0 < r_T < R_T, got r_T={self.r_T}, R_T={self.R_T}")
        if int(self.m) != self.m or self.m < 2:
            raise InvalidParams(f"m must be an integer >= 2, got {self.m}")
        if not (0.0 < self.s < 1.0):
            raise InvalidParams(f"s must lie in (0, 1), got {self.s}")

    @property
    def rho(self) -> float:
        return self.r_T / self.R_T


@dataclass
class ChainVerdict:
    """Outcome of :func:`validate_chain`.

    ``margins`` holds, per check family, the signed clearances: for
    ``disjoint``, ``linking`` and ``containment`` a check passes when its
    margin exceeds the tolerance. ``regularity`` holds residuals of equality
    conditions (polygon placement, congruence, plane orientation, tangency),
    which pass when they do not exceed the tolerance. A family left
    unevaluated by ``fail_fast`` reports ``None``.
    """

    disjoint_ok: bool | None
    linking_ok: bool | None
    containment_ok: bool | None
    regularity_ok: bool | None
    margins: dict[str, np.ndarray]
    failures: list[tuple] = field(default_factory=list)
    tol: float = 0.0

    @property
    def ok(self) -> bool:
        return bool(self.disjoint_ok and self.linking_ok and self.containment_ok and self.regularity_ok)

    def min_margins(self) -> dict[str, float]:
        out = {}
        for name, arr in self.margins.items():
            if arr is None or len(arr) == 0:
                out[name] = math.nan
            elif name == "regularity":
                out[name] = float(np.max(arr))
            else:
                out[name] = float(np.min(arr))
        return out

    def compact(self, max_failures: int = 3) -> "ChainVerdict":
        """Copy keeping only the extreme margin per family."""
        mm = self.min_margins()
        return ChainVerdict(
            self.disjoint_ok, self.linking_ok, self.containment_ok, self.regularity_ok,
            {k: np.array([v]) for k, v in mm.items()},
            self.failures[:max_failures], self.tol,
        )

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "disjoint_ok": self.disjoint_ok,
            "linking_ok": self.linking_ok,
            "containment_ok": self.containment_ok,
            "regularity_ok": self.regularity_ok,
            "tol": self.tol,
            "min_margins": self.min_margins(),
            "failures": [list(f) for f in self.failures],
        }


# -- parametric regular chains -------------------------------------------------


def regular_chain_from_params(p: RegularChainParams) -> Chain:
    """Regular simple chain of ``2m`` tori similar to the ambient torus.

    The ambient torus is centered at the origin with normal ``+z``. Link ``j``
    (0-based) is centered at angle ``pi j / m`` on the ambient central circle
    with radii ``s R_T`` and ``s r_T``. Even ``j`` lie flat in the ambient
    plane; odd ``j`` stand in the vertical plane tangent to the central circle
    at their center, with the outward radial direction as normal.
    """
    k = 2 * p.m
    ambient = SolidTorus(Circle3(np.zeros(3), Z, p.R_T), p.r_T)
    theta = np.pi * np.arange(k) / p.m
    radial = np.stack([np.cos(theta), np.sin(theta), np.zeros(k)], axis=1)
    centers = p.R_T * radial
    R, r = p.s * p.R_T, p.s * p.r_T
    normals = np.where((np.arange(k) % 2 == 0)[:, None], Z, radial)
    if not (0.0 < r < R):
        raise InvalidParams("link tube radius must be below its circle radius")
    centers.setflags(write=False)
    normals.setflags(write=False)
    links = _LazyLinks(centers, normals, R, r)
    meta = {"kind": "regular", "params": {"R_T": p.R_T, "r_T": p.r_T, "m": p.m, "s": p.s}}
    chain = Chain(ambient, links, meta)
    # seed the cached arrays instead of regathering them from the links
    e1, e2 = _frames(normals)
    chain.__dict__["arrays"] = {"centers": centers, "normals": normals,
                                "e1": e1, "e2": e2, "R": np.full(k, R), "r": np.full(k, r)}
    return chain


# -- validation ----------------------------------------------------------------


def _rownorm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(dot(v, v))


def _pair_indices(k: int, orbit: bool = False):
    """All unordered pairs, or one representative per orbit of ``j -> j + 2``."""
    if orbit:
        i = np.concatenate([np.zeros(k - 1, dtype=int), np.ones(k - 2, dtype=int)])
        j = np.concatenate([np.arange(1, k), np.arange(2, k)])
    else:
        i, j = np.triu_indices(k, 1)
    d = np.mod(j - i, k)
    consecutive = (d == 1) | (d == k - 1)
    return i, j, consecutive


class _Batch(NamedTuple):
    """Stacked arrays of ``B`` chains with the same link count ``k``."""

    centers: np.ndarray  # (B, k, 3)
    normals: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    R: np.ndarray  # (B, k)
    r: np.ndarray
    oc: np.ndarray  # ambient center (B, 3)
    on: np.ndarray  # ambient normal (B, 3)
    oe1: np.ndarray  # ambient frame (B, 3)
    oe2: np.ndarray
    oR: np.ndarray  # (B,)
    orr: np.ndarray

    @classmethod
    def of(cls, chains: Sequence[Chain]) -> "_Batch":
        arr = [c.arrays for c in chains]
        amb = [c.ambient for c in chains]
        frames = [t.circle.frame() for t in amb]
        return cls(
            *(np.stack([a[key] for a in arr]) for key in ("centers", "normals", "e1", "e2", "R", "r")),
            np.stack([t.center for t in amb]), np.stack([t.normal for t in amb]),
            np.stack([f[0] for f in frames]), np.stack([f[1] for f in frames]),
            np.array([t.R for t in amb]), np.array([t.r for t in amb]),
        )

    def take(self, idx) -> "_Batch":
        return _Batch(*(x[idx] for x in self))


def _polygon_residuals(b: _Batch) -> np.ndarray:
    """Def. of a simple chain: centers are consecutive vertices of a regular convex k-gon."""
    rel = b.centers - b.oc[:, None, :]
    h = dot(rel, b.on[:, None, :])
    planar = rel - h[..., None] * b.on[:, None, :]
    on_circle = np.hypot(_rownorm(planar) - b.oR[:, None], h)
    ang = np.arctan2(dot(planar, b.oe2[:, None, :]), dot(planar, b.oe1[:, None, :]))
    step = np.mod(np.diff(ang, axis=1, append=ang[:, :1]), 2.0 * np.pi)
    target = 2.0 * np.pi / ang.shape[1]
    # all steps +2pi/k or all -2pi/k
    fwd = np.abs(step - target)
    bwd = np.abs(step - (2.0 * np.pi - target))
    ang_err = np.where((fwd.max(axis=1) <= bwd.max(axis=1))[:, None], fwd, bwd)
    return np.concatenate([on_circle, b.oR[:, None] * ang_err], axis=1)


def _period_two_residual(b: _Batch) -> np.ndarray:
    """How far the rotation by ``4 pi / k`` about the ambient axis is from mapping link j to j + 2."""
    k = b.centers.shape[1]
    rel = b.centers - b.oc[:, None, :]
    # +1 if link centers advance counterclockwise about the ambient normal
    orient = np.where(dot(cross(rel[:, 0], rel[:, 1]), b.on) >= 0, 1.0, -1.0)
    Q = np.stack([rotation_matrix(n, o * 4.0 * np.pi / k) for n, o in zip(b.on, orient)])
    moved = np.einsum("bij,bkj->bki", Q, rel)
    turned = np.einsum("bij,bkj->bki", Q, b.normals)
    nxt = np.roll(np.arange(k), -2)
    res = np.concatenate([
        _rownorm(moved - rel[:, nxt]),
        b.oR[:, None] * _rownorm(cross(turned, b.normals[:, nxt])),
        np.abs(b.R - b.R[:, nxt]),
        np.abs(b.r - b.r[:, nxt]),
    ], axis=1)
    return res.max(axis=1)


def _regular_residuals(b: _Batch) -> np.ndarray:
    N = b.on[:, None, :]
    flat, standing = b.normals[:, 0::2], b.normals[:, 1::2]
    rel = b.centers - b.oc[:, None, :]
    oR = b.oR[:, None]
    return np.concatenate([
        np.abs(b.R - b.R[:, :1]),
        np.abs(b.r - b.r[:, :1]),
        # flat links: circle plane equals the ambient plane
        oR * _rownorm(cross(flat, N)),
        np.abs(dot(rel[:, 0::2], N)),
        # standing links: perpendicular planes whose trace line touches the central circle
        oR * np.abs(dot(standing, N)),
        np.abs(np.abs(dot(rel[:, 1::2], standing)) - oR),
    ], axis=1)


def validate_chain(c: Chain, tol: float | None = None, regular: bool | None = None,
                   fail_fast: bool = False, use_symmetry: bool = True,
                   opts: MinimizeOpts = MinimizeOpts(), n_samples: int = 256) -> ChainVerdict:
    """Check a chain against the simple-chain and regular-chain conditions.

    Parameters
    ----------
    c : Chain
    tol : float, optional
        Strictness threshold; defaults to ``EPS_GEO * diam(ambient)``.
    regular : bool, optional
        Also check the regular-chain conditions. Defaults to ``True`` for
        even ``k``.
    fail_fast : bool
        Skip the pairwise distance computation (the expensive family) once a
        cheaper family has failed; the skipped family reports ``None``. Failing
        containment margins are then reported unrefined (sampled values, which
        overstate the margin, so the verdict is unaffected).
    use_symmetry : bool
        For an even chain that the rotation by ``4 pi / k`` about the ambient
        axis maps onto itself (link ``j`` to ``j + 2``, checked to ``tol``),
        evaluate containment and pairs only on orbit representatives. The
        checks are rotation invariant, so the verdict is unchanged.

    Returns
    -------
    ChainVerdict
    """
    return validate_chains([c], tol, regular, fail_fast, use_symmetry, opts, n_samples)[0]


def validate_chains(chains: Sequence[Chain], tol: float | None = None, regular: bool | None = None,
                    fail_fast: bool = False, use_symmetry: bool = True,
                    opts: MinimizeOpts = MinimizeOpts(), n_samples: int = 256) -> list[ChainVerdict]:
    """:func:`validate_chain` for many chains of equal length, vectorized across chains.

    Each verdict equals the one :func:`validate_chain` returns for that chain
    alone; the batch only shares the array operations.
    """
    chains = list(chains)
    if not chains:
        return []
    k = chains[0].k
    if any(c.k != k for c in chains):
        raise InvalidParams("validate_chains needs chains with equal link counts")
    if regular is None:
        regular = k % 2 == 0
    b = _Batch.of(chains)
    tols = (EPS_GEO * 2.0 * (b.oR + b.orr) if tol is None else np.full(len(chains), float(tol)))
    if use_symmetry and k % 2 == 0 and k >= 4:
        orbit = _period_two_residual(b) <= tols
    else:
        orbit = np.zeros(len(chains), dtype=bool)
    out: list[ChainVerdict | None] = [None] * len(chains)
    for flag in (True, False):
        idx = np.flatnonzero(orbit == flag)
        if idx.size:
            for q, v in zip(idx, _validate_group(b.take(idx), tols[idx], regular, fail_fast, bool(flag),
                                                 opts, n_samples)):
                out[q] = v
    return out


def _validate_group(b: _Batch, tol: np.ndarray, regular: bool, fail_fast: bool, orbit: bool,
                    opts: MinimizeOpts, n_samples: int) -> list[ChainVerdict]:
    B, k = b.R.shape
    col = tol[:, None]

    # regularity (cheap, exact)
    reg = _polygon_residuals(b)
    if regular:
        reg = np.concatenate([reg, _regular_residuals(b)], axis=1)
    regularity_ok = np.all(reg <= col, axis=1)

    # containment in the ambient torus
    sel = slice(0, 2) if orbit else slice(None)
    n_sel = b.R[:, sel].shape[1]
    rows = lambda x: np.repeat(x, n_sel, axis=0)
    cont = containment_margins_batch(
        rows(b.oc), rows(b.on), rows(b.oR), rows(b.orr),
        b.centers[:, sel].reshape(-1, 3), b.e1[:, sel].reshape(-1, 3), b.e2[:, sel].reshape(-1, 3),
        b.R[:, sel].ravel(), b.r[:, sel].ravel(), n_samples,
        refine_above=rows(tol) if fail_fast else None,
    ).reshape(B, n_sel)
    containment_ok = np.all(cont > col, axis=1)

    # linking pattern: closed-form disk crossings for every pair
    i, j, consecutive = _pair_indices(k, orbit)
    code, lmargin = link_crossings(
        b.centers[:, i], b.e1[:, i], b.e2[:, i], b.R[:, i],
        b.centers[:, j], b.normals[:, j], b.R[:, j], col,
    )
    right = code == np.where(consecutive, 1, 0)
    link_margin = np.where(right, lmargin, -np.abs(lmargin))
    link_pass = right & (link_margin > col)
    linking_ok = np.all(link_pass, axis=1)

    # disjointness: bounding spheres separate far pairs, the rest get the exact distance
    run = ~fail_fast | (regularity_ok & containment_ok & linking_ok)
    dmargin = _rownorm(b.centers[:, i] - b.centers[:, j]) - (b.R[:, i] + b.r[:, i] + b.R[:, j] + b.r[:, j])
    near_b, near_p = np.nonzero(run[:, None] & (dmargin <= col))
    if near_b.size:
        ii, jj = i[near_p], j[near_p]
        # parametrize the smaller circle of each pair for a tighter certificate
        swap = b.R[near_b, jj] < b.R[near_b, ii]
        p = np.where(swap, jj, ii)
        q = np.where(swap, ii, jj)
        dist, _, _ = circle_pair_distances(
            b.centers[near_b, p], b.e1[near_b, p], b.e2[near_b, p], b.R[near_b, p],
            b.centers[near_b, q], b.normals[near_b, q], b.R[near_b, q], opts,
        )
        dmargin[near_b, near_p] = dist - (b.r[near_b, ii] + b.r[near_b, jj])
    disjoint_ok = np.all(dmargin > col, axis=1)

    verdicts = []
    for n in range(B):
        failures: list[tuple] = []
        if not regularity_ok[n]:
            failures.append(("regularity", int(np.argmax(reg[n])), f"residual {reg[n].max():.3g} > tol"))
        for jj in np.flatnonzero(cont[n] <= tol[n])[:3]:
            failures.append(("containment", int(jj), f"margin {cont[n, jj]:.3g}"))
        for qq in np.flatnonzero(~link_pass[n])[:3]:
            want = "linked" if consecutive[qq] else "unlinked"
            got = ("unlinked", "linked", "degenerate")[code[n, qq]]
            failures.append(("linking", (int(i[qq]), int(j[qq])), f"expected {want}, got {got}"))
        if run[n]:
            for qq in np.flatnonzero(dmargin[n] <= tol[n])[:3]:
                failures.append(("disjoint", (int(i[qq]), int(j[qq])), f"margin {dmargin[n, qq]:.3g}"))
        verdicts.append(ChainVerdict(
            bool(disjoint_ok[n]) if run[n] else None, bool(linking_ok[n]), bool(containment_ok[n]),
            bool(regularity_ok[n]),
            {"regularity": reg[n], "containment": cont[n], "linking": link_margin[n],
             "disjoint": dmargin[n] if run[n] else None},
            failures, float(tol[n]),
        ))
    return verdicts


# -- constructive procedure from a linked pair ---------------------------------


def build_initial_link(r_B: float, R_B: float, A: float | None = None) -> tuple[SolidTorus, SolidTorus]:
    """Two linked congruent tori with central circles

    ``(R cos u, R sin u, 0)`` and ``(A + R cos v, 0, R sin v)``.

    ``A`` defaults to the midpoint of ``(R_B + r_B, 2 (R_B - r_B))``, which is
    non-empty exactly when ``R_B > 3 r_B``. Both endpoints of that interval
    give circle distance ``A - R_B`` and ``2 R_B - A`` respectively, each
    greater than ``2 r_B`` inside it.
    """
    if not (r_B > 0 and R_B > 3.0 * r_B):
        raise InvalidParams(f"need R_B > 3 r_B > 0, got r_B={r_B}, R_B={R_B}")
    lo, hi = R_B + r_B, 2.0 * (R_B - r_B)
    if A is None:
        A = 0.5 * (lo + hi)
    if not (lo < A < hi):
        raise InvalidParams(f"A={A} outside the open interval ({lo}, {hi})")
    b1 = SolidTorus(Circle3([0.0, 0.0, 0.0], Z, R_B), r_B)
    b2 = SolidTorus(Circle3([A, 0.0, 0.0], [0.0, 1.0, 0.0], R_B), r_B)
    return b1, b2


def pivot(A: float, psi: float) -> np.ndarray:
    """Common point of the y-axis turned by ``psi`` about Oz and the line
    through ``(A, 0, 0)`` parallel to Oy turned by ``-psi`` about its vertical axis."""
    return np.array([A / 2.0, -A * math.cos(psi) / (2.0 * math.sin(psi)), 0.0])


def _bent(b2: SolidTorus, psi: float) -> SolidTorus:
    return apply_similarity(Similarity.rotation_about_line(b2.center, Z, -psi), b2)


def _psi_margins(b1: SolidTorus, b2: SolidTorus, psis: np.ndarray, opts: MinimizeOpts):
    """Clearances ``(OQ_psi - (R_B + r_B), d(B1, bent B2) - 2 r_B)`` at each angle."""
    A = float(b2.center[0])
    R_B, r_B = b1.R, b1.r
    oq = A / (2.0 * np.sin(psis))
    c, s = np.cos(-psis), np.sin(-psis)
    n2 = np.stack([-s, c, np.zeros_like(psis)], axis=1)  # rotated (0, 1, 0)
    e1, e2 = _frames(np.repeat(b1.normal[None], len(psis), axis=0))
    n = len(psis)
    dist, _, _ = circle_pair_distances(
        np.repeat(b1.center[None], n, axis=0), e1, e2, np.full(n, R_B),
        np.repeat(b2.center[None], n, axis=0), n2, np.full(n, b2.R), opts,
    )
    return oq - (R_B + r_B), dist - (b1.r + b2.r)


def find_psi0(b1: SolidTorus, b2: SolidTorus, tol: float | None = None, n_samples: int = 1024,
              psi_max: float = math.pi / 2.0, opts: MinimizeOpts = MinimizeOpts()) -> float:
    """Largest certified angle below which bending keeps the pair admissible.

    The predicate at ``psi`` is: the pivot is farther than ``R_B + r_B``
    from the origin, and ``B1`` stays disjoint from ``B2`` turned by
    ``-psi`` about its vertical axis; both with clearance above ``tol``.
    The first failing sample on ``(0, psi_max]`` is bracketed by bisection,
    then the predicate is re-validated on ``n_samples`` angles in
    ``(0, psi0]``, shrinking ``psi0`` to the first failure if one appears.
    """
    if tol is None:
        tol = EPS_GEO * b1.diameter
    if not (b2.R == b1.R and b2.r == b1.r):
        raise InvalidParams("b1 and b2 must be congruent")

    def holds(psis):
        m1, m2 = _psi_margins(b1, b2, np.atleast_1d(psis), opts)
        return (m1 > tol) & (m2 > tol)

    grid = psi_max * np.arange(1, n_samples + 1) / n_samples
    psi0 = psi_max
    for _ in range(8):
        ok = holds(grid)
        if ok.all():
            break
        first = int(np.argmin(ok))
        lo = grid[first - 1] if first > 0 else 0.0
        hi = grid[first]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if lo > 0 and hi - lo < 1e-12 * hi:
                break
            if holds(mid)[0]:
                lo = mid
            else:
                hi = mid
        psi0 = lo
        if psi0 <= 0.0:
            break
        grid = psi0 * np.arange(1, n_samples + 1) / n_samples
    if not (psi0 > 0.0 and holds(grid).all()):
        raise NotFound("no admissible bending angle found")
    if psi0 < math.pi / 64.0 and not holds(math.pi / 64.0)[0]:
        # only tiny angles work: treat as bad input
        raise NotFound(f"admissible angles only below {psi0:.3g} < pi/64")
    return float(psi0)


def minimal_m(psi0: float) -> int:
    """Smallest integer ``m`` with ``m > pi / (2 psi0)``."""
    return int(math.floor(math.pi / (2.0 * psi0))) + 1


def build_theorem2_chain(r_B: float, R_B: float, A: float | None = None, m: int | None = None,
                         psi0: float | None = None, tol: float | None = None) -> Chain:
    """Regular simple chain of ``2m`` tori congruent to the ``(r_B, R_B)`` torus.

    ``T1`` is the flat torus of the initial link and ``T2`` the standing one
    turned by ``-psi`` (``psi = pi / 2m``) about its vertical axis. The rest
    follow by rotating this pair about the vertical line through the pivot
    by multiples of ``-2 pi / m``. The ambient torus surrounds the circle
    through all centers (center at the pivot, radius ``OQ``) with tube
    radius at the midpoint of ``(R_B + r_B, OQ)``.

    Raises
    ------
    InvalidParams
        Bad radii, ``A`` outside its interval or ``m`` not above ``pi / 2 psi0``.
    ValidationFailed
        The assembled chain fails :func:`validate_chain`.
    """
    b1, b2 = build_initial_link(r_B, R_B, A)
    A = float(b2.center[0])
    if psi0 is None:
        psi0 = find_psi0(b1, b2)
    if m is None:
        m = minimal_m(psi0)
    if int(m) != m or m < 2 or not (m > math.pi / (2.0 * psi0)):
        raise InvalidParams(f"m={m} must exceed pi/(2 psi0) = {math.pi / (2.0 * psi0):.4f}")
    m = int(m)
    psi = math.pi / (2.0 * m)
    t1, t2 = b1, _bent(b2, psi)
    q = pivot(A, psi)
    oq = float(np.linalg.norm(q))
    links = [t1, t2]
    for k in range(1, m):
        rot = Similarity.rotation_about_line(q, Z, -2.0 * math.pi * k / m)
        links += [apply_similarity(rot, t1), apply_similarity(rot, t2)]
    tube = 0.5 * ((R_B + r_B) + oq)
    ambient = SolidTorus(Circle3(q, Z, oq), tube)
    meta = {
        "kind": "constructive",
        "params": {"r_B": r_B, "R_B": R_B, "A": A, "m": m, "psi": psi, "psi0": psi0},
    }
    chain = Chain(ambient, links, meta)
    verdict = validate_chain(chain, tol)
    if not verdict.ok:
        raise ValidationFailed(f"assembled chain invalid: {verdict.failures}", verdict)
    return chain


def enclosing_similar_torus(c: Chain, r_B: float, R_B: float) -> SolidTorus:
    """Torus similar to the ``(r_B, R_B)`` torus sharing the chain's central circle.

    Requires ``sin(pi / m) < r_B / R_B`` for the ``2m``-link chain; then the
    tube radius ``r_B R_T / R_B`` exceeds ``R_B + r_B`` and every link fits.
    """
    if c.k % 2:
        raise PreconditionFailed("chain must have an even number of links")
    m = c.k // 2
    if not (math.sin(math.pi / m) < r_B / R_B):
        raise PreconditionFailed(
            f"sin(pi/m) = {math.sin(math.pi / m):.6g} is not below r_B/R_B = {r_B / R_B:.6g}"
        )
    R_T = c.ambient.R
    big = SolidTorus(c.ambient.circle, r_B * R_T / R_B)
    tol = EPS_GEO * big.diameter
    for j, link in enumerate(c.links):
        if not torus_contains_torus(big, link, tol=tol):
            raise ValidationFailed(f"link {j} not contained in the similar enclosing torus")
    return big
