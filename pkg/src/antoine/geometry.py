"""
Circles, standard solid tori, similarities and planes in 3-space.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Every geometric value
type is an immutable dataclass; all functions are pure.

A standard solid torus is stored as its central circle plus a tube radius,
which makes most predicates reduce to distances between round circles.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from .errors import GeometryError, NonConvergence

EPS_UNIT = 1e-9
# relative to the ambient torus diameter
EPS_GEO = 1e-9

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def as_vec3(x) -> np.ndarray:
    """Return ``x`` as a read-only float array of shape (3,)."""
    v = np.array(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"non-finite coordinates: {v}")
    v.setflags(write=False)
    return v


def unit(x) -> np.ndarray:
    v = np.array(x, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise GeometryError(f"cannot normalize {v}")
    return as_vec3(v / n)


def plane_frame(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal in-plane basis ``(e1, e2)`` with ``e1 x e2 = normal``.

    ``e1`` points toward the largest x-coordinate inside the plane, falling
    back to the largest y-coordinate when the plane is perpendicular to the
    x-axis. This is the marked direction used for circle parametrizations.
    """
    n = np.asarray(normal, dtype=float)
    e1 = np.array([1.0, 0.0, 0.0]) - n[0] * n
    if e1 @ e1 < 1e-16:
        e1 = np.array([0.0, 1.0, 0.0]) - n[1] * n
    e1 /= math.sqrt(e1 @ e1)
    # second pass: the first loses orthogonality when n is close to the helper axis
    e1 -= (e1 @ n) * n
    e1 /= math.sqrt(e1 @ e1)
    e2 = np.array([n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]])
    return e1, e2


def _frozen(x) -> np.ndarray:
    if isinstance(x, np.ndarray) and x.dtype == float and not x.flags.writeable:
        return x
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


def dot(a, b):
    """Row-wise dot product over the last axis."""
    return (a * b).sum(-1)


def cross(a, b):
    """Row-wise cross product; cheaper than ``np.cross`` for small arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.stack([
        a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
        a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
        a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
    ], axis=-1)


def _frames(normals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`plane_frame` for normals of shape (N, 3)."""
    n = np.asarray(normals, dtype=float)
    e1 = n * -n[:, :1]
    e1[:, 0] += 1.0
    bad = dot(e1, e1) < 1e-16
    if bad.any():
        alt = n[bad] * -n[bad, 1:2]
        alt[:, 1] += 1.0
        e1[bad] = alt
    e1 /= np.sqrt(dot(e1, e1))[:, None]
    e1 -= dot(e1, n)[:, None] * n
    e1 /= np.sqrt(dot(e1, e1))[:, None]
    return e1, cross(n, e1)


@dataclass(frozen=True, eq=False)
class Plane:
    """An affine plane given by a point and a normal (normalized on construction)."""

    origin: np.ndarray
    unit_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vec3(self.origin))
        object.__setattr__(self, "unit_normal", unit(self.unit_normal))

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        return plane_frame(self.unit_normal)


@dataclass(frozen=True, eq=False)
class Circle3:
    center: np.ndarray
    unit_normal: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        object.__setattr__(self, "unit_normal", unit(self.unit_normal))
        r = float(self.radius)
        if not (r > 0.0 and math.isfinite(r)):
            raise GeometryError(f"circle radius must be positive, got {r}")
        object.__setattr__(self, "radius", r)

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        return self._frame

    @cached_property
    def _frame(self) -> tuple[np.ndarray, np.ndarray]:
        e1, e2 = plane_frame(self.unit_normal)
        e1.setflags(write=False)
        e2.setflags(write=False)
        return e1, e2

    def points(self, theta) -> np.ndarray:
        """Points at angles ``theta`` measured from the marked direction."""
        theta = np.asarray(theta, dtype=float)
        e1, e2 = self.frame()
        c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
        return self.center + self.radius * (c * e1 + s * e2)


@dataclass(frozen=True, eq=False)
class SolidTorus:
    """Closed ``tube_radius``-neighborhood of a round circle with larger radius."""

    circle: Circle3
    tube_radius: float

    def __post_init__(self):
        r = float(self.tube_radius)
        if not (0.0 < r < self.circle.radius):
            raise GeometryError(
                f"need 0 < tube_radius < circle radius, got r={r}, R={self.circle.radius}"
            )
        object.__setattr__(self, "tube_radius", r)

    @classmethod
    def standard(cls, center, normal, R: float, r: float) -> "SolidTorus":
        return cls(Circle3(center, normal, R), r)

    @property
    def center(self) -> np.ndarray:
        return self.circle.center

    @property
    def normal(self) -> np.ndarray:
        return self.circle.unit_normal

    @property
    def R(self) -> float:
        return self.circle.radius

    @property
    def r(self) -> float:
        return self.tube_radius

    @property
    def diameter(self) -> float:
        return 2.0 * (self.R + self.r)

    @classmethod
    def _trusted_many(cls, centers, normals, R, r) -> list["SolidTorus"]:
        """Batched :meth:`_trusted`; the tori share read-only storage.

        Read-only float arrays are used as given, anything else is copied.
        """
        centers, normals = (_frozen(x) for x in (centers, normals))
        R = np.broadcast_to(np.asarray(R, dtype=float), len(centers)).tolist()
        r = np.broadcast_to(np.asarray(r, dtype=float), len(centers)).tolist()
        out = []
        for j in range(len(centers)):
            c = object.__new__(Circle3)
            c.__dict__.update(center=centers[j], unit_normal=normals[j], radius=R[j])
            t = object.__new__(cls)
            t.__dict__.update(circle=c, tube_radius=r[j])
            out.append(t)
        return out

    @classmethod
    def _trusted(cls, center, normal, R: float, r: float) -> "SolidTorus":
        """Skip validation for data produced internally from valid tori."""
        c = object.__new__(Circle3)
        center = np.array(center, dtype=float)
        normal = np.array(normal, dtype=float)
        center.setflags(write=False)
        normal.setflags(write=False)
        object.__setattr__(c, "center", center)
        object.__setattr__(c, "unit_normal", normal)
        object.__setattr__(c, "radius", float(R))
        t = object.__new__(cls)
        object.__setattr__(t, "circle", c)
        object.__setattr__(t, "tube_radius", float(r))
        return t

    def contains_points(self, p, tol: float = 0.0) -> np.ndarray:
        return point_circle_distance(p, self.circle) <= self.r + tol


@dataclass(frozen=True, eq=False)
class Similarity:
    """The map ``x -> scale * rotation @ x + translation``."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        s = float(self.scale)
        if not (s > 0.0 and math.isfinite(s)):
            raise GeometryError(f"scale must be positive, got {s}")
        Q = np.array(self.rotation, dtype=float).reshape(3, 3)
        if np.linalg.norm(Q.T @ Q - np.eye(3)) > EPS_UNIT or np.linalg.det(Q) < 0:
            raise GeometryError("rotation must be orthogonal with determinant +1")
        Q.setflags(write=False)
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "rotation", Q)
        object.__setattr__(self, "translation", as_vec3(self.translation))

    @classmethod
    def identity(cls) -> "Similarity":
        return cls(1.0, np.eye(3), np.zeros(3))

    @classmethod
    def rotation_about_line(cls, point, direction, angle: float) -> "Similarity":
        """Rotation by ``angle`` about the oriented line (right-hand rule)."""
        Q = rotation_matrix(direction, angle)
        p = np.asarray(point, dtype=float)
        return cls(1.0, Q, p - Q @ p)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.scale * x @ self.rotation.T + self.translation

    def compose(self, inner: "Similarity") -> "Similarity":
        """``self o inner``: apply ``inner`` first."""
        return Similarity(
            self.scale * inner.scale,
            self.rotation @ inner.rotation,
            self.scale * self.rotation @ inner.translation + self.translation,
        )

    def inverse(self) -> "Similarity":
        Qt = self.rotation.T
        return Similarity(1.0 / self.scale, Qt, -(Qt @ self.translation) / self.scale)


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about ``axis`` by ``angle`` (counterclockwise seen from the tip)."""
    k = unit(axis)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


Transformable = Union[np.ndarray, Circle3, SolidTorus]


def apply_similarity(s: Similarity, x: Transformable) -> Transformable:
    """Image of a point (or point array), circle or solid torus under ``s``."""
    if isinstance(x, SolidTorus):
        return SolidTorus(apply_similarity(s, x.circle), s.scale * x.tube_radius)
    if isinstance(x, Circle3):
        return Circle3(s(x.center), s.rotation @ x.unit_normal, s.scale * x.radius)
    return s(x)


# -- distances ---------------------------------------------------------------


def _dist_to_circles(p, c, n, R):
    """Distance from points ``p`` to circles ``(c, n, R)``; all broadcast on the last axis."""
    d = p - c
    h = dot(d, n)
    rad = d - h[..., None] * n
    rho = np.sqrt(dot(rad, rad))
    return np.hypot(rho - R, h)


def point_circle_distance(p, c: Circle3):
    """Euclidean distance from ``p`` (shape (3,) or (..., 3)) to the circle ``c``.

    Splits ``p - center`` into its axial part ``h`` and its radial distance
    ``rho`` inside the circle's plane; the distance is ``hypot(rho - R, h)``.
    """
    out = _dist_to_circles(np.asarray(p, dtype=float), c.center, c.unit_normal, c.radius)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MinimizeOpts:
    grid_n: int = 256
    tol: float = 1e-10
    max_iter: int = 200
    n_candidates: int = 4


class CircleDistance(NamedTuple):
    distance: float
    argmin: tuple[float, float]
    certified_gap: float


def _golden_batch(f, lo, hi, tol, max_iter, maximize=False):
    """Vectorized golden-section search over independent brackets ``[lo, hi]``."""
    sign = -1.0 if maximize else 1.0
    a, b = lo.copy(), hi.copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    it = 0
    # narrow brackets freeze, so each row's result does not depend on the batch
    while (live := (b - a) >= tol).any():
        if it == max_iter:
            raise NonConvergence(
                f"golden-section bracket {np.max(b - a):.3g} above tol {tol:.3g} "
                f"after {max_iter} iterations"
            )
        left = fc < fd
        a_new, b_new = np.where(left, a, c), np.where(left, d, b)
        c_new = np.where(left, b_new - _GOLDEN * (b_new - a_new), d)
        d_new = np.where(left, c, a_new + _GOLDEN * (b_new - a_new))
        fx = sign * f(np.where(left, c_new, d_new))
        fc_new, fd_new = np.where(left, fx, fd), np.where(left, fc, fx)
        a, b = np.where(live, a_new, a), np.where(live, b_new, b)
        c, d = np.where(live, c_new, c), np.where(live, d_new, d)
        fc, fd = np.where(live, fc_new, fc), np.where(live, fd_new, fd)
        it += 1
    x = 0.5 * (a + b)
    return x, sign * f(x)


def _sqdist_derivs(u, ca, e1a, e2a, Ra, cb, nb, Rb):
    """Squared distance from ``a(u)`` to circle ``b`` with its first two u-derivatives."""
    c, s = np.cos(u)[..., None], np.sin(u)[..., None]
    w = Ra[..., None] * (c * e1a + s * e2a)
    q = ca - cb + w
    dq = Ra[..., None] * (-s * e1a + c * e2a)
    ddq = -w
    hq = dot(q, nb)
    hd = dot(dq, nb)
    hdd = dot(ddq, nb)
    qq = dot(q, q)
    rho2 = np.maximum(qq - hq * hq, 1e-300)
    rho = np.sqrt(rho2)
    pq_dq = dot(q, dq) - hq * hd
    pq_ddq = dot(q, ddq) - hq * hdd
    pdq_dq = dot(dq, dq) - hd * hd
    F = qq - 2.0 * Rb * rho + Rb * Rb
    # on the axis of b (rho = 0) F has a kink; the non-finite derivatives
    # send those entries to the golden-section fallback
    with np.errstate(divide="ignore", invalid="ignore"):
        F1 = 2.0 * dot(q, dq) - 2.0 * Rb * pq_dq / rho
        F2 = 2.0 * (dot(dq, dq) + dot(q, ddq)) - 2.0 * Rb * (
            (pdq_dq + pq_ddq) / rho - pq_dq * pq_dq / (rho2 * rho)
        )
    return F, F1, F2


def _refine(u0, h, ca, e1a, e2a, Ra, cb, nb, Rb, tol, max_iter, maximize=False):
    """Locate the extremum of the squared circle distance near grid angles ``u0``.

    Newton steps on the analytic derivative, confined to ``[u0 - h, u0 + h]``;
    entries that do not converge with the right curvature fall back to
    golden-section search. Returns ``(u, distance)``.
    """
    sign = -1.0 if maximize else 1.0
    args = (ca, e1a, e2a, Ra, cb, nb, Rb)
    x = u0.copy()
    done = np.zeros(u0.shape, dtype=bool)
    for _ in range(12):
        F, F1, F2 = _sqdist_derivs(x, *args)
        good_curv = np.isfinite(F1) & np.isfinite(F2) & (sign * F2 > 0)
        step = np.where(good_curv, F1 / np.where(F2 == 0, 1.0, F2), 0.0)
        x_new = np.clip(x - step, u0 - h, u0 + h)
        # converged rows freeze, so each row's result does not depend on the batch
        x_new = np.where(done, x, x_new)
        done |= good_curv & (np.abs(x_new - x) < tol)
        x = x_new
        if done.all():
            break
    bad = ~done
    if bad.any():
        sub = tuple(a[bad] for a in args)
        xs, _ = _golden_batch(lambda t: _sqdist_derivs(t, *sub)[0],
                              u0[bad] - h, u0[bad] + h, tol, max_iter, maximize)
        x = x.copy()
        x[bad] = xs
    # hypot form: no cancellation when the circles (nearly) meet
    c, s = np.cos(x)[..., None], np.sin(x)[..., None]
    pts = ca + Ra[..., None] * (c * e1a + s * e2a)
    return x, _dist_to_circles(pts, cb, nb, Rb)


def circle_pair_distances(ca, e1a, e2a, Ra, cb, nb, Rb, opts: MinimizeOpts = MinimizeOpts()):
    """Batched global distance between circle pairs.

    Circle ``a_i`` is parametrized as ``ca + Ra (cos u e1a + sin u e2a)``; the
    distance from each of its points to circle ``b_i`` is closed form, so the
    two-angle problem reduces to a one-angle minimization. The grid value
    is ``Ra``-Lipschitz in ``u``; the best ``n_candidates`` grid local minima are
    refined locally.

    Returns ``(distance, u, certified_gap)`` arrays of shape (P,).
    """
    n = opts.grid_n
    h = 2.0 * np.pi / n
    u = h * np.arange(n)
    cu, su = np.cos(u)[None, :, None], np.sin(u)[None, :, None]
    pts = ca[:, None, :] + Ra[:, None, None] * (cu * e1a[:, None, :] + su * e2a[:, None, :])
    f = _dist_to_circles(pts, cb[:, None, :], nb[:, None, :], Rb[:, None])

    local = (f <= np.roll(f, 1, axis=1)) & (f <= np.roll(f, -1, axis=1))
    ranked = np.where(local, f, np.inf)
    n_cand = min(opts.n_candidates, n)
    idx = np.argsort(ranked, axis=1)[:, :n_cand]
    P = ca.shape[0]
    rows = np.arange(P)[:, None]
    valid = np.isfinite(ranked[rows, idx])
    # refine only genuine local minima, flattened
    pi, ci = np.nonzero(valid)
    u0 = u[idx[pi, ci]]
    ustar, fstar = _refine(u0, h, ca[pi], e1a[pi], e2a[pi], Ra[pi], cb[pi], nb[pi], Rb[pi],
                           opts.tol, opts.max_iter)
    best_f = np.full(P, np.inf)
    best_u = np.zeros(P)
    order = np.argsort(fstar)[::-1]
    best_f[pi[order]] = fstar[order]
    best_u[pi[order]] = ustar[order]
    gmin = f.min(axis=1)
    grid_better = gmin < best_f
    best_u = np.where(grid_better, u[np.argmin(f, axis=1)], best_u)
    dist = np.minimum(best_f, gmin)
    gap = np.maximum(0.0, dist - (gmin - Ra * h / 2.0))
    return dist, np.mod(best_u, 2.0 * np.pi), gap


def _canonical_pair(a: Circle3, b: Circle3) -> tuple[Circle3, Circle3, bool]:
    ka = (a.radius, *a.center, *a.unit_normal)
    kb = (b.radius, *b.center, *b.unit_normal)
    return (a, b, False) if ka <= kb else (b, a, True)


def circle_circle_distance(a: Circle3, b: Circle3, opts: MinimizeOpts = MinimizeOpts()) -> CircleDistance:
    """Global minimum distance between two circles.

    Returns the distance, the minimizing angle pair ``(u, v)`` on ``a`` and
    ``b`` (angles from each circle's marked direction), and the Lipschitz
    certificate: the true minimum is no lower than ``distance - certified_gap``.

    Raises
    ------
    NonConvergence
        If refinement does not reach ``opts.tol`` within ``opts.max_iter`` steps.
    """
    p, q, swapped = _canonical_pair(a, b)
    e1, e2 = p.frame()
    d, u, gap = circle_pair_distances(
        p.center[None], e1[None], e2[None], np.array([p.radius]),
        q.center[None], q.unit_normal[None], np.array([q.radius]), opts,
    )
    u = float(u[0])
    point = p.points(u)
    rel = point - q.center
    rel = rel - np.dot(rel, q.unit_normal) * q.unit_normal
    f1, f2 = q.frame()
    v = float(np.mod(math.atan2(np.dot(rel, f2), np.dot(rel, f1)), 2.0 * np.pi))
    argmin = (v, u) if swapped else (u, v)
    return CircleDistance(float(d[0]), argmin, float(gap[0]))


class Check(NamedTuple):
    """Boolean verdict with the signed margin it was decided on."""

    ok: bool
    margin: float

    def __bool__(self) -> bool:
        return bool(self.ok)


def tori_disjoint(t1: SolidTorus, t2: SolidTorus, tol: float = 0.0,
                  opts: MinimizeOpts = MinimizeOpts()) -> Check:
    margin = circle_circle_distance(t1.circle, t2.circle, opts).distance - (t1.r + t2.r)
    return Check(margin > tol, margin)


# -- linking -----------------------------------------------------------------


class LinkVerdict(enum.Enum):
    LINKED = "linked"
    UNLINKED = "unlinked"
    DEGENERATE = "degenerate"


_CODES = (LinkVerdict.UNLINKED, LinkVerdict.LINKED, LinkVerdict.DEGENERATE)


def link_crossings(ca, e1a, e2a, Ra, cb, nb, Rb, tol):
    """Batched disk-crossing linking test.

    Circle ``a`` meets the plane of ``b`` in at most two points; the pair is
    linked iff exactly one of them lies inside the open disk bounded by ``b``.

    Returns ``(code, margin)`` where ``code`` indexes ``(UNLINKED, LINKED,
    DEGENERATE)`` and ``margin`` is how far the configuration is from changing
    the verdict: the smallest distance of a crossing point to circle ``b``,
    or the clearance of circle ``a`` from the plane when it misses it.
    """
    tol = np.broadcast_to(np.asarray(tol, dtype=float), Ra.shape)
    h0 = dot(ca - cb, nb)
    p1 = dot(e1a, nb)
    p2 = dot(e2a, nb)
    k = np.hypot(p1, p2)
    amp = Ra * k
    clearance = np.abs(h0) - amp

    code = np.zeros(Ra.shape, dtype=int)
    margin = np.array(clearance, dtype=float)

    crossing = clearance < -tol
    touching = np.abs(clearance) <= tol
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.arctan2(p2, p1)
        c = np.clip(-h0 / np.where(amp > 0, amp, 1.0), -1.0, 1.0)
        delta = np.arccos(c)
    radial = np.empty(Ra.shape + (2,))
    for j, sgn in enumerate((1.0, -1.0)):
        th = phi + sgn * delta
        pt = ca + Ra[..., None] * (np.cos(th)[..., None] * e1a + np.sin(th)[..., None] * e2a)
        diff = pt - cb
        radial[..., j] = np.sqrt(dot(diff, diff)) - Rb
    inside = radial < 0
    edge = np.min(np.abs(radial), axis=-1)
    n_inside = inside.sum(axis=-1)

    code = np.where(crossing, np.where(n_inside == 1, 1, 0), code)
    margin = np.where(crossing, np.minimum(edge, -clearance), margin)
    # a crossing through b's boundary circle, or a tangency of a to the plane
    # within the closed disk, cannot be classified robustly
    degenerate = (crossing & (edge <= tol)) | (touching & (radial[..., 0] <= tol))

    # circle a lies (almost) in the plane of b: unlinked, and as robust as
    # the in-plane separation of the two circles
    coplanar = (amp <= tol) & (np.abs(h0) <= tol)
    d = np.sqrt(dot(ca - cb, ca - cb))
    lo, hi = np.abs(d - Ra), d + Ra
    sep = np.where(Rb < lo, lo - Rb, np.where(Rb > hi, Rb - hi, 0.0))
    code = np.where(coplanar, 0, code)
    margin = np.where(coplanar, sep, margin)
    degenerate = np.where(coplanar, sep <= tol, degenerate)

    code = np.where(degenerate, 2, code)
    margin = np.where(degenerate, np.minimum(margin, 0.0), margin)
    return code, margin


def circles_linked(a: Circle3, b: Circle3, tol: float | None = None) -> LinkVerdict:
    """Classify two disjoint round circles as linked, unlinked or degenerate.

    ``tol`` defaults to ``EPS_GEO * (a.radius + b.radius)``.
    """
    if tol is None:
        tol = EPS_GEO * (a.radius + b.radius)
    e1, e2 = a.frame()
    code, _ = link_crossings(
        a.center[None], e1[None], e2[None], np.array([a.radius]),
        b.center[None], b.unit_normal[None], np.array([b.radius]), tol,
    )
    return _CODES[int(code[0])]


def linking_number_gauss(a: Circle3, b: Circle3, n_quad: int = 256) -> float:
    """Gauss double integral on an ``n_quad`` x ``n_quad`` periodic trapezoid grid."""
    t = 2.0 * np.pi * np.arange(n_quad) / n_quad
    ea1, ea2 = a.frame()
    eb1, eb2 = b.frame()
    x = a.points(t)
    y = b.points(t)
    dx = a.radius * (-np.sin(t)[:, None] * ea1 + np.cos(t)[:, None] * ea2)
    dy = b.radius * (-np.sin(t)[:, None] * eb1 + np.cos(t)[:, None] * eb2)
    diff = x[:, None, :] - y[None, :, :]
    cross = np.cross(dx[:, None, :], dy[None, :, :])
    num = dot(diff, cross)
    den = np.linalg.norm(diff, axis=-1) ** 3
    w = (2.0 * np.pi / n_quad) ** 2
    return float(np.sum(num / den) * w / (4.0 * np.pi))


# -- containment -------------------------------------------------------------


def containment_margins(outer: SolidTorus, centers, e1, e2, R, r, n_samples=256, tol_angle=1e-13,
                        refine_above=None):
    """Batched ``outer.r - max_p (dist(p, outer circle) + r_i)`` over inner circles.

    The sampled maximum over ``n_samples`` points of each inner central
    circle is refined locally around its two best samples. Sampling can only
    overstate a margin, so with ``refine_above`` set, rows whose sampled
    margin is already at or below it keep the sampled value.
    """
    L = len(R)
    return containment_margins_batch(
        np.broadcast_to(outer.center, (L, 3)), np.broadcast_to(outer.normal, (L, 3)),
        np.full(L, outer.R), np.full(L, outer.r), centers, e1, e2, R, r,
        n_samples, tol_angle, refine_above,
    )


def containment_margins_batch(oc, on, oR, orr, centers, e1, e2, R, r, n_samples=256,
                              tol_angle=1e-13, refine_above=None):
    """:func:`containment_margins` with a separate outer torus ``(oc, on, oR, orr)`` per row."""
    h = 2.0 * np.pi / n_samples
    u = h * np.arange(n_samples)
    cu, su = np.cos(u)[None, :, None], np.sin(u)[None, :, None]
    pts = centers[:, None, :] + R[:, None, None] * (cu * e1[:, None, :] + su * e2[:, None, :])
    f = _dist_to_circles(pts, oc[:, None, :], on[:, None, :], oR[:, None])
    worst = f.max(axis=1)
    rows = np.arange(len(worst))
    if refine_above is not None:
        rows = np.flatnonzero(orr - (worst + r) > refine_above)
    if rows.size:
        n_top = min(2, n_samples)
        idx = np.argsort(-f[rows], axis=1)[:, :n_top]
        rep = lambda a: np.repeat(a[rows], n_top, axis=0)
        _, fmax = _refine(
            u[idx].ravel(), h, rep(centers), rep(e1), rep(e2), rep(R),
            rep(oc), rep(on), rep(oR), tol_angle, 200, maximize=True,
        )
        worst[rows] = np.maximum(fmax.reshape(rows.size, n_top).max(axis=1), worst[rows])
    return orr - (worst + r)


def torus_contains_torus(outer: SolidTorus, inner: SolidTorus, n_samples: int = 256,
                         tol: float = 0.0) -> Check:
    """Whether ``inner`` lies in ``outer`` with clearance above ``tol``.

    A solid torus is the closed tube around its central circle, so the test
    is exact up to locating the farthest point of the inner central circle.
    """
    e1, e2 = inner.circle.frame()
    m = containment_margins(
        outer, inner.center[None], e1[None], e2[None],
        np.array([inner.R]), np.array([inner.r]), n_samples,
    )
    margin = float(m[0])
    return Check(margin >= tol, margin)


# -- projection --------------------------------------------------------------


def project_point(pl: Plane, p):
    """Orthogonal projection onto ``pl``.

    Returns the projected point(s) in 3-space and their coordinates in the
    orthonormal frame of :meth:`Plane.frame` centered at ``pl.origin``.
    """
    p = np.asarray(p, dtype=float)
    n = pl.unit_normal
    d = p - pl.origin
    q = p - dot(d, n)[..., None] * n
    e1, e2 = pl.frame()
    uv = np.stack([dot(d, e1), dot(d, e2)], axis=-1)
    return q, uv
