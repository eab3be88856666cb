"""
Similarity systems generated by chains, their prelimit covers and attractors.

A chain whose links are all similar to the ambient torus defines one
orientation-preserving similarity per link. Words over the links address
the tori of the nested covers ``M_0 = T``, ``M_1``, ``M_2``, ...; the
necklace is their intersection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect

from .chains import Chain, validate_chain
from .errors import BudgetExceeded, NotSimilar
from .geometry import Similarity, SolidTorus, apply_similarity, plane_frame

DEFAULT_BUDGET = 10**6


def _frame_matrix(torus: SolidTorus, phase: float = 0.0) -> np.ndarray:
    e1, e2 = plane_frame(torus.normal)
    c, s = math.cos(phase), math.sin(phase)
    return np.column_stack([c * e1 + s * e2, -s * e1 + c * e2, torus.normal])


def extract_similarity(ambient: SolidTorus, link: SolidTorus, phase: float = 0.0,
                       rtol: float = 1e-9) -> Similarity:
    """The orientation-preserving similarity taking ``ambient`` onto ``link``.

    The marked point of the ambient central circle (angle 0, see
    :func:`antoine.geometry.plane_frame`) goes to the point at angle ``phase``
    on the link's central circle and the ambient normal goes to the link
    normal. Any ``phase`` gives a valid map; they differ by a rotation of
    the link about its own axis.

    Raises
    ------
    NotSimilar
        If ``r/R`` of the two tori differ by more than ``rtol``.
    """
    ra, rl = ambient.r / ambient.R, link.r / link.R
    if abs(ra - rl) > rtol * max(ra, rl):
        raise NotSimilar(f"ratio r/R differs: ambient {ra!r}, link {rl!r}")
    scale = link.R / ambient.R
    Q = _frame_matrix(link, phase) @ _frame_matrix(ambient).T
    t = link.center - scale * Q @ ambient.center
    return Similarity(scale, Q, t)


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """An ambient torus and the similarities mapping it onto its chain links.

    ``validated`` records that the links form a valid simple chain;
    ``certified`` additionally requires ``sum(s_i**2) < 1``.
    """

    ambient: SolidTorus
    maps: tuple[Similarity, ...]
    validated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))

    @classmethod
    def from_chain(cls, chain: Chain, phase: float = 0.0, validate: bool = True,
                   atol: float = 1e-9) -> "IfsSystem":
        maps = [extract_similarity(chain.ambient, t, phase) for t in chain.links]
        for i, (S, link) in enumerate(zip(maps, chain.links)):
            img = apply_similarity(S, chain.ambient)
            err = max(
                np.linalg.norm(img.center - link.center),
                np.linalg.norm(np.cross(img.normal, link.normal)) * link.R,
                abs(img.R - link.R),
                abs(img.r - link.r),
            )
            if err > atol * max(1.0, chain.ambient.diameter):
                raise NotSimilar(f"map {i} does not reproduce its link (error {err:.3g})")
        ok = validate_chain(chain).ok if validate else False
        return cls(chain.ambient, maps, ok)

    @property
    def k(self) -> int:
        return len(self.maps)

    @property
    def scales(self) -> np.ndarray:
        return np.array([S.scale for S in self.maps])

    @property
    def sum_sq(self) -> float:
        return float(np.sum(self.scales**2))

    @property
    def certified(self) -> bool:
        return self.validated and self.sum_sq < 1.0

    def stacked(self):
        """Scales (k,), rotations (k, 3, 3) and translations (k, 3)."""
        return (
            self.scales,
            np.array([S.rotation for S in self.maps]),
            np.array([S.translation for S in self.maps]),
        )


@dataclass(frozen=True, eq=False)
class CoverLevel:
    """The ``k**lam`` tori of the prelimit cover ``M_lam`` in lexicographic word order."""

    lam: int
    k: int
    ambient: SolidTorus
    centers: np.ndarray
    normals: np.ndarray
    R: np.ndarray
    r: np.ndarray

    def __len__(self) -> int:
        return len(self.R)

    @property
    def tori(self) -> list[SolidTorus]:
        return [SolidTorus._trusted(c, n, R, r)
                for c, n, R, r in zip(self.centers, self.normals, self.R, self.r)]

    def torus(self, i: int) -> SolidTorus:
        return SolidTorus._trusted(self.centers[i], self.normals[i], self.R[i], self.r[i])

    @property
    def diameters(self) -> np.ndarray:
        return 2.0 * (self.R + self.r)

    def words(self) -> np.ndarray:
        """Letters ``1..k`` of every word, shape ``(k**lam, lam)``."""
        idx = np.arange(len(self))
        out = np.empty((len(self), self.lam), dtype=int)
        for pos in range(self.lam - 1, -1, -1):
            out[:, pos] = idx % self.k + 1
            idx //= self.k
        return out

    def parent_index(self) -> np.ndarray:
        """Index in level ``lam - 1`` of the word with its last letter dropped."""
        return np.arange(len(self)) // self.k


def iterate_cover(sys: IfsSystem, lam: int, budget: int = DEFAULT_BUDGET) -> CoverLevel:
    """Enumerate ``S_{i1} o ... o S_{ilam}(T)`` over all words, lexicographically."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if sys.k**lam > budget:
        raise BudgetExceeded(f"{sys.k}**{lam} tori exceed the budget {budget}")
    T = sys.ambient
    centers, normals = T.center[None].copy(), T.normal[None].copy()
    R, r = np.array([T.R]), np.array([T.r])
    s, Q, t = sys.stacked()
    for _ in range(lam):
        # the new first letter is the most significant digit
        centers = (s[:, None, None] * np.einsum("kij,nj->kni", Q, centers) + t[:, None, :]).reshape(-1, 3)
        normals = np.einsum("kij,nj->kni", Q, normals).reshape(-1, 3)
        R = (s[:, None] * R[None, :]).ravel()
        r = (s[:, None] * r[None, :]).ravel()
    return CoverLevel(lam, sys.k, T, centers, normals, R, r)


def attractor_sample(sys: IfsSystem, n_points: int, depth: int, seed: int = 0,
                     return_words: bool = False):
    """Sample the attractor by applying random words to a point of ``T``.

    Each sample is ``S_{i1} o ... o S_{idepth}(p0)`` for a uniformly random
    word, where ``p0`` is the marked point of the ambient central circle.
    Since ``p0`` lies in ``T``, every sample lies in the cover torus of its
    word, hence in ``M_depth`` and within ``diam(T) * max(s)**depth`` of the
    attractor. Words come from a counter-based Philox stream seeded by
    ``seed``, so the output is reproducible.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = np.random.Generator(np.random.Philox(seed))
    words = rng.integers(0, sys.k, size=(n_points, depth))
    s, Q, t = sys.stacked()
    x = np.repeat(sys.ambient.circle.points(0.0)[None], n_points, axis=0)
    for pos in range(depth - 1, -1, -1):
        w = words[:, pos]
        x = s[w, None] * np.einsum("nij,nj->ni", Q[w], x) + t[w]
    if return_words:
        return x, words + 1
    return x


class MoranSum(NamedTuple):
    closed_form: float
    enumerated: float | None


def moran_cover_sum(sys: IfsSystem, lam: int, exponent: float = 2.0,
                    budget: int = DEFAULT_BUDGET, enumerate: bool | None = None) -> MoranSum:
    """Sum of ``(diam S_w(T) / diam T) ** exponent`` over words of length ``lam``.

    The closed form is ``(sum_i s_i**exponent) ** lam``. The enumerated value
    sums the diameters of the actual cover tori from :func:`iterate_cover`;
    it is computed when ``k**lam`` fits the budget (``enumerate=None``),
    always (``True``, raising :class:`BudgetExceeded` otherwise) or never.
    """
    closed = float(np.sum(sys.scales**exponent) ** lam)
    fits = sys.k**lam <= budget
    if enumerate is False or (enumerate is None and not fits):
        return MoranSum(closed, None)
    cover = iterate_cover(sys, lam, budget)
    rel = cover.diameters / sys.ambient.diameter
    return MoranSum(closed, float(np.sum(rel**exponent)))


def similarity_dimension(scales: IfsSystem | Sequence[float], tol: float = 1e-12) -> float:
    """The ``d`` with ``sum_i s_i**d = 1``, by bisection."""
    s = scales.scales if isinstance(scales, IfsSystem) else np.asarray(scales, dtype=float)
    if np.any((s <= 0) | (s >= 1)):
        raise ValueError("similarity coefficients must lie in (0, 1)")
    k = len(s)
    hi = math.log(k) / math.log(1.0 / s.max()) + 1.0
    return float(bisect(lambda d: np.sum(s**d) - 1.0, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
