"""
Feasibility scan over regular chains.

A regular chain is fixed by ``rho = r_T / R_T``, the half link count ``m``
and the link scale ``s``. The scan classifies a grid of such triples with
:func:`antoine.chains.validate_chains` and checks each valid one against the
necessary conditions and implications relating ``rho``, ``m`` and ``s``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chains import ChainVerdict, RegularChainParams, regular_chain_from_params, validate_chains
from .errors import InvalidParams, InvariantViolation

INV_2PI = 1.0 / (2.0 * math.pi)
RHO_IMPLIES_SMALL_S = 1.0 / (2.0 * math.pi - 1.0)


@dataclass(frozen=True)
class SearchGrid:
    """Grid of ``(rho, s, m)``; ranges are ``(lo, hi, steps)`` sampled end-inclusive."""

    rho_range: tuple[float, float, int] = (0.01, 0.5, 100)
    s_range: tuple[float, float, int] = (0.01, 0.4, 100)
    m_list: tuple[int, ...] = tuple(range(9, 31)) + (40,)

    def __post_init__(self):
        for name, (lo, hi, n) in (("rho_range", self.rho_range), ("s_range", self.s_range)):
            if not (0.0 < lo < hi < 1.0) or int(n) != n or n < 2:
                raise InvalidParams(f"{name} must satisfy 0 < lo < hi < 1 and steps >= 2")
        if not self.m_list or any(int(m) != m or m < 2 for m in self.m_list):
            raise InvalidParams("m_list must hold integers >= 2")
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))

    @property
    def rhos(self) -> np.ndarray:
        return np.linspace(*self.rho_range[:2], int(self.rho_range[2]))

    @property
    def ss(self) -> np.ndarray:
        return np.linspace(*self.s_range[:2], int(self.s_range[2]))

    def __len__(self) -> int:
        return len(self.m_list) * int(self.rho_range[2]) * int(self.s_range[2])


@dataclass(frozen=True)
class Theorem3Flags:
    """Hypotheses, conclusions and necessary conditions for one ``(rho, m, s)``.

    Implications checked:

    1. ``s < 1/(2 pi)`` and ``m s < pi``  imply  ``2 m s**2 < 1``;
    2. ``rho < 1/(2 pi - 1)`` and ``s <= rho/(1 + rho)``  imply  ``s < 1/(2 pi)``;
    3. ``2m >= 40`` and ``s (1 + rho) < sin(pi/m)``  imply  ``s < 1/(2 pi)``.
    """

    s_small: bool
    rho_small: bool
    m_large: bool
    contain_bound: bool
    chord_bound: bool
    ms_bound: bool
    moran: bool
    implication_1: bool
    implication_2: bool
    implication_3: bool

    @property
    def necessary(self) -> bool:
        return self.contain_bound and self.chord_bound and self.ms_bound

    @property
    def implications(self) -> bool:
        return self.implication_1 and self.implication_2 and self.implication_3


def theorem3_checks(rho: float, m: int, s: float) -> Theorem3Flags:
    s_small = s < INV_2PI
    rho_small = rho < RHO_IMPLIES_SMALL_S
    m_large = 2 * m >= 40
    contain = s <= rho / (1.0 + rho)
    chord = math.sin(math.pi / m) > s * (1.0 + rho)
    ms = m * s < math.pi
    moran = 2 * m * s * s < 1.0
    return Theorem3Flags(
        s_small, rho_small, m_large, contain, chord, ms, moran,
        implication_1=not (s_small and ms) or moran,
        implication_2=not (rho_small and contain) or s_small,
        implication_3=not (m_large and chord) or s_small,
    )


@dataclass(frozen=True)
class FeasibilityCell:
    rho: float
    s: float
    m: int
    verdict: ChainVerdict
    certified: bool
    thm3_flags: Theorem3Flags

    @property
    def valid(self) -> bool:
        return self.verdict.ok

    @property
    def failure_reason(self) -> str:
        if not self.verdict.failures:
            return ""
        fam, where, msg = self.verdict.failures[0]
        return f"{fam} {where}: {msg}"


def evaluate_cell(rho: float, s: float, m: int, tol: float | None = None) -> FeasibilityCell:
    """Build and validate the regular chain with ``R_T = 1``."""
    return evaluate_cells(rho, [s], m, tol)[0]


def evaluate_cells(rho: float, ss, m: int, tol: float | None = None) -> list[FeasibilityCell]:
    """:func:`evaluate_cell` for several ``s`` at once (one vectorized validation)."""
    chains = [regular_chain_from_params(RegularChainParams(1.0, float(rho), int(m), float(s))) for s in ss]
    verdicts = validate_chains(chains, tol=tol, regular=True, fail_fast=True)
    out = []
    for s, v in zip(ss, verdicts):
        v = v.compact()
        certified = bool(v.ok and 2 * m * s * s < 1.0)
        out.append(FeasibilityCell(float(rho), float(s), int(m), v, certified, theorem3_checks(rho, m, s)))
    return out


def _scan_m(args) -> list[FeasibilityCell]:
    rhos, ss, m, tol = args
    return [c for rho in rhos for c in evaluate_cells(rho, ss, m, tol)]


def scan(grid: SearchGrid = SearchGrid(), tol: float | None = None, workers: int = 1) -> list[FeasibilityCell]:
    """Evaluate every cell, ordered by ``m``, then ``rho``, then ``s``.

    The cells of one ``(m, rho)`` row are validated together. With
    ``workers > 1`` the values of ``m`` are distributed over processes; the
    output order does not depend on ``workers``.
    """
    jobs = [(grid.rhos, grid.ss, m, tol) for m in grid.m_list]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_scan_m, jobs))
    else:
        parts = [_scan_m(j) for j in jobs]
    return [c for part in parts for c in part]


@dataclass
class MSummary:
    m: int
    n_cells: int = 0
    n_valid: int = 0
    n_certified: int = 0
    rho_min: float = math.nan
    rho_max: float = math.nan
    s_min: float = math.nan
    s_max: float = math.nan
    link_threshold: dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "m": self.m, "two_m": 2 * self.m, "n_cells": self.n_cells, "n_valid": self.n_valid,
            "n_certified": self.n_certified, "rho_min": self.rho_min, "rho_max": self.rho_max,
            "s_min": self.s_min, "s_max": self.s_max,
            "link_threshold": [[r, s] for r, s in sorted(self.link_threshold.items())],
        }


def certified_region_report(cells: list[FeasibilityCell]) -> dict[int, MSummary]:
    """Per-``m`` counts and extremes of the valid and certified cells.

    ``link_threshold`` maps each ``rho`` to the smallest scanned ``s`` at
    which consecutive links are linked (absent when linking never holds).

    Raises
    ------
    InvariantViolation
        If a valid cell breaks a necessary condition or an implication, or
        a certified cell is not valid.
    """
    out: dict[int, MSummary] = {}
    for c in cells:
        summ = out.setdefault(c.m, MSummary(c.m))
        summ.n_cells += 1
        if c.certified and not c.valid:
            raise InvariantViolation(f"certified cell is invalid: {c}")
        if c.verdict.linking_ok:
            prev = summ.link_threshold.get(c.rho)
            if prev is None or c.s < prev:
                summ.link_threshold[c.rho] = c.s
        if not c.valid:
            continue
        f = c.thm3_flags
        if not (f.necessary and f.implications):
            raise InvariantViolation(f"valid cell (rho={c.rho}, s={c.s}, m={c.m}) violates {f}")
        summ.n_valid += 1
        summ.n_certified += bool(c.certified)
        for attr, v in (("rho", c.rho), ("s", c.s)):
            lo, hi = getattr(summ, f"{attr}_min"), getattr(summ, f"{attr}_max")
            setattr(summ, f"{attr}_min", v if math.isnan(lo) else min(lo, v))
            setattr(summ, f"{attr}_max", v if math.isnan(hi) else max(hi, v))
    return dict(sorted(out.items()))
