"""
Serialization: chain JSON, tabular CSV and OBJ meshes.

Every file carries a ``format_version``. Floats are written with ``repr``
(shortest round-trip form), so reading a file back reproduces the values
bit for bit, and identical inputs give byte-identical files. Writes go to a
temporary file in the target directory that is then renamed into place.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .chains import Chain, ChainVerdict
from .errors import GeometryError
from .geometry import SolidTorus, plane_frame
from .ifs import CoverLevel
from .projection import ProjectionReport
from .search import FeasibilityCell

FORMAT_VERSION = 1


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _plain(x):
    """Convert numpy scalars and arrays, tuples and nested containers to JSON types."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def dumps_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


# -- chains -----------------------------------------------------------------------


def torus_to_dict(t: SolidTorus) -> dict:
    return {"center": [float(v) for v in t.center], "normal": [float(v) for v in t.normal],
            "R": t.R, "r": t.r}


def torus_from_dict(d: dict) -> SolidTorus:
    """Validate ``d`` and rebuild the torus with the stored values unchanged."""
    SolidTorus.standard(d["center"], d["normal"], d["R"], d["r"])
    n = np.array(d["normal"], dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise GeometryError(f"stored normal is not a unit vector: {d['normal']}")
    # keep the stored normal: renormalizing could change its last bits
    return SolidTorus._trusted(d["center"], n, d["R"], d["r"])


def chain_to_dict(chain: Chain, verdict: ChainVerdict | None = None) -> dict:
    meta = dict(chain.meta)
    if verdict is not None:
        meta["verdict"] = verdict.to_dict()
    return {
        "format_version": FORMAT_VERSION,
        "ambient": torus_to_dict(chain.ambient),
        "links": [torus_to_dict(t) for t in chain.links],
        "meta": _plain(meta),
    }


def chain_from_dict(d: dict) -> Chain:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {d.get('format_version')!r}")
    return Chain(torus_from_dict(d["ambient"]), tuple(torus_from_dict(t) for t in d["links"]),
                 dict(d.get("meta", {})))


def write_chain_json(path, chain: Chain, verdict: ChainVerdict | None = None) -> Path:
    return atomic_write_text(path, dumps_json(chain_to_dict(chain, verdict)))


def read_chain_json(path) -> Chain:
    return chain_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_json(path, obj) -> Path:
    body = dict(_plain(obj))
    body.setdefault("format_version", FORMAT_VERSION)
    return atomic_write_text(path, dumps_json(body))


# -- CSV ------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version: {FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw string rows, skipping the version comment."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


COVER_HEADER = ("word", "cx", "cy", "cz", "nx", "ny", "nz", "R", "r")


def write_cover_csv(path, cover: CoverLevel) -> Path:
    words = cover.words()
    rows = (
        ["-".join(map(str, w)), *c, *n, R, r]
        for w, c, n, R, r in zip(words, cover.centers, cover.normals, cover.R, cover.r)
    )
    return atomic_write_text(path, csv_text(COVER_HEADER, rows))


def write_samples_csv(path, points: np.ndarray, words: np.ndarray | None = None) -> Path:
    if words is None:
        return atomic_write_text(path, csv_text(("x", "y", "z"), points))
    rows = ([*p, "-".join(map(str, w))] for p, w in zip(points, words))
    return atomic_write_text(path, csv_text(("x", "y", "z", "word"), rows))


REPORT_HEADER = ("nx", "ny", "nz", "lambda", "raster_area", "moran_envelope", "raster_slack",
                 "slope", "residual", "components", "n_points")


def write_reports_csv(path, reports: Sequence[ProjectionReport]) -> Path:
    rows = (
        [*rep.plane.unit_normal, rep.lam, rep.raster_area, rep.moran_envelope, rep.raster_slack,
         rep.box_count_slope, rep.fit_residual, rep.component_count, rep.n_points]
        for rep in reports
    )
    return atomic_write_text(path, csv_text(REPORT_HEADER, rows))


SCAN_HEADER = ("rho", "s", "m", "valid", "certified", "margin_disjoint", "margin_linking",
               "margin_containment", "residual_regularity", "failure_reason")


def write_scan_csv(path, cells: Sequence[FeasibilityCell]) -> Path:
    def row(c: FeasibilityCell):
        mm = c.verdict.min_margins()
        return [c.rho, c.s, c.m, c.valid, c.certified, mm.get("disjoint", math.nan),
                mm.get("linking", math.nan), mm.get("containment", math.nan),
                mm.get("regularity", math.nan), c.failure_reason]
    return atomic_write_text(path, csv_text(SCAN_HEADER, (row(c) for c in cells)))


# -- OBJ meshes --------------------------------------------------------------------


def torus_mesh(t: SolidTorus, n_major: int = 48, n_minor: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Vertices ``(n_major * n_minor, 3)`` and triangles ``(2 * n_major * n_minor, 3)``.

    The quad grid wraps in both directions, so the triangulated surface is
    closed with Euler characteristic 0.
    """
    if n_major < 3 or n_minor < 3:
        raise ValueError("segment counts must be at least 3")
    e1, e2 = plane_frame(t.normal)
    u = 2.0 * np.pi * np.arange(n_major) / n_major
    v = 2.0 * np.pi * np.arange(n_minor) / n_minor
    radial = np.cos(u)[:, None] * e1 + np.sin(u)[:, None] * e2
    ring = t.center + t.R * radial
    verts = (ring[:, None, :]
             + t.r * (np.cos(v)[None, :, None] * radial[:, None, :]
                      + np.sin(v)[None, :, None] * t.normal))
    i, j = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    a = i * n_minor + j
    b = ((i + 1) % n_major) * n_minor + j
    c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
    d = i * n_minor + (j + 1) % n_minor
    tris = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)])
    return verts.reshape(-1, 3), tris


def obj_text(tori: Sequence[SolidTorus], n_major: int = 48, n_minor: int = 16,
             names: Sequence[str] | None = None) -> str:
    out = [f"# format_version {FORMAT_VERSION}\n"]
    offset = 1
    for idx, t in enumerate(tori):
        verts, tris = torus_mesh(t, n_major, n_minor)
        out.append(f"o {names[idx] if names else f'torus_{idx}'}\n")
        out.extend(f"v {x!r} {y!r} {z!r}\n" for x, y, z in verts.tolist())
        out.extend(f"f {p + offset} {q + offset} {r + offset}\n" for p, q, r in tris.tolist())
        offset += len(verts)
    return "".join(out)


def write_obj(path, tori: Sequence[SolidTorus], n_major: int = 48, n_minor: int = 16,
              names: Sequence[str] | None = None) -> Path:
    return atomic_write_text(path, obj_text(tori, n_major, n_minor, names))


def read_obj(path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-object vertices and zero-based triangles."""
    objs: list[tuple[list, list]] = []
    base = 1
    total = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tag, _, rest = line.partition(" ")
        if tag == "o":
            base = total + 1
            objs.append(([], []))
        elif tag == "v":
            objs[-1][0].append([float(x) for x in rest.split()])
            total += 1
        elif tag == "f":
            objs[-1][1].append([int(x) - base for x in rest.split()])
    return [(np.array(v), np.array(f, dtype=int)) for v, f in objs]
