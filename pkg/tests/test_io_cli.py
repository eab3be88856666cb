import json
from collections import Counter

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from antoine import io
from antoine.chains import build_theorem2_chain, regular_chain_from_params
from antoine.cli import main
from antoine.geometry import Circle3, SolidTorus

import oracles
from systems import FEASIBLE_20, FEASIBLE_28

REGULAR_28 = ["--rho", repr(FEASIBLE_28.r_T), "--m", "14", "--s", repr(FEASIBLE_28.s)]


def _same_torus(a, b):
    return (np.array_equal(a.center, b.center) and np.array_equal(a.normal, b.normal)
            and a.R == b.R and a.r == b.r)


# -- chain JSON ------------------------------------------------------------------------


@pytest.mark.parametrize("chain", [build_theorem2_chain(1.0, 4.0), regular_chain_from_params(FEASIBLE_20)],
                         ids=["constructive", "regular20"])
def test_chain_json_round_trip_exact(tmp_path, chain):
    path = io.write_chain_json(tmp_path / "c.json", chain)
    back = io.read_chain_json(path)
    assert _same_torus(back.ambient, chain.ambient)
    assert len(back.links) == len(chain.links)
    assert all(_same_torus(a, b) for a, b in zip(back.links, chain.links))
    # writing the restored chain gives the same bytes
    assert io.write_chain_json(tmp_path / "d.json", back).read_bytes() == path.read_bytes()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.01, 100.0), st.floats(0.01, 0.99))
def test_torus_dict_round_trip(seed, R, frac):
    rng = np.random.default_rng(seed)
    t = SolidTorus(Circle3(rng.normal(size=3) * 10, oracles.random_unit(rng), R), R * frac)
    back = io.torus_from_dict(json.loads(io.dumps_json(io.torus_to_dict(t))))
    assert _same_torus(back, t)


def test_chain_json_rejects_unknown_version():
    d = io.chain_to_dict(regular_chain_from_params(FEASIBLE_28))
    d["format_version"] = 99
    with pytest.raises(ValueError):
        io.chain_from_dict(d)


# -- CSV and OBJ ----------------------------------------------------------------------


def test_csv_text_format():
    text = io.csv_text(("a", "b", "c"), [(0.1, True, 3)])
    lines = text.splitlines()
    assert lines[0] == f"# format_version: {io.FORMAT_VERSION}"
    assert lines[1] == "a,b,c" and lines[2] == "0.1,1,3"


@pytest.mark.parametrize("n_major,n_minor", [(3, 3), (48, 16), (7, 5)])
def test_torus_mesh_is_closed(n_major, n_minor):
    t = SolidTorus(Circle3((1, 2, 3), (1, 1, 1), 2.0), 0.5)
    verts, tris = io.torus_mesh(t, n_major, n_minor)
    assert len(verts) == n_major * n_minor and len(tris) == 2 * n_major * n_minor
    edges = Counter(tuple(sorted(e)) for f in tris for e in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])))
    # closed 2-manifold: every edge bounds exactly two triangles
    assert set(edges.values()) == {2}
    assert len(verts) - len(edges) + len(tris) == 0
    # vertices lie on the torus surface
    d = verts - t.center
    h = d @ t.normal
    rho = np.linalg.norm(d - h[:, None] * t.normal, axis=1)
    assert np.allclose(np.hypot(rho - t.R, h), t.r)


# -- CLI --------------------------------------------------------------------------------


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def test_cli_build_chain(tmp_path, capsys):
    assert run(tmp_path, "build-chain", "--rb", "1", "--RB", "4") == 0
    out = capsys.readouterr().out
    assert '"config"' in out and '"seed": 0' in out
    chain = io.read_chain_json(tmp_path / "chain.json")
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["verdict"]["ok"] and len(chain.links) == 2 * chain.meta["params"]["m"]


@pytest.mark.parametrize("argv", [["--rb", "1", "--RB", "3"], ["--rb", "1", "--RB", "4", "--m", "2"],
                                  ["--rb", "1"]])
def test_cli_build_chain_bad_params(tmp_path, capsys, argv):
    assert run(tmp_path, "build-chain", *argv) == 2
    assert capsys.readouterr().err


def test_cli_regular_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "regular", "--r-T", repr(FEASIBLE_28.r_T), "--m", "14", "--s", repr(FEASIBLE_28.s)) == 0
    assert json.loads((tmp_path / "verdict.json").read_text())["certified"] is True
    assert run(tmp_path, "regular", "--r-T", "0.1", "--m", "10", "--s", "0.3") == 3
    assert "validation failed" in capsys.readouterr().err
    assert run(tmp_path, "regular", "--r-T", "2.0", "--m", "10", "--s", "0.3") == 2


def test_cli_iterate_level0_one_row(tmp_path):
    assert run(tmp_path, "iterate", *REGULAR_28, "--lam", "0") == 0
    header, rows = io.read_csv(tmp_path / "cover.csv")
    assert header == list(io.COVER_HEADER) and len(rows) == 1


def test_cli_iterate_budget(tmp_path):
    assert run(tmp_path, "iterate", *REGULAR_28, "--lam", "4", "--budget", "1000") == 4


def test_cli_project_axis(tmp_path):
    argv = ["project", *REGULAR_28, "--scheme", "axis", "--lam", "1", "--raster-n", "128",
            "--n-points", "20000", "--depth", "6"]
    assert run(tmp_path, *argv) == 0
    header, rows = io.read_csv(tmp_path / "projection.csv")
    assert header == list(io.REPORT_HEADER) and len(rows) == 3


def test_cli_project_explicit_needs_triples(tmp_path):
    assert run(tmp_path, "project", *REGULAR_28, "--scheme", "explicit", "--normals", "1", "0") == 2


def test_cli_search(tmp_path):
    argv = ["search", "--rho-range", "0.1", "0.4", "4", "--s-range", "0.1", "0.3", "3", "--m-list", "14"]
    assert run(tmp_path, *argv) == 0
    header, rows = io.read_csv(tmp_path / "scan.csv")
    assert header == list(io.SCAN_HEADER) and len(rows) == 12
    region = json.loads((tmp_path / "region.json").read_text())
    assert [r["two_m"] for r in region["per_m"]] == [28]


def test_cli_mesh_regular_20(tmp_path):
    assert run(tmp_path, "mesh", "--rho", repr(FEASIBLE_20.r_T), "--m", "10", "--s", repr(FEASIBLE_20.s),
               "--n-major", "24", "--n-minor", "8") == 0
    objs = io.read_obj(tmp_path / "chain.obj")
    assert len(objs) == 20
    for verts, tris in objs:
        edges = {tuple(sorted(e)) for f in tris for e in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0]))}
        assert len(verts) - len(edges) + len(tris) == 0


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lam": 0, "rho": FEASIBLE_28.r_T, "m": 14, "s": FEASIBLE_28.s}))
    assert run(tmp_path, "--config", str(cfg), "iterate") == 0
    assert len(io.read_csv(tmp_path / "cover.csv")[1]) == 1
    # explicit flags beat the file
    assert run(tmp_path, "--config", str(cfg), "iterate", "--lam", "1") == 0
    assert len(io.read_csv(tmp_path / "cover.csv")[1]) == 28


def test_cli_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lam": 0, "colour": "red"}))
    assert run(tmp_path, "--config", str(cfg), "iterate", *REGULAR_28) == 2
    assert "colour" in capsys.readouterr().err


def test_cli_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ANTOINE_OUTPUT_DIR", str(tmp_path))
    assert main(["iterate", *REGULAR_28, "--lam", "0"]) == 0
    assert (tmp_path / "cover.csv").exists()


def test_cli_csv_byte_identical_for_same_seed(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for d, seed in ((a, "7"), (b, "7"), (c, "8")):
        d.mkdir()
        assert main(["--out", str(d), "--seed", seed, "iterate", *REGULAR_28, "--lam", "2",
                     "--n-points", "500", "--depth", "5"]) == 0
    for name in ("cover.csv", "samples.csv", "iterate.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "samples.csv").read_bytes() != (c / "samples.csv").read_bytes()
