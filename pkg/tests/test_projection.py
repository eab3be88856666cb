import math

import numpy as np
import pytest
from scipy.optimize import minimize

from antoine.chains import regular_chain_from_params
from antoine.errors import InsufficientData
from antoine.geometry import Plane
from antoine.ifs import IfsSystem, attractor_sample, iterate_cover, similarity_dimension
from antoine.projection import (
    PlaneSweep,
    SweepConfig,
    area_ratio_bound,
    box_count_dimension,
    dyadic_scales,
    moran_envelope,
    project_cover_area,
    projection_connectivity,
    raster_slack,
    sweep,
)

import oracles
from systems import FEASIBLE_28, equal_scale_system


@pytest.fixture(scope="module")
def sys28():
    return IfsSystem.from_chain(regular_chain_from_params(FEASIBLE_28))


@pytest.fixture(scope="module")
def sample28(sys28):
    return attractor_sample(sys28, 100_000, 8, seed=0)


# -- plane families ---------------------------------------------------------------


def _covering_radius(normals, n_probe=50_000, n_refine=8, seed=0):
    """Largest angle from any direction to the nearest normal line, probed then polished."""
    N = np.asarray(normals)

    def gap(d):
        d = np.asarray(d, float)
        d = d / np.linalg.norm(d)
        return math.acos(min(1.0, float(np.max(np.abs(N @ d)))))

    probes = oracles.random_unit(np.random.default_rng(seed), n_probe)
    ang = np.arccos(np.clip(np.max(np.abs(probes @ N.T), axis=1), 0.0, 1.0))
    best = float(ang.max())
    for k in np.argsort(ang)[-n_refine:]:
        res = minimize(lambda x: -gap(x), probes[k], method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def test_fibonacci_covering_radius():
    sw = PlaneSweep.fibonacci_sphere(100)
    assert len(sw) == 100
    N = sw.normals()
    assert np.allclose(np.linalg.norm(N, axis=1), 1.0)
    assert _covering_radius(N) < 0.2


def test_default_sweep_shape():
    sw = PlaneSweep.default(origin=(1.0, 2.0, 3.0))
    assert len(sw) == 203
    assert np.allclose(sw.normals()[-3:], np.eye(3))
    assert all(np.array_equal(p.origin, [1.0, 2.0, 3.0]) for p in sw.planes)


# -- shadow area ----------------------------------------------------------------------


@pytest.mark.parametrize("normal", [(0, 0, 1), (1, 0, 0), (1, 2, 3)])
def test_level0_area_is_one_disk(sys28, normal):
    c0 = iterate_cover(sys28, 0)
    area = project_cover_area(c0, Plane(sys28.ambient.center, normal), 1024)
    want = math.pi * (sys28.ambient.diameter / 2) ** 2
    assert area == pytest.approx(want, rel=0.02)
    assert abs(area - want) <= raster_slack(c0, 1024)


def test_raster_n_precondition(sys28):
    with pytest.raises(ValueError):
        project_cover_area(iterate_cover(sys28, 0), Plane((0, 0, 0), (0, 0, 1)), 32)


def test_area_nonincreasing_in_lambda(sys28):
    planes = PlaneSweep.fibonacci_sphere(12).planes
    covers = [iterate_cover(sys28, lam) for lam in range(4)]
    for pl in planes:
        areas = [project_cover_area(c, pl, 512) for c in covers]
        for lam in range(3):
            assert areas[lam + 1] <= areas[lam] + raster_slack(covers[lam + 1], 512)


def test_area_below_moran_envelope(sys28):
    planes = PlaneSweep.fibonacci_sphere(12).planes
    for lam in range(4):
        cover = iterate_cover(sys28, lam)
        bound = moran_envelope(sys28, lam) + raster_slack(cover, 512)
        assert max(project_cover_area(cover, pl, 512) for pl in planes) <= bound


def test_area_ratio_equal_scales():
    sys = equal_scale_system(20, 0.1)
    pl = Plane((0, 0, 0), (0.3, -0.2, 1.0))
    a0 = project_cover_area(iterate_cover(sys, 0), pl, 512)
    for lam in (1, 2):
        ratio = project_cover_area(iterate_cover(sys, lam), pl, 512) / a0
        assert ratio <= area_ratio_bound(sys, lam, a0, 512)


def test_raster_convergence(sys28):
    cover = iterate_cover(sys28, 2)
    pl = Plane(sys28.ambient.center, (0.2, 0.5, 1.0))
    a = [project_cover_area(cover, pl, n) for n in (128, 256, 512, 1024, 2048)]
    diffs = np.abs(np.diff(a))
    assert np.all(diffs[1:] < diffs[:-1])


# -- box counting -----------------------------------------------------------------------


def test_box_count_segment():
    t = np.random.default_rng(0).uniform(0, 1, 100_000)
    pts = np.outer(t, [1.0, 2.0, 2.0]) / 3.0
    bc = box_count_dimension(pts, Plane((0, 0, 0), (0, 1, -1)), dyadic_scales(1.0, 3, 10))
    assert bc.slope == pytest.approx(1.0, abs=0.1)


def test_box_count_square_grid():
    g = np.arange(400) / 400  # half-open so every dyadic box tiles the square
    u, v = np.meshgrid(g, g)
    pts = np.stack([u.ravel(), v.ravel(), np.zeros(u.size)], axis=1)
    bc = box_count_dimension(pts, Plane((0, 0, 0), (0, 0, 1)), dyadic_scales(1.0, 2, 7))
    assert bc.slope == pytest.approx(2.0, abs=0.1)
    assert bc.fit_residual >= 0 and len(bc.counts) == 6


def test_box_count_insufficient_data():
    pts = np.random.default_rng(0).normal(size=(20_000, 3))
    with pytest.raises(InsufficientData):
        box_count_dimension(pts[:9_999], None, dyadic_scales(1.0))
    with pytest.raises(InsufficientData):
        box_count_dimension(pts, None, dyadic_scales(1.0, 3, 5))
    with pytest.raises(InsufficientData):
        box_count_dimension(pts, None, [1.0, 0.5, 0.25, 0.125, 0.0625])


def test_certified_projection_slopes(sys28, sample28):
    scales = dyadic_scales(sys28.ambient.diameter)
    for pl in PlaneSweep.fibonacci_sphere(10, sys28.ambient.center).planes:
        slope = box_count_dimension(sample28, pl, scales).slope
        assert 0.8 <= slope <= 1.8


def test_3d_slope_near_similarity_dimension(sys28, sample28):
    bc = box_count_dimension(sample28, None, dyadic_scales(sys28.ambient.diameter, 3, 8))
    assert abs(bc.slope - similarity_dimension(sys28.scales)) < 0.2


# -- connectivity -------------------------------------------------------------------


def test_connectivity_single_point():
    assert projection_connectivity([(1.0, 2.0, 3.0)], Plane((0, 0, 0), (0, 0, 1)), 0.1) == 1


def test_connectivity_two_clusters():
    rng = np.random.default_rng(0)
    pts = np.concatenate([rng.normal(0, 0.01, (500, 3)), rng.normal(0, 0.01, (500, 3)) + [5, 0, 0]])
    assert projection_connectivity(pts, Plane((0, 0, 0), (0, 0, 1)), 0.1) == 2


def test_connectivity_empty_and_bad_cell():
    pl = Plane((0, 0, 0), (0, 0, 1))
    assert projection_connectivity(np.zeros((0, 3)), pl, 0.1) == 0
    with pytest.raises(ValueError):
        projection_connectivity([(0, 0, 0)], pl, 0.0)


def test_connectivity_certified_necklace(sys28, sample28):
    cell = 2 * sys28.ambient.diameter * sys28.scales.max() ** 2
    for pl in PlaneSweep.default(sys28.ambient.center, n=20).planes:
        assert projection_connectivity(sample28, pl, cell) == 1


# -- sweeps -------------------------------------------------------------------------


SMALL = SweepConfig(lam=2, raster_n=256, n_points=20_000, depth=6, seed=3)


def test_sweep_axis_aligned(sys28):
    reps = sweep(sys28, PlaneSweep.axis_aligned(sys28.ambient.center), SMALL)
    assert len(reps) == 3
    for r in reps:
        assert r.raster_area >= 0 and r.component_count >= 1 and r.n_points == 20_000
        assert r.raster_area <= r.moran_envelope + r.raster_slack


def test_sweep_plane_order_independent(sys28):
    sw = PlaneSweep.fibonacci_sphere(5, sys28.ambient.center)
    fwd = sweep(sys28, sw, SMALL)
    rev = sweep(sys28, PlaneSweep(sw.planes[::-1], sw.scheme), SMALL)
    for a, b in zip(fwd, rev[::-1]):
        assert a.plane is b.plane
        assert (a.raster_area, a.box_count_slope, a.component_count) == (
            b.raster_area, b.box_count_slope, b.component_count)


def test_sweep_deterministic(sys28):
    sw = PlaneSweep.axis_aligned(sys28.ambient.center)
    a = [r.box_count_slope for r in sweep(sys28, sw, SMALL)]
    b = [r.box_count_slope for r in sweep(sys28, sw, SMALL)]
    assert a == b
