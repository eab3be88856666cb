import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from antoine.chains import regular_chain_from_params
from antoine.errors import BudgetExceeded, NotSimilar
from antoine.geometry import (
    Circle3,
    Similarity,
    SolidTorus,
    apply_similarity,
    torus_contains_torus,
)
from antoine.ifs import (
    IfsSystem,
    attractor_sample,
    extract_similarity,
    iterate_cover,
    moran_cover_sum,
    similarity_dimension,
)

import oracles
from systems import FEASIBLE_20, FEASIBLE_28, equal_scale_system


@pytest.fixture(scope="module")
def sys20():
    return IfsSystem.from_chain(regular_chain_from_params(FEASIBLE_20))


@pytest.fixture(scope="module")
def sys28():
    return IfsSystem.from_chain(regular_chain_from_params(FEASIBLE_28))


# -- extract_similarity ------------------------------------------------------------


def test_extract_identity():
    t = SolidTorus(Circle3((1, 2, 3), (1, 1, 0), 2.0), 0.5)
    S = extract_similarity(t, t)
    assert S.scale == 1.0
    assert np.allclose(S.rotation, np.eye(3), atol=1e-15)
    assert np.allclose(S.translation, 0.0, atol=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-math.pi, math.pi), st.integers(0, 2**31 - 1))
def test_extract_round_trip(scale, phase, seed):
    rng = np.random.default_rng(seed)
    amb = SolidTorus(Circle3(rng.normal(size=3), oracles.random_unit(rng), 1.5), 0.4)
    target = Similarity(scale, oracles.random_rotation(rng), rng.normal(size=3))
    link = apply_similarity(target, amb)
    S = extract_similarity(amb, link, phase)
    img = apply_similarity(S, amb)
    assert np.allclose(img.center, link.center, atol=1e-9)
    assert np.linalg.norm(np.cross(img.normal, link.normal)) < 1e-9
    assert img.R == pytest.approx(link.R, abs=1e-9) and img.r == pytest.approx(link.r, abs=1e-9)
    # marked point goes to the requested phase
    assert np.allclose(S(amb.circle.points(0.0)), link.circle.points(phase), atol=1e-9)


def test_extract_rejects_dissimilar():
    amb = SolidTorus(Circle3((0, 0, 0), (0, 0, 1), 1.0), 0.25)
    with pytest.raises(NotSimilar):
        extract_similarity(amb, SolidTorus(Circle3((0, 0, 0), (0, 0, 1), 0.5), 0.2))


def test_from_chain_conformity(sys20):
    c = regular_chain_from_params(FEASIBLE_20)
    assert sys20.validated and not sys20.certified
    for S, link in zip(sys20.maps, c.links):
        img = apply_similarity(S, c.ambient)
        assert np.allclose(img.center, link.center, atol=1e-9)
        assert np.linalg.norm(np.cross(img.normal, link.normal)) < 1e-9
        assert S.scale == pytest.approx(link.r / c.ambient.r, abs=1e-9)
        assert S.scale == pytest.approx(link.R / c.ambient.R, abs=1e-9)


def test_certified_gate(sys28):
    assert sys28.sum_sq == pytest.approx(28 * FEASIBLE_28.s**2, rel=1e-12)
    assert sys28.sum_sq < 1 and sys28.certified
    assert not equal_scale_system(20, 0.1).certified  # not built from a validated chain


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 27), min_size=1, max_size=6))
def test_word_scale_is_product(word):
    sys = IfsSystem.from_chain(regular_chain_from_params(FEASIBLE_28), validate=False)
    S = Similarity.identity()
    for i in word:
        S = S.compose(sys.maps[i])
    assert S.scale == pytest.approx(math.prod(sys.scales[i] for i in word), rel=1e-14)


# -- iterate_cover -----------------------------------------------------------------


def test_cover_levels_0_and_1(sys20):
    c = regular_chain_from_params(FEASIBLE_20)
    c0 = iterate_cover(sys20, 0)
    assert len(c0) == 1 and np.array_equal(c0.centers[0], c.ambient.center)
    c1 = iterate_cover(sys20, 1)
    assert len(c1) == 20
    assert np.allclose(c1.centers, [t.center for t in c.links], atol=1e-12)
    assert np.allclose(c1.R, [t.R for t in c.links]) and np.allclose(c1.r, [t.r for t in c.links])
    assert np.array_equal(c1.words()[:, 0], np.arange(1, 21))


def test_level_2_diameters(sys20):
    c2 = iterate_cover(sys20, 2)
    assert len(c2) == 400
    w = c2.words() - 1
    want = sys20.scales[w[:, 0]] * sys20.scales[w[:, 1]] * sys20.ambient.diameter
    assert np.allclose(c2.diameters, want, rtol=1e-13)


def test_cover_matches_composed_maps(sys20):
    c3 = iterate_cover(sys20, 3)
    rng = np.random.default_rng(1)
    for idx in rng.integers(0, len(c3), 20):
        word = c3.words()[idx] - 1
        S = sys20.maps[word[0]].compose(sys20.maps[word[1]]).compose(sys20.maps[word[2]])
        img = apply_similarity(S, sys20.ambient)
        assert np.allclose(img.center, c3.centers[idx], atol=1e-12)


def test_nesting_spot_check(sys28):
    c2 = iterate_cover(sys28, 2)
    c1 = iterate_cover(sys28, 1)
    parent = c2.parent_index()
    rng = np.random.default_rng(2)
    for idx in rng.choice(len(c2), 100, replace=False):
        # the parent of S_i S_j (T) in M_1 is S_i (T): drop the last letter
        chk = torus_contains_torus(c1.torus(parent[idx]), c2.torus(idx), tol=-1e-9)
        assert chk.ok


def test_budget_guard(sys20):
    with pytest.raises(BudgetExceeded):
        iterate_cover(sys20, 5, budget=10**6)


# -- attractor_sample ---------------------------------------------------------------


def test_samples_reproducible(sys20):
    a = attractor_sample(sys20, 500, 6, seed=11)
    b = attractor_sample(sys20, 500, 6, seed=11)
    c = attractor_sample(sys20, 500, 6, seed=12)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_samples_lie_in_their_cover_tori(sys28):
    pts, words = attractor_sample(sys28, 2000, 4, seed=0, return_words=True)
    c1 = iterate_cover(sys28, 1)
    tori = c1.tori
    for p, w in zip(pts, words):
        assert tori[w[0] - 1].contains_points(p, tol=1e-12)
    # and in no other link at depth 1
    first = words[:, 0] - 1
    inside = np.array([t.contains_points(pts) for t in tori])
    assert np.array_equal(inside.sum(axis=0), np.ones(len(pts), dtype=int))
    assert np.all(inside[first, np.arange(len(pts))])
    c4 = iterate_cover(sys28, 4, budget=10**6)
    idx = np.ravel_multi_index((words - 1).T, (28,) * 4)
    for i in range(0, 2000, 97):
        assert c4.torus(idx[i]).contains_points(pts[i], tol=1e-12)


def test_sample_distance_to_attractor(sys28):
    # a depth-d sample and a depth-(d+6) refinement of the same word prefix stay
    # within diam(T) max(s)**d of each other
    d = 3
    pts, words = attractor_sample(sys28, 300, d + 6, seed=5, return_words=True)
    S_pref = []
    for w in words:
        S = Similarity.identity()
        for i in w[:d]:
            S = S.compose(sys28.maps[i - 1])
        S_pref.append(S(sys28.ambient.circle.points(0.0)))
    bound = sys28.ambient.diameter * sys28.scales.max() ** d
    assert np.all(np.linalg.norm(pts - np.array(S_pref), axis=1) <= bound)


# -- Moran sums and similarity dimension -------------------------------------------


def test_moran_equal_scales():
    sys = equal_scale_system(20, 0.1)
    for lam, want in [(0, 1.0), (1, 0.2), (2, 0.04), (3, 0.008)]:
        ms = moran_cover_sum(sys, lam)
        assert ms.closed_form == pytest.approx(want, rel=1e-12)
        assert ms.enumerated == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("lam", [1, 2, 3, 4])
def test_moran_enumeration_matches_closed_form(lam):
    rng = np.random.default_rng(lam)
    sys = equal_scale_system(12, 0.2)
    # give the maps different scales
    sys = IfsSystem(sys.ambient, [Similarity(s, S.rotation, S.translation)
                                  for s, S in zip(rng.uniform(0.05, 0.3, 12), sys.maps)])
    ms = moran_cover_sum(sys, lam)
    assert ms.enumerated == pytest.approx(ms.closed_form, rel=1e-12)
    ms3 = moran_cover_sum(sys, lam, exponent=1.3)
    assert ms3.enumerated == pytest.approx(ms3.closed_form, rel=1e-12)


def test_moran_budget():
    sys = equal_scale_system(20, 0.1)
    assert moran_cover_sum(sys, 6).enumerated is None
    with pytest.raises(BudgetExceeded):
        moran_cover_sum(sys, 6, enumerate=True)


def test_similarity_dimension_examples():
    assert similarity_dimension([0.1] * 20) == pytest.approx(math.log(20) / math.log(10), abs=1e-9)
    assert similarity_dimension([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 0.6), min_size=2, max_size=40))
def test_dimension_below_two_iff_moran(scales):
    s = np.array(scales)
    q = float(np.sum(s**2))
    if abs(q - 1.0) < 1e-9:
        return
    assert (similarity_dimension(s) < 2) == (q < 1)
