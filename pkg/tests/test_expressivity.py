import warnings

import numpy as np
import pytest

from eqtp.expressivity import (
    BilinearitySpec, expressivity_count, expressivity_rank, expressivity_ranks, interactable, restricted_map,
)
from eqtp.tpo_cg import valid_paths


def test_counts():
    assert expressivity_count("cgtp", 1) == 6
    assert expressivity_count("gtp", 1) == 5
    assert expressivity_count("mtp", 1) == 5
    assert [expressivity_count("cgtp", L) for L in range(4)] == [1, 6, 19, 44]
    with pytest.raises(ValueError):
        expressivity_count("xtp", 1)


def test_count_growth():
    c = [expressivity_count("cgtp", L) for L in (20, 40)]
    g = [expressivity_count("gtp", L) for L in (20, 40)]
    assert 7 < c[1] / c[0] < 8.5
    assert 1.9 < g[1] / g[0] < 2.1


@pytest.mark.parametrize("L", range(4))
def test_cgtp_rank_equals_path_count(L):
    assert expressivity_rank("cgtp", L) == len(valid_paths(L, L, 2 * L))


@pytest.mark.parametrize("kind", ["gtp", "mtp"])
@pytest.mark.parametrize("L", range(4))
def test_rank_within_upper_bound(kind, L):
    rank = expressivity_rank(kind, L)
    assert 1 <= rank <= expressivity_count(kind, L)


@pytest.mark.parametrize("kind", ["cgtp", "gtp", "mtp"])
def test_rank_at_l0(kind):
    assert expressivity_rank(kind, 0) == 1


def test_recorded_gtp_ranks():
    # measured values, frozen: the upper bound is attained for L <= 3
    assert [expressivity_rank("gtp", L) for L in range(4)] == [1, 5, 9, 13]
    assert [expressivity_rank("mtp", L) for L in range(4)] == [1, 5, 9, 13]


def test_ranks_stable_across_trials():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(set(expressivity_ranks("gtp", 2, trials=4, seed=3))) == 1


def test_jacobian_matches_finite_difference():
    spec = BilinearitySpec("gtp", 1)
    rng = np.random.default_rng(0)
    ws = [rng.standard_normal(n) for n in spec.num_params]
    jac = spec.jacobian(*ws)
    h = 1e-6
    for which in range(3):
        for k in range(len(ws[which])):
            plus = [w.copy() for w in ws]
            minus = [w.copy() for w in ws]
            plus[which][k] += h
            minus[which][k] -= h
            fd = (spec.bilinearity(*plus) - spec.bilinearity(*minus)).ravel() / (2 * h)
            col = sum(len(w) for w in ws[:which]) + k
            np.testing.assert_allclose(jac[:, col], fd, atol=1e-7)


def test_interactable_examples():
    assert interactable("cgtp", 1, 1, 1)
    assert not interactable("gtp", 1, 1, 1)
    assert interactable("mtp", 1, 1, 1)
    assert interactable("gtp", 1, 1, 2)
    for kind in ("cgtp", "gtp", "mtp"):
        assert not interactable(kind, 1, 1, 3)
        assert not interactable(kind, 3, 0, 2)


def test_interactability_respects_selection_rules():
    for l1 in range(4):
        for l2 in range(4):
            for l3 in range(7):
                tri = abs(l1 - l2) <= l3 <= l1 + l2
                assert interactable("cgtp", l1, l2, l3) == tri
                assert interactable("gtp", l1, l2, l3) == (tri and (l1 + l2 + l3) % 2 == 0)
                assert interactable("gtp", l1, l2, l3) == interactable("gtp", l2, l1, l3)
                if interactable("mtp", l1, l2, l3):
                    assert tri


def test_restricted_map_shape():
    # every CGTP output copy of degree 1 is kept: paths (0,1,1), (1,0,1), (1,1,1)
    m = restricted_map("cgtp", 1, 1, 1)
    assert m.shape == (3, 3, 9)
    assert not m[..., :6].any() and m[..., 6:].any()
    assert restricted_map("gtp", 2, 1, 5).shape == (5, 3, 11)
    assert not restricted_map("gtp", 2, 1, 5).any()
