"""Site graphs: metric axioms, balls, locality function, config round trips."""

import numpy as np
import pytest

from glsim import SiteGraph, chain, general, grid


# =====================================================================
# distances
# =====================================================================


def test_open_chain_distance():
    assert chain(8).distance(0, 3) == 3


def test_grid_distance_is_l1():
    g = grid([4, 4])
    i = g.coords_site((0, 0))
    j = g.coords_site((3, 2))
    assert g.distance(i, j) == 5


def test_general_graph_direct_bond():
    g = general(3, [(0, 1), (1, 2), (0, 2)])
    assert g.distance(0, 2) == 1


@pytest.mark.parametrize("make", [
    lambda: chain(17),
    lambda: chain(12, "periodic"),
    lambda: grid([4, 5]),
    lambda: grid([3, 3], "periodic"),
    lambda: general(8, [(i, (i * 3 + 1) % 8) for i in range(8)]),
])
def test_metric_axioms_on_random_triples(make):
    g = make()
    rng = np.random.default_rng(7)
    for _ in range(40):
        i, j, k = (int(x) for x in rng.integers(0, g.n_sites, size=3))
        assert g.distance(i, i) == 0
        assert g.distance(i, j) == g.distance(j, i)
        assert g.distance(i, k) <= g.distance(i, j) + g.distance(j, k)


# =====================================================================
# balls
# =====================================================================


def test_zero_radius_ball_is_singleton():
    for g in (chain(5), grid([3, 3]), general(4, [(0, 1), (2, 3)])):
        for i in range(g.n_sites):
            assert set(g.ball(i, 0)) == {i}


def test_open_chain_ball_truncates_at_boundary():
    assert set(chain(8).ball(0, 2)) == {0, 1, 2}


def test_periodic_chain_ball_wraps():
    assert set(chain(8, "periodic").ball(0, 2)) == {6, 7, 0, 1, 2}


def test_balls_nest_with_radius():
    g = grid([5, 4], "periodic")
    for i in range(g.n_sites):
        prev: set = set()
        for r in range(5):
            cur = set(g.ball(i, r))
            assert prev <= cur
            prev = cur


# =====================================================================
# locality function
# =====================================================================


@pytest.mark.parametrize("r,expected", [(1, 3), (2, 5), (5, 11)])
def test_periodic_chain_locality_function(r, expected):
    assert chain(1024, "periodic").locality_function(r) == expected


def test_grid_locality_center_plus_four_neighbors():
    assert grid([32, 32]).locality_function(1) == 5


def test_locality_function_nondecreasing():
    for g in (chain(9), grid([4, 4]), general(6, [(0, 1), (1, 2), (3, 4)])):
        vals = [g.locality_function(r) for r in range(6)]
        assert vals == sorted(vals)
        assert all(v == max(len(g.ball(i, r)) for i in range(g.n_sites))
                   for r, v in enumerate(vals))


# =====================================================================
# config round trip
# =====================================================================


@pytest.mark.parametrize("make", [
    lambda: chain(9, "periodic"),
    lambda: grid([3, 4]),
    lambda: general(5, [(0, 4), (1, 2)]),
])
def test_config_round_trip_preserves_geometry(make):
    g = make()
    h = SiteGraph.from_config(g.to_config())
    assert h.n_sites == g.n_sites
    for i in range(g.n_sites):
        assert set(g.ball(i, 2)) == set(h.ball(i, 2))
        for j in range(g.n_sites):
            assert g.distance(i, j) == h.distance(i, j)
