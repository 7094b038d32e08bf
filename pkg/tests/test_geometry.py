import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netmimo import geometry
from netmimo.errors import OutOfRegionError, ParameterError

LAM = 1.0 / (math.pi * 500.0**2)


def test_lattice_cell_count_and_area():
    lat = geometry.build_hex_lattice(4, LAM, layers=2)
    assert lat.n_cells == 19
    area = 3 * math.sqrt(3) / 2 * lat.circumradius**2
    assert area == pytest.approx(4 / LAM)
    assert np.allclose(lat.center_offsets[0], 0)


def test_neighbour_centres_are_two_apothems_apart():
    lat = geometry.build_hex_lattice(3, LAM, layers=1)
    d = np.linalg.norm(lat.center_offsets[1:], axis=1)
    assert np.allclose(d, 2 * lat.apothem)


def test_hexagons_tile_without_gaps(rng):
    lat = geometry.build_hex_lattice(2, LAM, layers=2)
    pts = rng.uniform(-lat.apothem * 2, lat.apothem * 2, (5000, 2))
    # Everything within two apothems of the origin is covered by the first ring.
    assert lat.contains(pts).all()
    counts = (lat.hex_norm(pts) <= 1 - 1e-9).sum(axis=1)
    assert counts.max() == 1


def test_assign_interior_and_outside():
    lat = geometry.build_hex_lattice(4, LAM, layers=1)
    assert geometry.assign_to_cluster(lat, (0.0, 0.0)) == 0
    for j, c in enumerate(lat.center_offsets):
        assert geometry.assign_to_cluster(lat, c + 1.0) == j
    with pytest.raises(OutOfRegionError):
        geometry.assign_to_cluster(lat, (1e7, 0.0))


def test_boundary_tie_goes_to_lexicographically_smaller_centre():
    lat = geometry.build_hex_lattice(4, LAM, layers=1)
    a, b = lat.center_offsets[0], lat.center_offsets[1]
    mid = (a + b) / 2
    expected = min((0, 1), key=lambda j: tuple(lat.center_offsets[j]))
    assert geometry.assign_to_cluster(lat, mid) == expected


def test_cluster_radius():
    assert geometry.cluster_radius(1, LAM) == pytest.approx(500.0)
    assert geometry.cluster_radius(4, LAM) == pytest.approx(1000.0)
    with pytest.raises(ParameterError):
        geometry.cluster_radius(0.5, LAM)


@given(st.floats(1.0, 5000.0), st.floats(0.0, 1.0), st.floats(-math.pi, math.pi))
def test_boundary_distance_range_and_symmetry(R, frac, theta):
    d = frac * R
    l = geometry.boundary_distance(d, theta, R)
    assert R - d - 1e-9 * R <= l <= R + d + 1e-9 * R
    assert geometry.boundary_distance(d, math.pi - theta, R) == pytest.approx(l, rel=1e-12, abs=1e-9)
    # Seen from a user at (0, -d), the boundary point lies on the circle.
    x, y = l * math.cos(theta), -d + l * math.sin(theta)
    assert math.hypot(x, y) == pytest.approx(R, rel=1e-9)


def test_boundary_distance_rejects_outside_user():
    with pytest.raises(ParameterError):
        geometry.boundary_distance(2.0, 0.0, 1.0)


def test_user_distance_density(rng):
    d = geometry.sample_user_distance(100.0, rng, 200_000)
    # P(d <= r) = r^2 / R^2
    assert np.mean(d <= 50.0) == pytest.approx(0.25, abs=0.005)


def test_ppp_count_statistics(rng):
    w = geometry.Window(0, 1000, 0, 1000)
    n = [len(geometry.sample_ppp(1e-5, w, rng)) for _ in range(2000)]
    assert np.mean(n) == pytest.approx(10, rel=0.03)
    assert np.var(n) == pytest.approx(10, rel=0.1)


def test_deploy_poisson_mean_per_cluster(rng):
    lat = geometry.build_hex_lattice(3, LAM, layers=1)
    counts = np.array([geometry.deploy_bs(lat, LAM, rng).cluster_counts() for _ in range(1500)])
    assert counts.mean() == pytest.approx(3, rel=0.03)
    assert np.mean(counts[:, 0] == 0) == pytest.approx(math.exp(-3), abs=0.015)


def test_deploy_fixed_per_cluster(rng):
    lat = geometry.build_hex_lattice(3, LAM, layers=2)
    topo = geometry.deploy_bs(lat, LAM, rng, model="fixed-per-cluster", per_cluster=3)
    assert (topo.cluster_counts() == 3).all()
    assert (geometry.assign_points(lat, topo.bs_points) == topo.cluster_of_bs).all()


def test_sample_in_hexagon_stays_inside(rng):
    lat = geometry.build_hex_lattice(2, LAM, layers=1)
    pts = geometry.sample_in_hexagon(lat, 3, 500, rng)
    assert (geometry.assign_points(lat, pts) == 3).all()


@pytest.mark.parametrize("eta, M, B, serving, expected", [
    (0.6, 5, 1, False, 3), (0.6, 5, 4, False, 12), (0.5, 5, 1, False, 3),
    (0.1, 5, 1, False, 1), (0.05, 5, 1, False, 0), (0.05, 5, 1, True, 1),
    (1.0, 5, 3, False, 15), (0.6, 5, 0, True, 0),
])
def test_scheduled_users(eta, M, B, serving, expected):
    assert geometry.scheduled_users(eta, M, B, serving) == expected


@settings(max_examples=200)
@given(st.floats(0.01, 1.0), st.integers(1, 8), st.integers(1, 40))
def test_scheduled_users_never_exceed_antennas(eta, M, B):
    k = geometry.scheduled_users(eta, M, B, serving=True)
    assert 1 <= k <= M * B
