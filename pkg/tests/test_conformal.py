import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beltrami_dirichlet.conformal import (ConformalMapError, JordanBoundary,
                                          boundary_correspondence, inverse_map, map_to_disk)
from beltrami_dirichlet.oracle import ellipse_radius, theodorsen_disk_angles


@pytest.fixture(scope="module")
def ellipse_map():
    return map_to_disk(JordanBoundary.ellipse(1.0, 0.6, 512))


@pytest.fixture(scope="module")
def square_map():
    return map_to_disk(JordanBoundary.square(256))


def interior_points(boundary, count, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (4 * count, 2)) @ np.array([1, 1j]) * boundary.radius
    pts = pts[boundary.contains(pts / 0.95)]
    return pts[:count]


def cauchy_riemann_ratio(dmap, z, h=1e-5):
    dx = (dmap(z + h) - dmap(z - h)) / (2 * h)
    dy = (dmap(z + 1j * h) - dmap(z - 1j * h)) / (2 * h)
    return np.abs(0.5 * (dx + 1j * dy)) / np.abs(0.5 * (dx - 1j * dy))


def test_disk_is_identity():
    dmap = map_to_disk(JordanBoundary.circle(512))
    pts = interior_points(dmap.boundary, 200)
    assert np.max(np.abs(dmap(pts) - pts)) < 1e-4
    assert np.max(np.abs(inverse_map(dmap, 0.9 * pts) - 0.9 * pts)) < 1e-4
    table = boundary_correspondence(dmap)
    theta = 2 * np.pi * np.arange(512) / 512
    assert np.max(np.abs(np.angle(np.exp(1j * (table.angles - theta))))) < 1e-4


def test_marked_point_shifts_the_table():
    boundary = JordanBoundary.circle(512)
    base = boundary_correspondence(map_to_disk(boundary)).angles
    marked = boundary_correspondence(map_to_disk(boundary, "marked_point", 64)).angles
    assert abs(np.angle(np.exp(1j * marked[64]))) < 1e-12
    shift = np.angle(np.exp(1j * (marked - base)))
    assert np.allclose(shift, -np.pi / 4, atol=1e-6)


def test_ellipse_boundary_and_conformality(ellipse_map):
    v = ellipse_map.boundary.vertices
    assert np.max(np.abs(np.abs(ellipse_map(v)) - 1)) < 1e-6
    pts = interior_points(ellipse_map.boundary, 100)
    assert np.max(cauchy_riemann_ratio(ellipse_map, 0.9 * pts)) < 1e-3
    assert abs(ellipse_map(np.array([0j]))[0]) < 1e-10
    assert abs(inverse_map(ellipse_map, np.array([0j]))[0]) < 1e-10
    d = ellipse_map.derivative_at_origin()
    assert d.real > 0 and abs(d.imag) < 1e-8 * abs(d)


def test_ellipse_correspondence_matches_theodorsen(ellipse_map):
    table = boundary_correspondence(ellipse_map)
    assert table.monotone
    assert table.total_increase == pytest.approx(2 * np.pi, abs=1e-12)
    expect = theodorsen_disk_angles(ellipse_radius(1.0, 0.6), np.angle(ellipse_map.boundary.vertices))
    assert np.max(np.abs(np.angle(np.exp(1j * (table.angles - expect))))) < 1e-4


def test_round_trip(ellipse_map):
    pts = interior_points(ellipse_map.boundary, 100, seed=5)
    assert np.max(np.abs(inverse_map(ellipse_map, ellipse_map(pts)) - pts)) < 1e-7


def test_square_symmetry(square_map):
    assert square_map(np.array([0j]))[0] == 0
    pts = 0.6 * interior_points(square_map.boundary, 100)
    assert np.max(np.abs(square_map(1j * pts) - 1j * square_map(pts))) < 1e-5


@given(st.integers(0, 2 ** 16))
def test_mapped_circle_samples_give_identity(seed):
    # boundary images are circle points at uneven spacing; the map back must be a rotation at most
    rng = np.random.default_rng(seed)
    gaps = rng.uniform(0.5, 1.5, 256)
    theta = np.cumsum(gaps) / gaps.sum() * 2 * np.pi + rng.uniform(0, 2 * np.pi)
    dmap = map_to_disk(JordanBoundary(np.exp(1j * theta)))
    pts = 0.8 * np.exp(1j * np.linspace(0, 2 * np.pi, 25)) * np.linspace(0, 1, 25)
    assert np.max(np.abs(dmap(pts) - pts)) < 1e-3


def test_boundary_validation(tmp_path):
    with pytest.raises(ConformalMapError):
        JordanBoundary(np.exp(2j * np.pi * np.arange(32) / 32))
    bow = np.exp(2j * np.pi * np.arange(128) / 128)
    bow = bow.real + 1j * bow.imag * np.sign(bow.real) * np.abs(bow.real)
    with pytest.raises(ConformalMapError):
        JordanBoundary(bow)
    with pytest.raises(ConformalMapError):
        JordanBoundary(3 + np.exp(2j * np.pi * np.arange(128) / 128))
    with pytest.raises(ConformalMapError):
        JordanBoundary(np.exp(-2j * np.pi * np.arange(128) / 128))
    with pytest.raises(ConformalMapError):
        map_to_disk(JordanBoundary.circle(128), "sideways")
    v = JordanBoundary.ellipse(1, 0.5, 128).vertices
    np.savetxt(tmp_path / "b.csv", np.column_stack([v.real, v.imag]), delimiter=",",
               header="x,y", comments="")
    assert np.allclose(JordanBoundary.from_csv(tmp_path / "b.csv").vertices, v)
