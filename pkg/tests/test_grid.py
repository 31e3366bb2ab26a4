import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparsweep.grid import (GridError, MediumError, incident_angles, incident_plane_wave,
                            make_grid, make_medium, support_box, unit_square_grid)


def test_paper_scale_grid_accepted():
    g = make_grid(200, 200, 1 / 200, 200.0)
    assert g.omega * g.h == pytest.approx(1.0)
    assert g.N == 40000


def test_rejects_underresolved_grid():
    with pytest.raises(GridError, match="points per wavelength"):
        make_grid(4, 4, 1.0, 100.0)


@pytest.mark.parametrize("args", [(0, 4, 0.1, 1.0), (4, -1, 0.1, 1.0), (4.5, 4, 0.1, 1.0), (4, 4, 0.0, 1.0),
                                  (4, 4, 0.1, 0.0)])
def test_rejects_bad_dimensions(args):
    with pytest.raises(GridError):
        make_grid(*args)


@given(st.integers(4, 40), st.integers(4, 40), st.data())
def test_index_roundtrip(nx, nz, data):
    g = make_grid(nx, nz, 1.0 / max(nx, nz), 1.0)
    i = data.draw(st.integers(1, nx))
    j = data.draw(st.integers(1, nz))
    k = g.index(i, j)
    assert k == (j - 1) * nx + (i - 1)
    assert g.ij(k) == (i, j)


def test_coordinates_match_nodes():
    g = make_grid(5, 4, 0.25, 1.0)
    X, Z = g.coordinates()
    assert X.shape == (4, 5)
    assert (X[1, 2], Z[1, 2]) == g.node(3, 2)


def test_transposed_swaps_axes():
    g = make_grid(5, 4, 0.25, 1.0, origin=(1.0, 2.0))
    t = g.transposed()
    assert (t.nx, t.nz, t.origin) == (4, 5, (2.0, 1.0))


def test_rejects_grids_too_small_for_the_stencil():
    with pytest.raises(GridError):
        make_grid(3, 8, 0.1, 1.0)


@pytest.mark.parametrize("amp", [0.3, -0.3])
def test_smooth_bump_support_and_sign(amp):
    g = unit_square_grid(48, 48.0)
    med = make_medium({"kind": "smooth_bump", "amplitude": amp}, g)
    m = med.array.real
    x0, x1, z0, z1 = support_box(g)
    X, Z = g.coordinates()
    outside = (X < x0) | (X > x1) | (Z < z0) | (Z > z1)
    assert np.all(m[outside] == 0)
    assert np.sign(m[np.abs(m) > 0]).tolist() == [np.sign(amp)] * int(np.sum(np.abs(m) > 0))
    assert np.max(np.abs(m)) <= abs(amp)
    assert np.max(np.abs(m)) > 0.9 * abs(amp)


def test_medium_rejects_unknown_kind_and_params():
    g = unit_square_grid(16, 16.0)
    with pytest.raises(MediumError):
        make_medium({"kind": "lens"}, g)
    with pytest.raises(MediumError):
        make_medium({"kind": "smooth_bump", "amplitude": 0.1, "wobble": 2}, g)


def test_medium_rejects_support_outside_box():
    g = unit_square_grid(16, 16.0)
    with pytest.raises(MediumError):
        make_medium({"kind": "smooth_bump", "amplitude": 0.1, "radius": 0.6}, g)


def test_medium_rejects_nonpositive_speed():
    g = unit_square_grid(16, 16.0)
    with pytest.raises(MediumError):
        make_medium({"kind": "smooth_bump", "amplitude": -1.0}, g)


def test_gaussian_bumps_deterministic():
    g = unit_square_grid(64, 64.0)
    spec = {"kind": "gaussian_bumps", "amplitude": 0.2, "count": 6, "min_width": 0.03, "seed": 7}
    a = make_medium(spec, g).values
    b = make_medium(spec, g).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_medium({**spec, "seed": 8}, g).values)


def test_plasma_ring_plateau():
    g = unit_square_grid(64, 64.0)
    med = make_medium({"kind": "plasma_ring", "inner_amplitude": -0.5}, g)
    assert med.array.real.min() == pytest.approx(-0.5)


def test_zero_medium():
    g = unit_square_grid(8, 8.0)
    assert make_medium({"kind": "zero"}, g).is_zero


def test_medium_transpose_roundtrip():
    g = make_grid(12, 9, 1 / 12, 10.0)
    med = make_medium({"kind": "smooth_bump", "amplitude": 0.2, "radius": 0.2}, g)
    t = med.transposed()
    assert np.array_equal(t.array, med.array.T)
    assert np.array_equal(t.transposed().values, med.values)


def test_plane_wave_unit_modulus_and_direction():
    g = unit_square_grid(16, 16.0)
    u = incident_plane_wave(g, 0.0).reshape(g.shape)
    assert np.allclose(np.abs(u), 1.0)
    assert np.allclose(u[0], u[5])   # constant along z for a wave travelling in x


def test_incident_angles():
    a = incident_angles(64)
    assert len(a) == 64 and a[0] == 0.0 and a[-1] < 2 * math.pi
    assert np.allclose(np.diff(a), 2 * math.pi / 64)
    j1 = incident_angles(8, seed=3, jitter=0.5)
    assert np.array_equal(j1, incident_angles(8, seed=3, jitter=0.5))
    assert not np.allclose(j1, incident_angles(8))
