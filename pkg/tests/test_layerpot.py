import math
import warnings

import numpy as np
import pytest

from eocloak.geometry import EllipticCoords, elliptic_basis_density, make_circle, make_confocal_ellipse, make_named_shape
from eocloak.layerpot import (NearBoundaryWarning, assemble_np_adjoint, assemble_slp, eval_potential,
                              kress_log_weights, normal_derivative_trace, single_layer_trace)


@pytest.mark.parametrize("ra", [0.5, 1.0, 2.3])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_slp_circle_eigen(ra, n):
    c = make_circle((0, 0), ra, 128)
    dens = np.cos(n * c.t)
    np.testing.assert_allclose(assemble_slp(c) @ dens, -ra / (2 * n) * dens, atol=1e-12)


@pytest.mark.parametrize("ra", [0.5, 2.0])
def test_slp_constant_density(ra):
    c = make_circle((0, 0), ra, 64)
    np.testing.assert_allclose(assemble_slp(c) @ np.ones(64), ra * math.log(ra), atol=1e-12)


def test_slp_ellipse_trace():
    e = make_confocal_ellipse(1.0, 0.5, 256)
    for n in range(1, 5):
        beta = elliptic_basis_density(n, "cos", e)
        exact = -math.cosh(n * 0.5) / (n * math.exp(n * 0.5)) * np.cos(n * e.t)
        assert np.abs(assemble_slp(e) @ beta - exact).max() < 1e-12


def test_zero_density():
    c = make_named_shape("kite", 1.0, 64)
    assert not np.any(assemble_slp(c) @ np.zeros(64))
    assert not np.any(normal_derivative_trace(c, c) @ np.zeros(64))
    assert not np.any(eval_potential(c, np.zeros(64), [[3.0, 0.0]]).value)


def test_odd_node_count_rejected():
    with pytest.raises(ValueError):
        kress_log_weights(63)


def test_np_circle_and_constants():
    c = make_circle((0, 0), 1.0, 128)
    k = assemble_np_adjoint(c)
    for n in range(1, 9):
        assert np.abs(k @ np.cos(n * c.t)).max() < 1e-12
        assert np.abs(k @ np.sin(n * c.t)).max() < 1e-12
    np.testing.assert_allclose(k @ np.ones(128), 0.5, atol=1e-12)
    # off the circle the constant is an eigenfunction of the double layer K, the
    # transpose of K* under the arc-length pairing: w^T K* = w^T / 2
    for curve in (make_confocal_ellipse(1.0, 0.4, 128), make_named_shape("flower", 1.0, 256)):
        w = curve.weights
        np.testing.assert_allclose((w @ assemble_np_adjoint(curve)) / w, 0.5, atol=1e-10)


def test_np_ellipse_eigen_both_parities():
    xi = 0.5
    e = make_confocal_ellipse(1.0, xi, 256)
    k = assemble_np_adjoint(e)
    for n in range(1, 9):
        lam = 0.5 * math.exp(-2 * n * xi)
        bc = elliptic_basis_density(n, "cos", e)
        bs = elliptic_basis_density(n, "sin", e)
        assert np.abs(k @ bc - lam * bc).max() < 1e-10
        assert np.abs(k @ bs + lam * bs).max() < 1e-10


def test_flipped_diagonal_breaks_identity():
    """The curvature diagonal carries the sign; flipping it must be detectable."""
    c = make_circle((0, 0), 1.0, 64)
    k = assemble_np_adjoint(c).copy()
    np.fill_diagonal(k, -np.diag(k))
    assert np.abs(k @ np.cos(c.t)).max() > 1e-3


def test_normal_derivative_traces():
    c = make_circle((0, 0), 1.0, 64)
    np.testing.assert_allclose(normal_derivative_trace(c, c, "outer") @ np.cos(c.t), 0.5 * np.cos(c.t), atol=1e-12)
    np.testing.assert_allclose(normal_derivative_trace(c, c, "inner") @ np.cos(c.t), -0.5 * np.cos(c.t), atol=1e-12)
    small = make_circle((0, 0), 0.5, 64)
    np.testing.assert_allclose(normal_derivative_trace(small, c) @ np.cos(small.t), 0.125 * np.cos(c.t), atol=1e-12)
    with pytest.raises(ValueError):
        normal_derivative_trace(c, c, "sideways")
    with pytest.raises(ValueError):
        normal_derivative_trace(c, make_circle((0, 0), 1.0, 64))


def test_eval_potential_circle(ring_points):
    c = make_circle((0, 0), 1.0, 128)
    pts = ring_points(2.0)
    th = np.arctan2(pts[:, 1], pts[:, 0])
    out = eval_potential(c, np.cos(c.t), pts)
    np.testing.assert_allclose(out.value, -0.25 * np.cos(th), atol=1e-13)
    assert not out.flagged.any()


def test_eval_potential_ellipse_sin():
    xi_a, n = 0.5, 2
    e = make_confocal_ellipse(1.0, xi_a, 256)
    eta = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    for xi in (0.8, 1.5):
        x, y = EllipticCoords(1.0).to_cartesian(xi, eta)
        v = eval_potential(e, elliptic_basis_density(n, "sin", e), np.column_stack([x, y])).value
        exact = -math.sinh(n * xi_a) / (n * np.exp(n * xi)) * np.sin(n * eta)
        assert np.abs(v - exact).max() < 1e-12


def test_gradient_matches_finite_difference():
    c = make_named_shape("kite", 1.0, 128)
    dens = np.cos(2 * c.t) + 0.3
    x = np.array([[1.7, 0.4]])
    g = eval_potential(c, dens, x).grad[0]
    h = 1e-6
    fd = [(eval_potential(c, dens, x + d).value[0] - eval_potential(c, dens, x - d).value[0]) / (2 * h)
          for d in (np.array([h, 0.0]), np.array([0.0, h]))]
    np.testing.assert_allclose(g, fd, rtol=1e-6)


def test_near_points_flagged_and_warned():
    c = make_circle((0, 0), 1.0, 64)
    with pytest.warns(NearBoundaryWarning):
        out = eval_potential(c, np.cos(c.t), [[1.01, 0.0], [3.0, 0.0]])
    assert out.flagged.tolist() == [True, False]
    assert np.all(np.isfinite(out.value))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eval_potential(c, np.cos(c.t), [[1.01, 0.0]], warn=False)


def test_slp_symmetric_in_arc_length():
    c = make_named_shape("peanut", 1.0, 128)
    s = assemble_slp(c)
    u, v = np.cos(c.t) + 0.2 * np.sin(3 * c.t), np.sin(2 * c.t) + 1
    assert abs(c.inner(s @ u, v) - c.inner(u, s @ v)) < 1e-10


def test_far_field_decay():
    c = make_named_shape("flower", 1.0, 128)
    dens = np.cos(c.t) - c.mean(np.cos(c.t))
    v = [abs(eval_potential(c, dens, [[r, 0.0]]).value[0]) for r in (2.0, 10.0, 20.0, 100.0, 200.0)]
    assert 1.6 < v[1] / v[2] < 2.4
    assert 1.9 < v[3] / v[4] < 2.1
    # a dipole-type density gives 1/r, so the 2 -> 100 ratio sits near 2/100
    assert v[3] < 0.03 * v[0]


def test_circle_trace_at_round_off_floor():
    # on the circle the discrete identity is exact once N > 2n; nothing left to converge
    for n in (32, 64):
        c = make_circle((0, 0), 1.0, n)
        err = np.abs(assemble_slp(c) @ np.cos(3 * c.t) + np.cos(3 * c.t) / 6).max()
        assert err < 1e-13


def test_trace_converges_on_kite():
    dens = lambda t: np.cos(3 * t) + 0.5

    def s0(n):
        c = make_named_shape("kite", 1.0, n)
        return (assemble_slp(c) @ dens(c.t))[0]

    ref = s0(1024)
    e32, e64 = abs(s0(32) - ref), abs(s0(64) - ref)
    assert e64 * 4 <= e32
    assert e64 < 1e-6


def test_single_layer_trace_cross_matches_eval():
    a, b = make_circle((0, 0), 0.5, 64), make_named_shape("flower", 1.0, 64)
    dens = np.sin(a.t)
    np.testing.assert_allclose(single_layer_trace(a, b) @ dens,
                               eval_potential(a, dens, b.points).value, atol=1e-14)
