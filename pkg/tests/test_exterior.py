import numpy as np
import pytest

from eocloak.analytic import annulus_series, confocal_condition, confocal_series, lam_from_ratio
from eocloak.exterior import (CSV_HEADER, classify, eval_fields, export_grid, grid_points, rows_to_csv,
                              rows_to_json, solve, solve_electric, solve_pressure)
from eocloak.fields import CloakConfig, ConfigError, HarmonicField
from eocloak.geometry import EllipticCoords, make_named_shape, shrink_conformal, make_circle


def test_perfect_electric_cloak(disks, ring_points):
    cfg = disks(128, eps_s=5 / 3, zeta0=2 / 3)
    esol = solve_electric(cfg)
    pts = ring_points(1.5)
    assert np.abs(esol.potential(pts)[0] - cfg.H.value(pts)).max() < 1e-10
    assert abs(cfg.B.integrate(esol.phi_o)) < 1e-10
    assert abs(cfg.D.integrate(esol.phi_i)) < 1e-10


def test_perfect_pressure_cloak(disks, ring_points):
    cfg = disks(128, eps_s=5 / 3, zeta0=2 / 3)
    esol, psol = solve(cfg)
    pts = ring_points(2.5)
    assert np.abs(psol.pressure(pts)[0] - cfg.P.value(pts)).max() < 1e-10
    np.testing.assert_allclose(psol.psi_e, 12 * cfg.zeta0 * esol.dn_Omega - 12 * cfg.zeta0 * cfg.Omega.mean(esol.dn_Omega),
                               atol=1e-12)


def test_zero_background(disks):
    cfg = disks(64, eps_s=3.0, zeta0=0.5, H=HarmonicField("uniform-x", amplitude=0.0))
    esol, psol = solve(cfg)
    assert not np.any(esol.phi_o) and not np.any(esol.phi_i)
    assert np.abs(psol.psi_i).max() == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("eps_s", [3.0, 0.4, 5 / 3])
def test_annulus_oracle(n, eps_s):
    from eocloak.validation import disk_config
    cfg = disk_config(256, n=n, eps_s=eps_s, zeta0=0.8)
    esol, psol = solve(cfg)
    rng = np.random.default_rng(n)
    r, th = rng.uniform(2.3, 5.0, 100), rng.uniform(0, 2 * np.pi, 100)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    phi, p = annulus_series(0.5, 1.0, 2.0, n, lam_from_ratio(eps_s), 0.8, pts)
    assert np.abs(esol.potential(pts)[0] - phi).max() < 1e-9
    assert np.abs(psol.pressure(pts)[0] - p).max() < 1e-8 * 12 * 5.0**n


def test_detuned_slip_coefficient(disks):
    cfg = disks(256, eps_s=5 / 3, zeta0=1.0)
    _, psol = solve(cfg)
    x = np.array([[3.0, 0.0]])
    # p - P = C r^-1 cos theta with C = -6
    assert (psol.pressure(x)[0] - cfg.P.value(x))[0] == pytest.approx(-2.0, abs=1e-8)


@pytest.mark.parametrize("orientation", ["x", "y"])
def test_confocal_oracle(orientation):
    from eocloak.validation import confocal_config
    eps, z = confocal_condition(0.25, 0.5, 1.0, 1, orientation)
    for e_s, zz in ((eps, z), (3.0, 0.7)):
        cfg = confocal_config(256, orientation=orientation, eps_s=e_s, zeta0=zz)
        esol, psol = solve(cfg)
        xi = np.repeat([1.2, 1.6], 30)
        eta = np.tile(np.linspace(0, 2 * np.pi, 30, endpoint=False), 2)
        x, y = EllipticCoords(1.0).to_cartesian(xi, eta)
        pts = np.column_stack([x, y])
        phi, p = confocal_series(0.25, 0.5, 1.0, 1, lam_from_ratio(e_s), zz, pts, 1.0, orientation)
        assert np.abs(esol.potential(pts)[0] - phi).max() < 1e-8
        assert np.abs(psol.pressure(pts)[0] - p).max() < 1e-8


def test_transmission_and_flux():
    D = make_named_shape("peanut", 1.0, 256)
    B = shrink_conformal(D, 0.5)
    cfg = CloakConfig(B, D, make_circle((0, 0), 2.0, 256), HarmonicField(), eps_m=1.0, eps_s=2.5, zeta0=0.3)
    esol = solve_electric(cfg)
    assert np.abs(cfg.eps_m * esol.dn_outer_D - cfg.eps_s * esol.dn_inner_D).max() < 1e-9
    assert abs(D.integrate(esol.dn_outer_D)) < 1e-10


def test_far_field(disks):
    cfg = disks(128, eps_s=3.0, zeta0=0.0)
    esol = solve_electric(cfg)
    R = 50 * cfg.D.diameter
    x = np.array([[R, 0.0]])
    assert abs(esol.potential(x)[0][0] - R) < 1e-3 * R


def test_pressure_needs_matching_curves(disks):
    a, b = disks(64, eps_s=2.0, zeta0=0.1), disks(64, eps_s=2.0, zeta0=0.1)
    with pytest.raises(ValueError):
        solve_pressure(b, solve_electric(a))


def test_fields_and_regions(disks):
    cfg = disks(128, eps_s=5 / 3, zeta0=2 / 3)
    esol, psol = solve(cfg)
    pts = np.array([[0.1, 0.0], [0.75, 0.0], [1.5, 0.0], [2.5, 0.0]])
    assert classify(cfg, pts).tolist() == [0, 1, 2, 3]
    fv = eval_fields(cfg, esol, psol, pts)
    assert np.isnan(fv.phi[0]) and np.isnan(fv.p[0]) and np.isnan(fv.p[1])
    np.testing.assert_allclose(fv.u[3], [-1.0, 0.0], atol=1e-10)
    assert fv.region_names == ["core", "shell", "cloak", "exterior"]


def test_slip_off_in_cloak(disks):
    cfg = disks(128, eps_s=5 / 3, zeta0=0.0)
    esol, psol = solve(cfg)
    fv = eval_fields(cfg, esol, psol, [[1.45, 0.1]])
    np.testing.assert_allclose(fv.u, -fv.grad_p / 12.0)


def test_export_grid(disks):
    cfg = disks(128, eps_s=5 / 3, zeta0=2 / 3)
    esol, psol = solve(cfg)
    assert len(grid_points((-3, 3, -3, 3), (121, 121))) == 14641
    rows = export_grid(cfg, esol, psol, (-3, 3, -3, 3), (41, 41))
    ext = [r["p_err"] for r in rows if r["region"] == "exterior" and r["p_err"] is not None]
    assert max(abs(v) for v in ext) < 1e-8
    assert any(r["phi"] is None for r in rows if r["region"] == "core")
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert len(text.splitlines()) == 41 * 41 + 1
    assert '"rows"' in rows_to_json(rows[:2])
    with pytest.raises(ValueError):
        grid_points((1, 0, 0, 1), (4, 4))


def test_detuned_grid_shows_shadow(disks):
    cfg = disks(128, eps_s=5 / 3, zeta0=0.0)
    esol, psol = solve(cfg)
    rows = export_grid(cfg, esol, psol, (-3, 3, -3, 3), (31, 31))
    ext = [r for r in rows if r["region"] == "exterior" and r["p_err"] is not None]
    assert max(abs(r["p_err"]) for r in ext) > 0.1
    # 12 r_i^2 cos(theta) / r changes sign across theta = pi/2
    assert all(np.sign(r["p_err"]) == np.sign(r["x"]) for r in ext if abs(r["x"]) > 0.5)


def test_invalid_materials_rejected(disks):
    with pytest.raises(ConfigError):
        solve_electric(disks(64, eps_s=1.0, zeta0=0.1))
