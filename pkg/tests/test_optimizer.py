import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eocloak.exterior import slip_data, solve, solve_electric
from eocloak.fields import HarmonicField
from eocloak.geometry import make_circle, make_named_shape, shrink_conformal
from eocloak.optimizer import (CompatibilityError, DegenerateCostError, certify, golden_section_check,
                               optimize_permittivity, optimize_zeta, pressure_misfit,
                               run_optimization, solve_interior_mixed, solve_interior_pressure,
                               solve_pressure_decomposition, zeta_cost)
from eocloak.validation import confocal_config, disk_config, shape_config


def _decomp(cfg, eps_s, source="exterior"):
    esol = solve_electric(cfg.with_materials(eps_s=eps_s, zeta0=0.0))
    return solve_pressure_decomposition(cfg.D, cfg.Omega, *slip_data(esol, source), cfg.P)


def test_mixed_annulus():
    B, D = make_circle((0, 0), 0.5, 128), make_circle((0, 0), 1.0, 128)
    m = solve_interior_mixed(B, D, HarmonicField())
    np.testing.assert_allclose(m.dn_D, 0.6 * np.cos(D.t), atol=1e-12)
    assert m.dirichlet_residual < 1e-9 and abs(m.flux) < 1e-9
    pts = np.array([[0.75, 0.0], [0.0, 0.8]])
    r = np.hypot(*pts.T)
    exact = (r + 0.25 / r) * pts[:, 0] / r / 1.25
    np.testing.assert_allclose(m.potential(pts), exact, atol=1e-10)


def test_mixed_constant_and_vanishing_core():
    D = make_named_shape("kite", 1.0, 128)
    m = solve_interior_mixed(shrink_conformal(D, 0.5), D, HarmonicField("disk-multipole", amplitude=0.0))
    assert np.abs(m.dn_D).max() < 1e-12
    H = HarmonicField()
    tiny = make_circle((0, 0), 1e-3, 32)
    m = solve_interior_mixed(tiny, make_circle((0, 0), 1.0, 128), H)
    assert np.abs(m.dn_D - H.normal_derivative(m.D)).max() < 1e-4
    with pytest.raises(ValueError):
        solve_interior_mixed(make_circle((0, 0), 1.5, 32), make_circle((0, 0), 1.0, 64), H)


def test_permittivity_oracles():
    cfg = disk_config(256)
    r = optimize_permittivity(cfg.B, cfg.D, cfg.H)
    assert r.eps_opt == pytest.approx(5 / 3, abs=1e-12) and r.G < 1e-18 and r.interior
    c = confocal_config(256)
    r = optimize_permittivity(c.B, c.D, c.H)
    assert r.eps_opt == pytest.approx(1.887, abs=1e-3) and r.G < 1e-14


def test_permittivity_clipping_and_errors():
    cfg = disk_config(128)
    r = optimize_permittivity(cfg.B, cfg.D, cfg.H, interval=(2.0, 5.0))
    assert r.eps_opt == 2.0 and not r.interior and r.G > 0
    with pytest.raises(ValueError):
        optimize_permittivity(cfg.B, cfg.D, cfg.H, interval=(0.0, 1.0))
    with pytest.raises(DegenerateCostError):
        optimize_permittivity(cfg.B, cfg.D, HarmonicField(amplitude=0.0))


def test_cost_is_exact_convex_quadratic():
    cfg = shape_config("kite", 128)
    r = optimize_permittivity(cfg.B, cfg.D, cfg.H)
    from eocloak.optimizer import permittivity_misfit
    xs = np.array([1.2, 2.0, 3.7, 6.1])
    g = np.array([permittivity_misfit(r.mixed, 1.0, x) for x in xs])
    coef = np.polyfit(xs[:3], g[:3], 2)
    assert abs(np.polyval(coef, xs[3]) - g[3]) < 1e-12 * g[3]
    assert r.cost.a > 0
    assert abs(r.cost.derivative(r.eps_opt)) < 1e-10 * r.cost.a


def test_decomposition_disks():
    cfg = disk_config(128)
    d = _decomp(cfg, 5 / 3)
    np.testing.assert_allclose(d.p1, 40 * np.cos(cfg.Omega.t), atol=1e-10)
    assert max(d.projected_mass.values()) < 1e-8


def test_zero_slip_gives_zero_p2():
    cfg = disk_config(64)
    z = np.zeros(64)
    d = solve_pressure_decomposition(cfg.D, cfg.Omega, z, z, cfg.P)
    assert np.abs(d.p2).max() == 0.0
    with pytest.raises(DegenerateCostError):
        optimize_zeta(d)


def test_incompatible_slip_rejected():
    cfg = disk_config(64)
    with pytest.raises(CompatibilityError):
        solve_pressure_decomposition(cfg.D, cfg.Omega, np.ones(64), np.zeros(64), cfg.P)


@pytest.mark.parametrize("zeta0", [0.1, 1.0, 10.0])
def test_reconstruction(zeta0):
    cfg = shape_config("peanut", 128)
    esol = solve_electric(cfg.with_materials(eps_s=1.3, zeta0=0.0))
    sD, sO = slip_data(esol)
    d = solve_pressure_decomposition(cfg.D, cfg.Omega, sD, sO, cfg.P)
    direct = solve_interior_pressure(cfg.D, cfg.Omega, sD, sO, cfg.P, zeta0)
    diff = direct - d.trace(zeta0)
    assert np.abs(diff - cfg.Omega.mean(diff)).max() < 1e-9


def test_zeta_oracle_and_clipping():
    cfg = disk_config(256)
    d = _decomp(cfg, 5 / 3)
    z = optimize_zeta(d)
    assert z.zeta_opt == pytest.approx(2 / 3, abs=1e-8) and z.F < 1e-16 and z.interior
    c = optimize_zeta(d, (0.0, 0.1))
    assert c.zeta_opt == 0.1 and c.F > 0 and not c.interior
    with pytest.raises(ValueError):
        optimize_zeta(d, (1.0, 1.0))
    assert zeta_cost(d).a > 0


def test_background_slip_source():
    cfg = disk_config(128)
    # with a perfect electric shell the exterior and background slip coincide
    a = optimize_zeta(_decomp(cfg, 5 / 3, "exterior"))
    b = optimize_zeta(_decomp(cfg, 5 / 3, "background"))
    assert a.zeta_opt == pytest.approx(b.zeta_opt, abs=1e-10)


def test_golden_section():
    assert golden_section_check(lambda x: (x - 3) ** 2, (0, 10), 1e-8) == pytest.approx(3, abs=1e-8)
    with pytest.raises(ValueError):
        golden_section_check(lambda x: x, (0, 1), 0.0)
    cfg = disk_config(128)
    r = optimize_permittivity(cfg.B, cfg.D, cfg.H)
    assert abs(golden_section_check(r.cost, (1.0, 4.0), 1e-7) - r.eps_opt) < 1e-6
    d = _decomp(cfg, r.eps_opt)
    assert abs(golden_section_check(lambda z: pressure_misfit(d, z), (0, 3), 1e-7) - 2 / 3) < 1e-6


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.1, 10), x0=st.floats(-5, 5), c=st.floats(-3, 3))
def test_golden_matches_vertex(a, x0, c):
    assert abs(golden_section_check(lambda x: a * (x - x0) ** 2 + c, (-6, 6), 1e-9) - x0) < 1e-6


def test_lipschitz_in_background():
    cfg = shape_config("kite", 128)
    base = solve_interior_mixed(cfg.B, cfg.D, HarmonicField("uniform-x"))
    pert = solve_interior_mixed(cfg.B, cfg.D, HarmonicField("disk-multipole", 2))
    h1, h2 = cfg.H.normal_derivative(cfg.D), HarmonicField("disk-multipole", 2).normal_derivative(cfg.D)

    def eps_opt(delta):
        g = base.dn_D + delta * pert.dn_D
        h = h1 + delta * h2
        return cfg.D.inner(g, h) / cfg.D.inner(g, g)

    e0, delta = eps_opt(0.0), 1e-3
    assert abs(eps_opt(delta) - e0) / e0 / delta < 10


def test_certificate():
    cfg = disk_config(128)
    rep, final, esol, psol = run_optimization(cfg)
    assert rep.certificate.C_e is None and rep.certificate.C_h is None
    ratios = []
    for n in (128, 256):
        c = disk_config(n, eps_s=5 / 3, zeta0=2 / 3 * 1.1)
        e, p = solve(c)
        d = _decomp(c, 5 / 3)
        cert = certify(c, e, p, 0.0, pressure_misfit(d, c.zeta0))
        ratios.append(cert.C_h)
    assert all(r is not None and r > 0 for r in ratios)
    assert abs(ratios[0] / ratios[1] - 1) < 0.2


def test_report_serializes():
    rep, *_ = run_optimization(shape_config("flower", 128))
    d = rep.to_dict()
    json.dumps(d)
    assert d["certificate"]["C_e"] is not None and d["certificate"]["C_e"] > 0
    assert rep.G >= 0 and rep.F >= 0


def test_exterior_permittivity_on_disks():
    from eocloak.optimizer import exterior_permittivity
    assert exterior_permittivity(disk_config(128), tol=1e-6) == pytest.approx(5 / 3, abs=1e-4)
