"""Cloak design for general shapes by least squares over interior problems.

Stage one solves the mixed problem in the shell (zero flux on the core,
phi = H on the object boundary); the permittivity cost is then an exact
quadratic in eps_s. Stage two solves two interior Neumann problems in the
control annulus, one for the background pressure flux and one for unit
zeta slip; the pressure cost is a quadratic in (zeta0, gauge constant).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exterior import _solve, mean_project, solve_electric, solve_pressure, slip_data
from .fields import CloakConfig, HarmonicField, validate_config
from .geometry import Curve
from .layerpot import eval_potential, normal_derivative_trace, single_layer_trace

DEFAULT_EPS_INTERVAL = (1.01, 1e3)      # multiples of eps_m
DEFAULT_ZETA_INTERVAL = (0.0, 1e2)
COMPAT_TOL = 1e-8


class DegenerateCostError(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InteriorMixedSolution:
    B: Curve
    D: Curve
    H: HarmonicField
    sigma_o: np.ndarray
    sigma_i: np.ndarray
    constant: float
    dn_D: np.ndarray
    dirichlet_residual: float
    flux: float

    def potential(self, points):
        a = eval_potential(self.B, self.sigma_o, points, warn=False)
        b = eval_potential(self.D, self.sigma_i, points, warn=False)
        return a.value + b.value + self.constant


def solve_interior_mixed(B: Curve, D: Curve, H: HarmonicField) -> InteriorMixedSolution:
    """Harmonic phi in D minus B with zero flux on B and phi = H on D.

    phi = S_B[sigma_o] + S_D[sigma_i] + c with the side condition that
    sigma_i has zero mean; the constant absorbs the log-capacity null space
    of S_D (e.g. the unit circle).
    """
    if not np.all(D.contains(B.points)):
        raise ValueError("core B is not strictly inside D")
    no, ni = B.n, D.n
    a = np.zeros((no + ni + 1, no + ni + 1))
    # flux on B taken from the shell side, i.e. outside B
    a[:no, :no] = normal_derivative_trace(B, B, "outer")
    a[:no, no:no + ni] = normal_derivative_trace(D, B)
    a[no:no + ni, :no] = single_layer_trace(B, D)
    a[no:no + ni, no:no + ni] = single_layer_trace(D, D)
    a[no:no + ni, -1] = 1.0
    a[-1, no:no + ni] = D.weights
    rhs = np.zeros(no + ni + 1)
    hD = H.value(D.points)
    rhs[no:no + ni] = hD
    x, _, _ = _solve(a, rhs)
    so, si, c = x[:no], x[no:no + ni], float(x[-1])
    trace = a[no:no + ni, :no] @ so + a[no:no + ni, no:no + ni] @ si + c
    dn = normal_derivative_trace(B, D) @ so + normal_derivative_trace(D, D, "inner") @ si
    return InteriorMixedSolution(B, D, H, so, si, c, dn, float(np.abs(trace - hD).max()),
                                 D.integrate(dn))


@dataclass(frozen=True)
class Quadratic:
    """q(x) = a x^2 + b x + c."""

    a: float
    b: float
    c: float

    def __call__(self, x):
        return self.a * x * x + self.b * x + self.c

    @property
    def argmin(self) -> float:
        return -self.b / (2 * self.a)

    def derivative(self, x):
        return 2 * self.a * x + self.b


@dataclass(frozen=True)
class PermittivityResult:
    eps_opt: float
    G: float
    interval: tuple
    interior: bool
    unconstrained: float
    cost: Quadratic
    mixed: InteriorMixedSolution


def _clip(x, lo, hi):
    if x < lo:
        return lo, False
    if x > hi:
        return hi, False
    return x, True


def permittivity_cost(mixed: InteriorMixedSolution, eps_m: float) -> Quadratic:
    """G(eps_s) = || eps_s dphi/dnu - eps_m dH/dnu ||^2 on the object boundary."""
    D = mixed.D
    g = mixed.dn_D
    h = mixed.H.normal_derivative(D)
    return Quadratic(D.inner(g, g), -2 * eps_m * D.inner(g, h), eps_m**2 * D.inner(h, h))


def permittivity_misfit(mixed: InteriorMixedSolution, eps_m: float, eps_s: float) -> float:
    """G evaluated directly; no cancellation between the quadratic's terms."""
    r = eps_s * mixed.dn_D - eps_m * mixed.H.normal_derivative(mixed.D)
    return mixed.D.inner(r, r)


def optimize_permittivity(B, D, H, eps_m=1.0, interval=None) -> PermittivityResult:
    """Minimize the permittivity cost over [a0, b0] (default 1.01..1000 eps_m)."""
    if interval is None:
        interval = (DEFAULT_EPS_INTERVAL[0] * eps_m, DEFAULT_EPS_INTERVAL[1] * eps_m)
    lo, hi = map(float, interval)
    if not (0 < lo < hi) or eps_m <= 0:
        raise ValueError(f"need 0 < a0 < b0 and eps_m > 0, got {interval}, {eps_m}")
    mixed = solve_interior_mixed(B, D, H)
    q = permittivity_cost(mixed, eps_m)
    if q.a <= 1e-300 or math.sqrt(q.a) <= 1e-14 * math.sqrt(max(q.c, 1e-300)):
        raise DegenerateCostError("dphi/dnu vanishes on the object boundary")
    star = q.argmin
    eps, interior = _clip(star, lo, hi)
    return PermittivityResult(eps, permittivity_misfit(mixed, eps_m, eps), (lo, hi), interior, star, q, mixed)


@dataclass(frozen=True, eq=False)
class PressureDecomposition:
    D: Curve
    Omega: Curve
    psi1: tuple
    psi2: tuple
    p1: np.ndarray
    p2: np.ndarray
    P_trace: np.ndarray
    projected_mass: dict
    border: tuple

    def trace(self, zeta0):
        return self.p1 + zeta0 * self.p2

    def potential(self, zeta0, points):
        """Interior pressure (before gauge) at points in the control annulus."""
        vi = eval_potential(self.D, self.psi1[0] + zeta0 * self.psi2[0], points, warn=False)
        ve = eval_potential(self.Omega, self.psi1[1] + zeta0 * self.psi2[1], points, warn=False)
        return vi.value + ve.value


def _neumann_matrix(D: Curve, Om: Curve) -> np.ndarray:
    ni, ne = D.n, Om.n
    a = np.zeros((ni + ne + 1, ni + ne + 1))
    a[:ni, :ni] = normal_derivative_trace(D, D, "outer")
    a[:ni, ni:ni + ne] = normal_derivative_trace(Om, D)
    a[ni:ni + ne, :ni] = normal_derivative_trace(D, Om)
    a[ni:ni + ne, ni:ni + ne] = normal_derivative_trace(Om, Om, "inner")
    # border: the inner NP trace on Omega has the equilibrium density in its
    # kernel; pin it with zero mean psi_e and a slack unknown on Omega rows
    a[ni:ni + ne, -1] = 1.0
    a[-1, ni:ni + ne] = Om.weights
    return a


def _project(curve, data):
    data = np.asarray(data, dtype=float)
    norm = math.sqrt(curve.inner(data, data))
    mass = abs(curve.integrate(data))
    rel = mass / norm if norm > 0 else 0.0
    return mean_project(curve, data), rel


def solve_pressure_decomposition(D: Curve, Omega: Curve, slip_D, slip_Omega,
                                 P: HarmonicField) -> PressureDecomposition:
    """Solve the interior Neumann problem for the P part and the unit-slip part.

    Neumann data with outward normals of D and Omega: dp/dnu = -12 zeta0 s_D on
    D and dp/dnu = dP/dnu - 12 zeta0 s_Omega on Omega. Traces on Omega are
    gauge-fixed to zero mean.
    """
    if not np.all(Omega.contains(D.points)):
        raise ValueError("object D is not strictly inside Omega")
    ni, ne = D.n, Omega.n
    dP, m1 = _project(Omega, P.normal_derivative(Omega))
    sD, m2 = _project(D, -12.0 * np.asarray(slip_D, dtype=float))
    sO, m3 = _project(Omega, -12.0 * np.asarray(slip_Omega, dtype=float))
    masses = {"dP_Omega": m1, "slip_D": m2, "slip_Omega": m3}
    worst = max(masses.values())
    if worst > COMPAT_TOL:
        raise CompatibilityError(f"Neumann data carries net flux (relative {worst:.3g})")
    a = _neumann_matrix(D, Omega)
    rhs = np.zeros((ni + ne + 1, 2))
    rhs[ni:ni + ne, 0] = dP
    rhs[:ni, 1] = sD
    rhs[ni:ni + ne, 1] = sO
    x, _, _ = _solve(a, rhs)
    s_di = single_layer_trace(D, Omega)
    s_oo = single_layer_trace(Omega, Omega)
    traces = []
    for k in range(2):
        t = s_di @ x[:ni, k] + s_oo @ x[ni:ni + ne, k]
        traces.append(t - Omega.mean(t))
    return PressureDecomposition(
        D, Omega,
        (x[:ni, 0], x[ni:ni + ne, 0]), (x[:ni, 1], x[ni:ni + ne, 1]),
        traces[0], traces[1], P.value(Omega.points), masses,
        (float(x[-1, 0]), float(x[-1, 1])),
    )


def solve_interior_pressure(D, Omega, slip_D, slip_Omega, P, zeta0) -> np.ndarray:
    """Direct interior Neumann solve at one zeta0; gauge-fixed trace on Omega."""
    ni, ne = D.n, Omega.n
    dP, _ = _project(Omega, P.normal_derivative(Omega))
    sD, _ = _project(D, -12.0 * zeta0 * np.asarray(slip_D, dtype=float))
    sO, _ = _project(Omega, -12.0 * zeta0 * np.asarray(slip_Omega, dtype=float))
    rhs = np.zeros(ni + ne + 1)
    rhs[:ni] = sD
    rhs[ni:ni + ne] = dP + sO
    x, _, _ = _solve(_neumann_matrix(D, Omega), rhs)
    t = single_layer_trace(D, Omega) @ x[:ni] + single_layer_trace(Omega, Omega) @ x[ni:ni + ne]
    return t - Omega.mean(t)


@dataclass(frozen=True)
class ZetaResult:
    zeta_opt: float
    F: float
    gauge: float
    interval: tuple
    interior: bool
    unconstrained: float
    cost: Quadratic


def zeta_cost(decomp: PressureDecomposition) -> Quadratic:
    """F(zeta0) minimized over the gauge constant, as a quadratic in zeta0."""
    Om = decomp.Omega
    w = Om.weights
    r = decomp.P_trace - decomp.p1
    p2 = decomp.p2
    # eliminate the constant: project onto weighted-mean-zero functions
    r0 = r - Om.mean(r)
    q0 = p2 - Om.mean(p2)
    return Quadratic(float(w @ (q0 * q0)), -2.0 * float(w @ (q0 * r0)), float(w @ (r0 * r0)))


def _best_gauge(decomp, zeta0):
    Om = decomp.Omega
    return Om.mean(decomp.P_trace - decomp.p1 - zeta0 * decomp.p2)


def pressure_misfit(decomp, zeta0, gauge=None) -> float:
    """||p1 + zeta0 p2 + c - P||^2 on Omega; c optimal when not given."""
    c = _best_gauge(decomp, zeta0) if gauge is None else gauge
    res = decomp.p1 + zeta0 * decomp.p2 + c - decomp.P_trace
    return float(decomp.Omega.weights @ (res * res))


def optimize_zeta(decomp: PressureDecomposition, interval=DEFAULT_ZETA_INTERVAL) -> ZetaResult:
    """Joint least squares over (zeta0, c) via the 2x2 normal equations, then clip."""
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError(f"need c0 < d0, got {interval}")
    Om = decomp.Omega
    w = Om.weights
    p2 = decomp.p2
    q0 = p2 - Om.mean(p2)
    if math.sqrt(float(w @ (q0 * q0))) <= 1e-14 * (1 + math.sqrt(float(w @ decomp.P_trace**2))):
        raise DegenerateCostError("slip has no effect on the control boundary pressure")
    ones = np.ones_like(p2)
    r = decomp.P_trace - decomp.p1
    gram = np.array([[w @ (p2 * p2), w @ p2], [w @ p2, w @ ones]])
    star, _ = np.linalg.solve(gram, np.array([w @ (p2 * r), w @ r]))
    z, interior = _clip(float(star), lo, hi)
    c = _best_gauge(decomp, z)
    return ZetaResult(z, pressure_misfit(decomp, z, c), c, (lo, hi), interior, float(star),
                      zeta_cost(decomp))


INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_check(f, interval, tol=1e-7) -> float:
    """Golden-section minimizer of a unimodal f on [a, b] to within tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = map(float, interval)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


# ------------------------------------------------------------- sampling

def sampling_ring(curve: Curve, inner=1.05, outer=3.0, n_radii=12, n_angles=96,
                  avoid=()):
    """Points on circles about the centroid at inner..outer times the circumradius.

    Points inside ``curve`` or any exclusion band of ``curve``/``avoid`` are dropped.
    """
    c = curve.centroid
    R = float(np.hypot(*(curve.points - c).T).max())
    radii = R * np.linspace(inner, outer, n_radii)
    th = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    pts = (c + (radii[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None])).reshape(-1, 2)
    keep = ~curve.contains(pts) & (curve.distance(pts) > curve.exclusion_band())
    for other in avoid:
        keep &= other.distance(pts) > other.exclusion_band()
    return pts[keep]


def exterior_permittivity(cfg: CloakConfig, interval=None, tol=1e-4, sampling=None) -> float:
    """eps_s minimizing the sampled max |phi - H| outside D (golden section).

    A diagnostic beside the boundary least-squares design: the L2 flux misfit
    weights high boundary harmonics that barely reach the far field, so the
    two optima differ on wiggly boundaries.
    """
    if interval is None:
        interval = (DEFAULT_EPS_INTERVAL[0] * cfg.eps_m, 5.0 * cfg.eps_m)
    pts = sampling_ring(cfg.D, avoid=(cfg.B, cfg.Omega)) if sampling is None else sampling
    h = cfg.H.value(pts)

    def err(eps):
        esol = solve_electric(cfg.with_materials(eps_s=eps, zeta0=0.0))
        return float(np.abs(esol.potential(pts, warn=False)[0] - h).max())

    return golden_section_check(err, interval, tol)


@dataclass
class Certificate:
    sqrt_G: float
    sqrt_F: float
    electric_residual: float
    pressure_residual: float
    max_phi_err: float
    max_p_err: float
    C_e: float | None
    C_h: float | None


RATIO_FLOOR = 1e-10


def certify(cfg: CloakConfig, esol, psol, G: float, F: float, sampling=None) -> Certificate:
    """Record boundary residuals, exterior errors and their empirical ratios.

    The ratios are measurements on the sampling set, not guaranteed bounds;
    they are None when the residual is at round-off level.
    """
    D, Om = cfg.D, cfg.Omega
    res_e = math.sqrt(D.inner(esol.dn_outer_D - cfg.H.normal_derivative(D),
                              esol.dn_outer_D - cfg.H.normal_derivative(D)))
    p_tr = (cfg.P.value(Om.points) + single_layer_trace(D, Om) @ psol.psi_i
            + single_layer_trace(Om, Om) @ psol.psi_e)
    diff = p_tr - cfg.P.value(Om.points)
    res_h = math.sqrt(Om.inner(diff, diff))
    if sampling is None:
        pe = sampling_ring(D, avoid=(cfg.B, Om))
        pe = pe[~Om.contains(pe) | (Om.distance(pe) > Om.exclusion_band())]
        ph = sampling_ring(Om, avoid=(D,))
    else:
        pe, ph = sampling
    phi, _ = esol.potential(pe, warn=False)
    p, _ = psol.pressure(ph, warn=False)
    e_phi = float(np.abs(phi - cfg.H.value(pe)).max())
    e_p = float(np.abs(p - cfg.P.value(ph)).max())
    return Certificate(math.sqrt(max(G, 0.0)), math.sqrt(max(F, 0.0)), res_e, res_h, e_phi, e_p,
                       e_phi / res_e if res_e > RATIO_FLOOR else None,
                       e_p / res_h if res_h > RATIO_FLOOR else None)


@dataclass
class OptimizationReport:
    eps_m: float
    eps_opt: float
    G: float
    eps_interval: tuple
    eps_interior: bool
    eps_unconstrained: float
    zeta_opt: float
    F: float
    zeta_interval: tuple
    zeta_interior: bool
    zeta_unconstrained: float
    gauge_constant: float
    dirichlet_residual: float
    mixed_flux: float
    projected_mass: dict
    slip_source: str
    nodes: dict
    certificate: Certificate
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps_ratio"] = self.eps_opt / self.eps_m
        return d


def run_optimization(cfg: CloakConfig, certify_result: bool = True, exterior_check: bool = False):
    """Full design pipeline; returns (report, configured cloak, esol, psol).

    ``exterior_check`` adds the exterior-error permittivity to ``report.extras``.
    """
    validate_config(cfg, require_materials=False)
    eps_iv = cfg.eps_interval or (DEFAULT_EPS_INTERVAL[0] * cfg.eps_m, DEFAULT_EPS_INTERVAL[1] * cfg.eps_m)
    zeta_iv = cfg.zeta_interval or DEFAULT_ZETA_INTERVAL
    perm = optimize_permittivity(cfg.B, cfg.D, cfg.H, cfg.eps_m, eps_iv)
    stage = cfg.with_materials(eps_s=perm.eps_opt, zeta0=0.0)
    esol = solve_electric(stage)
    s_D, s_O = slip_data(esol, cfg.slip_source)
    decomp = solve_pressure_decomposition(cfg.D, cfg.Omega, s_D, s_O, cfg.P)
    zr = optimize_zeta(decomp, zeta_iv)
    final = stage.with_materials(zeta0=zr.zeta_opt)
    esol = solve_electric(final)
    psol = solve_pressure(final, esol)
    cert = certify(final, esol, psol, perm.G, zr.F) if certify_result else None
    report = OptimizationReport(
        eps_m=cfg.eps_m, eps_opt=perm.eps_opt, G=perm.G, eps_interval=perm.interval,
        eps_interior=perm.interior, eps_unconstrained=perm.unconstrained,
        zeta_opt=zr.zeta_opt, F=zr.F, zeta_interval=zr.interval, zeta_interior=zr.interior,
        zeta_unconstrained=zr.unconstrained, gauge_constant=zr.gauge,
        dirichlet_residual=perm.mixed.dirichlet_residual, mixed_flux=perm.mixed.flux,
        projected_mass=decomp.projected_mass, slip_source=cfg.slip_source,
        nodes={"B": cfg.B.n, "D": cfg.D.n, "Omega": cfg.Omega.n}, certificate=cert,
    )
    if exterior_check:
        report.extras["eps_exterior_opt"] = exterior_permittivity(cfg)
    return report, final, esol, psol
