"""Coupled exterior problem: electric transmission, then electro-osmotic pressure.

The potential is ``phi = H + S_o[phi_o] + S_i[phi_i]`` outside the core and
the pressure ``p = P + S_i[psi_i] + S_e[psi_e]`` outside the object. The
electric densities come from one 2N x 2N second-kind system; the pressure
density on the control boundary is assigned from the slip jump and only the
object-boundary density is solved for.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import CloakConfig, validate_config
from .layerpot import (NearBoundaryWarning, assemble_np_adjoint, eval_potential,
                       near_mask, normal_derivative_trace)

COND_LIMIT = 1e12
CSV_HEADER = ["x", "y", "region", "phi", "phi_err", "p", "p_err", "ux", "uy"]
REGIONS = ("core", "shell", "cloak", "exterior")


class NumericalError(RuntimeError):
    """Ill-conditioned or singular discrete system."""


def mean_project(curve, values):
    values = np.asarray(values, dtype=float)
    return values - curve.mean(values)


def _solve(a, b):
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"system condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
    x = np.linalg.solve(a, b)
    return x, float(np.abs(a @ x - b).max()), float(cond)


@dataclass(frozen=True, eq=False)
class ElectricSolution:
    cfg: CloakConfig
    phi_o: np.ndarray
    phi_i: np.ndarray
    dn_outer_D: np.ndarray
    dn_inner_D: np.ndarray
    dn_Omega: np.ndarray
    residual: float
    cond: float

    def potential(self, points, warn=True):
        """phi and grad phi at points outside the core (no region check)."""
        h, gh = self.cfg.H.value_grad(points)
        so = eval_potential(self.cfg.B, self.phi_o, points, warn=warn)
        si = eval_potential(self.cfg.D, self.phi_i, points, warn=warn)
        return h + so.value + si.value, gh + so.grad + si.grad


@dataclass(frozen=True, eq=False)
class PressureSolution:
    esol: ElectricSolution
    psi_i: np.ndarray
    psi_e: np.ndarray
    residual: float
    cond: float

    @property
    def cfg(self):
        return self.esol.cfg

    def pressure(self, points, warn=True):
        p, gp = self.cfg.P.value_grad(points)
        si = eval_potential(self.cfg.D, self.psi_i, points, warn=warn)
        se = eval_potential(self.cfg.Omega, self.psi_e, points, warn=warn)
        return p + si.value + se.value, gp + si.grad + se.grad


def solve_electric(cfg: CloakConfig) -> ElectricSolution:
    """Solve for (phi_o, phi_i) from the insulation and transmission conditions."""
    validate_config(cfg)
    B, D, Om = cfg.B, cfg.D, cfg.Omega
    lam = cfg.lam
    a = np.block([
        [normal_derivative_trace(B, B, "outer"), normal_derivative_trace(D, B)],
        [normal_derivative_trace(B, D), assemble_np_adjoint(D) + lam * np.eye(D.n)],
    ])
    rhs = np.concatenate([mean_project(B, -cfg.H.normal_derivative(B)),
                          mean_project(D, -cfg.H.normal_derivative(D))])
    x, res, cond = _solve(a, rhs)
    phi_o = mean_project(B, x[:B.n])
    phi_i = mean_project(D, x[B.n:])
    cross = normal_derivative_trace(B, D) @ phi_o
    base = cfg.H.normal_derivative(D) + cross + assemble_np_adjoint(D) @ phi_i
    dn_e = (cfg.H.normal_derivative(Om) + normal_derivative_trace(B, Om) @ phi_o
            + normal_derivative_trace(D, Om) @ phi_i)
    return ElectricSolution(cfg, phi_o, phi_i, base + 0.5 * phi_i, base - 0.5 * phi_i,
                            dn_e, res, cond)


def slip_data(esol: ElectricSolution, source: str = "exterior"):
    """dphi/dnu on (D, Omega) used as electro-osmotic slip data."""
    cfg = esol.cfg
    if source == "exterior":
        return esol.dn_outer_D, esol.dn_Omega
    if source == "background":
        return cfg.H.normal_derivative(cfg.D), cfg.H.normal_derivative(cfg.Omega)
    raise ValueError(f"unknown slip source {source!r}")


def solve_pressure(cfg: CloakConfig, esol: ElectricSolution) -> PressureSolution:
    """Assign psi_e from the slip jump on Omega and solve for psi_i on D."""
    if esol.cfg.B is not cfg.B or esol.cfg.D is not cfg.D or esol.cfg.Omega is not cfg.Omega:
        raise ValueError("electric solution was computed for different curves")
    validate_config(cfg)
    D, Om = cfg.D, cfg.Omega
    z = cfg.zeta0
    g_i, g_e = esol.dn_outer_D, esol.dn_Omega
    psi_e = mean_project(Om, 12.0 * z * g_e)
    a = normal_derivative_trace(D, D, "outer")
    rhs = (-cfg.P.normal_derivative(D) - 12.0 * z * g_i
           - normal_derivative_trace(Om, D) @ psi_e)
    x, res, cond = _solve(a, mean_project(D, rhs))
    return PressureSolution(esol, mean_project(D, x), psi_e, res, cond)


def solve(cfg: CloakConfig):
    esol = solve_electric(cfg)
    return esol, solve_pressure(cfg, esol)


def classify(cfg: CloakConfig, points) -> np.ndarray:
    """Region index per point: 0 core, 1 shell, 2 cloak annulus, 3 exterior."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    in_b = cfg.B.contains(points)
    in_d = cfg.D.contains(points)
    in_o = cfg.Omega.contains(points)
    return np.where(in_b, 0, np.where(in_d, 1, np.where(in_o, 2, 3)))


@dataclass(frozen=True)
class FieldValues:
    points: np.ndarray
    region: np.ndarray
    phi: np.ndarray
    grad_phi: np.ndarray
    p: np.ndarray
    grad_p: np.ndarray
    u: np.ndarray
    H: np.ndarray
    P: np.ndarray
    flagged: np.ndarray

    @property
    def region_names(self):
        return [REGIONS[r] for r in self.region]


def eval_fields(cfg: CloakConfig, esol: ElectricSolution, psol: PressureSolution,
                points, warn: bool = True) -> FieldValues:
    """phi, p, u_aver at points; NaN where a field is not defined.

    phi is absent in the core; p and u_aver are absent inside D.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(points)
    region = classify(cfg, points)
    flagged = near_mask(cfg.B, points) | near_mask(cfg.D, points) | near_mask(cfg.Omega, points)
    if warn and flagged.any():
        warnings.warn(f"{int(flagged.sum())} point(s) inside an exclusion band",
                      NearBoundaryWarning, stacklevel=2)
    phi = np.full(m, np.nan)
    gphi = np.full((m, 2), np.nan)
    p = np.full(m, np.nan)
    gp = np.full((m, 2), np.nan)
    u = np.full((m, 2), np.nan)
    sel = region >= 1
    if sel.any():
        phi[sel], gphi[sel] = esol.potential(points[sel], warn=False)
    sel = region >= 2
    if sel.any():
        p[sel], gp[sel] = psol.pressure(points[sel], warn=False)
    zeta = np.where(region == 2, cfg.zeta0, 0.0)
    u = -gp / 12.0 - zeta[:, None] * gphi
    u[region < 2] = np.nan
    H = cfg.H.value(points)
    P = cfg.P.value(points)
    return FieldValues(points, region, phi, gphi, p, gp, u, H, P, flagged)


def grid_points(window, resolution):
    x0, x1, y0, y1 = map(float, window)
    nx, ny = map(int, resolution)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("empty window")
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    xx, yy = np.meshgrid(xs, ys)
    return np.column_stack([xx.ravel(), yy.ravel()])


def export_grid(cfg, esol, psol, window, resolution):
    """Rows of (x, y, region, phi, phi-H, p, p-P, ux, uy); None for absent cells.

    Points inside an exclusion band keep their region tag but get empty
    field cells.
    """
    pts = grid_points(window, resolution)
    fv = eval_fields(cfg, esol, psol, pts, warn=False)
    rows = []
    for k in range(len(pts)):
        ok = not fv.flagged[k]

        def cell(v):
            return float(v) if ok and np.isfinite(v) else None

        rows.append({
            "x": float(pts[k, 0]), "y": float(pts[k, 1]), "region": REGIONS[fv.region[k]],
            "phi": cell(fv.phi[k]), "phi_err": cell(fv.phi[k] - fv.H[k]),
            "p": cell(fv.p[k]), "p_err": cell(fv.p[k] - fv.P[k]),
            "ux": cell(fv.u[k, 0]), "uy": cell(fv.u[k, 1]),
        })
    return rows


def grid_metadata(cfg) -> dict:
    return {"exclusion_band": {"B": cfg.B.exclusion_band(), "D": cfg.D.exclusion_band(),
                               "Omega": cfg.Omega.exclusion_band()},
            "columns": CSV_HEADER}


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(["" if r[c] is None else (r[c] if isinstance(r[c], str) else repr(r[c]))
                    for c in CSV_HEADER])
    return buf.getvalue()


def rows_to_json(rows, metadata=None) -> str:
    return json.dumps({"metadata": metadata or {}, "rows": rows}, indent=None, sort_keys=True)
