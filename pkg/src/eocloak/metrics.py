"""Cloaking error metrics and conversion to laboratory units."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .exterior import solve_electric, solve_pressure
from .fields import CloakConfig, ConfigError
from .optimizer import sampling_ring

KINDS = ("length", "velocity", "pressure", "zeta", "potential")
SWEEP_COLUMNS = ["parameter", "e_max_phi", "l2_phi", "e_max_p", "l2_p", "e_max_u"]


@dataclass(frozen=True)
class UnitSystem:
    """Laboratory scales; defaults are the microfluidic values used for the figures."""

    gap: float = 15e-6             # channel height h (m)
    length: float = 1e-4           # L_c (m)
    viscosity: float = 1e-3        # Pa s
    eps_m: float = 7.08e-10        # F/m
    field: float = 300.0           # V/m
    u_ext: float = 51e-6           # m/s

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"unit {name} must be positive, got {v}")

    @property
    def zeta_char(self) -> float:
        return self.viscosity * self.u_ext / (self.eps_m * self.field)

    def scale(self, kind: str) -> float:
        if kind == "length":
            return self.length
        if kind == "velocity":
            return self.u_ext
        if kind == "pressure":
            return 12 * self.viscosity * self.u_ext * self.length / self.gap**2
        if kind == "zeta":
            # dimensional zeta carries the opposite sign (negative for a positive design value)
            return -self.zeta_char
        if kind == "potential":
            return self.field * self.length
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def to_dimensional(value, kind: str, units: UnitSystem = UnitSystem()):
    return value * units.scale(kind)


def from_dimensional(value, kind: str, units: UnitSystem = UnitSystem()):
    return value / units.scale(kind)


@dataclass
class CloakErrorSummary:
    sampling: dict
    e_max_phi: float
    l2_phi: float
    e_max_p: float
    l2_p: float
    e_max_u: float

    def to_dict(self):
        return asdict(self)


def default_sampling(cfg: CloakConfig, inner=1.05, outer=3.0):
    """Electric points outside D and hydrodynamic points outside Omega.

    Both sets sit on rings from inner to outer times the circumradius of
    their curve and skip every exclusion band.
    """
    pe = sampling_ring(cfg.D, inner, outer, avoid=(cfg.B, cfg.Omega))
    ph = sampling_ring(cfg.Omega, inner, outer, avoid=(cfg.D,))
    return pe, ph


def _rms(x):
    return float(math.sqrt(np.mean(x * x)))


def cloak_errors(cfg, esol, psol, sampling=None) -> CloakErrorSummary:
    """Max and RMS deviations of phi from H and p from P, plus the velocity defect.

    The velocity defect is |u_aver + grad P / 12| on the hydrodynamic set,
    where u_aver = -grad p / 12 because the slip vanishes outside Omega.
    """
    if sampling is None:
        pe, ph = default_sampling(cfg)
        desc = {"kind": "rings", "inner": 1.05, "outer": 3.0, "n_phi": len(pe), "n_p": len(ph)}
    else:
        pe, ph = (np.atleast_2d(np.asarray(s, dtype=float)) for s in sampling)
        desc = {"kind": "explicit", "n_phi": len(pe), "n_p": len(ph)}
    if len(pe) == 0 or len(ph) == 0:
        raise ValueError("empty sampling set")
    if cfg.D.contains(pe).any() or cfg.Omega.contains(ph).any():
        raise ValueError("sampling points must lie outside D (electric) and Omega (pressure)")
    phi, _ = esol.potential(pe, warn=False)
    dphi = np.abs(phi - cfg.H.value(pe))
    p, gp = psol.pressure(ph, warn=False)
    P, gP = cfg.P.value_grad(ph)
    dp = np.abs(p - P)
    u = -gp / 12.0
    du = np.hypot(*(u + gP / 12.0).T)
    return CloakErrorSummary(desc, float(dphi.max()), _rms(dphi), float(dp.max()), _rms(dp),
                             float(du.max()))


def detuning_sweep(cfg: CloakConfig, parameter: str, grid, sampling=None, workers: int = 1):
    """One full solve per grid value of ``epsilon_s`` or ``zeta0``; rows in grid order."""
    if parameter not in ("epsilon_s", "zeta0"):
        raise ValueError(f"parameter must be 'epsilon_s' or 'zeta0', got {parameter!r}")
    grid = [float(g) for g in grid]
    if parameter == "epsilon_s":
        signs = {np.sign(g - cfg.eps_m) for g in grid}
        if 0 in signs or len(signs) > 1:
            raise ConfigError("epsilon_s grid touches or crosses epsilon_m")
    if sampling is None:
        sampling = default_sampling(cfg)

    def run(value):
        c = cfg.with_materials(**({"eps_s": value} if parameter == "epsilon_s" else {"zeta0": value}))
        esol = solve_electric(c)
        return value, cloak_errors(c, esol, solve_pressure(c, esol), sampling)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, grid))
    return [run(v) for v in grid]


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for value, s in rows:
        w.writerow([repr(value)] + [repr(getattr(s, c)) for c in SWEEP_COLUMNS[1:]])
    return buf.getvalue()
