"""Background harmonic fields and the cloak configuration."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Curve, curve_from_spec

FAMILIES = ("uniform-x", "uniform-y", "disk-multipole", "elliptic-cos", "elliptic-sin")


class ConfigError(ValueError):
    pass


def _chebyshev_tu(n: int, z):
    """T_n(z) and U_{n-1}(z) for complex z by the three-term recurrence."""
    t_prev, t = np.ones_like(z), z
    u_prev, u = np.zeros_like(z), np.ones_like(z)  # U_{-1}, U_0
    if n == 0:
        return t_prev, u_prev
    for _ in range(n - 1):
        t_prev, t = t, 2 * z * t - t_prev
        u_prev, u = u, 2 * z * u - u_prev
    return t, u


@dataclass(frozen=True)
class HarmonicField:
    """``amplitude * Re/Im F(z)`` for an entire F.

    ``disk-multipole`` uses F = z^n (r^n cos n theta / r^n sin n theta);
    ``elliptic-cos``/``elliptic-sin`` use F = T_n(z/l), whose real and
    imaginary parts are cosh(n xi) cos(n eta) and sinh(n xi) sin(n eta).
    """

    family: str = "uniform-x"
    n: int = 1
    phase: str = "cos"
    amplitude: float = 1.0
    l: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown field family {self.family!r}")
        if self.family == "uniform-x":
            object.__setattr__(self, "n", 1)
            object.__setattr__(self, "phase", "cos")
        elif self.family == "uniform-y":
            object.__setattr__(self, "n", 1)
            object.__setattr__(self, "phase", "sin")
        elif self.family == "elliptic-cos":
            object.__setattr__(self, "phase", "cos")
        elif self.family == "elliptic-sin":
            object.__setattr__(self, "phase", "sin")
        if self.phase not in ("cos", "sin"):
            raise ConfigError(f"phase must be 'cos' or 'sin', got {self.phase!r}")
        if self.n < 1:
            raise ConfigError(f"harmonic order must be >= 1, got {self.n}")
        if self.family.startswith("elliptic") and self.l <= 0:
            raise ConfigError("elliptic field needs l > 0")

    @property
    def elliptic(self) -> bool:
        return self.family.startswith("elliptic")

    def _complex(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        z = pts[:, 0] + 1j * pts[:, 1]
        if self.elliptic:
            t, u = _chebyshev_tu(self.n, z / self.l)
            return t, self.n * u / self.l
        return z**self.n, self.n * z ** (self.n - 1)

    def value_grad(self, points):
        """Return (values, gradients) at ``(M, 2)`` points."""
        f, df = self._complex(points)
        a = self.amplitude
        if self.phase == "cos":
            return a * f.real, a * np.column_stack([df.real, -df.imag])
        return a * f.imag, a * np.column_stack([df.imag, df.real])

    def value(self, points):
        return self.value_grad(points)[0]

    def normal_derivative(self, curve: Curve) -> np.ndarray:
        _, g = self.value_grad(curve.points)
        return (g * curve.normal).sum(axis=1)

    def scaled(self, factor: float) -> "HarmonicField":
        return replace(self, amplitude=self.amplitude * factor)

    def to_dict(self) -> dict:
        d = {"family": self.family, "n": self.n, "phase": self.phase, "amplitude": self.amplitude}
        if self.elliptic:
            d["l"] = self.l
        return d


def field_value_grad(fld: HarmonicField, point):
    v, g = fld.value_grad(point)
    if np.ndim(point) == 1:
        return float(v[0]), g[0]
    return v, g


def pressure_partner(h: HarmonicField) -> HarmonicField:
    """The pressure background paired with H: same harmonic, amplitude x12."""
    return h.scaled(12.0)


def field_from_spec(spec: dict) -> HarmonicField:
    spec = dict(spec)
    family = spec.get("family", "uniform-x")
    # the uniform background is the n=1 cos multipole; both spellings accepted
    if family == "uniform":
        family = "uniform-x"
    return HarmonicField(family=family, n=int(spec.get("n", 1)),
                         phase=spec.get("phase", "cos"),
                         amplitude=float(spec.get("amplitude", 1.0)),
                         l=float(spec.get("l", 1.0)))


def contrast(eps_m: float, eps_s: float) -> float:
    """lambda = (eps_m + eps_s) / (2 (eps_m - eps_s))."""
    if eps_s == eps_m:
        raise ConfigError("eps_s equals eps_m: the contrast parameter is singular")
    return (eps_m + eps_s) / (2.0 * (eps_m - eps_s))


@dataclass(frozen=True, eq=False)
class CloakConfig:
    """Core B inside object D inside control region Omega, plus materials.

    ``eps_s`` and ``zeta0`` may be left as None when they are to be
    designed by the optimizer.
    """

    B: Curve
    D: Curve
    Omega: Curve
    H: HarmonicField
    P: HarmonicField | None = None
    eps_m: float = 1.0
    eps_s: float | None = None
    zeta0: float | None = None
    eps_interval: tuple | None = None
    zeta_interval: tuple | None = None
    slip_source: str = "exterior"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.P is None:
            object.__setattr__(self, "P", pressure_partner(self.H))

    @property
    def lam(self) -> float:
        if self.eps_s is None:
            raise ConfigError("eps_s is not set")
        return contrast(self.eps_m, self.eps_s)

    def with_materials(self, eps_s=None, zeta0=None) -> "CloakConfig":
        return replace(self,
                       eps_s=self.eps_s if eps_s is None else float(eps_s),
                       zeta0=self.zeta0 if zeta0 is None else float(zeta0))

    def curves(self):
        return self.B, self.D, self.Omega


def _strictly_inside(inner: Curve, outer: Curve) -> bool:
    return bool(np.all(outer.contains(inner.points)))


def validate_config(cfg: CloakConfig, require_materials: bool = True) -> CloakConfig:
    """Check nesting, positivity and eps_s != eps_m; returns ``cfg``."""
    if not _strictly_inside(cfg.B, cfg.D):
        raise ConfigError("core B is not strictly inside D")
    if not _strictly_inside(cfg.D, cfg.Omega):
        raise ConfigError("object D is not strictly inside Omega")
    if not cfg.eps_m > 0:
        raise ConfigError("eps_m must be positive")
    if cfg.slip_source not in ("exterior", "background"):
        raise ConfigError(f"slip_source must be 'exterior' or 'background', got {cfg.slip_source!r}")
    if require_materials:
        if cfg.eps_s is None or cfg.zeta0 is None:
            raise ConfigError("eps_s and zeta0 must be set")
        if not cfg.eps_s > 0:
            raise ConfigError("eps_s must be positive")
        lam = cfg.lam
        if abs(lam) <= 0.5:
            raise ConfigError(f"|lambda| = {abs(lam)} must exceed 1/2")
    return cfg


def config_from_dict(data: dict, n: int | None = None) -> CloakConfig:
    """Parse the JSON configuration document."""
    try:
        H = field_from_spec(data.get("H", {"family": "uniform-x"}))
        p_spec = data.get("P", "auto")
        P = pressure_partner(H) if p_spec in (None, "auto") else field_from_spec(p_spec)
        curves = {k: curve_from_spec(data[k], n) for k in ("B", "D", "Omega")}
        eps_m = float(data.get("epsilon_m", 1.0))
        eps_s = data.get("epsilon_s")
        zeta0 = data.get("zeta0")
        iv = data.get("intervals", {})
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return CloakConfig(
        B=curves["B"], D=curves["D"], Omega=curves["Omega"], H=H, P=P, eps_m=eps_m,
        eps_s=None if eps_s is None else float(eps_s),
        zeta0=None if zeta0 is None else float(zeta0),
        eps_interval=tuple(iv["epsilon_s"]) if "epsilon_s" in iv else None,
        zeta_interval=tuple(iv["zeta0"]) if "zeta0" in iv else None,
        slip_source=data.get("slip_source", "exterior"),
        meta={"source": data},
    )
