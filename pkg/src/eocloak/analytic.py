"""Closed-form cloaking conditions and separated-variable solutions.

Concentric disks use polar coordinates, confocal ellipses elliptic
coordinates. The pressure series take the exterior potential's actual
multipole coefficient, so they hold for any contrast lambda, not only for
a perfect electric cloak.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EllipticCoords


class OrderingError(ValueError):
    pass


def _check_order(a, b, c, n, what):
    if not (0 < a < b < c):
        raise OrderingError(f"need 0 < {what}_o < {what}_i < {what}_e, got {a}, {b}, {c}")
    if n < 1:
        raise OrderingError(f"harmonic order must be >= 1, got {n}")


@dataclass(frozen=True)
class AnnulusDesign:
    r_o: float
    r_i: float
    r_e: float
    n: int
    eps_ratio: float
    zeta0: float


@dataclass(frozen=True)
class ConfocalDesign:
    xi_o: float
    xi_i: float
    xi_e: float
    n: int
    orientation: str
    eps_ratio: float
    zeta0: float


def annulus_condition(r_o, r_i, r_e, n=1):
    """(eps_s/eps_m, zeta0) for perfect cloaking by concentric disks."""
    _check_order(r_o, r_i, r_e, n, "r")
    a, b, c = r_o ** (2 * n), r_i ** (2 * n), r_e ** (2 * n)
    return (b + a) / (b - a), 2 * b / (c - b)


def annulus_design(r_o, r_i, r_e, n=1) -> AnnulusDesign:
    return AnnulusDesign(r_o, r_i, r_e, n, *annulus_condition(r_o, r_i, r_e, n))


def confocal_condition(xi_o, xi_i, xi_e, n=1, orientation="x"):
    """(eps_s/eps_m, zeta0) for perfect cloaking by confocal ellipses.

    ``orientation="x"`` pairs with H = cosh(n xi) cos(n eta),
    ``"y"`` with H = sinh(n xi) sin(n eta).
    """
    _check_order(xi_o, xi_i, xi_e, n, "xi")
    gap = 1.0 / np.tanh(n * (xi_i - xi_o))
    if orientation == "x":
        eps = np.tanh(n * xi_i) * gap
        z = np.sinh(n * xi_i) / (np.sinh(n * xi_e) * np.cosh(n * (xi_e - xi_i)) - np.sinh(n * xi_i))
    elif orientation == "y":
        eps = gap / np.tanh(n * xi_i)
        z = np.cosh(n * xi_i) / (np.cosh(n * xi_e) * np.cosh(n * (xi_e - xi_i)) - np.cosh(n * xi_i))
    else:
        raise ValueError(f"orientation must be 'x' or 'y', got {orientation!r}")
    return float(eps), float(z)


def confocal_design(xi_o, xi_i, xi_e, n=1, orientation="x") -> ConfocalDesign:
    return ConfocalDesign(xi_o, xi_i, xi_e, n, orientation,
                          *confocal_condition(xi_o, xi_i, xi_e, n, orientation))


def lam_from_ratio(eps_ratio):
    return (1.0 + eps_ratio) / (2.0 * (1.0 - eps_ratio))


# ---------------------------------------------------------------- disks

def annulus_phi_coefficient(r_o, r_i, n, lam):
    """Coefficient A of r^-n in phi = (r^n + A r^-n) cos/sin(n theta), r > r_i."""
    a, b = r_o ** (2 * n), r_i ** (2 * n)
    if np.isinf(lam):
        return a
    return (2 * lam * a + b) * b / (2 * lam * b + a)


def annulus_p_coefficient(r_o, r_i, r_e, n, lam, zeta0):
    """Coefficient C of r^-n in p = (12 r^n + C r^-n) cos/sin(n theta), r > r_e."""
    A = annulus_phi_coefficient(r_o, r_i, n, lam)

    def dphi(r):
        return n * (r ** (n - 1) - A * r ** (-n - 1))

    psi_e = 12 * zeta0 * dphi(r_e)
    # 1/2 psi_i - 1/2 (r_i/r_e)^(n-1) psi_e = -12 n r_i^(n-1) - 12 zeta0 dphi(r_i)
    psi_i = 2 * (0.5 * (r_i / r_e) ** (n - 1) * psi_e - 12 * n * r_i ** (n - 1) - 12 * zeta0 * dphi(r_i))
    return -(r_i ** (n + 1) * psi_i + r_e ** (n + 1) * psi_e) / (2 * n)


def annulus_series(r_o, r_i, r_e, n, lam, zeta0, points, phase="cos", which="both"):
    """Exact (phi, p) at points; phi needs r > r_i, p needs r > r_e."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    th = np.arctan2(pts[:, 1], pts[:, 0])
    ang = np.cos(n * th) if phase == "cos" else np.sin(n * th)
    phi = p = None
    if which in ("both", "phi"):
        if np.any(r <= r_i):
            raise ValueError("phi series needs points outside r_i")
        A = annulus_phi_coefficient(r_o, r_i, n, lam)
        phi = (r**n + A * r ** (-n)) * ang
    if which in ("both", "p"):
        if np.any(r <= r_e):
            raise ValueError("p series needs points outside r_e")
        C = annulus_p_coefficient(r_o, r_i, r_e, n, lam, zeta0)
        p = (12 * r**n + C * r ** (-n)) * ang
    return phi, p


def annulus_mixed_dn(r_o, r_i, n=1):
    """d/dr at r_i of the annulus solution with zero flux on r_o and r^n cos on r_i."""
    a = r_o ** (2 * n)
    # phi = (r^n + a r^-n) / (r_i^n + a r_i^-n) * cos(n theta)
    return n * (r_i ** (n - 1) - a * r_i ** (-n - 1)) / (r_i**n + a * r_i ** (-n))


# ------------------------------------------------------------- ellipses

def confocal_phi_coefficient(xi_o, xi_i, n, lam, orientation="x"):
    """A with phi = (F(n xi) + A e^{-n xi}) trig(n eta) for xi > xi_i."""
    eo, ei = np.exp(2 * n * xi_o), np.exp(2 * n * xi_i)
    if orientation == "x":
        num = (1 + 2 * lam) * np.sinh(n * xi_o) * np.exp(n * (xi_o + xi_i)) - np.cosh(n * xi_i) * (eo - ei)
    else:
        num = (1 + 2 * lam) * np.cosh(n * xi_o) * np.exp(n * (xi_o + xi_i)) - np.sinh(n * xi_i) * (eo - ei)
    return num / (2 * lam * ei + eo) * np.exp(n * xi_i)


def confocal_p_coefficient(xi_o, xi_i, xi_e, n, lam, zeta0, orientation="x"):
    """C with p = (12 F(n xi) + C e^{-n xi}) trig(n eta) for xi > xi_e."""
    A = confocal_phi_coefficient(xi_o, xi_i, n, lam, orientation)
    if orientation == "x":
        dF, F = np.sinh, np.cosh          # d/dxi cosh = sinh
        k_i = np.exp(-n * xi_i) * np.cosh(n * xi_i)
    else:
        dF, F = np.cosh, np.sinh
        k_i = np.exp(-n * xi_i) * np.sinh(n * xi_i)

    def g(xi):
        return n * (dF(n * xi) - A * np.exp(-n * xi))

    a_e = 12 * zeta0 * g(xi_e)
    # inner derivative of S_e[beta_e] at xi_i: -dF(n xi_i) e^{-n xi_e}
    a_i = (a_e * dF(n * xi_i) * np.exp(-n * xi_e) - 12 * n * dF(n * xi_i) - 12 * zeta0 * g(xi_i)) / k_i
    return -(a_i * F(n * xi_i) + a_e * F(n * xi_e)) / n


def confocal_series(xi_o, xi_i, xi_e, n, lam, zeta0, points, l=1.0, orientation="x",
                    which="both"):
    """Exact (phi, p) at Cartesian points for confocal ellipses of focus l."""
    coords = EllipticCoords(l)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xi, eta = coords.from_cartesian(pts[:, 0], pts[:, 1])
    F = np.cosh if orientation == "x" else np.sinh
    trig = np.cos(n * eta) if orientation == "x" else np.sin(n * eta)
    phi = p = None
    if which in ("both", "phi"):
        if np.any(xi <= xi_i):
            raise ValueError("phi series needs xi > xi_i")
        A = confocal_phi_coefficient(xi_o, xi_i, n, lam, orientation)
        phi = (F(n * xi) + A * np.exp(-n * xi)) * trig
    if which in ("both", "p"):
        if np.any(xi <= xi_e):
            raise ValueError("p series needs xi > xi_e")
        C = confocal_p_coefficient(xi_o, xi_i, xi_e, n, lam, zeta0, orientation)
        p = (12 * F(n * xi) + C * np.exp(-n * xi)) * trig
    return phi, p
