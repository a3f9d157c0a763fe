"""Nystrom discretization of the Laplace single layer and its normal derivative.

Conventions: ``G(x, y) = ln|x - y| / (2 pi)``; densities are per unit arc
length; ``S[phi](x) = sum_j G(x, y_j) phi_j w_j`` off the curve. The
boundary trace of ``S`` uses Kress's splitting of the log singularity,
which is spectrally accurate on smooth curves with an even node count.
The NP operator ``K*`` has kernel ``dG(x, y)/dnu(x)`` and diagonal
``kappa/(4 pi) * w``; with this choice ``K*[1] = 1/2`` and the outer and
inner normal-derivative traces are ``(+-1/2 I + K*)``.
"""
from __future__ import annotations

import warnings
import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Curve


class NearBoundaryWarning(UserWarning):
    """An evaluation point lies inside a curve's exclusion band."""


_cache: "weakref.WeakKeyDictionary[Curve, dict]" = weakref.WeakKeyDictionary()


def _cached(curve: Curve, key: str, build):
    store = _cache.setdefault(curve, {})
    if key not in store:
        mat = build()
        mat.setflags(write=False)
        store[key] = mat
    return store[key]


def kress_log_weights(n: int) -> np.ndarray:
    """R_j with ``int ln(4 sin^2((t - s)/2)) f(s) ds ~ sum_j R_{|i-j|} f(s_j)``."""
    if n % 2:
        raise ValueError(f"Kress weights need an even node count, got {n}")
    half = n // 2
    m = np.arange(1, half)
    k = np.arange(n)
    t = 2.0 * np.pi * k / n
    r = -(4.0 * np.pi / n) * (np.cos(np.outer(t, m)) / m).sum(axis=1)
    r -= (4.0 * np.pi / n**2) * np.cos(half * t)
    return r


def assemble_slp(curve: Curve) -> np.ndarray:
    """Boundary trace matrix of the single layer potential on ``curve``."""
    def build():
        n = curve.n
        r = kress_log_weights(n)
        idx = np.arange(n)
        circ = r[np.abs(idx[:, None] - idx[None, :])]
        rem = kernels.log_remainder(curve.points, curve.speed, curve.t)
        return (0.5 * circ + curve.h * rem) * curve.speed[None, :] / (2.0 * np.pi)

    return _cached(curve, "slp", build)


def assemble_np_adjoint(curve: Curve) -> np.ndarray:
    """Matrix of K* on ``curve``."""
    return _cached(curve, "npa", lambda: kernels.np_adjoint(
        curve.points, curve.normal, curve.curvature, curve.weights))


@dataclass(frozen=True)
class KernelMatrixSet:
    curve: Curve
    slp: np.ndarray
    npa: np.ndarray

    @classmethod
    def build(cls, curve: Curve) -> "KernelMatrixSet":
        return cls(curve, assemble_slp(curve), assemble_np_adjoint(curve))


def _check_separated(source: Curve, targets: np.ndarray):
    d = source.distance(targets)
    if np.any(d <= 1e-14 * max(1.0, source.diameter)):
        raise ValueError("target point lies on the source curve")


def normal_derivative_trace(source: Curve, target: Curve, side: str = "outer") -> np.ndarray:
    """Map a density on ``source`` to dS/dnu at the nodes of ``target``.

    For ``source is target``, ``side`` picks the one-sided trace:
    ``"outer"`` gives 1/2 I + K*, ``"inner"`` gives -1/2 I + K*, and
    ``"transmission"`` returns the principal value K* alone.
    """
    if source is target:
        k = assemble_np_adjoint(source)
        if side == "outer":
            return k + 0.5 * np.eye(source.n)
        if side == "inner":
            return k - 0.5 * np.eye(source.n)
        if side == "transmission":
            return k.copy()
        raise ValueError(f"unknown side {side!r}")
    _check_separated(source, target.points)
    return kernels.normal_derivative(target.points, target.normal, source.points, source.weights)


def single_layer_trace(source: Curve, target: Curve) -> np.ndarray:
    """Map a density on ``source`` to S[.] at the nodes of ``target``."""
    if source is target:
        return assemble_slp(source)
    _check_separated(source, target.points)
    val, _, _ = kernels.potential_matrices(target.points, source.points, source.weights)
    return val


def near_mask(curve: Curve, points) -> np.ndarray:
    return curve.distance(points) <= curve.exclusion_band()


@dataclass(frozen=True)
class EvalOperator:
    """Dense potential/gradient matrices from a curve to fixed targets."""

    source: Curve
    points: np.ndarray
    value: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray
    flagged: np.ndarray

    @classmethod
    def build(cls, source: Curve, points) -> "EvalOperator":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        v, gx, gy = kernels.potential_matrices(points, source.points, source.weights)
        return cls(source, points, v, gx, gy, near_mask(source, points))

    def apply(self, density):
        density = np.asarray(density, dtype=float)
        return self.value @ density, np.column_stack([self.grad_x @ density, self.grad_y @ density])


@dataclass(frozen=True)
class PotentialValues:
    value: np.ndarray
    grad: np.ndarray
    flagged: np.ndarray


def eval_potential(source: Curve, density, points, warn: bool = True) -> PotentialValues:
    """Single layer potential and its gradient at off-curve points.

    Points inside the exclusion band are still evaluated but flagged.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    density = np.asarray(density, dtype=float)
    wd = density * source.weights
    v, gx, gy = kernels.potential_apply(points, source.points, wd)
    flagged = near_mask(source, points)
    if warn and flagged.any():
        warnings.warn(f"{int(flagged.sum())} point(s) inside the exclusion band",
                      NearBoundaryWarning, stacklevel=2)
    return PotentialValues(v, np.column_stack([gx, gy]), flagged)
