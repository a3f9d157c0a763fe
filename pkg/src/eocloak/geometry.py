"""Closed parametrized curves on uniform periodic grids.

Every curve is sampled at ``t_k = 2*pi*k/N`` and carries first and second
parametric derivatives, from which speed, outward normal and curvature are
derived. Curves are counterclockwise; the outward normal of a CCW curve is
``(x2', -x1') / |x'|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_NODES = 16


class GeometryError(ValueError):
    pass


def _check_n(n: int) -> int:
    n = int(n)
    if n < MIN_NODES:
        raise GeometryError(f"need at least {MIN_NODES} nodes, got {n}")
    if n % 2:
        raise GeometryError(f"node count must be even, got {n}")
    return n


def param_grid(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True, eq=False)
class Curve:
    """A closed CCW curve sampled on a uniform parameter grid.

    ``points``, ``d1`` and ``d2`` are ``(N, 2)`` arrays holding x(t_k),
    x'(t_k) and x''(t_k). ``kind`` and ``params`` record how the curve was
    built so that shape-specific helpers (elliptic densities) can check it.
    """

    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    kind: str = "curve"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("points", "d1", "d2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        _check_n(len(self.points))
        speed = np.hypot(self.d1[:, 0], self.d1[:, 1])
        normal = np.column_stack([self.d1[:, 1], -self.d1[:, 0]]) / speed[:, None]
        cross = self.d1[:, 0] * self.d2[:, 1] - self.d1[:, 1] * self.d2[:, 0]
        curvature = cross / speed**3
        weights = (2.0 * np.pi / len(speed)) * speed
        for name, arr in (("speed", speed), ("normal", normal),
                          ("curvature", curvature), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def t(self) -> np.ndarray:
        return param_grid(self.n)

    @property
    def tangent(self) -> np.ndarray:
        return self.d1 / self.speed[:, None]

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    @property
    def area(self) -> float:
        x, y = self.points.T
        return 0.5 * float(np.sum((x * self.d1[:, 1] - y * self.d1[:, 0]))) * self.h

    @property
    def centroid(self) -> np.ndarray:
        # Green's theorem: Cx = (1/A) * integral of x^2/2 dy, Cy = -(1/A) * integral of y^2/2 dx
        x, y = self.points.T
        a = self.area
        cx = 0.5 * np.sum(x**2 * self.d1[:, 1]) * self.h / a
        cy = -0.5 * np.sum(y**2 * self.d1[:, 0]) * self.h / a
        return np.array([cx, cy])

    @property
    def diameter(self) -> float:
        d = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def integrate(self, values) -> float:
        """Arc-length integral of node-sampled values."""
        return float(np.dot(self.weights, values))

    def mean(self, values) -> float:
        return self.integrate(values) / self.perimeter

    def inner(self, u, v) -> float:
        return float(np.dot(self.weights, np.asarray(u) * np.asarray(v)))

    def contains(self, pts) -> np.ndarray:
        """Winding-number test against the node polygon."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.abs(winding_number(self.points, pts)) > 0.5

    def distance(self, pts) -> np.ndarray:
        """Distance from each point to the nearest node."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts[:, None, :] - self.points[None, :, :]
        return np.sqrt((d**2).sum(-1)).min(axis=1)

    def signed_distance(self, pts) -> np.ndarray:
        """Positive inside, negative outside (node-based approximation)."""
        d = self.distance(pts)
        return np.where(self.contains(pts), d, -d)

    def exclusion_band(self) -> float:
        """Width of the near-boundary band where plain quadrature is not trusted."""
        return 5.0 * self.h * float(self.speed.max())

    def scaled(self, factor: float, about=(0.0, 0.0)) -> "Curve":
        about = np.asarray(about, dtype=float)
        return Curve(about + factor * (self.points - about), factor * self.d1,
                     factor * self.d2, kind=self.kind,
                     params={**self.params, "scaled": factor})

    def translated(self, offset) -> "Curve":
        offset = np.asarray(offset, dtype=float)
        return Curve(self.points + offset, self.d1, self.d2, kind=self.kind,
                     params={**self.params, "offset": offset.tolist()})


def winding_number(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = poly[None, :, :] - pts[:, None, :]
    b = np.roll(poly, -1, axis=0)[None, :, :] - pts[:, None, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = (a * b).sum(-1)
    return np.arctan2(cross, dot).sum(axis=1) / (2.0 * np.pi)


def _spectral_derivatives(points: np.ndarray):
    n = len(points)
    k = np.fft.fftfreq(n, d=1.0 / n)
    k1 = 1j * k
    k1[n // 2] = 0.0
    coef = np.fft.fft(points, axis=0)
    d1 = np.fft.ifft(k1[:, None] * coef, axis=0).real
    d2 = np.fft.ifft(-(k**2)[:, None] * coef, axis=0).real
    return d1, d2


def curve_from_samples(points, kind="samples", params=None) -> Curve:
    """Build a curve from periodic samples, differentiating spectrally."""
    points = np.asarray(points, dtype=float)
    d1, d2 = _spectral_derivatives(points)
    return Curve(points, d1, d2, kind=kind, params=params or {})


def make_circle(center, radius: float, n: int) -> Curve:
    if radius <= 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    n = _check_n(n)
    t = param_grid(n)
    c, s = np.cos(t), np.sin(t)
    center = np.asarray(center, dtype=float)
    pts = center + radius * np.column_stack([c, s])
    d1 = radius * np.column_stack([-s, c])
    d2 = -radius * np.column_stack([c, s])
    return Curve(pts, d1, d2, kind="circle",
                 params={"center": center.tolist(), "radius": float(radius)})


@dataclass(frozen=True)
class EllipticCoords:
    """Elliptic coordinates with focal half-distance ``l``."""

    l: float

    def __post_init__(self):
        if self.l <= 0:
            raise GeometryError(f"focal half-distance must be positive, got {self.l}")

    def to_cartesian(self, xi, eta):
        xi, eta = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
        return self.l * np.cosh(xi) * np.cos(eta), self.l * np.sinh(xi) * np.sin(eta)

    def from_cartesian(self, x1, x2):
        """Inverse map; returns xi >= 0 and eta in [0, 2*pi)."""
        z = (np.asarray(x1, dtype=float) + 1j * np.asarray(x2, dtype=float)) / self.l
        # principal arccosh has Re >= 0; a negative imaginary part flips eta
        w = np.arccosh(z)
        w = np.where(w.real < 0, -w, w)
        xi = w.real
        eta = np.mod(w.imag, 2.0 * np.pi)
        return xi, eta

    def metric(self, xi, eta):
        """Scale factor gamma = l*sqrt(sinh^2 xi + sin^2 eta)."""
        return self.l * np.sqrt(np.sinh(xi) ** 2 + np.sin(eta) ** 2)


def make_confocal_ellipse(l: float, xi: float, n: int) -> Curve:
    if l <= 0 or xi <= 0:
        raise GeometryError(f"need l > 0 and xi > 0, got l={l}, xi={xi}")
    n = _check_n(n)
    eta = param_grid(n)
    a, b = l * np.cosh(xi), l * np.sinh(xi)
    c, s = np.cos(eta), np.sin(eta)
    pts = np.column_stack([a * c, b * s])
    d1 = np.column_stack([-a * s, b * c])
    d2 = -pts
    return Curve(pts, d1, d2, kind="ellipse", params={"l": float(l), "xi": float(xi)})


def _polar_curve(r, dr, ddr, n, kind, params):
    t = param_grid(n)
    c, s = np.cos(t), np.sin(t)
    rr, r1, r2 = r(t), dr(t), ddr(t)
    pts = np.column_stack([rr * c, rr * s])
    d1 = np.column_stack([r1 * c - rr * s, r1 * s + rr * c])
    d2 = np.column_stack([(r2 - rr) * c - 2 * r1 * s, (r2 - rr) * s + 2 * r1 * c])
    return Curve(pts, d1, d2, kind=kind, params=params)


def _flower(n):
    return _polar_curve(lambda t: 1 - 0.1 * np.cos(5 * t),
                        lambda t: 0.5 * np.sin(5 * t),
                        lambda t: 2.5 * np.cos(5 * t), n, "flower", {})


def _peanut(n):
    def r(t):
        return np.sqrt(np.cos(t) ** 2 + 0.25 * np.sin(t) ** 2)

    # r^2 = 0.625 + 0.375 cos 2t
    def dr(t):
        return -0.375 * np.sin(2 * t) / r(t)

    def ddr(t):
        return (-0.75 * np.cos(2 * t) - dr(t) ** 2) / r(t)

    return _polar_curve(r, dr, ddr, n, "peanut", {})


def _kite(n):
    t = param_grid(n)
    pts = np.column_stack([0.6 * np.cos(t) + 0.39 * np.cos(2 * t) + 0.01, 0.9 * np.sin(t)])
    d1 = np.column_stack([-0.6 * np.sin(t) - 0.78 * np.sin(2 * t), 0.9 * np.cos(t)])
    d2 = np.column_stack([-0.6 * np.cos(t) - 1.56 * np.cos(2 * t), -0.9 * np.sin(t)])
    return Curve(pts, d1, d2, kind="kite", params={})


def _smoothstep(u):
    return u**3 * (10 - 15 * u + 6 * u**2)


def _smoothstep_integral(u):
    return u**4 * (2.5 - 3 * u + u**2)


def _rounded_polygon(k: int, n: int, corner_radius: float = 0.08) -> Curve:
    """Regular k-gon inscribed in the unit circle with C2-rounded corners.

    The tangent angle is built from a curvature profile that is zero along
    the edges and ramps (quintic smoothstep) up to ``1/corner_radius`` at
    each corner, so every corner turns by exactly 2*pi/k.
    """
    turn = 2 * np.pi / k
    rho = corner_radius
    arc = rho * turn            # ramp + plateau lengths must sum to this
    ramp = 0.3 * arc
    plateau = arc - ramp
    corner_len = 2 * ramp + plateau
    kmax = 1.0 / rho

    def corner_angle(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        a = s < ramp
        out[a] = kmax * ramp * _smoothstep_integral(s[a] / ramp)
        b = (s >= ramp) & (s < ramp + plateau)
        out[b] = kmax * (0.5 * ramp + (s[b] - ramp))
        c = s >= ramp + plateau
        u = (corner_len - s[c]) / ramp
        out[c] = turn - kmax * ramp * _smoothstep_integral(u)
        return out

    def corner_curv(s):
        s = np.asarray(s, dtype=float)
        out = np.full_like(s, kmax)
        a = s < ramp
        out[a] = kmax * _smoothstep(s[a] / ramp)
        c = s >= ramp + plateau
        out[c] = kmax * _smoothstep((corner_len - s[c]) / ramp)
        return out

    gx, gw = np.polynomial.legendre.leggauss(24)

    def integrate_dir(s0, s1, angle):
        mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
        ss = mid + half * gx
        th = angle(ss)
        return half * np.array([gw @ np.cos(th), gw @ np.sin(th)])

    # corner end point relative to its start, heading initially along +x
    pieces = np.linspace(0.0, corner_len, 9)
    e = sum(integrate_dir(a, b, corner_angle) for a, b in zip(pieces[:-1], pieces[1:]))
    # distance from corner start to the virtual vertex of the two edge lines
    v = e[0] - e[1] / np.tan(turn)
    edge = 2 * np.sin(np.pi / k) - 2 * v
    if edge <= 0:
        raise GeometryError("corner radius too large for polygon")
    unit = edge + corner_len
    total = k * unit

    t = param_grid(n)
    s_all = total * t / (2 * np.pi)
    unit_idx = np.floor(s_all / unit).astype(int)
    local = s_all - unit_idx * unit
    in_corner = local > edge
    base_heading = turn * unit_idx

    def heading(sv):
        sv = np.atleast_1d(np.asarray(sv, dtype=float))
        j = np.floor(sv / unit)
        loc = sv - j * unit
        th = turn * j
        cm = loc > edge
        th = th + np.where(cm, corner_angle(np.where(cm, loc - edge, 0.0)), 0.0)
        return th

    theta = base_heading + np.where(in_corner, corner_angle(np.where(in_corner, local - edge, 0.0)), 0.0)
    curv = np.where(in_corner, corner_curv(np.where(in_corner, local - edge, 0.0)), 0.0)

    # positions by integrating the unit tangent between consecutive nodes
    steps = np.zeros((n, 2))
    bounds = np.append(s_all, total)
    for i in range(n):
        # split at edge/corner junctions so each panel is smooth
        a, b = bounds[i], bounds[i + 1]
        j0 = np.floor(a / unit)
        cuts = [a]
        for off in (j0 * unit + edge, (j0 + 1) * unit, (j0 + 1) * unit + edge):
            if a < off < b:
                cuts.append(off)
        cuts.append(b)
        steps[i] = sum(integrate_dir(p, q, heading) for p, q in zip(cuts[:-1], cuts[1:]))
    pts = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)[:-1]])
    scale = total / (2 * np.pi)
    d1 = scale * np.column_stack([np.cos(theta), np.sin(theta)])
    d2 = scale**2 * curv[:, None] * np.column_stack([-np.sin(theta), np.cos(theta)])
    tmp = Curve(pts, d1, d2)
    pts = pts - tmp.centroid
    return Curve(pts, d1, d2, kind=f"polygon{k}", params={"k": k, "corner_radius": rho})


def make_named_shape(name: str, scale: float = 1.0, n: int = 256, k: int | None = None) -> Curve:
    """Shape corpus: flower, kite, peanut, or a rounded polygon (k = 3, 4, 5)."""
    n = _check_n(n)
    if scale <= 0:
        raise GeometryError(f"scale must be positive, got {scale}")
    name = name.lower()
    if name.startswith("polygon") and k is None and len(name) > 7:
        k = int(name.strip("polygon()"))
        name = "polygon"
    if name == "flower":
        c = _flower(n)
    elif name == "kite":
        c = _kite(n)
    elif name == "peanut":
        c = _peanut(n)
    elif name == "polygon":
        if k not in (3, 4, 5):
            raise GeometryError(f"polygon vertex count must be 3, 4 or 5, got {k}")
        c = _rounded_polygon(k, n, corner_radius=0.08)
    else:
        raise GeometryError(f"unknown shape {name!r}")
    if scale != 1.0:
        c = c.scaled(scale)
    return Curve(c.points, c.d1, c.d2, kind=c.kind, params={**c.params, "scale": float(scale)})


def shrink_conformal(curve: Curve, factor: float) -> Curve:
    """Similar copy scaled about the curve's area centroid."""
    if not 0 < factor < 1:
        raise GeometryError(f"shrink factor must lie in (0, 1), got {factor}")
    c = curve.centroid
    out = curve.scaled(factor, about=c)
    return Curve(out.points, out.d1, out.d2, kind=curve.kind,
                 params={**curve.params, "shrink": float(factor), "about": c.tolist()})


def elliptic_basis_density(n: int, parity: str, curve: Curve) -> np.ndarray:
    """cos(n eta)/gamma or sin(n eta)/gamma sampled on a confocal ellipse."""
    if curve.kind != "ellipse":
        raise GeometryError("curve is not a confocal ellipse")
    if n < 1:
        raise GeometryError(f"harmonic order must be >= 1, got {n}")
    coords = EllipticCoords(curve.params["l"])
    eta = curve.t
    gamma = coords.metric(curve.params["xi"], eta)
    if parity == "cos":
        return np.cos(n * eta) / gamma
    if parity == "sin":
        return np.sin(n * eta) / gamma
    raise GeometryError(f"parity must be 'cos' or 'sin', got {parity!r}")


def curve_from_spec(spec: dict, n: int | None = None) -> Curve:
    """Build a curve from its JSON description.

    ``{"kind": "circle", "center": [x, y], "radius": r}``,
    ``{"kind": "ellipse", "l": l, "xi": xi}``,
    ``{"kind": "flower"|"kite"|"peanut", "scale": s}``,
    ``{"kind": "polygon", "k": 3, "scale": s}``; each may carry ``"N"``,
    ``"shrink"`` (conformal factor) and ``"offset"``. An explicit ``n``
    wins over the document's ``"N"``; 256 nodes otherwise.
    """
    spec = dict(spec)
    kind = spec.get("kind")
    nn = int(n) if n is not None else int(spec.get("N", 256))
    if kind == "circle":
        c = make_circle(spec.get("center", (0.0, 0.0)), float(spec["radius"]), nn)
    elif kind == "ellipse":
        c = make_confocal_ellipse(float(spec.get("l", 1.0)), float(spec["xi"]), nn)
    elif kind in ("flower", "kite", "peanut"):
        c = make_named_shape(kind, float(spec.get("scale", 1.0)), nn)
    elif kind == "polygon":
        c = make_named_shape("polygon", float(spec.get("scale", 1.0)), nn, k=int(spec["k"]))
    else:
        raise GeometryError(f"unknown geometry kind {kind!r}")
    if "shrink" in spec:
        c = shrink_conformal(c, float(spec["shrink"]))
    if "offset" in spec:
        c = c.translated(spec["offset"])
    return c
