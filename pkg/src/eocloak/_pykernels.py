"""Pure-numpy kernels; reference implementation and import-time fallback."""
import numpy as np

INV2PI = 0.5 / np.pi


def log_remainder(points, speed, t):
    """ln|x_i - x_j| - 0.5*ln(4 sin^2((t_i - t_j)/2)), diagonal ln|x'(t_i)|."""
    n = len(points)
    d = points[:, None, :] - points[None, :, :]
    r2 = (d**2).sum(-1)
    s2 = 4.0 * np.sin(0.5 * (t[:, None] - t[None, :])) ** 2
    np.fill_diagonal(r2, 1.0)
    np.fill_diagonal(s2, 1.0)
    out = 0.5 * np.log(r2 / s2)
    out[np.arange(n), np.arange(n)] = np.log(speed)
    return out


def normal_derivative(targets, tnormals, sources, sweights):
    """(1/2pi) <x_i - y_j, nu_i> / |x_i - y_j|^2 * w_j for distinct curves."""
    d = targets[:, None, :] - sources[None, :, :]
    r2 = (d**2).sum(-1)
    dn = (d * tnormals[:, None, :]).sum(-1)
    return INV2PI * dn / r2 * sweights[None, :]


def np_adjoint(points, normals, curvature, weights):
    """Self-interaction normal derivative matrix with the curvature diagonal."""
    n = len(points)
    d = points[:, None, :] - points[None, :, :]
    r2 = (d**2).sum(-1)
    dn = (d * normals[:, None, :]).sum(-1)
    idx = np.arange(n)
    r2[idx, idx] = 1.0
    out = INV2PI * dn / r2 * weights[None, :]
    out[idx, idx] = 0.25 / np.pi * curvature * weights
    return out


def potential_matrices(targets, sources, sweights):
    """Value and gradient matrices of the single layer at off-curve targets."""
    d = targets[:, None, :] - sources[None, :, :]
    r2 = (d**2).sum(-1)
    w = INV2PI * sweights[None, :]
    # a target sitting on a node gives inf/nan, as the compiled kernel does
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 0.5 * np.log(r2) * w
        gx = d[..., 0] / r2 * w
        gy = d[..., 1] / r2 * w
    return val, gx, gy


def potential_apply(targets, sources, wdens, chunk=2048):
    """Apply the single layer with weighted density ``wdens`` at targets."""
    m = len(targets)
    val = np.empty(m)
    gx = np.empty(m)
    gy = np.empty(m)
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        d = targets[a:b, None, :] - sources[None, :, :]
        r2 = (d**2).sum(-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            val[a:b] = 0.5 * np.log(r2) @ wdens
            gx[a:b] = (d[..., 0] / r2) @ wdens
            gy[a:b] = (d[..., 1] / r2) @ wdens
    return INV2PI * val, INV2PI * gx, INV2PI * gy
