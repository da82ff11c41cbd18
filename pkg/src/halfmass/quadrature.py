"""Polynomial-exact quadrature on half spheres and their equatorial corners.

The charge integrals live on coordinate half spheres

    S+_r = { |x| = r, x_n >= 0 }

and on the corner spheres S_r = { |x| = r, x_n = 0 } where the half sphere
meets the boundary plane.  Writing x = r (sqrt(1 - t^2) w, t) with t in [0,1]
and w on the unit (n-2)-sphere, the surface measure factorizes as

    dsigma = r^{n-1} (1 - t^2)^{(n-3)/2} dt dw,

so a product rule needs a Gauss rule for the weight (1 - t^2)^beta on [0, 1]
(beta half-integer when n is even) and a sphere rule one dimension down.
The t-rule is built by a discretized Stieltjes run on a fine Gauss-Jacobi
auxiliary rule followed by the Golub-Welsch eigenvalue step, which covers
integer and half-integer beta with one code path; the sphere factor recurses
down to the uniform trapezoid rule on the circle.  The resulting product rule
integrates every polynomial up to the requested total degree exactly (up to
roundoff), which the tests pin against closed-form Gamma-function moments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_jacobi

from .errors import DomainError


@dataclass(frozen=True)
class SurfaceRule:
    """Nodes, weights and Euclidean unit normals of a surface rule."""

    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    radius: float

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values)))


def _gauss_for_interval_weight(npts: int, beta: float):
    """Gauss rule for the weight (1 - t^2)^beta on [0, 1].

    Discretized Stieltjes: inner products against the weight are evaluated on
    an auxiliary Gauss-Jacobi rule (exponent beta at the t = 1 endpoint, the
    smooth remainder folded into the weights), then the three-term recurrence
    coefficients feed a symmetric tridiagonal eigenproblem whose eigenvalues
    and first eigenvector components are the nodes and weights.
    """
    if npts < 1:
        raise DomainError("need at least one quadrature node")
    aux = max(200, 4 * npts)
    u, w = roots_jacobi(aux, beta, 0.0)
    t = 0.5 * (u + 1.0)
    wt = w * ((3.0 + u) / 2.0) ** beta * 0.5 ** (beta + 1.0)

    mass = float(wt.sum())
    alpha = np.empty(npts)
    offdiag = np.empty(max(npts - 1, 0))
    p_prev = np.zeros_like(t)
    p_cur = np.ones_like(t) / np.sqrt(mass)
    for k in range(npts):
        alpha[k] = float(np.sum(wt * t * p_cur * p_cur))
        if k + 1 == npts:
            break
        q = (t - alpha[k]) * p_cur
        if k > 0:
            q -= offdiag[k - 1] * p_prev
        nrm = float(np.sqrt(np.sum(wt * q * q)))
        offdiag[k] = nrm
        p_prev, p_cur = p_cur, q / nrm
    nodes, vecs = eigh_tridiagonal(alpha, offdiag)
    weights = mass * vecs[0, :] ** 2
    return nodes, weights


def sphere_rule(m: int, degree: int):
    """Nodes and weights on the unit m-sphere, exact to the given degree.

    Returns points of shape (N, m+1).  The circle uses the uniform rule;
    higher spheres peel off the last coordinate with a Gauss-Jacobi rule for
    the weight (1 - s^2)^{(m-2)/2} on [-1, 1] and recurse.
    """
    if degree < 0:
        raise DomainError("degree must be nonnegative")
    if m == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 1:
        k = degree + 1
        ang = 2.0 * np.pi * np.arange(k) / k
        pts = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return pts, np.full(k, 2.0 * np.pi / k)
    beta = 0.5 * (m - 2)
    kt = max(1, (degree + 2) // 2)
    s, ws = roots_jacobi(kt, beta, beta)
    sub_pts, sub_w = sphere_rule(m - 1, degree)
    sin_s = np.sqrt(np.maximum(0.0, 1.0 - s ** 2))
    pts = np.concatenate([
        sin_s[:, None, None] * sub_pts[None, :, :],
        np.broadcast_to(s[:, None, None], (kt, len(sub_w), 1)),
    ], axis=-1).reshape(-1, m + 1)
    w = (ws[:, None] * sub_w[None, :]).reshape(-1)
    return pts, w


def half_sphere_rule(n: int, radius: float, degree: int = 24) -> SurfaceRule:
    """Product rule on the half sphere of the given radius, x_n >= 0 side."""
    if n < 3:
        raise DomainError("half-sphere rule needs n >= 3")
    if radius <= 0:
        raise DomainError("radius must be positive")
    beta = 0.5 * (n - 3)
    kt = max(1, (degree + 2) // 2)
    t, wt = _gauss_for_interval_weight(kt, beta)
    sub_pts, sub_w = sphere_rule(n - 2, degree)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - t ** 2))
    normals = np.concatenate([
        sin_t[:, None, None] * sub_pts[None, :, :],
        np.broadcast_to(t[:, None, None], (kt, len(sub_w), 1)),
    ], axis=-1).reshape(-1, n)
    weights = (wt[:, None] * sub_w[None, :]).reshape(-1) * radius ** (n - 1)
    return SurfaceRule(points=radius * normals, weights=weights,
                       normals=normals, radius=float(radius))


def boundary_sphere_rule(n: int, radius: float, degree: int = 24) -> SurfaceRule:
    """Rule on the corner sphere {|x| = r, x_n = 0}; normals are in-plane radial."""
    if n < 3:
        raise DomainError("corner rule needs n >= 3")
    sub_pts, sub_w = sphere_rule(n - 2, degree)
    pts = np.concatenate([sub_pts, np.zeros((len(sub_w), 1))], axis=-1)
    weights = sub_w * radius ** (n - 2)
    return SurfaceRule(points=radius * pts, weights=weights, normals=pts,
                       radius=float(radius))


def gauss_legendre_box(bounds, npts):
    """Tensor-product Gauss-Legendre nodes/weights over a rectangular box.

    ``bounds`` is a sequence of (lo, hi) pairs; ``npts`` an int or per-axis
    sequence.  Returns points of shape (N, dim) and weights of shape (N,).
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    dim = len(bounds)
    if np.isscalar(npts):
        npts = [int(npts)] * dim
    axes, wts = [], []
    for (lo, hi), k in zip(bounds, npts):
        u, w = np.polynomial.legendre.leggauss(int(k))
        axes.append(0.5 * (hi - lo) * u + 0.5 * (hi + lo))
        wts.append(0.5 * (hi - lo) * w)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wgrid = wts[0]
    for w in wts[1:]:
        wgrid = np.multiply.outer(wgrid, w)
    return pts, wgrid.ravel()
