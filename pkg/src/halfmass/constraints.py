"""Constraint densities and pointwise dominant-energy-condition checks.

The interior quantities are the energy density

    mu = (R + (tr_g p)^2 - |p|_g^2) / 2

and the current density J = div_g p - d(tr_g p), a one-form.  The interior
condition asks mu >= |J|_g pointwise; the boundary conditions ask the mean
curvature of the boundary plane (outward normal convention) to dominate
combinations of the boundary trace of p and the tangential part of p
contracted with the normal, with a fixed tilt angle theta or a variable
contact angle gamma.

All checks are sampling-based: they evaluate margins on a caller-supplied
sample set and report the worst one.  They certify nothing globally.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import geometry
from .errors import DegenerateAngleError, DomainError

_ANALYTIC_TOL = 1e-9
_GRID_TOL_FACTOR = 10.0


def _default_tol(data: geometry.InitialDataSet) -> float:
    if data.backend == "grid":
        return _GRID_TOL_FACTOR * data.chart.patch.h ** 2
    return _ANALYTIC_TOL


def trace_p(data: geometry.InitialDataSet, x):
    return np.einsum("...ij,...ij->...", data.ginv(x), data.p(x))


def p_norm_squared(data: geometry.InitialDataSet, x):
    ginv = data.ginv(x)
    p = data.p(x)
    return np.einsum("...ik,...jl,...ij,...kl->...", ginv, ginv, p, p)


def energy_density(data: geometry.InitialDataSet, x):
    """mu = (R + (tr_g p)^2 - |p|_g^2) / 2."""
    r = geometry.scalar_curvature(data, x)
    tr = trace_p(data, x)
    return 0.5 * (r + tr * tr - p_norm_squared(data, x))


def current_density(data: geometry.InitialDataSet, x) -> np.ndarray:
    """J_i = g^{jk} nabla_k p_{ji} - d_i (tr_g p), as a covector."""
    ginv = data.ginv(x)
    p = data.p(x)
    dp = data.dp(x)
    dg = data.dg(x)
    gam = geometry.christoffel(data, x)
    # nabla_k p_{ji} = d_k p_{ji} - Gamma^l_{kj} p_{li} - Gamma^l_{ki} p_{jl}
    covp = (dp
            - np.einsum("...lkj,...li->...jik", gam, p)
            - np.einsum("...lki,...jl->...jik", gam, p))
    div = np.einsum("...jk,...jik->...i", ginv, covp)
    # d_i tr_g p = (d_i g^{jk}) p_jk + g^{jk} d_i p_jk
    dginv = -np.einsum("...ja,...abi,...bk->...jki", ginv, dg, ginv)
    dtr = (np.einsum("...jki,...jk->...i", dginv, p)
           + np.einsum("...jk,...jki->...i", ginv, dp))
    return div - dtr


def current_norm(data: geometry.InitialDataSet, x):
    j = current_density(data, x)
    sq = np.einsum("...i,...ij,...j->...", j, data.ginv(x), j)
    return np.sqrt(np.maximum(0.0, sq))


# ---------------------------------------------------------------------------
# reports


@dataclass
class DecReport:
    """Outcome of a sampled dominant-energy check."""

    kind: str
    worst_margin: float
    worst_point: np.ndarray
    rows: list
    tol: float
    violation: bool
    angle: Optional[float] = None
    sign: Optional[int] = None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "worst_margin": self.worst_margin,
            "worst_point": [float(v) for v in np.atleast_1d(self.worst_point)],
            "tol": self.tol,
            "violation": self.violation,
            "rows": self.rows,
        }
        if self.angle is not None:
            out["angle"] = self.angle
        if self.sign is not None:
            out["sign"] = self.sign
        return out


def _assemble(kind, rows, tol, angle=None, sign=None) -> DecReport:
    if not rows:
        raise DomainError("empty sample set")
    worst = min(rows, key=lambda r: r["margin"])
    return DecReport(
        kind=kind,
        worst_margin=float(worst["margin"]),
        worst_point=np.asarray(worst["x"]),
        rows=rows,
        tol=tol,
        violation=bool(worst["margin"] < -tol),
        angle=angle,
        sign=sign,
    )


def check_interior_dec(data: geometry.InitialDataSet, samples,
                       tol: Optional[float] = None) -> DecReport:
    """Margin mu - |J|_g over interior samples."""
    tol = _default_tol(data) if tol is None else float(tol)
    rows = []
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        data.chart.require_point(x)
        mu = float(energy_density(data, x))
        jn = float(current_norm(data, x))
        rows.append({"x": [float(v) for v in x], "mu": mu, "current_norm": jn,
                     "margin": mu - jn})
    return _assemble("interior", rows, tol)


def check_tilted_boundary_dec(data: geometry.InitialDataSet, theta: float,
                              sign: int, samples,
                              tol: Optional[float] = None) -> DecReport:
    """Margin H + sign cos(theta) tr_b p - sin(theta) |p(eta,.)^T| on the boundary."""
    if not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise DomainError(f"tilt angle must lie in [0, pi/2], got {theta}")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    tol = _default_tol(data) if tol is None else float(tol)
    rows = []
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        bg = geometry.boundary_geometry(data, x)
        margin = (bg.mean_curvature
                  + sign * np.cos(theta) * bg.boundary_trace_p
                  - np.sin(theta) * bg.p_eta_tangent_norm)
        rows.append({
            "x": [float(v) for v in x],
            "mean_curvature": bg.mean_curvature,
            "boundary_trace_p": bg.boundary_trace_p,
            "tangential_norm": bg.p_eta_tangent_norm,
            "margin": float(margin),
        })
    return _assemble("tilted-boundary", rows, tol, angle=float(theta), sign=sign)


GammaField = Union[float, Callable]


def _eval_gamma(gamma: GammaField, x, n: int):
    """Contact angle and its n-1 tangential derivatives at a boundary point."""
    if callable(gamma):
        out = gamma(x)
        if isinstance(out, tuple):
            val, grad = out
            return float(val), np.asarray(grad, dtype=float)
        return float(out), np.zeros(n - 1)
    return float(gamma), np.zeros(n - 1)


def check_capillary_dec(data: geometry.InitialDataSet, gamma: GammaField,
                        samples, tol: Optional[float] = None) -> DecReport:
    """Variable-contact-angle boundary margin.

    ``gamma`` is a constant, or a callable returning either the angle or a
    pair (angle, tangential gradient components).  The margin is

        H + cos(gamma) tr_b p - sin(gamma) |p(eta,.)^T - (1/sin gamma) dgamma|

    with the norm taken in the induced boundary metric.  The angle must stay
    inside (0, pi) so that sin(gamma) > 0.
    """
    tol = _default_tol(data) if tol is None else float(tol)
    rows = []
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        bg = geometry.boundary_geometry(data, x)
        val, grad = _eval_gamma(gamma, x, data.n)
        sg = np.sin(val)
        if not 0.0 < val < np.pi or sg < 1e-12:
            raise DegenerateAngleError(
                f"contact angle {val} at {x} leaves (0, pi)")
        w = bg.p_eta_tangent - grad / sg
        wnorm = geometry.tangential_covector_norm(bg.induced_inverse, w)
        margin = (bg.mean_curvature + np.cos(val) * bg.boundary_trace_p
                  - sg * wnorm)
        rows.append({
            "x": [float(v) for v in x],
            "gamma": float(val),
            "mean_curvature": bg.mean_curvature,
            "boundary_trace_p": bg.boundary_trace_p,
            "tangential_norm": float(wnorm),
            "margin": float(margin),
        })
    return _assemble("capillary", rows, tol)


# ---------------------------------------------------------------------------
# Hamiltonian densities


def hamiltonian_densities(data: geometry.InitialDataSet, lapse, shift, x,
                          boundary: bool = False):
    """Integrands of the constraint Hamiltonian for a lapse-shift pair.

    ``lapse`` maps points to scalars, ``shift`` maps points to spatial
    vectors (n components; anything else is rejected).  Returns the interior
    integrand N mu + 2 J(X); with ``boundary=True`` the point must lie on the
    boundary plane and the boundary integrand

        2 [ N H - p(X, eta) + tr_g p g(X, eta) ]

    is returned as well.
    """
    x = np.asarray(x, dtype=float)
    nval = float(lapse(x))
    xvec = np.asarray(shift(x), dtype=float)
    if xvec.shape != (data.n,):
        raise DomainError(
            f"shift must be tangent to the slice: expected {data.n} components")
    j = current_density(data, x)
    interior = float(nval * energy_density(data, x) + 2.0 * (j @ xvec))
    if not boundary:
        return interior
    bg = geometry.boundary_geometry(data, x)
    g = data.g(x)
    p = data.p(x)
    bdry = 2.0 * (nval * bg.mean_curvature
                  - float(xvec @ p @ bg.eta)
                  + float(trace_p(data, x)) * float(xvec @ g @ bg.eta))
    return interior, bdry


def tilted_shift(data: geometry.InitialDataSet, theta: float, tau_index: int,
                 x) -> np.ndarray:
    """Unit shift cos(theta) eta + sin(theta) tau at a boundary point.

    ``tau`` is the g-normalized coordinate direction ``tau_index`` projected
    to the boundary plane (it must not be the normal axis).
    """
    if tau_index == data.n - 1:
        raise DomainError("tangent direction must lie along the boundary")
    bg = geometry.boundary_geometry(data, x)
    g = data.g(x)
    tau = np.zeros(data.n)
    tau[tau_index] = 1.0
    # make tau g-orthogonal to eta, then normalize
    tau = tau - float(tau @ g @ bg.eta) * bg.eta
    tau = tau / np.sqrt(float(tau @ g @ tau))
    return np.cos(theta) * bg.eta + np.sin(theta) * tau
