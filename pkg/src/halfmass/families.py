"""Bundled example data sets on the half-space chart.

Every family is analytic (closed-form components with exact first and second
derivatives) so that grid runs can be compared against exact values.

* ``flat``: Euclidean metric, zero extrinsic curvature.
* ``schwarzschild``: time-symmetric isotropic slice, conformal factor
  ``u = 1 + m / (2 r^{n-2})``.  Scalar-flat, boundary plane totally geodesic.
* ``conformal``: conformally flat metric whose harmonic conformal factor is
  centered below the boundary plane, so the data remain vacuum
  (mu = 0, J = 0) while the boundary becomes strictly mean-convex and the
  off-axis center breaks rotational symmetry.
* ``synthetic-momentum``: flat metric with an extrinsic curvature
  ``p = a / r^q`` for a constant symmetric matrix ``a`` (default decay
  exponent q = n-1).  At the default decay its momentum flux integrals have
  closed forms, which makes it the reference family for charge checks; it
  does not satisfy the interior energy condition far out, and the catalog
  records that.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .geometry import AnalyticSym2Field, Chart, InitialDataSet

DEFAULT_MOMENTUM_MATRIX = np.array([
    [0.3, 0.1, 0.2],
    [0.1, -0.2, 0.4],
    [0.2, 0.4, 0.1],
])


@dataclass(frozen=True)
class FamilyRecord:
    """Catalog entry: data set plus which energy conditions it advertises."""

    data: InitialDataSet
    interior_dec: bool
    boundary_dec: bool
    params: dict


def _zero_sym2(n):
    def fn(x):
        return np.zeros(x.shape[:-1] + (n, n))

    def dfn(x):
        return np.zeros(x.shape[:-1] + (n, n, n))

    def d2fn(x):
        return np.zeros(x.shape[:-1] + (n, n, n, n))

    return AnalyticSym2Field(fn, dfn, d2fn)


def _conformally_flat(n, u, du, d2u):
    """g = u^{4/(n-2)} delta from a conformal factor and its derivatives."""
    kappa = 4.0 / (n - 2)
    eye = np.eye(n)

    def w(x):
        return u(x) ** kappa

    def dw(x):
        return kappa * u(x)[..., None] ** (kappa - 1) * du(x)

    def d2w(x):
        uu = u(x)[..., None, None]
        duu = du(x)
        return (kappa * (kappa - 1) * uu ** (kappa - 2)
                * duu[..., :, None] * duu[..., None, :]
                + kappa * uu ** (kappa - 1) * d2u(x))

    def fn(x):
        return w(x)[..., None, None] * eye

    def dfn(x):
        return dw(x)[..., None, None, :] * eye[:, :, None]

    def d2fn(x):
        return d2w(x)[..., None, None, :, :] * eye[:, :, None, None]

    return AnalyticSym2Field(fn, dfn, d2fn)


def _harmonic_bump(n, mass, center):
    """u = 1 + (mass/2) |x - center|^{2-n} and its exact derivatives."""
    center = np.asarray(center, dtype=float)
    c = mass / 2.0
    k = 2 - n

    def u(x):
        r = np.linalg.norm(x - center, axis=-1)
        return 1.0 + c * r ** k

    def du(x):
        d = x - center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        return c * k * d * r ** (k - 2)

    def d2u(x):
        d = x - center
        r = np.linalg.norm(d, axis=-1, keepdims=True)[..., None]
        eye = np.eye(n)
        di = d[..., :, None]
        dj = d[..., None, :]
        return c * k * (eye * r ** (k - 2) + (k - 2) * di * dj * r ** (k - 4))

    return u, du, d2u


def flat(n: int = 3) -> FamilyRecord:
    chart = Chart(n)
    eye = np.eye(n)

    def fn(x):
        out = np.zeros(x.shape[:-1] + (n, n))
        out[...] = eye
        return out

    gfield = AnalyticSym2Field(
        fn,
        lambda x: np.zeros(x.shape[:-1] + (n, n, n)),
        lambda x: np.zeros(x.shape[:-1] + (n, n, n, n)),
    )
    data = InitialDataSet(chart, gfield, _zero_sym2(n), decay_order=n - 2,
                          name="flat")
    return FamilyRecord(data, interior_dec=True, boundary_dec=True,
                        params={"n": n})


def schwarzschild(n: int = 3, mass: float = 1.0) -> FamilyRecord:
    if mass <= 0:
        raise DomainError("mass must be positive")
    u, du, d2u = _harmonic_bump(n, mass, np.zeros(n))
    gfield = _conformally_flat(n, u, du, d2u)
    data = InitialDataSet(Chart(n), gfield, _zero_sym2(n), decay_order=n - 2,
                          name="schwarzschild")
    return FamilyRecord(data, interior_dec=True, boundary_dec=True,
                        params={"n": n, "mass": mass})


def conformal(n: int = 3, amplitude: float = 0.8, depth: float = 1.5,
              offset: float = 1.0) -> FamilyRecord:
    """Conformal factor centered at distance ``depth`` below the boundary.

    The center sits outside the chart, so u is harmonic on all of it and the
    data are vacuum; ``offset`` shifts the center along the first boundary
    coordinate to break rotational symmetry.
    """
    if amplitude <= 0 or depth <= 0:
        raise DomainError("amplitude and depth must be positive")
    center = np.zeros(n)
    center[0] = offset
    center[-1] = -depth
    u, du, d2u = _harmonic_bump(n, amplitude, center)
    gfield = _conformally_flat(n, u, du, d2u)
    data = InitialDataSet(Chart(n), gfield, _zero_sym2(n), decay_order=n - 2,
                          name="conformal")
    return FamilyRecord(data, interior_dec=True, boundary_dec=True,
                        params={"n": n, "amplitude": amplitude,
                                "depth": depth, "offset": offset})


def synthetic_momentum(n: int = 3, matrix=None,
                       decay: Optional[float] = None) -> FamilyRecord:
    if matrix is None:
        if n != 3:
            raise DomainError("pass an explicit matrix for n != 3")
        matrix = DEFAULT_MOMENTUM_MATRIX
    a = np.asarray(matrix, dtype=float)
    if a.shape != (n, n) or not np.allclose(a, a.T):
        raise DomainError(f"momentum matrix must be symmetric {n}x{n}")
    if decay is None:
        decay = n - 1
    if decay < n - 2:
        raise DomainError("decay exponent below the chargeable range")

    k = -float(decay)

    def pfn(x):
        r = np.linalg.norm(x, axis=-1)
        return r[..., None, None] ** k * a

    def dpfn(x):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        fac = k * x * r ** (k - 2)
        return a[:, :, None] * fac[..., None, None, :]

    flat_rec = flat(n)
    pfield = AnalyticSym2Field(pfn, dpfn)
    data = InitialDataSet(Chart(n), flat_rec.data.metric, pfield,
                          decay_order=n - 2, name="synthetic-momentum")
    # interior dominance fails at large radius: mu ~ r^{-2(n-1)} from |p|^2
    # can never dominate |J| ~ r^{-n}
    return FamilyRecord(data, interior_dec=False, boundary_dec=False,
                        params={"n": n, "matrix": a.tolist(),
                                "decay": float(decay)})


_BUILDERS = {
    "flat": flat,
    "schwarzschild": schwarzschild,
    "conformal": conformal,
    "synthetic-momentum": synthetic_momentum,
}


def family_names():
    return sorted(_BUILDERS)


def make_family(name: str, **kwargs) -> FamilyRecord:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise DomainError(
            f"unknown family {name!r}; known: {', '.join(family_names())}"
        ) from None
    return builder(**kwargs)
