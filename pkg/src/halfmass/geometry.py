"""Tensor calculus for initial data sets on a half-space chart.

The chart is the upper half space ``{x_n >= 0}`` in R^n (n >= 3) with the
closed unit ball removed; all sampling stays outside the slightly larger
radius ``EXCISION_RADIUS``.  The boundary plane is ``{x_n = 0}`` and the
*outward* unit normal of the boundary points toward negative ``x_n``.

Index conventions used throughout the package:

* coordinates carry 0-based axes, so the boundary-normal axis is ``n - 1``;
* metric derivative arrays put the derivative indices last,
  ``dg[..., i, j, k] = d_k g_ij`` and ``d2g[..., i, j, k, l] = d_k d_l g_ij``;
* frame matrices store orthonormal vectors as columns, ``frame[:, a]`` being
  the a-th frame vector, so ``frame.T @ g @ frame = I``;
* spin coefficients are ``omega[i, a, b] = g(nabla_{d_i} e_a, e_b)`` with a
  coordinate direction ``i`` and frame labels ``a, b``.

Two sampling backends are supported.  Analytic data sets carry closed-form
component functions together with their first and second partials.  Grid data
sets carry node samples on a uniform patch and differentiate with the
second-order stencils from :mod:`halfmass.stencils`; they can only be
evaluated at grid nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import stencils
from .errors import DegenerateMetricError, DomainError

EXCISION_RADIUS = 1.25
_ON_GRID_TOL = 1e-9


# ---------------------------------------------------------------------------
# charts and patches


@dataclass(frozen=True)
class GridPatch:
    """Uniform sampling box: ``origin + h * index`` for index in ``shape``."""

    origin: tuple
    shape: tuple
    h: float

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``(*shape, n)``."""
        axes = [o + self.h * np.arange(s) for o, s in zip(self.origin, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def node_index(self, x) -> tuple:
        """Index of the node(s) at ``x``; DomainError when off-grid.

        Accepts a single point or a batch shaped ``(..., n)``; the result is
        a tuple of index arrays directly usable for fancy indexing into node
        tables.
        """
        rel = (np.asarray(x, dtype=float) - np.asarray(self.origin)) / self.h
        idx = np.rint(rel)
        if np.max(np.abs(rel - idx)) > _ON_GRID_TOL:
            raise DomainError(f"point {x} is not a grid node of {self}")
        idx = idx.astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.shape)):
            raise DomainError(f"point {x} lies outside the grid patch")
        if idx.ndim == 1:
            return tuple(int(i) for i in idx)
        return tuple(np.moveaxis(idx, -1, 0))

    def coords(self, idx) -> np.ndarray:
        return np.asarray(self.origin) + self.h * np.asarray(idx, dtype=float)


@dataclass(frozen=True)
class Chart:
    """Half-space chart descriptor: dimension, backend, optional grid patch."""

    n: int
    backend: str = "analytic"  # "analytic" | "grid"
    patch: Optional[GridPatch] = None
    excision_radius: float = EXCISION_RADIUS

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"chart dimension must be >= 3, got {self.n}")
        if self.backend not in ("analytic", "grid"):
            raise DomainError(f"unknown sampling backend {self.backend!r}")
        if self.backend == "grid" and self.patch is None:
            raise DomainError("grid backend requires a GridPatch")

    def require_point(self, x) -> None:
        """Check that every supplied point lies in the sampled chart domain."""
        pts = np.asarray(x, dtype=float)
        if pts.shape[-1] != self.n:
            raise DomainError(
                f"expected points in R^{self.n}, got shape {pts.shape}"
            )
        if np.any(pts[..., -1] < -1e-12):
            raise DomainError("point below the boundary plane x_n = 0")
        r = np.linalg.norm(pts, axis=-1)
        if np.any(r < self.excision_radius):
            raise DomainError(
                f"point inside the excised ball (|x| < {self.excision_radius})"
            )


# ---------------------------------------------------------------------------
# tensor-field backends


class AnalyticSym2Field:
    """Symmetric 2-tensor field given by closed-form components.

    Parameters
    ----------
    fn, dfn, d2fn : callables
        Vectorized maps taking points of shape ``(..., n)`` to component
        arrays of shape ``(..., n, n)``, ``(..., n, n, n)`` (derivative index
        last) and ``(..., n, n, n, n)``.  ``d2fn`` may be omitted for fields
        that are never differentiated twice (extrinsic curvature).
    """

    backend = "analytic"

    def __init__(self, fn, dfn, d2fn=None):
        self._fn = fn
        self._dfn = dfn
        self._d2fn = d2fn

    def value(self, x):
        return self._fn(np.asarray(x, dtype=float))

    def jacobian(self, x):
        return self._dfn(np.asarray(x, dtype=float))

    def hessian(self, x):
        if self._d2fn is None:
            raise DomainError("this field does not provide second derivatives")
        return self._d2fn(np.asarray(x, dtype=float))


class GridSym2Field:
    """Symmetric 2-tensor sampled on a uniform patch, stencil derivatives."""

    backend = "grid"

    def __init__(self, patch: GridPatch, values: np.ndarray):
        self.patch = patch
        self.values = np.asarray(values, dtype=float)
        if self.values.shape[: len(patch.shape)] != tuple(patch.shape):
            raise DomainError("sample array does not match the grid patch")
        self._jac = None
        self._hess = None

    @classmethod
    def sample(cls, patch: GridPatch, fn) -> "GridSym2Field":
        return cls(patch, fn(patch.nodes()))

    def _idx(self, x):
        return self.patch.node_index(x)

    def _jac_table(self) -> np.ndarray:
        # derivative tables are built once per field and reused; the whole-array
        # stencil sweep is much cheaper than per-node stencils when callers
        # evaluate at many nodes (residual maps, quadrature sweeps)
        if self._jac is None:
            n = len(self.patch.shape)
            h = self.patch.h
            self._jac = np.stack(
                [stencils.partial1(self.values, k, h) for k in range(n)],
                axis=-1,
            )
        return self._jac

    def _hess_table(self) -> np.ndarray:
        if self._hess is None:
            n = len(self.patch.shape)
            h = self.patch.h
            first = [stencils.partial1(self.values, k, h) for k in range(n)]
            out = np.empty(self.values.shape + (n, n))
            for k in range(n):
                out[..., k, k] = stencils.partial2(self.values, k, h)
                for l in range(k + 1, n):
                    mixed = stencils.partial1(first[l], k, h)
                    out[..., k, l] = mixed
                    out[..., l, k] = mixed
            self._hess = out
        return self._hess

    def value(self, x):
        return self.values[self._idx(x)]

    def jacobian(self, x):
        return self._jac_table()[self._idx(x)]

    def hessian(self, x):
        return self._hess_table()[self._idx(x)]


# ---------------------------------------------------------------------------
# initial data sets


class InitialDataSet:
    """A pair (g, p) on the half-space chart with decay metadata.

    ``metric`` and ``extrinsic`` are field backends (see above); ``decay_order``
    records the advertised fall-off rate q > (n-2)/2 of the family.
    """

    def __init__(self, chart: Chart, metric, extrinsic, decay_order: float,
                 name: str = "custom"):
        self.chart = chart
        self.metric = metric
        self.extrinsic = extrinsic
        self.decay_order = float(decay_order)
        self.name = name
        q_min = 0.5 * (chart.n - 2)
        if not self.decay_order > q_min:
            raise DomainError(
                f"decay order {decay_order} does not exceed (n-2)/2 = {q_min}"
            )

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def backend(self) -> str:
        return self.metric.backend

    def g(self, x):
        return self.metric.value(x)

    def dg(self, x):
        return self.metric.jacobian(x)

    def d2g(self, x):
        return self.metric.hessian(x)

    def p(self, x):
        return self.extrinsic.value(x)

    def dp(self, x):
        return self.extrinsic.jacobian(x)

    def ginv(self, x):
        return _inverse_metric(self.g(x), x)

    def to_grid(self, patch: GridPatch) -> "InitialDataSet":
        """Resample an analytic data set onto a uniform grid patch."""
        if self.backend != "analytic":
            raise DomainError("only analytic data sets can be resampled")
        chart = Chart(self.n, backend="grid", patch=patch,
                      excision_radius=self.chart.excision_radius)
        return InitialDataSet(
            chart,
            GridSym2Field.sample(patch, self.metric.value),
            GridSym2Field.sample(patch, self.extrinsic.value),
            self.decay_order,
            name=self.name + "-grid",
        )


def _inverse_metric(g, x):
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"degenerate metric at {x}") from exc
    # reject indefinite or near-singular metrics up front
    det = np.linalg.det(g)
    if np.any(det <= 0) or not np.all(np.isfinite(ginv)):
        raise DegenerateMetricError(f"degenerate metric at {x}")
    return ginv


# ---------------------------------------------------------------------------
# curvature


def christoffel(data: InitialDataSet, x) -> np.ndarray:
    """Christoffel symbols, ``out[..., k, i, j] = Gamma^k_ij`` at ``x``."""
    g = data.g(x)
    dg = data.dg(x)
    ginv = _inverse_metric(g, x)
    return _christoffel_from(ginv, dg)


def _christoffel_from(ginv, dg):
    # T[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    t = (np.einsum("...jli->...lij", dg)
         + np.einsum("...ilj->...lij", dg)
         - np.einsum("...ijl->...lij", dg))
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, t)


def _christoffel_derivative(ginv, dg, d2g):
    """``out[..., k, i, j, m] = d_m Gamma^k_ij`` from metric derivatives."""
    t = (np.einsum("...jli->...lij", dg)
         + np.einsum("...ilj->...lij", dg)
         - np.einsum("...ijl->...lij", dg))
    # dT[l, i, j, m] = d_m T[l, i, j]
    dt = (np.einsum("...jlim->...lijm", d2g)
          + np.einsum("...iljm->...lijm", d2g)
          - np.einsum("...ijlm->...lijm", d2g))
    dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dg, ginv)
    return (0.5 * np.einsum("...klm,...lij->...kijm", dginv, t)
            + 0.5 * np.einsum("...kl,...lijm->...kijm", ginv, dt))


def ricci_tensor(data: InitialDataSet, x) -> np.ndarray:
    """Ricci tensor Ric_ij in the convention that gives R > 0 on round spheres."""
    g = data.g(x)
    dg = data.dg(x)
    d2g = data.d2g(x)
    ginv = _inverse_metric(g, x)
    gam = _christoffel_from(ginv, dg)
    dgam = _christoffel_derivative(ginv, dg, d2g)
    term1 = np.einsum("...kijk->...ij", dgam)
    term2 = np.einsum("...kkji->...ij", dgam)
    term3 = np.einsum("...kkl,...lij->...ij", gam, gam)
    term4 = np.einsum("...kil,...lkj->...ij", gam, gam)
    return term1 - term2 + term3 - term4


def scalar_curvature(data: InitialDataSet, x) -> np.ndarray:
    """Scalar curvature R = g^{ij} Ric_ij at ``x``."""
    ginv = _inverse_metric(data.g(x), x)
    return np.einsum("...ij,...ij->...", ginv, ricci_tensor(data, x))


# ---------------------------------------------------------------------------
# orthonormal frames and spin coefficients


@dataclass
class FramePacket:
    """Orthonormal frame with derivatives and spin coefficients at a point.

    ``frame[:, a]`` is the a-th frame vector; ``coframe[a, :]`` the dual
    covector; ``dframe[..., k, a, i] = d_i frame[k, a]``;
    ``omega[..., i, a, b] = g(nabla_{d_i} e_a, e_b)``, antisymmetric in (a, b).
    The frame comes from the Cholesky factorization ``g = L L^T`` with a
    positive diagonal, ``frame = inv(L)^T``, so the first n-1 frame vectors
    are tangent to the planes ``{x_n = const}`` and the last one points into
    the half space.
    """

    frame: np.ndarray
    coframe: np.ndarray
    dframe: np.ndarray
    omega: np.ndarray


def _cholesky(g, x):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"metric not positive definite at {x}") from exc


def _frame_derivative_analytic(lmat, frame, dg):
    """Differentiate frame = inv(L)^T through the Cholesky factorization."""
    linv = np.linalg.inv(lmat)
    # S_m = L^-1 (d_m g) L^-T; dL_m = L Phi(S_m)
    s = np.einsum("...ia,...abm,...jb->...ijm", linv, dg, linv)
    phi = np.tril(np.moveaxis(s, -1, 0), -1)
    n = lmat.shape[-1]
    diag = 0.5 * np.moveaxis(s, -1, 0)[..., np.arange(n), np.arange(n)]
    phi[..., np.arange(n), np.arange(n)] = diag
    dl = np.einsum("...ik,m...kj->...ijm", lmat, phi)
    # d frame = -frame dL^T frame
    return -np.einsum("...ka,...bam,...bi->...kim", frame, dl, frame)


def orthonormal_frame(data: InitialDataSet, x) -> FramePacket:
    """Deterministic orthonormal frame with spin coefficients at ``x``.

    Analytic data differentiates the Cholesky factor in closed form; grid
    data finite-differences the frames of neighbouring nodes, which keeps the
    same second-order accuracy as every other grid derivative.  Accepts
    batches of points shaped ``(..., n)``.
    """
    g = data.g(x)
    if data.backend == "analytic":
        lmat = _cholesky(g, x)
        frame = np.swapaxes(np.linalg.inv(lmat), -1, -2)
        dframe = _frame_derivative_analytic(lmat, frame, data.dg(x))
    else:
        frame_tab, dframe_tab = _grid_frame_tables(data)
        idx = data.chart.patch.node_index(x)
        frame = frame_tab[idx]
        dframe = dframe_tab[idx]
    gam = christoffel(data, x)
    omega = _spin_coefficients(g, gam, frame, dframe)
    return FramePacket(frame=frame, coframe=np.linalg.inv(frame),
                       dframe=dframe, omega=omega)


def _grid_frame_tables(data: InitialDataSet):
    """Node tables (frame, dframe) for grid data, built once and cached."""
    cached = getattr(data, "_frame_tables", None)
    if cached is None:
        patch = data.chart.patch
        lmat = np.linalg.cholesky(data.metric.values)
        frame = np.swapaxes(np.linalg.inv(lmat), -1, -2)
        dframe = np.stack(
            [stencils.partial1(frame, k, patch.h) for k in range(data.n)],
            axis=-1,
        )
        cached = (frame, dframe)
        data._frame_tables = cached
    return cached


def _spin_coefficients(g, gam, frame, dframe):
    # cov[k, a, i] = d_i e_a^k + Gamma^k_{i l} e_a^l
    cov = dframe + np.einsum("...kil,...la->...kai", gam, frame)
    omega = np.einsum("...km,...kai,...mb->...iab", g, cov, frame)
    return 0.5 * (omega - np.swapaxes(omega, -1, -2))


# ---------------------------------------------------------------------------
# boundary geometry


@dataclass
class BoundaryGeometry:
    """Outward-normal boundary data at a point of the plane ``{x_n = 0}``.

    ``eta`` is the outward g-unit normal (negative x_n component);
    ``second_fundamental[alpha, beta]`` uses coordinate indices along the
    plane with the sign convention h(u, v) = <nabla_u eta, v>; ``mean_curvature``
    is its trace in the induced metric.  ``p_eta_tangent`` holds the tangential
    components of the one-form p(eta, .) and ``p_eta_tangent_norm`` its norm in
    the induced metric.
    """

    eta: np.ndarray
    mean_curvature: float
    second_fundamental: np.ndarray
    boundary_trace_p: float
    p_eta_tangent: np.ndarray
    p_eta_tangent_norm: float
    induced_metric: np.ndarray
    induced_inverse: np.ndarray


def boundary_geometry(data: InitialDataSet, x) -> BoundaryGeometry:
    x = np.asarray(x, dtype=float)
    if abs(float(x[-1])) > 1e-10:
        raise DomainError(f"{x} is not on the boundary plane x_n = 0")
    data.chart.require_point(x)
    n = data.n
    g = data.g(x)
    ginv = _inverse_metric(g, x)
    p = data.p(x)

    eta = -ginv[:, n - 1] / np.sqrt(ginv[n - 1, n - 1])
    gam = christoffel(data, x)
    # h_ab = -Gamma^k_ab eta_k with eta_k = -delta_k^n / sqrt(g^nn)
    h = gam[n - 1, : n - 1, : n - 1] / np.sqrt(ginv[n - 1, n - 1])
    g_b = g[: n - 1, : n - 1]
    g_b_inv = np.linalg.inv(g_b)
    mean_curv = float(np.einsum("ab,ab->", g_b_inv, h))

    tr_g_p = float(np.einsum("ij,ij->", ginv, p))
    p_eta = p @ eta
    boundary_trace_p = tr_g_p - float(eta @ p @ eta)
    w = p_eta[: n - 1]
    norm = float(np.sqrt(max(0.0, w @ g_b_inv @ w)))
    return BoundaryGeometry(
        eta=eta,
        mean_curvature=mean_curv,
        second_fundamental=h,
        boundary_trace_p=boundary_trace_p,
        p_eta_tangent=w,
        p_eta_tangent_norm=norm,
        induced_metric=g_b,
        induced_inverse=g_b_inv,
    )


def tangential_covector_norm(g_b_inv: np.ndarray, w: np.ndarray) -> float:
    """Norm of a covector on the boundary plane in the induced metric."""
    return float(np.sqrt(max(0.0, w @ g_b_inv @ w)))


# ---------------------------------------------------------------------------
# chart motions


def transform_data(data: InitialDataSet, a_mat, shift=None) -> InitialDataSet:
    """Push an analytic data set forward along ``x -> A x + b``.

    ``A`` must be orthogonal and ``A x + b`` must preserve the half-space
    chart (rotations about the boundary-normal axis, translations along the
    boundary plane).  The returned data set satisfies
    ``g'(A x + b) = A g(x) A^T`` componentwise, i.e. it is the same geometry
    presented in moved coordinates.
    """
    if data.backend != "analytic":
        raise DomainError("transform_data needs an analytic data set")
    n = data.n
    a_mat = np.asarray(a_mat, dtype=float)
    b = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
    if a_mat.shape != (n, n):
        raise DomainError(f"expected a {n}x{n} matrix")
    if not np.allclose(a_mat @ a_mat.T, np.eye(n), atol=1e-12):
        raise DomainError("transform matrix must be orthogonal")

    def pull(x):
        return (np.asarray(x, dtype=float) - b) @ a_mat  # = A^T (x - b)

    def wrap2(fn):
        def out(x):
            return np.einsum("ia,jb,...ab->...ij", a_mat, a_mat, fn(pull(x)))
        return out

    def wrap3(fn):
        def out(x):
            return np.einsum("ia,jb,kc,...abc->...ijk",
                             a_mat, a_mat, a_mat, fn(pull(x)))
        return out

    def wrap4(fn):
        def out(x):
            return np.einsum("ia,jb,kc,ld,...abcd->...ijkl",
                             a_mat, a_mat, a_mat, a_mat, fn(pull(x)))
        return out

    gfield = AnalyticSym2Field(wrap2(data.metric.value),
                               wrap3(data.metric.jacobian),
                               wrap4(data.metric.hessian))
    pfield = AnalyticSym2Field(wrap2(data.extrinsic.value),
                               wrap3(data.extrinsic.jacobian))
    return InitialDataSet(data.chart, gfield, pfield, data.decay_order,
                          name=data.name + "-moved")


# ---------------------------------------------------------------------------
# decay spot check


def check_asymptotic_decay(data: InitialDataSet, radii: Sequence[float] = (8.0, 16.0, 32.0, 64.0, 128.0),
                           directions: Optional[np.ndarray] = None) -> dict:
    """Monotone-decay spot check of the advertised fall-off rate.

    Samples r^q * (|g - delta| + r |dg| + r^2 |d2g| + r |p| + r^2 |dp|) on a
    logarithmic radius ladder and reports whether the ladder decreases.  A
    spot check, not a proof: it covers a handful of directions.
    """
    n = data.n
    q = data.decay_order
    if directions is None:
        rng = np.random.default_rng(20240817)
        directions = rng.normal(size=(6, n))
        directions[:, -1] = np.abs(directions[:, -1])
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    rows = []
    eye = np.eye(n)
    for r in radii:
        worst = 0.0
        for d in directions:
            x = r * d
            g = data.g(x)
            dg = data.dg(x)
            d2g = data.d2g(x)
            p = data.p(x)
            dp = data.dp(x)
            size = (np.max(np.abs(g - eye))
                    + r * np.max(np.abs(dg))
                    + r * r * np.max(np.abs(d2g))
                    + r * np.max(np.abs(p))
                    + r * r * np.max(np.abs(dp)))
            worst = max(worst, float(size))
        rows.append({"r": float(r), "scaled": worst * r ** q})
    vals = [row["scaled"] for row in rows]
    decreasing = all(b <= a * 1.0000001 + 1e-14 for a, b in zip(vals, vals[1:]))
    return {"rows": rows, "monotone": bool(decreasing), "decay_order": q}
