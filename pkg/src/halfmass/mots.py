"""Capillary surfaces over the boundary plane: null expansion and stability.

Surfaces are graphs x_1 = u(y) over a rectangular parameter box in the
remaining coordinates, with the box's last axis starting at 0 so the surface
meets the boundary plane {x_n = 0} along an edge.  Everything is evaluated
pointwise from analytic closures (no stencils): the surface supplies exact
first and second derivatives of u, the ambient data supplies exact metric
derivatives, and the intrinsic scalar curvature comes from the ambient
curvature through the trace relation

    R_surface = R - 2 Ric(N, N) + H^2 - |A|^2,

so third derivatives of u never enter.

Sign conventions.  The surface normal N is the up-side normal of the graph
(the covector dx_1 - du is positive on it), which points toward the
asymptotically flat end.  The second fundamental form is the divergence
style S(V, W) = g(nabla_V N, W), so a round sphere with outward normal has
H = +(n-1)/R and the outer null expansion theta_plus = H + tr_Sigma p is
positive on untrapped spheres.  Along the edge, nu is the outward conormal
of the edge inside the surface (pointing toward smaller last parameter), X
is the outward unit normal of the boundary plane, cos(gamma) = <X, N>,
sin(gamma) >= 0, and eta = cos(gamma) nu - sin(gamma) N closes the contact
frame; with these choices <X, nu> = +sin(gamma).  Edge and plane mean
curvatures are divergence style with respect to their outward normals as
well.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .constraints import current_density, energy_density
from .errors import DomainError
from .geometry import (InitialDataSet, boundary_geometry, christoffel,
                       ricci_tensor, scalar_curvature)
from .quadrature import gauss_legendre_box

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class GraphSurface:
    """Graph x_1 = u(y) over a parameter box whose last axis starts at 0."""

    origin: tuple
    size: tuple
    fn: Callable
    dfn: Callable
    d2fn: Callable

    def __post_init__(self):
        if len(self.origin) != len(self.size):
            raise DomainError("origin and size lengths differ")
        if abs(self.origin[-1]) > _EDGE_TOL:
            raise DomainError("last parameter axis must start on the edge")
        if any(s <= 0 for s in self.size):
            raise DomainError("box extents must be positive")

    @property
    def m(self) -> int:
        return len(self.origin)

    def bounds(self):
        return [(float(o), float(o + s))
                for o, s in zip(self.origin, self.size)]

    def embed(self, y: np.ndarray) -> np.ndarray:
        """Ambient coordinates (u(y), y) of parameter points."""
        y = np.asarray(y, dtype=float)
        x = np.empty(y.shape[:-1] + (self.m + 1,))
        x[..., 0] = self.fn(y)
        x[..., 1:] = y
        return x


def flat_graph(n: int = 3, height: float = 2.0, origin=None,
               size=None) -> GraphSurface:
    """Coordinate plane x_1 = height."""
    m = n - 1
    origin = tuple(origin) if origin else (-0.6,) * (m - 1) + (0.0,)
    size = tuple(size) if size else (1.2,) * (m - 1) + (0.9,)
    return GraphSurface(
        origin, size,
        lambda y: height + np.zeros(y.shape[:-1]),
        lambda y: np.zeros(y.shape),
        lambda y: np.zeros(y.shape + (m,)),
    )


def tilted_graph(n: int = 3, height: float = 2.0, slope: float = 0.5,
                 origin=None, size=None) -> GraphSurface:
    """Plane x_1 = height + slope * x_n, meeting the boundary at an angle."""
    m = n - 1

    def fn(y):
        return height + slope * y[..., -1]

    def dfn(y):
        out = np.zeros(y.shape)
        out[..., -1] = slope
        return out

    origin = tuple(origin) if origin else (-0.6,) * (m - 1) + (0.0,)
    size = tuple(size) if size else (1.2,) * (m - 1) + (0.9,)
    return GraphSurface(origin, size, fn, dfn,
                        lambda y: np.zeros(y.shape + (m,)))


def sphere_cap(n: int = 3, radius: float = 2.0, center=None, origin=None,
               size=None) -> GraphSurface:
    """Upper graph piece of a round sphere; the edge circle lies on the plane.

    ``center`` is the ambient sphere center; its last component sets the
    contact angle through cos(gamma) = -center_n / radius (a center below the
    plane gives an acute angle, a center on the plane the free-boundary
    case).
    """
    m = n - 1
    if center is None:
        center = (2.0,) + (0.0,) * (m - 1) + (0.8,)
    center = np.asarray(center, dtype=float)
    if center.shape != (n,):
        raise DomainError(f"center must have {n} components")
    if radius <= 0:
        raise DomainError("radius must be positive")
    chat = center[1:]

    def root(y):
        d2 = np.sum((y - chat) ** 2, axis=-1)
        arg = radius * radius - d2
        if np.any(arg <= 0):
            raise DomainError("parameter box leaves the sphere's graph domain")
        return np.sqrt(arg)

    def fn(y):
        return center[0] + root(y)

    def dfn(y):
        return -(y - chat) / root(y)[..., None]

    def d2fn(y):
        d = y - chat
        r = root(y)[..., None, None]
        eye = np.eye(m)
        return -(eye / r + d[..., :, None] * d[..., None, :] / r ** 3)

    half = 0.35 * radius
    if origin is None:
        origin = (-half,) * (m - 1) + (0.0,)
    if size is None:
        size = (2 * half,) * (m - 1) + (0.4 * radius,)
    surf = GraphSurface(tuple(origin), tuple(size), fn, dfn, d2fn)
    lo = np.asarray(surf.origin, dtype=float)
    hi = lo + np.asarray(surf.size, dtype=float)
    corners = np.stack(np.meshgrid(*zip(lo, hi), indexing="ij"),
                       axis=-1).reshape(-1, m)
    root(corners)  # the farthest box point from the axis is a corner
    return surf


class SurfaceFunction:
    """Scalar function on the parameter box with an exact gradient."""

    def __init__(self, fn: Callable, grad_fn: Callable):
        self.fn = fn
        self.grad_fn = grad_fn

    @classmethod
    def constant(cls, value: float) -> "SurfaceFunction":
        return cls(lambda y: value + np.zeros(y.shape[:-1]),
                   lambda y: np.zeros(y.shape))

    def value(self, y):
        return np.asarray(self.fn(np.asarray(y, dtype=float)), dtype=float)

    def gradient(self, y):
        return np.asarray(self.grad_fn(np.asarray(y, dtype=float)),
                          dtype=float)


def default_test_basis(surface: GraphSurface, count: int = 10):
    """Deterministic low-order test functions on the parameter box."""
    m = surface.m
    origin = np.asarray(surface.origin)
    size = np.asarray(surface.size)

    def scaled(a):
        def fn(y):
            return (y[..., a] - origin[a]) / size[a]

        def grad(y):
            out = np.zeros(y.shape)
            out[..., a] = 1.0 / size[a]
            return out

        return SurfaceFunction(fn, grad)

    def bump(a):
        def fn(y):
            return np.sin(np.pi * (y[..., a] - origin[a]) / size[a])

        def grad(y):
            out = np.zeros(y.shape)
            out[..., a] = (np.pi / size[a]) * np.cos(
                np.pi * (y[..., a] - origin[a]) / size[a])
            return out

        return SurfaceFunction(fn, grad)

    def wave(a):
        def fn(y):
            return np.cos(np.pi * (y[..., a] - origin[a]) / size[a])

        def grad(y):
            out = np.zeros(y.shape)
            out[..., a] = -(np.pi / size[a]) * np.sin(
                np.pi * (y[..., a] - origin[a]) / size[a])
            return out

        return SurfaceFunction(fn, grad)

    def pair(a, b):
        fa, fb = scaled(a), scaled(b)

        def fn(y):
            return fa.value(y) * fb.value(y)

        def grad(y):
            return (fa.gradient(y) * fb.value(y)[..., None]
                    + fb.gradient(y) * fa.value(y)[..., None])

        return SurfaceFunction(fn, grad)

    basis = [SurfaceFunction.constant(1.0)]
    basis.extend(scaled(a) for a in range(m))
    basis.extend(bump(a) for a in range(m))
    basis.extend(wave(a) for a in range(m))
    basis.extend(pair(a, b) for a in range(m) for b in range(a, m))
    if len(basis) < count:
        raise DomainError(f"basis generator tops out at {len(basis)}")
    return basis[:count]


# ---------------------------------------------------------------------------
# surface frame tables


class _SurfaceTables:
    """Exact pointwise geometry of the graph at a batch of parameter points."""

    def __init__(self, data: InitialDataSet, surface: GraphSurface, y):
        n = data.n
        if data.backend != "analytic":
            raise DomainError("graph surfaces need analytic data")
        if surface.m != n - 1:
            raise DomainError("surface parameter count does not match data")
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != surface.m:
            raise DomainError("parameter points have the wrong width")
        self.data = data
        self.surface = surface
        self.y = y
        self.x = surface.embed(y)
        self.u1 = np.asarray(surface.dfn(y), dtype=float)
        self.u2 = np.asarray(surface.d2fn(y), dtype=float)

        self.g = data.g(self.x)
        self.ginv = data.ginv(self.x)
        self.p = data.p(self.x)
        self.dg = data.dg(self.x)
        self.gam = christoffel(data, self.x)

        m = surface.m
        tang = np.zeros(y.shape[:-1] + (n, m))
        tang[..., 0, :] = self.u1
        for a in range(m):
            tang[..., a + 1, a] = 1.0
        self.tang = tang

        self.ghat = np.einsum("...ia,...ij,...jb->...ab", tang, self.g, tang)
        try:
            np.linalg.cholesky(self.ghat)
        except np.linalg.LinAlgError:
            raise DomainError("degenerate graph metric")
        self.ghat_inv = np.linalg.inv(self.ghat)
        self.sqrt_ghat = np.sqrt(np.linalg.det(self.ghat))

        # up-side unit normal from the graph covector dx_1 - du
        mcov = np.zeros(y.shape[:-1] + (n,))
        mcov[..., 0] = 1.0
        mcov[..., 1:] = -self.u1
        raw = np.einsum("...ij,...j->...i", self.ginv, mcov)
        nrm = np.sqrt(np.einsum("...i,...i->...", mcov, raw))
        self.normal = raw / nrm[..., None]
        self.normal_low = mcov / nrm[..., None]

        # S(V, W) = g(nabla_V N, W) = -g(nabla_V W, N) for tangent V, W
        gam_n = np.einsum("...kij,...k->...ij", self.gam, self.normal_low)
        self.second = -(self.normal_low[..., 0][..., None, None] * self.u2
                        + np.einsum("...ij,...ia,...jb->...ab",
                                    gam_n, tang, tang))
        self.mean_curvature = np.einsum("...ab,...ab->...",
                                        self.ghat_inv, self.second)
        self.p_tan = np.einsum("...ia,...ij,...jb->...ab", tang, self.p, tang)
        self.trace_p = np.einsum("...ab,...ab->...", self.ghat_inv,
                                 self.p_tan)

    def theta_plus(self):
        return self.mean_curvature + self.trace_p

    def dghat(self):
        """Exact parameter derivative of the induced metric, (..., a, b, c)."""
        gT = np.einsum("...ij,...jb->...ib", self.g, self.tang)
        term1 = np.einsum("...ijk,...ia,...jb,...kc->...abc",
                          self.dg, self.tang, self.tang, self.tang)
        # g(d_c T_a, T_b) contributes u_,ca (g T)_{0 b} and its a<->b mirror
        term2 = np.einsum("...ca,...b->...abc", self.u2, gT[..., 0, :])
        term3 = np.einsum("...cb,...a->...abc", self.u2, gT[..., 0, :])
        return term1 + term2 + term3

    def intrinsic_christoffel(self):
        d = self.dghat()
        t = (np.einsum("...jli->...lij", d)
             + np.einsum("...ilj->...lij", d)
             - np.einsum("...ijl->...lij", d))
        return 0.5 * np.einsum("...kl,...lij->...kij", self.ghat_inv, t)

    def scalar_curvature(self):
        """Intrinsic R via the ambient trace relation (no third derivatives)."""
        r_amb = scalar_curvature(self.data, self.x)
        ric = ricci_tensor(self.data, self.x)
        ric_nn = np.einsum("...ij,...i,...j->...", ric, self.normal,
                           self.normal)
        a_sq = np.einsum("...ac,...bd,...ab,...cd->...", self.ghat_inv,
                         self.ghat_inv, self.second, self.second)
        return (r_amb - 2.0 * ric_nn + self.mean_curvature ** 2 - a_sq)


class _EdgeTables:
    """Contact frame and edge curvature where the surface meets the plane."""

    def __init__(self, tabs: _SurfaceTables):
        y = tabs.y
        if np.any(np.abs(y[..., -1]) > _EDGE_TOL):
            raise DomainError("edge evaluation needs last parameter = 0")
        self.tabs = tabs
        n = tabs.data.n
        m = tabs.surface.m

        root = np.sqrt(tabs.ghat_inv[..., -1, -1])
        self.nu_up = -tabs.ghat_inv[..., :, -1] / root[..., None]
        self.nu = np.einsum("...ia,...a->...i", tabs.tang, self.nu_up)

        root_x = np.sqrt(tabs.ginv[..., n - 1, n - 1])
        self.x_out = -tabs.ginv[..., :, n - 1] / root_x[..., None]

        self.cos_gamma = np.einsum("...i,...ij,...j->...", self.x_out,
                                   tabs.g, tabs.normal)
        self.sin_gamma = np.sqrt(np.maximum(1.0 - self.cos_gamma ** 2, 0.0))
        self.eta = (self.cos_gamma[..., None] * self.nu
                    - self.sin_gamma[..., None] * tabs.normal)

        frame = self.cos_gamma[..., None] * tabs.normal \
            + self.sin_gamma[..., None] * self.nu
        self.frame_defect = float(np.max(np.abs(frame - self.x_out))) \
            if frame.size else 0.0

        self.p_n_nu = np.einsum("...ij,...i,...j->...", tabs.p, tabs.normal,
                                self.nu)
        self.p_eta_x = np.einsum("...ij,...i,...j->...", tabs.p, self.eta,
                                 self.x_out)
        tr_full = np.einsum("...ij,...ij->...", tabs.ginv, tabs.p)
        self.trace_plane_p = tr_full - np.einsum("...ij,...i,...j->...",
                                                 tabs.p, self.x_out,
                                                 self.x_out)

        # mean curvature of the edge inside the surface, from the intrinsic
        # Christoffel symbols of the graph metric
        if m >= 2:
            gam_hat = tabs.intrinsic_christoffel()
            ii = gam_hat[..., m - 1, : m - 1, : m - 1] / root[..., None, None]
            block_inv = np.linalg.inv(tabs.ghat[..., : m - 1, : m - 1])
            self.edge_mean_curvature = np.einsum("...cd,...cd->...",
                                                 block_inv, ii)
        else:
            self.edge_mean_curvature = np.zeros(y.shape[:-1])

    def contact_defect(self, gamma) -> float:
        cos_ref = np.cos(_angle_values(gamma, self.tabs.x))
        return float(np.max(np.abs(self.cos_gamma - cos_ref)))


def _angle_values(gamma, x) -> np.ndarray:
    """Contact angle values at ambient points; floats mean a constant angle."""
    if np.isscalar(gamma):
        return float(gamma) + np.zeros(np.asarray(x).shape[:-1])
    return np.asarray(gamma.value(x), dtype=float)


def _angle_gradient(gamma, x) -> np.ndarray:
    x = np.asarray(x)
    if np.isscalar(gamma):
        return np.zeros(x.shape)
    return np.asarray(gamma.gradient(x), dtype=float)


# ---------------------------------------------------------------------------
# operations


def null_expansion(data: InitialDataSet, surface: GraphSurface, y,
                   tol: float = 1e-8) -> dict:
    """Outer null expansion H + tr_Sigma p at parameter points."""
    tabs = _SurfaceTables(data, surface, y)
    theta = tabs.theta_plus()
    return {
        "theta_plus": theta,
        "mean_curvature": tabs.mean_curvature,
        "trace_p": tabs.trace_p,
        "is_mots": bool(np.max(np.abs(theta)) < tol),
        "tol": float(tol),
    }


def trace_identity_residual(p_mat, gamma, normal, conormal):
    """Residual of the contact-angle rewrite of the momentum trace.

    Pure linear algebra: ``p_mat`` holds symmetric components in any
    orthonormal frame, ``normal`` and ``conormal`` are orthonormal vectors in
    that frame (the surface normal N and edge conormal nu), and the plane
    normal is reconstructed as X = cos(gamma) N + sin(gamma) nu.  Broadcasts
    over leading axes.
    """
    p_mat = np.asarray(p_mat, dtype=float)
    normal = np.asarray(normal, dtype=float)
    conormal = np.asarray(conormal, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    cg, sg = np.cos(gamma), np.sin(gamma)
    x_out = cg[..., None] * normal + sg[..., None] * conormal
    eta = cg[..., None] * conormal - sg[..., None] * normal

    def pair(a, b):
        return np.einsum("...ij,...i,...j->...", p_mat, a, b)

    tr = np.einsum("...ii->...", p_mat)
    lhs = cg * (tr - pair(normal, normal)) - sg * pair(normal, conormal)
    rhs = cg * (tr - pair(x_out, x_out)) + sg * pair(eta, x_out)
    return np.abs(lhs - rhs)


def boundary_trace_identity(data: InitialDataSet, surface: GraphSurface,
                            gamma, y_edge, tol: float = 1e-8) -> dict:
    """The trace identity evaluated with the surface's actual contact frame."""
    tabs = _SurfaceTables(data, surface, y_edge)
    edge = _EdgeTables(tabs)
    if edge.frame_defect > tol:
        raise DomainError(
            f"contact frame relations fail: defect {edge.frame_defect:.3e}")
    contact = edge.contact_defect(gamma)
    if contact > tol:
        raise DomainError(
            f"surface does not meet the plane at the supplied angle: "
            f"defect {contact:.3e}")
    lhs = (edge.cos_gamma * tabs.trace_p
           - edge.sin_gamma * edge.p_n_nu)
    rhs = (edge.cos_gamma * edge.trace_plane_p
           + edge.sin_gamma * edge.p_eta_x)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "residual": float(np.max(np.abs(lhs - rhs))),
        "contact_defect": contact,
        "frame_defect": edge.frame_defect,
    }


def boundary_Z_term(data: InitialDataSet, surface: GraphSurface, gamma,
                    y_edge, tol: float = 1e-8) -> dict:
    """Edge value of <Z, nu> in its curvature form.

    Returns the expression

        H_edge - (H_plane + tr_Sigma p cos(gamma) - sin(gamma) p(N, nu)
                  - d_eta gamma) / sin(gamma)

    together with the equivalent combination obtained through the trace
    identity, whose agreement is reported as ``cross_check_defect``.

    This is the value the pairing p(N, nu) - d_nu log(phi) takes when phi is
    the speed of an angle-preserving deformation; the two agree on marginal
    surfaces, and unconditionally in the orthogonal-contact case gamma =
    pi/2.  ``gamma`` may be a constant angle or a profile object with
    ``value(x)``/``gradient(x)`` over ambient coordinates.
    """
    tabs = _SurfaceTables(data, surface, y_edge)
    edge = _EdgeTables(tabs)
    if edge.frame_defect > tol:
        raise DomainError(
            f"contact frame relations fail: defect {edge.frame_defect:.3e}")
    contact = edge.contact_defect(gamma)
    if contact > tol:
        raise DomainError(
            f"surface does not meet the plane at the supplied angle: "
            f"defect {contact:.3e}")
    sin_ref = np.sin(_angle_values(gamma, tabs.x))
    if np.any(sin_ref < 1e-8):
        raise DomainError("sin(gamma) vanishes somewhere on the edge")

    flat_x = tabs.x.reshape(-1, data.n)
    h_plane = np.array([boundary_geometry(data, pt).mean_curvature
                        for pt in flat_x]).reshape(tabs.x.shape[:-1])
    d_eta_gamma = np.einsum("...i,...i->...", edge.eta,
                            _angle_gradient(gamma, tabs.x))

    combo = (h_plane + tabs.trace_p * edge.cos_gamma
             - edge.sin_gamma * edge.p_n_nu - d_eta_gamma)
    value = edge.edge_mean_curvature - combo / sin_ref
    rewrite_combo = (h_plane + edge.cos_gamma * edge.trace_plane_p
                     + edge.sin_gamma * edge.p_eta_x - d_eta_gamma)
    rewrite = edge.edge_mean_curvature - rewrite_combo / sin_ref
    return {
        "value": value,
        "rewrite": rewrite,
        "cross_check_defect": float(np.max(np.abs(value - rewrite))),
        "edge_mean_curvature": edge.edge_mean_curvature,
        "plane_mean_curvature": h_plane,
        "p_normal_conormal": edge.p_n_nu,
        "d_eta_gamma": d_eta_gamma,
        "cos_gamma": edge.cos_gamma,
        "sin_gamma": edge.sin_gamma,
        "contact_defect": contact,
    }


@dataclass
class StabilityReport:
    """Assembled pieces of the symmetrized stability functional."""

    value: float
    gradient_term: float
    potential_term: float
    boundary_term: float
    contact_defect: float
    theta_plus: tuple
    q_values: tuple
    w_norms: tuple
    z_nu_values: tuple

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "gradient_term": self.gradient_term,
            "potential_term": self.potential_term,
            "boundary_term": self.boundary_term,
            "contact_defect": self.contact_defect,
            "theta_plus_max": float(np.max(np.abs(self.theta_plus))),
            "q_min": float(np.min(self.q_values)),
            "w_norm_max": float(np.max(self.w_norms)),
            "z_nu_values": [float(v) for v in self.z_nu_values],
        }


def _quadrature_tables(data, surface, degree):
    pts, wts = gauss_legendre_box(surface.bounds(), degree)
    tabs = _SurfaceTables(data, surface, pts)
    m = surface.m
    if m >= 2:
        edge_pts, edge_wts = gauss_legendre_box(surface.bounds()[:-1], degree)
        edge_y = np.concatenate(
            [edge_pts, np.zeros(edge_pts.shape[:-1] + (1,))], axis=-1)
    else:
        edge_y = np.zeros((1, 1))
        edge_wts = np.ones(1)
    edge_tabs = _SurfaceTables(data, surface, edge_y)
    return tabs, wts, _EdgeTables(edge_tabs), edge_wts


def stability_functional(data: InitialDataSet, surface: GraphSurface, gamma,
                         psi: SurfaceFunction, phi: SurfaceFunction,
                         degree: int = 20) -> StabilityReport:
    """Evaluate the symmetrized second-variation functional for one psi.

    The boundary piece integrates psi^2 <Z, nu> with Z built directly from
    the momentum pairing and the supplied positive weight phi; the interior
    piece integrates |grad psi|^2 + Q psi^2 over the graph.
    """
    tabs, wts, edge, edge_wts = _quadrature_tables(data, surface, degree)

    phi_vals = phi.value(tabs.y)
    if np.any(phi_vals <= 0):
        raise DomainError("weight function must be positive on the surface")

    psi_vals = psi.value(tabs.y)
    dpsi = psi.gradient(tabs.y)
    grad_sq = np.einsum("...ab,...a,...b->...", tabs.ghat_inv, dpsi, dpsi)

    mu = energy_density(data, tabs.x)
    j_cov = current_density(data, tabs.x)
    j_n = np.einsum("...i,...i->...", j_cov, tabs.normal)
    chi = tabs.second + tabs.p_tan
    chi_sq = np.einsum("...ac,...bd,...ab,...cd->...", tabs.ghat_inv,
                       tabs.ghat_inv, chi, chi)
    q_vals = (0.5 * tabs.scalar_curvature() - (mu + j_n) - 0.5 * chi_sq)

    w_cov = np.einsum("...ij,...i,...ja->...a", tabs.p, tabs.normal,
                      tabs.tang)
    w_norms = np.sqrt(np.maximum(
        np.einsum("...ab,...a,...b->...", tabs.ghat_inv, w_cov, w_cov), 0.0))

    area = wts * tabs.sqrt_ghat
    gradient_term = float(np.sum(area * grad_sq))
    potential_term = float(np.sum(area * q_vals * psi_vals ** 2))

    # edge: <Z, nu> = p(N, nu) - <grad log phi, nu>
    etabs = edge.tabs
    phi_edge = phi.value(etabs.y)
    if np.any(phi_edge <= 0):
        raise DomainError("weight function must be positive on the edge")
    dphi_edge = phi.gradient(etabs.y)
    dlog_nu = np.einsum("...a,...a->...", edge.nu_up, dphi_edge) / phi_edge
    z_nu = edge.p_n_nu - dlog_nu
    psi_edge = psi.value(etabs.y)
    m = surface.m
    if m >= 2:
        edge_metric = etabs.ghat[..., : m - 1, : m - 1]
        edge_area = edge_wts * np.sqrt(np.linalg.det(edge_metric))
    else:
        edge_area = edge_wts
    boundary_term = float(np.sum(edge_area * psi_edge ** 2 * z_nu))

    return StabilityReport(
        value=boundary_term + gradient_term + potential_term,
        gradient_term=gradient_term,
        potential_term=potential_term,
        boundary_term=boundary_term,
        contact_defect=edge.contact_defect(gamma),
        theta_plus=tuple(np.asarray(tabs.theta_plus(), dtype=float).ravel()),
        q_values=tuple(np.asarray(q_vals, dtype=float).ravel()),
        w_norms=tuple(np.asarray(w_norms, dtype=float).ravel()),
        z_nu_values=tuple(np.asarray(z_nu, dtype=float).ravel()),
    )


def stability_spectrum(data: InitialDataSet, surface: GraphSurface, gamma,
                       phi: SurfaceFunction, basis=None,
                       degree: int = 20) -> dict:
    """Smallest eigenvalue of the symmetrized form on a finite test basis.

    A Rayleigh-Ritz bound: assemble the functional's bilinear form and the
    area mass matrix on the basis and solve the generalized symmetric
    eigenproblem.  Diagnostic only; a negative value flags a direction in
    which the functional fails to be nonnegative.
    """
    if basis is None:
        basis = default_test_basis(surface)
    tabs, wts, edge, edge_wts = _quadrature_tables(data, surface, degree)
    phi_vals = phi.value(tabs.y)
    if np.any(phi_vals <= 0):
        raise DomainError("weight function must be positive on the surface")

    mu = energy_density(data, tabs.x)
    j_n = np.einsum("...i,...i->...", current_density(data, tabs.x),
                    tabs.normal)
    chi = tabs.second + tabs.p_tan
    chi_sq = np.einsum("...ac,...bd,...ab,...cd->...", tabs.ghat_inv,
                       tabs.ghat_inv, chi, chi)
    q_vals = 0.5 * tabs.scalar_curvature() - (mu + j_n) - 0.5 * chi_sq
    area = wts * tabs.sqrt_ghat

    etabs = edge.tabs
    phi_edge = phi.value(etabs.y)
    dlog_nu = np.einsum("...a,...a->...", edge.nu_up,
                        phi.gradient(etabs.y)) / phi_edge
    z_nu = edge.p_n_nu - dlog_nu
    m = surface.m
    if m >= 2:
        edge_area = edge_wts * np.sqrt(np.linalg.det(
            etabs.ghat[..., : m - 1, : m - 1]))
    else:
        edge_area = edge_wts

    k = len(basis)
    vals = [b.value(tabs.y) for b in basis]
    grads = [b.gradient(tabs.y) for b in basis]
    edge_vals = [b.value(etabs.y) for b in basis]
    kmat = np.empty((k, k))
    mmat = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            cross = np.einsum("...ab,...a,...b->...", tabs.ghat_inv,
                              grads[i], grads[j])
            kmat[i, j] = (np.sum(area * (cross + q_vals * vals[i] * vals[j]))
                          + np.sum(edge_area * z_nu * edge_vals[i]
                                   * edge_vals[j]))
            kmat[j, i] = kmat[i, j]
            mmat[i, j] = mmat[j, i] = np.sum(area * vals[i] * vals[j])
    eigvals = scipy.linalg.eigh(kmat, mmat, eigvals_only=True)
    return {
        "eigenvalues": [float(v) for v in eigvals],
        "smallest": float(eigvals[0]),
        "basis_size": k,
        "contact_defect": edge.contact_defect(gamma),
    }
