"""Spinor fields and the momentum-corrected Dirac operator on half-space data.

Spinor components always refer to the orthonormal-frame trivialization coming
from :func:`halfmass.geometry.orthonormal_frame`, so a "constant spinor" means
constant frame components.  The covariant derivative lifts the Levi-Civita
connection,

    nabla_i phi = d_i phi + (1/4) omega_{iab} gamma^a gamma^b phi,

and the momentum correction subtracts (1/2) p_{ib} gamma^b gamma^0 phi with
frame components p_{ib} = p_{ik} e_b^k.  The operator assembled from it,
D_p = gamma^a nabla^p_{e_a}, differs from the plain Dirac operator by the
algebraic term (1/2) tr_g p gamma^0, which both code paths compute and
cross-check.

Grid fields differentiate with the same second-order stencils as the tensor
backends; every residual here is expected to vanish at order h^2 on smooth
data, and exactly on flat data with polynomial fields of low degree.

Boundary conventions: the outward unit conormal of the plane ``{x_n = 0}``
has constant frame components (0, ..., 0, -1), so Clifford multiplication by
it is ``-gamma^n`` and the boundary chirality operator is the constant matrix
``-(cos(theta) gamma^0 gamma^n + i sin(theta) gamma^n)``.  The second
fundamental form and p-components used in the boundary lemma are taken with
respect to that outward normal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import stencils
from .charges import Extrapolation, compute_charges, extrapolate_ladder
from .clifford import SpinorRep, chirality_operator, eigenspinor
from .constraints import current_density, energy_density
from .errors import DomainError, EigenconditionError
from .geometry import GridPatch, InitialDataSet, christoffel, orthonormal_frame
from .quadrature import half_sphere_rule

_CROSSCHECK_TOL = 1e-10
_EIGEN_TOL = 1e-8


# ---------------------------------------------------------------------------
# spinor fields


class SpinorField:
    """Spinor components sampled on a uniform grid patch."""

    backend = "grid"

    def __init__(self, patch: GridPatch, rep: SpinorRep, values: np.ndarray):
        self.patch = patch
        self.rep = rep
        self.values = np.asarray(values, dtype=complex)
        want = tuple(patch.shape) + (rep.dim,)
        if self.values.shape != want:
            raise DomainError(
                f"spinor samples have shape {self.values.shape}, expected {want}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("spinor samples contain non-finite entries")
        self._jac = None

    @classmethod
    def sample(cls, patch: GridPatch, rep: SpinorRep, fn) -> "SpinorField":
        return cls(patch, rep, fn(patch.nodes()))

    def _jac_table(self) -> np.ndarray:
        if self._jac is None:
            ndim = len(self.patch.shape)
            h = self.patch.h
            self._jac = np.stack(
                [stencils.partial1(self.values, k, h) for k in range(ndim)],
                axis=-1,
            )
        return self._jac

    def value(self, x) -> np.ndarray:
        return self.values[self.patch.node_index(x)]

    def jacobian(self, x) -> np.ndarray:
        """Stencil derivative, shape ``(..., dim, n)`` with the axis last."""
        return self._jac_table()[self.patch.node_index(x)]


class AnalyticSpinorField:
    """Spinor field with closed-form components and first derivatives."""

    backend = "analytic"

    def __init__(self, rep: SpinorRep, fn, dfn=None):
        self.rep = rep
        self._fn = fn
        self._dfn = dfn

    def value(self, x) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=complex)

    def jacobian(self, x) -> np.ndarray:
        if self._dfn is None:
            raise DomainError("this spinor field has no derivative closure")
        return np.asarray(self._dfn(np.asarray(x, dtype=float)), dtype=complex)


# ---------------------------------------------------------------------------
# gamma-matrix tables


def _gamma_tables(rep: SpinorRep):
    """Stacked spatial gammas and the products the operators contract with."""
    gams = np.stack([rep.gamma(a) for a in range(1, rep.n + 1)])
    g0 = rep.gamma(0)
    gam2 = np.einsum("auv,bvw->abuw", gams, gams)
    gb0 = np.einsum("auv,vw->auw", gams, g0)
    return gams, g0, gam2, gb0


def _inner(phi, psi):
    """<phi, psi> per point, conjugate-linear in phi; batch aware."""
    return np.einsum("...u,...u->...", np.conj(phi), psi)


# ---------------------------------------------------------------------------
# pointwise derivative operators


def spin_covariant_derivative(data: InitialDataSet, field, i: int, x):
    """(nabla_i phi)(x) from the spin lift of the Levi-Civita connection."""
    pack = orthonormal_frame(data, x)
    _, _, gam2, _ = _gamma_tables(field.rep)
    phi = field.value(x)
    dphi = field.jacobian(x)[..., i]
    spin = 0.25 * np.einsum("...ab,abuv,...v->...u",
                            pack.omega[..., i, :, :], gam2, phi)
    return dphi + spin


def hypersurface_connection(data: InitialDataSet, field, i: int, x):
    """nabla^p_i phi = nabla_i phi - (1/2) p_{ib} gamma^b gamma^0 phi."""
    grad = spin_covariant_derivative(data, field, i, x)
    pack = orthonormal_frame(data, x)
    _, _, _, gb0 = _gamma_tables(field.rep)
    p = data.p(x)
    pframe = np.einsum("...k,...kb->...b", p[..., i, :], pack.frame)
    phi = field.value(x)
    return grad - 0.5 * np.einsum("...b,buv,...v->...u", pframe, gb0, phi)


def dirac_witten(data: InitialDataSet, field, x):
    """gamma^a nabla^p_{e_a} phi, cross-checked against D + (1/2)tr_g p gamma^0.

    The two assemblies differ only by the Clifford trace identity, so their
    mismatch bounds the internal algebra error; it is required to stay below
    1e-10 relative to the field size.
    """
    pack = orthonormal_frame(data, x)
    rep = field.rep
    gams, g0, gam2, gb0 = _gamma_tables(rep)
    phi = field.value(x)
    dphi = np.moveaxis(field.jacobian(x), -1, -2)  # (..., i, dim)
    spin = 0.25 * np.einsum("...iab,abuv,...v->...iu", pack.omega, gam2, phi)
    grad = dphi + spin
    p = data.p(x)
    pframe = np.einsum("...ik,...kb->...ib", p, pack.frame)
    tilde = grad - 0.5 * np.einsum("...ib,buv,...v->...iu", pframe, gb0, phi)
    value = np.einsum("...ia,auv,...iv->...u", pack.frame, gams, tilde)

    plain = np.einsum("...ia,auv,...iv->...u", pack.frame, gams, grad)
    trp = np.einsum("...ij,...ij->...", data.ginv(x), p)
    alt = plain + 0.5 * trp[..., None] * np.einsum("uv,...v->...u", g0, phi)
    scale = 1.0 + np.max(np.abs(phi))
    defect = np.max(np.abs(value - alt)) / scale
    if defect > _CROSSCHECK_TOL:
        raise DomainError(
            f"Dirac operator assemblies disagree by {defect:.3e}")
    return value


def lapse_shift(field, x):
    """N = <phi, phi> and the frame shift components X^a = (e^a phi, phi).

    The pairing matrices gamma^0 gamma^a are Hermitian, so the components are
    real up to roundoff; imaginary parts above 1e-12 (relative) are rejected.
    """
    rep = field.rep
    phi = np.asarray(field.value(x), dtype=complex)
    nval = _inner(phi, phi).real
    gams, g0, _, _ = _gamma_tables(rep)
    mats = np.einsum("uv,avw->auw", g0, gams)
    comps = np.einsum("auv,...v,...u->...a", mats, phi, np.conj(phi))
    scale = 1.0 + np.max(np.abs(nval))
    if np.max(np.abs(comps.imag)) > 1e-12 * scale:
        raise DomainError("shift components acquired an imaginary part")
    return nval, comps.real


# ---------------------------------------------------------------------------
# whole-grid engine


class _Engine:
    """Node tables shared by the residual maps over one grid patch.

    ``data`` may use either backend; the patch only has to lie inside the
    chart, and grid data must be sampled on the same node lattice.
    """

    def __init__(self, data: InitialDataSet, patch: GridPatch, rep: SpinorRep):
        self.data = data
        self.patch = patch
        self.rep = rep
        nodes = patch.nodes()
        self.nodes = nodes
        pack = orthonormal_frame(data, nodes)
        self.frame = pack.frame
        self.coframe = pack.coframe
        self.omega = pack.omega
        self.g = data.g(nodes)
        self.ginv = data.ginv(nodes)
        self.p = data.p(nodes)
        self.gam = christoffel(data, nodes)
        self.sqrtg = np.sqrt(np.linalg.det(self.g))
        self.pframe = np.einsum("...ik,...kb->...ib", self.p, self.frame)
        self.gams, self.g0, self.gam2, self.gb0 = _gamma_tables(rep)

    def partials(self, values: np.ndarray) -> np.ndarray:
        """Stencil gradient of per-node spinor components, (..., i, dim)."""
        return np.stack(
            [stencils.partial1(values, k, self.patch.h)
             for k in range(self.data.n)],
            axis=-2,
        )

    def plain_grad(self, values: np.ndarray) -> np.ndarray:
        dphi = self.partials(values)
        spin = 0.25 * np.einsum("...iab,abuv,...v->...iu",
                                self.omega, self.gam2, values)
        return dphi + spin

    def tilde_grad(self, values: np.ndarray) -> np.ndarray:
        grad = self.plain_grad(values)
        corr = 0.5 * np.einsum("...ib,buv,...v->...iu",
                               self.pframe, self.gb0, values)
        return grad - corr

    def dirac_from(self, tilde: np.ndarray) -> np.ndarray:
        return np.einsum("...ia,auv,...iv->...u", self.frame, self.gams, tilde)


def _sl_residual_tables(data: InitialDataSet, field: SpinorField):
    """Residual of the second-order identity at every node (valid 2 deep)."""
    eng = _Engine(data, field.patch, field.rep)
    phi = field.values
    psi = eng.tilde_grad(phi)  # (..., j, dim)

    n = data.n
    sec = np.stack(
        [eng.tilde_grad(psi[..., j, :]) for j in range(n)], axis=-3,
    )  # (..., i, j, dim) = nabla^p_i (psi_j)
    rough = (-np.einsum("...ij,...iju->...u", eng.ginv, sec)
             + np.einsum("...ij,...kij,...ku->...u", eng.ginv, eng.gam, psi))
    padj = np.einsum("...km,...mj,...jb->...kb", eng.ginv, eng.p, eng.frame)
    star = rough - np.einsum("...kb,buv,...kv->...u", padj, eng.gb0, psi)

    dphi1 = eng.dirac_from(psi)
    dphi2 = eng.dirac_from(eng.tilde_grad(dphi1))

    mu = energy_density(data, eng.nodes)
    jcov = current_density(data, eng.nodes)
    jframe = np.einsum("...ia,...i->...a", eng.frame, jcov)
    rhs = 0.5 * (mu[..., None] * phi
                 - np.einsum("...a,auv,...v->...u", jframe, eng.gb0, phi))
    return dphi2 - star - rhs, eng


def sl_pointwise_residual(data: InitialDataSet, field: SpinorField, x):
    """Residual spinor of the curvature identity for D_p at a deep node."""
    idx = field.patch.node_index(x)
    for k, (i, s) in enumerate(zip(idx, field.patch.shape)):
        if not 2 <= int(i) <= s - 3:
            raise DomainError(
                f"node index {tuple(int(v) for v in idx)} is closer than two "
                f"stencil widths to face {k}")
    resid, _ = _sl_residual_tables(data, field)
    return resid[idx]


# ---------------------------------------------------------------------------
# composite quadrature on node boxes


def _line_weights(npts: int, h: float) -> np.ndarray:
    """Composite 4th-order Newton-Cotes weights on a uniform 1-D node line."""
    if npts < 4:
        raise DomainError("need at least 4 nodes per axis to integrate")
    w = np.zeros(npts)
    if npts % 2 == 1:
        w[0:npts:2] += 2.0 / 3.0
        w[1:npts:2] += 4.0 / 3.0
        w[0] = w[-1] = 1.0 / 3.0
    else:
        head = npts - 3  # odd node count, then a 3/8 tail
        if head >= 3:
            w[0:head:2] += 2.0 / 3.0
            w[1:head:2] += 4.0 / 3.0
            w[0] = 1.0 / 3.0
            w[head - 1] = 1.0 / 3.0
        w[-4] += 3.0 / 8.0
        w[-3] += 9.0 / 8.0
        w[-2] += 9.0 / 8.0
        w[-1] += 3.0 / 8.0
    return w * h


def _box_weights(shape, h: float) -> np.ndarray:
    out = _line_weights(shape[0], h)
    for s in shape[1:]:
        out = np.multiply.outer(out, _line_weights(s, h))
    return out


def _volume_integral(values: np.ndarray, shape, h: float):
    return np.sum(_box_weights(shape, h) * values)


def _boundary_flux(vec: np.ndarray, sqrtg: np.ndarray, shape, h: float):
    """Outward flux of a contravariant density over the faces of a node box.

    ``vec[..., k]`` are the vector components at the nodes; the integrand on a
    face with outward axis k is ``+-sqrt(det g) vec^k`` against the Euclidean
    face measure, which is the divergence-theorem form of the g-flux.
    """
    ndim = len(shape)
    total = 0.0
    for k in range(ndim):
        rest = tuple(shape[:k] + shape[k + 1:])
        wface = _box_weights(rest, h) if rest else 1.0
        for side, sgn in ((0, -1.0), (-1, 1.0)):
            f = np.take(vec[..., k] * sqrtg, side, axis=k)
            total = total + sgn * np.sum(wface * f)
    return total


# ---------------------------------------------------------------------------
# integral identity


@dataclass
class SLReport:
    """Residuals of the pointwise and integrated curvature identities."""

    spacings: tuple
    pointwise_residuals: tuple
    integral_defects: tuple
    pointwise_order: Optional[float] = None
    integral_order: Optional[float] = None
    order_fit_residual: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "spacings": [float(v) for v in self.spacings],
            "pointwise_residuals": [float(v) for v in self.pointwise_residuals],
            "integral_defects": [float(v) for v in self.integral_defects],
            "pointwise_order": self.pointwise_order,
            "integral_order": self.integral_order,
            "order_fit_residual": self.order_fit_residual,
        }


def _fit_order(spacings, residuals):
    """Least-squares slope of log(residual) against log(h)."""
    hlog = np.log(np.asarray(spacings, dtype=float))
    rlog = np.log(np.maximum(np.asarray(residuals, dtype=float), 1e-300))
    coef = np.polyfit(hlog, rlog, 1)
    fit = np.polyval(coef, hlog)
    return float(coef[0]), float(np.sqrt(np.mean((fit - rlog) ** 2)))


def integral_sl_check(data: InitialDataSet, field: SpinorField,
                      box=None) -> SLReport:
    """Defect of the integrated identity over a node-aligned box.

    The defect is the bulk Dirac energy minus the connection energy, plus the
    outward boundary pairing, minus half the constraint pairing; it vanishes
    for the continuum operators and decays at second order on grids.
    """
    patch = field.patch
    if box is None:
        lo = tuple(0 for _ in patch.shape)
        hi = tuple(s - 1 for s in patch.shape)
    else:
        lo = tuple(int(v) for v in patch.node_index(np.asarray(box[0], dtype=float)))
        hi = tuple(int(v) for v in patch.node_index(np.asarray(box[1], dtype=float)))
        if any(a >= b for a, b in zip(lo, hi)):
            raise DomainError("box corners are not ordered")
    sub = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    shape = tuple(b - a + 1 for a, b in zip(lo, hi))

    eng = _Engine(data, patch, field.rep)
    phi = field.values
    psi = eng.tilde_grad(phi)
    dphi = eng.dirac_from(psi)

    mu = energy_density(data, eng.nodes)
    jcov = current_density(data, eng.nodes)
    jframe = np.einsum("...ia,...i->...a", eng.frame, jcov)

    q_dirac = _inner(dphi, dphi).real
    q_grad = np.einsum("...ij,...iu,...ju->...",
                       eng.ginv, np.conj(psi), psi).real
    jpair = np.einsum("...a,auv,...v,...u->...",
                      jframe, eng.gb0, phi, np.conj(phi))
    q_con = 0.5 * (mu * _inner(phi, phi).real - jpair.real)

    vol = _volume_integral(
        ((q_dirac - q_grad - q_con) * eng.sqrtg)[sub], shape, patch.h)

    # boundary pairing, frame components first, then chart components
    psi_frame = np.einsum("...ia,...iu->...au", eng.frame, psi)
    f1 = np.einsum("auv,...v,...u->...a", eng.gams, dphi, np.conj(phi))
    f2 = np.einsum("...u,...au->...a", np.conj(phi), psi_frame)
    w_cov = np.einsum("...ai,...a->...i", eng.coframe, f1 + f2)
    w_vec = np.einsum("...ij,...j->...i", eng.ginv, w_cov)
    flux = _boundary_flux(w_vec[sub], eng.sqrtg[sub], shape, patch.h)

    defect = vol + flux
    resid, _ = _sl_residual_tables(data, field)
    deep = tuple(slice(max(a, 2), min(b, s - 3) + 1)
                 for a, b, s in zip(lo, hi, patch.shape))
    if any(sl.start >= sl.stop for sl in deep):
        deep = sub  # box too thin for a two-deep interior
    pointwise = float(np.max(np.linalg.norm(resid[deep], axis=-1)))
    return SLReport(
        spacings=(patch.h,),
        pointwise_residuals=(pointwise,),
        integral_defects=(abs(complex(defect)),),
    )


def sl_convergence(data: InitialDataSet, spacings, origin, edge: float,
                   rep: SpinorRep, phi_fn=None) -> SLReport:
    """Run the pointwise and integral residuals over a spacing ladder.

    ``data`` must be analytic so that every rung samples the same geometry;
    the probe field defaults to a fixed smooth spinor that exercises all
    components.  The pointwise residual is recorded at the box center.
    """
    if data.backend != "analytic":
        raise DomainError("convergence ladders need an analytic data set")
    if phi_fn is None:
        phi_fn = probe_spinor_field(rep)
    origin = np.asarray(origin, dtype=float)
    points = []
    defects = []
    hs = []
    for h in spacings:
        steps = int(round(edge / h))
        if abs(steps * h - edge) > 1e-12 * max(1.0, edge):
            raise DomainError(f"edge {edge} is not a multiple of spacing {h}")
        patch = GridPatch(origin=tuple(origin), shape=(steps + 1,) * data.n,
                          h=float(h))
        field = SpinorField.sample(patch, rep, phi_fn)
        resid, _ = _sl_residual_tables(data, field)
        center = tuple(steps // 2 for _ in range(data.n))
        points.append(float(np.linalg.norm(resid[center])))
        defects.append(integral_sl_check(data, field).integral_defects[0])
        hs.append(float(h))
    p_order, p_res = _fit_order(hs, points)
    i_order, _ = _fit_order(hs, defects)
    return SLReport(
        spacings=tuple(hs),
        pointwise_residuals=tuple(points),
        integral_defects=tuple(defects),
        pointwise_order=p_order,
        integral_order=i_order,
        order_fit_residual=p_res,
    )


def probe_spinor_field(rep: SpinorRep):
    """Deterministic smooth spinor field with every component active."""

    def fn(x):
        x = np.asarray(x, dtype=float)
        comps = []
        for u in range(rep.dim):
            a = 0.3 + 0.07 * u
            b = 0.2 - 0.05 * u
            c = 0.1 + 0.03 * u
            phase = (a * x[..., 0] + b * x[..., 1] + c * x[..., -1]
                     + 0.4 * u)
            damp = np.exp(-0.1 * x[..., -1])
            comps.append(damp * (np.cos(phase) + 0.5j * np.sin(0.7 * phase)))
        return np.stack(comps, axis=-1)

    return fn


# ---------------------------------------------------------------------------
# self-adjointness on a box


def selfadjointness_defect(data: InitialDataSet, phi: SpinorField,
                           psi: SpinorField) -> dict:
    """Volume pairing difference of D_p against its boundary flux.

    Computes ``int (<D_p phi, psi> - <phi, D_p psi>)`` and the outward flux of
    the vector field with frame components ``<gamma^a phi, psi>``; the two
    agree for the continuum operator, so the defect is pure discretization.
    """
    if phi.patch is not psi.patch and phi.patch != psi.patch:
        raise DomainError("fields live on different patches")
    eng = _Engine(data, phi.patch, phi.rep)
    dphi = eng.dirac_from(eng.tilde_grad(phi.values))
    dpsi = eng.dirac_from(eng.tilde_grad(psi.values))
    integrand = (_inner(dphi, psi.values) - _inner(phi.values, dpsi))
    shape = tuple(phi.patch.shape)
    vol = _volume_integral(integrand * eng.sqrtg, shape, phi.patch.h)
    # W_a = <gamma^a phi, psi>; spatial gammas are anti-Hermitian
    w_frame = -np.einsum("auv,...v,...u->...a",
                         eng.gams, psi.values, np.conj(phi.values))
    w_vec = np.einsum("...ka,...a->...k", eng.frame, w_frame)
    flux = _boundary_flux(w_vec, eng.sqrtg, shape, phi.patch.h)
    return {
        "volume": complex(vol),
        "flux": complex(flux),
        "defect": abs(complex(vol - flux)),
    }


# ---------------------------------------------------------------------------
# boundary lemma


def boundary_chirality(rep: SpinorRep, theta: float) -> np.ndarray:
    """Constant-matrix boundary operator for the outward conormal convention."""
    return -chirality_operator(rep, float(theta))


def boundary_eigenbasis(rep: SpinorRep, theta: float, sign: int) -> np.ndarray:
    """Orthonormal basis (columns) of the boundary operator's eigenspace."""
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    proj = 0.5 * (rep.eye + sign * boundary_chirality(rep, theta))
    # singular vectors of an orthogonal projector split cleanly at 1 vs 0
    u, sv, _ = np.linalg.svd(proj)
    basis = u[:, sv > 0.5]
    if basis.shape[1] != rep.dim // 2:
        raise EigenconditionError(
            f"projector rank {basis.shape[1]} != {rep.dim // 2}")
    return basis


def boundary_eigen_field(patch: GridPatch, rep: SpinorRep, theta: float,
                         sign: int, envelope=None, envelope2=None,
                         seed=None) -> SpinorField:
    """Section of the boundary operator's eigenspace over a grid patch.

    The boundary operator is a constant matrix in the frame trivialization,
    so any combination of fixed eigenspinors with smooth scalar envelopes
    stays pointwise in the eigenspace across the whole patch.  A second
    envelope mixes in an independent eigenspace direction; without one the
    section is a scaled fixed spinor, which makes the boundary identity
    insensitive to connection terms (the mixed matrix elements vanish), so
    convergence studies should pass both.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    nodes = patch.nodes()
    if envelope is None:
        w = np.ones(nodes.shape[:-1])
    else:
        w = np.asarray(envelope(nodes), dtype=complex)
    if seed is not None or envelope2 is None:
        # Q_boundary = -Q(theta): its +sign eigenspace is Q(theta)'s -sign one
        base = eigenspinor(rep, float(theta), -sign, seed=seed)
        values = w[..., None] * base
        if envelope2 is not None:
            raise DomainError("seeded fields support a single envelope")
    else:
        basis = boundary_eigenbasis(rep, theta, sign)
        w2 = np.asarray(envelope2(nodes), dtype=complex)
        values = w[..., None] * basis[:, 0] + w2[..., None] * basis[:, 1]
    return SpinorField(patch, rep, values)


def _boundary_scalars(eng: _Engine, face):
    """Curvature scalars of the plane ``{x_n = 0}`` w.r.t. the outward normal.

    Assembled algebraically from node tables (Christoffel symbols, unit
    normal, frame legs).  These evaluate to the same machine values as the
    spin-connection route, because the Cholesky frame ties all of them to the
    same metric samples; an assembly that actually differs under refinement
    is :func:`_shape_mean_curvature`.
    """
    n = eng.data.n
    gam_b = face(eng.gam)
    ginv_b = face(eng.ginv)
    p_b = face(eng.p)
    frame_b = face(eng.frame)
    root = np.sqrt(ginv_b[..., n - 1, n - 1])
    eta = -ginv_b[..., :, n - 1] / root[..., None]  # outward unit normal
    h_coord = gam_b[..., n - 1, : n - 1, : n - 1] / root[..., None, None]
    h_hat = np.einsum("...ia,...jb,...ij->...ab",
                      frame_b[..., : n - 1, : n - 1],
                      frame_b[..., : n - 1, : n - 1], h_coord)
    mean_h = np.einsum("...aa->...", h_hat)
    p_frame = np.einsum("...ia,...ij,...jb->...ab", frame_b, p_b, frame_b)
    tr_bp = np.einsum("...aa->...", p_frame[..., : n - 1, : n - 1])
    p_nhat = np.einsum("...i,...ij,...jc->...c",
                       eta, p_b, frame_b[..., :, : n - 1])
    return h_hat, mean_h, p_frame, tr_bp, p_nhat


def _shape_mean_curvature(eng: _Engine, face):
    """Mean curvature of ``{x_n = 0}`` as the trace of the shape operator.

    The outward unit conormal is tabulated over the whole patch and pushed
    through the stencils, so the derivative content here is its own
    discretization rather than a recombination of the metric-derivative
    tables.  On a diagonal metric the conormal points along one coordinate
    axis and the stencil term drops out of the tangential block, making this
    agree with the algebraic assemblies to roundoff; off-diagonal metric
    components keep the paths genuinely distinct until refinement.
    """
    n = eng.data.n
    root = np.sqrt(eng.ginv[..., n - 1, n - 1])
    eta = -eng.ginv[..., :, n - 1] / root[..., None]
    deta = np.stack(
        [stencils.partial1(eta, k, eng.patch.h) for k in range(n)], axis=-2)
    cov = deta + np.einsum("...kil,...l->...ik", eng.gam, eta)
    tan = face(eng.frame)[..., :, : n - 1]
    shape = np.einsum("...ia,...ik,...km,...mb->...ab",
                      tan, face(cov), face(eng.g), tan)
    return np.einsum("...aa->...", shape)


def _intrinsic_boundary_dirac(eng: _Engine, face, phi_face: np.ndarray):
    """Boundary Dirac operator built from the induced metric alone.

    The tangential block of the metric on the face grid gets its own
    Cholesky frame, stencil frame derivatives, Christoffel symbols and spin
    coefficients; the restricted spinor is differentiated with that intrinsic
    connection and contracted with the outward-conormal Clifford factor.
    None of the ambient normal-direction tables enter, so the result agrees
    with the ambient-formula boundary operator only through the hypersurface
    relation the identity encodes.
    """
    n = eng.data.n
    m = n - 1
    h = eng.patch.h
    ghat = face(eng.g)[..., :m, :m]
    frame = np.swapaxes(np.linalg.inv(np.linalg.cholesky(ghat)), -1, -2)
    dframe = np.stack(
        [stencils.partial1(frame, k, h) for k in range(m)], axis=-1)
    dghat = np.stack(
        [stencils.partial1(ghat, k, h) for k in range(m)], axis=-1)
    ginv_hat = np.linalg.inv(ghat)
    t = (np.einsum("...jli->...lij", dghat)
         + np.einsum("...ilj->...lij", dghat)
         - np.einsum("...ijl->...lij", dghat))
    gam_hat = 0.5 * np.einsum("...kl,...lij->...kij", ginv_hat, t)
    cov = dframe + np.einsum("...kil,...la->...kai", gam_hat, frame)
    raw = np.einsum("...km,...kai,...mb->...iab", ghat, cov, frame)
    omega_hat = 0.5 * (raw - np.swapaxes(raw, -1, -2))

    dphi = np.stack(
        [stencils.partial1(phi_face, k, h) for k in range(m)], axis=-2)
    gams_t = eng.gams[:m]
    gam2_t = np.einsum("auv,bvw->abuw", gams_t, gams_t)
    conn = (np.einsum("...ia,...iu->...au", frame, dphi)
            + 0.25 * np.einsum("...ia,...ibc,bcuv,...v->...au",
                               frame, omega_hat, gam2_t, phi_face))
    gn = eng.gams[n - 1]
    return -np.einsum("uv,avw,...aw->...u", gn, gams_t, conn)


def boundary_term_check(data: InitialDataSet, theta: float, sign: int,
                        field: SpinorField) -> dict:
    """Pointwise residual of the boundary pairing identity on ``{x_n = 0}``.

    The field must be an eigenspinor of the boundary operator along the
    plane; its patch must start on the plane.  The two sides go through
    independent assemblies: ambient frame tables on the left; the intrinsic
    induced-metric operator plus the conormal-derivative mean curvature on
    the right.  The residual vanishes exactly on flat data with constant
    eigenspinors and decays at second order under refinement on data whose
    metric has off-diagonal structure.  On diagonal metrics every assembly
    lands on the same machine values (the Cholesky frame aligns the conormal
    with a coordinate axis), so the residual sits at roundoff for any grid
    spacing; that is a stronger outcome than second-order decay, not a gap
    in the check.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    patch = field.patch
    n = data.n
    if abs(patch.origin[n - 1]) > 1e-12:
        raise DomainError("field patch does not touch the boundary plane")
    eng = _Engine(data, patch, field.rep)
    rep = field.rep
    gams, g0, _, _ = _gamma_tables(rep)
    gn = gams[n - 1]

    def face(arr):
        return np.take(arr, 0, axis=n - 1)

    phi_b = face(field.values)
    qmat = boundary_chirality(rep, theta)
    eig_defect = float(np.max(np.abs(
        np.einsum("uv,...v->...u", qmat, phi_b) - sign * phi_b)))
    scale = 1.0 + float(np.max(np.abs(phi_b)))
    if eig_defect > _EIGEN_TOL * scale:
        raise EigenconditionError(
            f"field is not in the boundary eigenspace: defect {eig_defect:.3e}")

    psi = eng.tilde_grad(field.values)
    dop = eng.dirac_from(psi)

    frame_b = face(eng.frame)
    psi_b = face(psi)
    dop_b = face(dop)

    s = float(sign)
    st, ct = np.sin(theta), np.cos(theta)

    # left side: outward normal derivative plus conormal times the operator
    nd = -np.einsum("...i,...iu->...u", frame_b[..., :, n - 1], psi_b)
    lhs_spinor = nd - np.einsum("uv,...v->...u", gn, dop_b)
    lhs = _inner(lhs_spinor, phi_b)

    _, _, _, tr_bp, p_norm_tan = _boundary_scalars(eng, face)
    mean_h = _shape_mean_curvature(eng, face)
    dbnd = _intrinsic_boundary_dirac(eng, face, phi_b)

    nrm2 = _inner(phi_b, phi_b).real
    last = s * 0.5 * st * _inner(
        np.einsum("...c,cuv,vw,wz,...z->...u",
                  1.0j * p_norm_tan, gams[: n - 1], -gn, g0, phi_b),
        phi_b)
    rhs = (_inner(dbnd, phi_b)
           - 0.5 * mean_h * nrm2
           - s * 0.5 * ct * tr_bp * nrm2
           + last)

    residual = lhs - rhs
    return {
        "theta": float(theta),
        "sign": int(sign),
        "h": float(patch.h),
        "points": face(eng.nodes),
        "lhs": lhs,
        "rhs": rhs,
        "residual": residual,
        "max_abs_residual": float(np.max(np.abs(residual))),
        "eigen_defect": eig_defect,
    }


@dataclass
class BoundaryLemmaReport:
    """Residuals of the boundary pairing identity over a spacing ladder."""

    theta: float
    sign: int
    spacings: tuple
    residuals: tuple
    order: Optional[float] = None
    order_fit_residual: Optional[float] = None
    roundoff_floor: bool = False

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "sign": self.sign,
            "spacings": [float(h) for h in self.spacings],
            "residuals": [float(v) for v in self.residuals],
            "order": self.order,
            "order_fit_residual": self.order_fit_residual,
            "roundoff_floor": self.roundoff_floor,
        }


def _default_boundary_envelopes(n: int):
    def env(x):
        return 1.0 + 0.3 * np.sin(0.9 * x[..., 0] + 0.4 * x[..., n - 1])

    def env2(x):
        return 0.45 * np.cos(0.7 * x[..., 0] - 0.3 * x[..., n - 1])

    return env, env2


def boundary_lemma_convergence(data: InitialDataSet, spacings, origin,
                               edge: float, rep: SpinorRep, theta: float,
                               sign: int, envelope=None,
                               envelope2=None) -> BoundaryLemmaReport:
    """Run the boundary identity residual over a spacing ladder.

    ``origin`` must sit on the boundary plane.  The eigen-section defaults to
    a two-envelope combination of basis eigenspinors so both eigendirections
    carry varying weights.  When every rung lands at roundoff (diagonal
    metrics; see :func:`boundary_term_check`) no order is fitted and the
    report flags the floor instead.
    """
    if data.backend != "analytic":
        raise DomainError("convergence ladders need an analytic data set")
    if envelope is None and envelope2 is None:
        envelope, envelope2 = _default_boundary_envelopes(data.n)
    origin = np.asarray(origin, dtype=float)
    if abs(origin[data.n - 1]) > 1e-12:
        raise DomainError("ladder origin does not touch the boundary plane")
    resids = []
    hs = []
    scale = 0.0
    for h in spacings:
        steps = int(round(edge / h))
        if abs(steps * h - edge) > 1e-12 * max(1.0, edge):
            raise DomainError(f"edge {edge} is not a multiple of spacing {h}")
        patch = GridPatch(origin=tuple(origin), shape=(steps + 1,) * data.n,
                          h=float(h))
        field = boundary_eigen_field(patch, rep, theta, sign,
                                     envelope=envelope, envelope2=envelope2)
        rec = boundary_term_check(data, theta, sign, field)
        resids.append(rec["max_abs_residual"])
        scale = max(scale, float(np.max(np.abs(rec["lhs"]))))
        hs.append(float(h))
    floor = max(resids) <= 1e-13 * max(1.0, scale)
    if floor:
        return BoundaryLemmaReport(theta=float(theta), sign=int(sign),
                                   spacings=tuple(hs),
                                   residuals=tuple(resids),
                                   roundoff_floor=True)
    order, fit_res = _fit_order(hs, resids)
    return BoundaryLemmaReport(theta=float(theta), sign=int(sign),
                               spacings=tuple(hs), residuals=tuple(resids),
                               order=order, order_fit_residual=fit_res)


# ---------------------------------------------------------------------------
# flux limit at infinity


@dataclass
class WittenFluxReport:
    """Surface-pairing flux against the charge assembly it should match."""

    theta: float
    sign: int
    radii: tuple
    flux_values: tuple
    flux: Extrapolation
    expected: float
    pairing_target: float
    relative_mismatch: float

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "sign": self.sign,
            "radii": [float(r) for r in self.radii],
            "flux_values": [float(v) for v in self.flux_values],
            "flux": self.flux.to_dict(),
            "expected": self.expected,
            "pairing_target": self.pairing_target,
            "relative_mismatch": self.relative_mismatch,
        }


def witten_flux(data: InitialDataSet, rep: SpinorRep, theta: float, sign: int,
                phi0, radii, degree: int = 24) -> WittenFluxReport:
    """Half-sphere pairing flux of a constant spinor, against the charges.

    For large radii the flux approaches one quarter of ``<phi0, phi0>`` times
    the energy minus the momentum pairing; with ``phi0`` chosen by
    :func:`halfmass.clifford.choose_phi0` for the same ``theta``, ``sign`` and
    tangential momentum, the pairing collapses to

        E + sign cos|theta| P_n - sin|theta| |P_tan|.

    Both the raw pairing target and that closed form are reported.
    """
    if data.backend != "analytic":
        raise DomainError("flux extrapolation needs an analytic data set")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    radii = tuple(float(r) for r in radii)
    n = data.n
    phi0 = np.asarray(phi0, dtype=complex)
    gams, g0, gam2, gb0 = _gamma_tables(rep)

    vals = []
    for r in radii:
        rule = half_sphere_rule(n, r, degree=degree)
        x = rule.points
        pack = orthonormal_frame(data, x)
        p = data.p(x)
        ginv = data.ginv(x)
        sqrtg = np.sqrt(np.linalg.det(data.g(x)))
        phi = np.broadcast_to(phi0, x.shape[:-1] + (rep.dim,))

        spin = 0.25 * np.einsum("...iab,abuv,v->...iu",
                                pack.omega, gam2, phi0)
        pframe = np.einsum("...ik,...kb->...ib", p, pack.frame)
        tilde = spin - 0.5 * np.einsum("...ib,buv,v->...iu",
                                       pframe, gb0, phi0)
        dop = np.einsum("...ia,auv,...iv->...u", pack.frame, gams, tilde)

        psi_frame = np.einsum("...ia,...iu->...au", pack.frame, tilde)
        f1 = np.einsum("auv,...v,...u->...a", gams, dop, np.conj(phi))
        f2 = np.einsum("...u,...au->...a", np.conj(phi), psi_frame)
        w_cov = np.einsum("...ai,...a->...i", pack.coframe, f1 + f2)
        w_vec = np.einsum("...ij,...j->...i", ginv, w_cov)
        dens = sqrtg * np.einsum("...i,...i->...", w_vec, rule.normals)
        vals.append(float(rule.integrate(dens.real)))

    flux = extrapolate_ladder(radii, vals)
    charge = compute_charges(data, radii=radii, degree=degree)
    energy = charge.energy_value
    mom = charge.momentum_vector
    nrm2 = float(np.vdot(phi0, phi0).real)

    pair = np.array([
        np.vdot(gams[a] @ g0 @ phi0, phi0).real for a in range(n)
    ])
    pairing_target = 0.25 * (energy * nrm2 - float(mom @ pair))

    tan_norm = float(np.linalg.norm(mom[: n - 1]))
    expected = 0.25 * nrm2 * (energy + sign * np.cos(abs(theta)) * mom[n - 1]
                              - np.sin(abs(theta)) * tan_norm)
    scale = max(abs(expected), abs(flux.value), 1e-30)
    return WittenFluxReport(
        theta=float(theta),
        sign=int(sign),
        radii=radii,
        flux_values=tuple(vals),
        flux=flux,
        expected=float(expected),
        pairing_target=float(pairing_target),
        relative_mismatch=float(abs(flux.value - expected) / scale),
    )


# ---------------------------------------------------------------------------
# consequence identities of a parallel spinor


def interior_consequence_residuals(data: InitialDataSet,
                                   field: SpinorField) -> dict:
    """Worst residuals of the interior lapse-shift identities over the patch.

    Checks the Lie-derivative relation of the metric, the constancy of
    N^2 - |X|^2, and the two pointwise constraint pairings.  For flat data
    with a constant spinor all four vanish to roundoff.
    """
    patch = field.patch
    eng = _Engine(data, patch, field.rep)
    phi = field.values
    nval = _inner(phi, phi).real
    mats = np.einsum("uv,avw->auw", eng.g0, eng.gams)
    xa = np.einsum("auv,...v,...u->...a", mats, phi, np.conj(phi)).real
    xc = np.einsum("...ka,...a->...k", eng.frame, xa)

    h = patch.h
    n = data.n
    dxc = np.stack([stencils.partial1(xc, k, h) for k in range(n)], axis=-1)
    dg = data.dg(eng.nodes)
    lie = (np.einsum("...kj,...ki->...ij", eng.g, dxc)
           + np.einsum("...ki,...kj->...ij", eng.g, dxc)
           + np.einsum("...k,...ijk->...ij", xc, dg))
    r_lie = float(np.max(np.abs(lie + 2.0 * nval[..., None, None] * eng.p)))

    scal = nval ** 2 - np.einsum("...i,...ij,...j->...", xc, eng.g, xc)
    grads = np.stack([stencils.partial1(scal, k, h) for k in range(n)], axis=-1)
    r_scal = float(np.max(np.abs(grads)))

    mu = energy_density(data, eng.nodes)
    jcov = current_density(data, eng.nodes)
    r_pair = float(np.max(np.abs(mu * nval
                                 + np.einsum("...i,...i->...", jcov, xc))))
    jup = np.einsum("...ij,...j->...i", eng.ginv, jcov)
    r_vec = float(np.max(np.abs(mu[..., None] * xc + nval[..., None] * jup)))
    return {
        "lie_derivative": r_lie,
        "norm_gradient": r_scal,
        "scalar_pairing": r_pair,
        "vector_pairing": r_vec,
    }


def boundary_consequence_residuals(data: InitialDataSet, field: SpinorField,
                                   theta: float, sign: int) -> dict:
    """Worst residuals of the two boundary lapse-shift identities.

    Both identities relate the normal-tangential p components, the second
    fundamental form and the shift along the boundary plane; the components
    are taken in the outward-normal frame convention.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    patch = field.patch
    n = data.n
    if abs(patch.origin[n - 1]) > 1e-12:
        raise DomainError("field patch does not touch the boundary plane")
    eng = _Engine(data, patch, field.rep)

    def face(arr):
        return np.take(arr, 0, axis=n - 1)

    phi_b = face(field.values)

    nval = _inner(phi_b, phi_b).real
    mats = np.einsum("uv,avw->auw", eng.g0, eng.gams)
    xa = np.einsum("auv,...v,...u->...a", mats, phi_b, np.conj(phi_b)).real
    xt = xa[..., : n - 1]

    h_hat, mean_h, p_frame, tr_bp, p_an = _boundary_scalars(eng, face)
    p_tan = p_frame[..., : n - 1, : n - 1]

    s = float(sign)
    st, ct = np.sin(theta), np.cos(theta)
    first = (p_an * nval[..., None] * st * st
             - s * ct * np.einsum("...ab,...b->...a", p_tan, xt)
             - np.einsum("...ab,...b->...a", h_hat, xt))
    first_alt = (p_an * nval[..., None] * st * st
                 - (mean_h + s * ct * tr_bp)[..., None] * xt)
    second = (np.einsum("...a,...c->...ac", p_an, xt)
              - s * ct * p_tan * nval[..., None, None]
              - h_hat * nval[..., None, None])
    return {
        "normal_momentum": float(np.max(np.abs(first))),
        "normal_momentum_traced": float(np.max(np.abs(first_alt))),
        "mixed": float(np.max(np.abs(second))),
    }
