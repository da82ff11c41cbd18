"""Concrete Clifford-algebra representation and boundary chirality checks.

The representation carries n + 1 gamma matrices ``gamma[0..n]`` acting on a
complex spinor space of dimension ``2**ceil((n+1)/2)`` and satisfying

    gamma[a] gamma[b] + gamma[b] gamma[a] = -2 eta[a,b] I,
    eta = diag(-1, +1, ..., +1),

so the timelike ``gamma[0]`` squares to +I and is Hermitian while the spatial
``gamma[i]`` square to -I and are anti-Hermitian.  Two pairings are used: the
positive Hermitian one ``<phi, psi>`` (conjugate-linear in the first slot) and
the indefinite one ``(phi, psi) = <gamma[0] phi, psi>`` under which every
gamma[a] is self-adjoint.

The boundary chirality operator

    Q(theta) = cos(theta) gamma[0] gamma[n] + i sin(theta) gamma[n]

is an involution whose +-1 eigenspaces split the spinor space in half; the
thirteen (anti)commutation identities it satisfies, the three eigen-spinor
boundary identities and the tangential-momentum operator used for the flux
lower bound are all verified here as explicit matrix residuals.

The construction is fully deterministic, so residual tables are reproducible
bit for bit.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, EigenconditionError

_PAULI_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_PAULI_3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _euclidean_gammas(count: int):
    """Hermitian matrices G_1..G_count with G_a G_b + G_b G_a = 2 delta_ab."""
    if count < 2:
        raise DomainError("need at least two generators")
    even = count if count % 2 == 0 else count - 1
    gams = [_PAULI_1, _PAULI_2]
    while len(gams) < even:
        dim = gams[0].shape[0]
        eye = np.eye(dim, dtype=complex)
        gams = [np.kron(_PAULI_1, g) for g in gams]
        gams.append(np.kron(_PAULI_2, eye))
        gams.append(np.kron(_PAULI_3, eye))
    if count % 2 == 1:
        vol = gams[0]
        for g in gams[1:]:
            vol = vol @ g
        sq = (vol @ vol)[0, 0]
        if abs(sq - 1.0) > 1e-12:  # volume element squares to -1: rotate by i
            vol = 1.0j * vol
        gams.append(vol)
    return gams


class SpinorRep:
    """Gamma matrices and spinor-space metadata for spatial dimension n."""

    def __init__(self, n: int):
        if not 3 <= n <= 6:
            raise DomainError(f"spinor representation supports 3 <= n <= 6, got {n}")
        self.n = n
        base = _euclidean_gammas(n + 2)
        self.dim = base[0].shape[0]
        gammas = [base[0]] + [1.0j * base[k + 1] for k in range(n)]
        self.gammas = [np.ascontiguousarray(g) for g in gammas]
        self.eye = np.eye(self.dim, dtype=complex)

    def gamma(self, a: int) -> np.ndarray:
        """Clifford multiplication matrix of the a-th orthonormal covector."""
        return self.gammas[a]

    def word(self, labels) -> np.ndarray:
        """Product gamma[a1] gamma[a2] ... for a label sequence."""
        out = self.eye
        for a in labels:
            out = out @ self.gammas[a]
        return out


def build_rep(n: int) -> SpinorRep:
    return SpinorRep(n)


# ---------------------------------------------------------------------------
# pairings


def hermitian_inner(phi, psi) -> complex:
    """Positive-definite Hermitian pairing, conjugate-linear in phi."""
    return complex(np.vdot(phi, psi))


def lorentz_pairing(rep: SpinorRep, phi, psi) -> complex:
    """Indefinite pairing (phi, psi) = <gamma0 phi, psi>."""
    return complex(np.vdot(rep.gammas[0] @ np.asarray(phi), psi))


def verify_defining_relations(rep: SpinorRep) -> dict:
    """Residuals of the Clifford relations and the Hermiticity pattern."""
    eta = np.diag([-1.0] + [1.0] * rep.n)
    anticom = 0.0
    for a in range(rep.n + 1):
        for b in range(rep.n + 1):
            res = (rep.gammas[a] @ rep.gammas[b] + rep.gammas[b] @ rep.gammas[a]
                   + 2.0 * eta[a, b] * rep.eye)
            anticom = max(anticom, float(np.max(np.abs(res))))
    herm = float(np.max(np.abs(rep.gammas[0] - rep.gammas[0].conj().T)))
    antiherm = max(
        float(np.max(np.abs(g + g.conj().T))) for g in rep.gammas[1:]
    )
    # every gamma is self-adjoint for the indefinite pairing:
    # gamma^dagger gamma0 = gamma0 gamma
    pairing = max(
        float(np.max(np.abs(g.conj().T @ rep.gammas[0] - rep.gammas[0] @ g)))
        for g in rep.gammas
    )
    return {
        "anticommutation": anticom,
        "timelike_hermitian": herm,
        "spacelike_antihermitian": antiherm,
        "pairing_self_adjoint": pairing,
    }


# ---------------------------------------------------------------------------
# boundary chirality operator


def chirality_operator(rep: SpinorRep, theta: float) -> np.ndarray:
    """Q(theta) = cos(theta) gamma0 gamma_n + i sin(theta) gamma_n."""
    g0, gn = rep.gammas[0], rep.gammas[rep.n]
    return np.cos(theta) * (g0 @ gn) + 1.0j * np.sin(theta) * gn


def _q_identity_residuals(rep: SpinorRep, theta: float):
    """Max residual of each of the thirteen Q (anti)commutation identities."""
    n = rep.n
    q = chirality_operator(rep, theta)
    eye = rep.eye
    g0, gn = rep.gammas[0], rep.gammas[n]
    st, ct = np.sin(theta), np.cos(theta)
    tang = range(1, n)

    def mx(m):
        return float(np.max(np.abs(m)))

    res = np.zeros(13)
    res[0] = max(mx(q @ q - eye), mx(q - q.conj().T))
    res[1] = mx(gn @ q + q @ gn + 2.0j * st * eye)
    res[3] = mx(g0 @ q + q @ g0)
    res[8] = mx(gn @ g0 @ q + q @ gn @ g0 + 2.0 * ct * eye)
    for a in tang:
        ga = rep.gammas[a]
        res[5] = max(res[5], mx(ga @ q - q @ ga - 2.0j * st * (ga @ gn)))
        res[6] = max(res[6], mx(ga @ q + q @ ga - 2.0 * ct * (ga @ g0 @ gn)))
        res[7] = max(res[7], mx(ga @ gn @ q + q @ ga @ gn))
        res[10] = max(res[10], mx(ga @ g0 @ q + q @ ga @ g0
                                  - 2.0j * st * (ga @ g0 @ gn)))
        res[12] = max(res[12], mx(ga @ gn @ g0 @ q - q @ ga @ gn @ g0))
        for b in tang:
            if b == a:
                continue
            gb = rep.gammas[b]
            gab = ga @ gb
            res[2] = max(res[2], mx(gab @ gn @ q + q @ gab @ gn
                                    + 2.0j * st * gab))
            res[4] = max(res[4], mx(gab @ g0 @ q + q @ gab @ g0))
            res[9] = max(res[9], mx(gab @ g0 @ gn @ q + q @ gab @ g0 @ gn
                                    - 2.0 * ct * gab))
            res[11] = max(res[11], mx(gab @ q - q @ gab))
    return res


def verify_q_identities(rep: SpinorRep, thetas) -> list:
    """Residual table over a theta grid; one row per identity."""
    worst = np.zeros(13)
    for theta in np.atleast_1d(thetas):
        worst = np.maximum(worst, _q_identity_residuals(rep, float(theta)))
    return [{"item": k + 1, "residual": float(worst[k])} for k in range(13)]


def eigenspace_projector(rep: SpinorRep, theta: float, sign: int) -> np.ndarray:
    return 0.5 * (rep.eye + float(sign) * chirality_operator(rep, theta))


def eigenspinor(rep: SpinorRep, theta: float, sign: int,
                seed=None) -> np.ndarray:
    """Deterministic unit spinor with Q(theta) phi = sign phi."""
    proj = eigenspace_projector(rep, theta, sign)
    if seed is not None:
        v = proj @ np.asarray(seed, dtype=complex)
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise EigenconditionError("seed projects to the trivial eigenspinor")
        return v / nrm
    for k in range(rep.dim):
        v = proj[:, k]
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            return v / nrm
    raise EigenconditionError("eigenspace projector is zero")  # unreachable


def boundary_identity_residuals(rep: SpinorRep, theta: float, sign: int,
                                phi) -> dict:
    """Residuals of the three eigen-spinor boundary pairings.

    ``phi`` is projected to the requested Q-eigenspace first; supplying a
    spinor with no component there is an error.
    """
    proj = eigenspace_projector(rep, theta, sign)
    phi = proj @ np.asarray(phi, dtype=complex)
    if np.linalg.norm(phi) < 1e-12:
        raise EigenconditionError("trivial eigenspinor after projection")
    s = float(sign)
    n = rep.n
    g0, gn = rep.gammas[0], rep.gammas[n]
    nrm2 = float(np.vdot(phi, phi).real)
    r1 = abs(np.vdot(1.0j * (gn @ phi), phi) - s * np.sin(theta) * nrm2)
    r2 = abs(np.vdot(gn @ g0 @ phi, phi) + s * np.cos(theta) * nrm2)
    r3 = 0.0
    for a in range(1, n):
        ga = rep.gammas[a]
        lhs = np.vdot(ga @ g0 @ phi, phi)
        rhs = -s * np.vdot(1.0j * np.sin(theta) * (ga @ gn @ g0 @ phi), phi)
        r3 = max(r3, abs(lhs - rhs))
    return {"normal_component": float(r1),
            "normal_timelike_component": float(r2),
            "tangential_timelike_component": float(r3)}


# ---------------------------------------------------------------------------
# tangential momentum operator and the asymptotic eigen-spinor


def momentum_operator(rep: SpinorRep, p_tangent) -> np.ndarray:
    """A = sum_alpha P_alpha i gamma_alpha gamma_n gamma_0 (Hermitian).

    ``p_tangent`` holds the n-1 tangential momentum components; A squares to
    |P|^2 I and commutes with Q(theta) for every theta.
    """
    p_tangent = np.asarray(p_tangent, dtype=float)
    if p_tangent.shape != (rep.n - 1,):
        raise DomainError(f"expected {rep.n - 1} tangential components")
    n = rep.n
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    gn0 = rep.gammas[n] @ rep.gammas[0]
    for a in range(1, n):
        out += p_tangent[a - 1] * 1.0j * (rep.gammas[a] @ gn0)
    return out


def choose_phi0(rep: SpinorRep, theta: float, p_tangent, q_sign: int):
    """Unit spinor shared by the Q-eigenspace and the top A-eigenspace.

    Returns ``(phi0, theta_signed)``: phi0 satisfies Q(theta_signed) phi0 =
    q_sign phi0 and A phi0 = |P| phi0, and theta_signed carries the sign that
    makes the tangential-momentum flux term contribute with magnitude
    sin|theta| |P| and a definite sign.  For zero tangential momentum any
    eigenspinor works and theta keeps its magnitude.
    """
    if q_sign not in (1, -1):
        raise DomainError("q_sign must be +1 or -1")
    p_tangent = np.asarray(p_tangent, dtype=float)
    pnorm = float(np.linalg.norm(p_tangent))
    theta_signed = -q_sign * abs(theta)
    if pnorm == 0.0:
        return eigenspinor(rep, theta_signed, q_sign), theta_signed
    amat = momentum_operator(rep, p_tangent)
    qproj = eigenspace_projector(rep, theta_signed, q_sign)
    aproj = 0.5 * (rep.eye + amat / pnorm)
    joint = qproj @ aproj
    phi0 = None
    for k in range(rep.dim):
        v = joint[:, k]
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            phi0 = v / nrm
            break
    if phi0 is None:
        raise EigenconditionError("no joint eigenspinor found")  # unreachable
    qres = np.linalg.norm(chirality_operator(rep, theta_signed) @ phi0
                          - q_sign * phi0)
    ares = np.linalg.norm(amat @ phi0 - pnorm * phi0)
    if max(qres, ares) > 1e-10:
        raise EigenconditionError(
            f"joint eigenconditions violated: Q residual {qres}, A residual {ares}"
        )
    return phi0, theta_signed
