"""Graph surfaces with edge on the plane: expansions, contact-angle algebra,
the edge pairing reduction and the stability quadratic form."""

import numpy as np
import pytest

from halfmass import families, mots
from halfmass.errors import DomainError

from conftest import build_const_p_data

# default cap geometry: radius 2, plane offset 0.8, so cos(gamma) = 0.4 and
# the edge circle has radius rho = R sin(gamma)
CAP_COS = 0.4
CAP_GAMMA = float(np.arccos(CAP_COS))
# geodesic edge curvature closed form cos(gamma) / (R sin(gamma))
CAP_EDGE_H = 0.2 / np.sqrt(0.84)


def edge_points(lo=-0.55, hi=0.55, count=7):
    return np.array([[t, 0.0] for t in np.linspace(lo, hi, count)])


def interior_parameter_points(surface, count=5):
    bounds = np.asarray(surface.bounds())
    lo, hi = bounds[:, 0], bounds[:, 1]
    ts = np.linspace(0.15, 0.85, count)
    return np.array([lo + t * (hi - lo) for t in ts])


# ---------------------------------------------------------------------------
# null expansion oracles


def test_flat_horizontal_graph_has_zero_expansion(flat_data):
    surf = mots.flat_graph(3)
    out = mots.null_expansion(flat_data, surf,
                              interior_parameter_points(surf))
    assert np.max(np.abs(out["theta_plus"])) == 0.0
    assert out["is_mots"]


def test_constant_trace_p_shifts_expansion():
    # flat graph in flat metric with p = c * id: theta+ = H + tr_S p = 2c
    c = 0.35
    data = build_const_p_data(c * np.eye(3))
    surf = mots.flat_graph(3)
    out = mots.null_expansion(data, surf, interior_parameter_points(surf))
    assert np.max(np.abs(np.asarray(out["theta_plus"]) - 2.0 * c)) < 1e-14
    assert not out["is_mots"]


def test_sphere_cap_expansion_is_outward_positive(flat_data):
    # round sphere with the normal pointing at the asymptotic end:
    # theta+ = H = (n-1)/R, the untrapped sign
    surf = mots.sphere_cap(3)  # radius 2
    out = mots.null_expansion(flat_data, surf,
                              interior_parameter_points(surf))
    assert np.max(np.abs(np.asarray(out["theta_plus"]) - 1.0)) < 1e-12
    assert np.max(np.abs(np.asarray(out["mean_curvature"]) - 1.0)) < 1e-12


def test_tilted_graph_is_marginal(flat_data):
    surf = mots.tilted_graph(3, slope=0.5)
    out = mots.null_expansion(flat_data, surf,
                              interior_parameter_points(surf))
    assert np.max(np.abs(out["theta_plus"])) == 0.0
    assert out["is_mots"]


# ---------------------------------------------------------------------------
# pure-algebra trace identity


def test_trace_identity_thousand_samples():
    rng = np.random.default_rng(42)
    mats = rng.normal(size=(1000, 3, 3))
    p = 0.5 * (mats + np.swapaxes(mats, -1, -2))
    gam = rng.uniform(0.1, np.pi - 0.1, size=1000)
    frames, _ = np.linalg.qr(rng.normal(size=(1000, 3, 3)))
    res = mots.trace_identity_residual(p, gam, frames[..., 0], frames[..., 1])
    assert res.shape == (1000,)
    assert np.max(np.abs(res)) < 1e-13


def test_trace_identity_on_embedded_edge(flat_data):
    p = np.array([[0.15, 0.04, -0.02],
                  [0.04, -0.1, 0.06],
                  [-0.02, 0.06, 0.2]])
    data = build_const_p_data(p)
    surf = mots.sphere_cap(3)
    out = mots.boundary_trace_identity(data, surf, CAP_GAMMA, edge_points())
    assert np.max(np.abs(out["residual"])) < 1e-12
    assert np.max(np.abs(out["contact_defect"])) < 1e-12
    assert np.max(np.abs(out["frame_defect"])) < 1e-12


def test_trace_identity_rejects_wrong_contact_angle(flat_data):
    surf = mots.sphere_cap(3)
    with pytest.raises(DomainError):
        mots.boundary_trace_identity(flat_data, surf, 0.3, edge_points())


# ---------------------------------------------------------------------------
# edge pairing (capillary Robin reduction)


def test_cap_edge_curvature_closed_form(flat_data):
    out = mots.boundary_Z_term(flat_data, mots.sphere_cap(3), CAP_GAMMA,
                               edge_points())
    got = np.asarray(out["edge_mean_curvature"])
    assert np.max(np.abs(got + CAP_EDGE_H)) < 1e-12
    assert np.max(np.abs(np.asarray(out["plane_mean_curvature"]))) < 1e-14


def test_edge_pairing_value_matches_trace_rewrite(flat_data):
    p = np.array([[0.1, 0.0, 0.05], [0.0, 0.05, 0.0], [0.05, 0.0, -0.02]])
    data = build_const_p_data(p)
    out = mots.boundary_Z_term(data, mots.sphere_cap(3), CAP_GAMMA,
                               edge_points())
    assert np.max(np.abs(np.asarray(out["cross_check_defect"]))) < 1e-12


def test_free_boundary_reduction_matches_direct_pairing():
    # hemisphere meeting the plane orthogonally: the curvature form of the
    # edge pairing must reduce to the bare p(N, nu) contraction, with no
    # marginality assumption
    p = np.array([[0.15, 0.04, -0.02],
                  [0.04, -0.1, 0.06],
                  [-0.02, 0.06, 0.2]])
    data = build_const_p_data(p)
    hemi = mots.sphere_cap(3, center=(2.0, 0.0, 0.0))
    out = mots.boundary_Z_term(data, hemi, np.pi / 2, edge_points())
    value = np.asarray(out["value"])
    direct = np.asarray(out["p_normal_conormal"])
    assert np.max(np.abs(value - direct)) == 0.0
    assert np.max(np.abs(np.asarray(out["cross_check_defect"]))) < 1e-14


def test_edge_pairing_rejects_vanishing_sine(flat_data):
    surf = mots.flat_graph(3)
    with pytest.raises(DomainError):
        mots.boundary_Z_term(flat_data, surf, 0.0, edge_points(-0.4, 0.4, 3))


def test_robin_derivative_of_translation_weight(flat_data):
    # moving the cap along the graph axis preserves the contact angle, so
    # its normal speed phi = <e_1, N> = (x_1 - 2)/2 satisfies the Robin
    # condition d_nu log phi = -cot(gamma) S(nu, nu) = -cos(gamma)/(R sin)
    surf = mots.sphere_cap(3)

    def phi_fn(y):
        y = np.asarray(y, dtype=float)
        return (surf.fn(y) - 2.0) / 2.0

    def phi_grad(y):
        y = np.asarray(y, dtype=float)
        return surf.dfn(y) / 2.0

    phi = mots.SurfaceFunction(phi_fn, phi_grad)
    psi = mots.SurfaceFunction.constant(1.0)
    report = mots.stability_functional(flat_data, surf, CAP_GAMMA, psi, phi)
    z = np.asarray(report.z_nu_values)
    assert np.max(np.abs(z - CAP_EDGE_H)) < 1e-12


# ---------------------------------------------------------------------------
# stability functional and spectrum


def test_stability_functional_bundled_configuration(flat_data):
    surf = mots.sphere_cap(3)
    phi = mots.SurfaceFunction.constant(1.0)
    basis = mots.default_test_basis(surf, 10)
    assert len(basis) == 10
    worst = np.inf
    for psi in basis:
        rep = mots.stability_functional(flat_data, surf, CAP_GAMMA, psi, phi)
        total = rep.boundary_term + rep.gradient_term + rep.potential_term
        assert abs(rep.value - total) < 1e-14
        # flat data, constant weight: the potential and edge terms vanish
        assert np.max(np.abs(rep.q_values)) < 1e-13
        assert abs(rep.boundary_term) < 1e-13
        worst = min(worst, rep.value)
    assert worst >= -1e-8


def test_stability_functional_rejects_sign_changing_weight(flat_data):
    surf = mots.sphere_cap(3)
    psi = mots.SurfaceFunction.constant(1.0)
    bad = mots.SurfaceFunction.constant(-1.0)
    with pytest.raises(DomainError):
        mots.stability_functional(flat_data, surf, CAP_GAMMA, psi, bad)


def test_stability_spectrum_nonnegative_on_bundled_configuration(flat_data):
    surf = mots.sphere_cap(3)
    phi = mots.SurfaceFunction.constant(1.0)
    out = mots.stability_spectrum(flat_data, surf, CAP_GAMMA, phi)
    assert out["basis_size"] == 10
    assert len(out["eigenvalues"]) == 10
    assert out["smallest"] >= -1e-8
    assert out["smallest"] == min(out["eigenvalues"])


# ---------------------------------------------------------------------------
# construction guards


def test_surface_constructors_validate_boxes():
    with pytest.raises(DomainError):
        mots.flat_graph(3, origin=(-0.6, 0.1))
    with pytest.raises(DomainError):
        mots.sphere_cap(3, size=(5.0, 0.8))
    surf = mots.sphere_cap(3)
    x = surf.embed(np.array([0.2, 0.3]))
    assert abs(np.linalg.norm(x - np.array([2.0, 0.0, 0.8])) - 2.0) < 1e-12


def test_surface_requires_analytic_backend(sheared_data):
    from halfmass.geometry import GridPatch

    patch = GridPatch(origin=(1.5, 0.5, 0.0), shape=(9, 9, 9), h=0.1)
    grid = sheared_data.to_grid(patch)
    surf = mots.flat_graph(3)
    with pytest.raises(DomainError):
        mots.null_expansion(grid, surf, edge_points())


def test_default_basis_size_is_bounded():
    surf = mots.sphere_cap(3)
    with pytest.raises(DomainError):
        mots.default_test_basis(surf, 50)
