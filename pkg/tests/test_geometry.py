"""Curvature, frames and boundary geometry against independent oracles."""

import numpy as np
import pytest
import sympy as sp

from halfmass import geometry
from halfmass.errors import DomainError

from conftest import SHEAR_AMP, SHEAR_WAVE, interior_points


def sympy_curvature(point):
    """Christoffel / Ricci / scalar curvature of the sheared metric via sympy.

    Completely independent route: symbolic differentiation of the metric
    components, evaluated exactly at one point.
    """
    xs = sp.symbols("x0 x1 x2", real=True)
    phase = sum(sp.Rational(c) * x for c, x in
                zip((sp.Rational(7, 10), sp.Rational(2, 5), sp.Rational(1, 2)), xs))
    s = sp.Rational(3, 10) * sp.sin(phase)
    g = sp.eye(3)
    g[0, 2] += s
    g[2, 0] += s
    ginv = g.inv()
    n = 3
    gam = [[[sp.Rational(0)] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                expr = sum(ginv[k, l] * (sp.diff(g[j, l], xs[i])
                                         + sp.diff(g[i, l], xs[j])
                                         - sp.diff(g[i, j], xs[l]))
                           for l in range(n)) / 2
                gam[k][i][j] = sp.simplify(expr)
    ric = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            expr = sp.Rational(0)
            for k in range(n):
                expr += sp.diff(gam[k][i][j], xs[k]) - sp.diff(gam[k][i][k], xs[j])
                for l in range(n):
                    expr += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k]
            ric[i, j] = expr
    scal = sum(ginv[i, j] * ric[i, j] for i in range(n) for j in range(n))
    subs = dict(zip(xs, [sp.Float(v, 30) for v in point]))
    gam_num = np.array([[[float(gam[k][i][j].subs(subs)) for j in range(n)]
                         for i in range(n)] for k in range(n)])
    ric_num = np.array([[float(ric[i, j].subs(subs)) for j in range(n)]
                        for i in range(n)])
    return gam_num, ric_num, float(scal.subs(subs))


def test_christoffel_ricci_scalar_match_symbolic_oracle(sheared_data):
    x = np.array([0.9, -0.4, 0.7])
    gam_ref, ric_ref, scal_ref = sympy_curvature(x)
    gam = geometry.christoffel(sheared_data, x)
    ric = geometry.ricci_tensor(sheared_data, x)
    scal = geometry.scalar_curvature(sheared_data, x)
    assert np.max(np.abs(gam - gam_ref)) < 1e-10
    assert np.max(np.abs(ric - ric_ref)) < 1e-9
    assert abs(scal - scal_ref) < 1e-9


def test_flat_data_is_euclidean(flat_data):
    x = np.array([2.0, -1.0, 1.5])
    assert np.allclose(flat_data.g(x), np.eye(3))
    assert np.max(np.abs(geometry.christoffel(flat_data, x))) == 0.0
    assert geometry.scalar_curvature(flat_data, x) == 0.0
    pack = geometry.orthonormal_frame(flat_data, x)
    assert np.allclose(pack.frame, np.eye(3))


def test_schwarzschild_slice_is_scalar_flat(schwarzschild_data):
    # time-symmetric vacuum data: the conformally flat slice has R = 0
    for x in interior_points(count=6, seed=3):
        assert abs(geometry.scalar_curvature(schwarzschild_data, x)) < 1e-9


def test_orthonormal_frame_diagonalizes_metric(sheared_data):
    for x in interior_points(count=8, seed=5):
        pack = geometry.orthonormal_frame(sheared_data, x)
        g = sheared_data.g(x)
        gram = pack.frame.T @ g @ pack.frame
        assert np.max(np.abs(gram - np.eye(3))) < 1e-12


def test_boundary_geometry_flat_plane_is_totally_geodesic(flat_data):
    x = np.array([2.5, 0.5, 0.0])
    bg = geometry.boundary_geometry(flat_data, x)
    assert np.allclose(bg.eta, [0.0, 0.0, -1.0])
    assert bg.mean_curvature == 0.0
    assert np.max(np.abs(bg.second_fundamental)) == 0.0
    with pytest.raises(DomainError):
        geometry.boundary_geometry(flat_data, np.array([2.5, 0.5, 0.3]))


def test_boundary_mean_curvature_matches_divergence_quotient(sheared_data):
    # independent finite-difference oracle: H = trace of the eta-derivative
    # restricted to the plane, assembled from the normalized normal field
    x = np.array([2.0, -1.5, 0.0])
    bg = geometry.boundary_geometry(sheared_data, x)

    def eta_field(pt):
        ginv = sheared_data.ginv(pt)
        return -ginv[:, 2] / np.sqrt(ginv[2, 2])

    h = 1e-6
    div = 0.0
    gam = geometry.christoffel(sheared_data, x)
    eta0 = eta_field(x)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        deta = (eta_field(x + e) - eta_field(x - e)) / (2 * h)
        cov = deta + gam[:, a, :] @ eta0
        div += cov[a]
    # the covariant divergence of the unit normal extended this way equals
    # the mean curvature of the level set
    assert abs(div - bg.mean_curvature) < 1e-6


def test_grid_backend_reproduces_analytic_jets_at_nodes(sheared_data):
    patch = geometry.GridPatch(origin=(1.5, 0.5, 0.0), shape=(13, 13, 13),
                               h=0.05)
    grid = sheared_data.to_grid(patch)
    assert grid.backend == "grid"
    x = patch.coords((6, 6, 4))
    assert np.max(np.abs(grid.g(x) - sheared_data.g(x))) < 1e-14
    # centered second-order stencils at h = 0.05: errors scale with h^2
    assert np.max(np.abs(grid.dg(x) - sheared_data.dg(x))) < 2e-5
    assert np.max(np.abs(grid.d2g(x) - sheared_data.d2g(x))) < 2e-4


def test_transform_data_pushes_metric_forward(sheared_data):
    c, s = np.cos(0.4), np.sin(0.4)
    a_mat = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    b = np.array([0.7, -0.3, 0.0])
    moved = geometry.transform_data(sheared_data, a_mat, b)
    x = np.array([2.2, 0.4, 1.1])
    y = a_mat.T @ (x - b)  # pullback point of the pushed-forward fields
    target = a_mat @ sheared_data.g(y) @ a_mat.T
    assert np.max(np.abs(moved.g(x) - target)) < 1e-14
    dg_target = np.einsum("ijm,ai,bj,cm->abc",
                          sheared_data.dg(y), a_mat, a_mat, a_mat)
    assert np.max(np.abs(moved.dg(x) - dg_target)) < 1e-13


def test_transform_data_rejects_plane_breaking_motion(sheared_data):
    bad = np.eye(3)
    bad[2, 0] = 0.3
    with pytest.raises(DomainError):
        geometry.transform_data(sheared_data, bad)


def test_decay_check_accepts_advertised_rates(schwarzschild_data, synthetic_data):
    rep = geometry.check_asymptotic_decay(schwarzschild_data)
    assert rep["monotone"]
    rep = geometry.check_asymptotic_decay(synthetic_data)
    assert rep["monotone"]


def test_chart_rejects_excised_points(flat_data):
    chart = flat_data.chart
    with pytest.raises(DomainError):
        chart.require_point(np.array([0.3, 0.2, 0.1]))
    with pytest.raises(DomainError):
        chart.require_point(np.array([2.0, 1.0, -0.5]))
    chart.require_point(np.array([2.0, 1.0, 0.5]))
