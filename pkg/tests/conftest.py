"""Shared fixtures: the analytic data sets the suite keeps coming back to."""

import numpy as np
import pytest

from halfmass import clifford, families, geometry

# wave covector and amplitude of the sheared test metric
SHEAR_WAVE = np.array([0.7, 0.4, 0.5])
SHEAR_AMP = 0.3


def shear_metric_field():
    """delta plus an oscillating (0,2)+(2,0) shear, exact derivatives.

    The off-diagonal component keeps the Cholesky boundary frame away from
    the coordinate axes, so boundary assemblies pick up genuine second-order
    discretization error instead of collapsing to roundoff.
    """
    n = 3

    def fn(x):
        x = np.asarray(x, dtype=float)
        s = SHEAR_AMP * np.sin(x @ SHEAR_WAVE)
        g = np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()
        g[..., 0, 2] += s
        g[..., 2, 0] += s
        return g

    def dfn(x):
        x = np.asarray(x, dtype=float)
        c = SHEAR_AMP * np.cos(x @ SHEAR_WAVE)
        out = np.zeros(x.shape[:-1] + (n, n, n))
        for k in range(n):
            out[..., 0, 2, k] = SHEAR_WAVE[k] * c
            out[..., 2, 0, k] = SHEAR_WAVE[k] * c
        return out

    def d2fn(x):
        x = np.asarray(x, dtype=float)
        s = SHEAR_AMP * np.sin(x @ SHEAR_WAVE)
        out = np.zeros(x.shape[:-1] + (n, n, n, n))
        for k in range(n):
            for l in range(n):
                out[..., 0, 2, k, l] = -SHEAR_WAVE[k] * SHEAR_WAVE[l] * s
                out[..., 2, 0, k, l] = -SHEAR_WAVE[k] * SHEAR_WAVE[l] * s
        return out

    return geometry.AnalyticSym2Field(fn, dfn, d2fn)


def zero_sym2(n):
    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n))

    def dfn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n))

    def d2fn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n, n))

    return geometry.AnalyticSym2Field(fn, dfn, d2fn)


def build_const_p_data(p_mat, n=3, name="const-p"):
    """Flat metric with a constant extrinsic tensor (not asymptotically flat,
    but every curvature-free identity can be checked against closed forms)."""
    p_mat = np.array(p_mat, dtype=float)
    if p_mat.shape != (n, n):
        raise ValueError("p matrix has the wrong shape")

    def p_fn(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(p_mat, x.shape[:-1] + (n, n)).copy()

    def dp_fn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n))

    def g_fn(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()

    def dg_fn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n))

    def d2g_fn(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n, n))

    metric = geometry.AnalyticSym2Field(g_fn, dg_fn, d2g_fn)
    ext = geometry.AnalyticSym2Field(p_fn, dp_fn)
    return geometry.InitialDataSet(geometry.Chart(n), metric, ext,
                                   decay_order=n - 1, name=name)


@pytest.fixture(scope="session")
def sheared_data():
    n = 3
    data = geometry.InitialDataSet(geometry.Chart(n), shear_metric_field(),
                                   zero_sym2(n), decay_order=1,
                                   name="sheared")
    return data


@pytest.fixture(scope="session")
def flat_data():
    return families.flat(3).data


@pytest.fixture(scope="session")
def schwarzschild_data():
    return families.schwarzschild(3, 1.0).data


@pytest.fixture(scope="session")
def synthetic_data():
    return families.synthetic_momentum(3).data


@pytest.fixture(scope="session")
def rep3():
    return clifford.build_rep(3)


@pytest.fixture(scope="session")
def const_p_factory():
    return build_const_p_data


def interior_points(count=40, seed=11, n=3):
    """Sample points in the half-space chart away from the excised ball."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        x = rng.uniform(-5.0, 5.0, size=n)
        x[-1] = abs(x[-1])
        if np.linalg.norm(x) > geometry.EXCISION_RADIUS + 0.75:
            pts.append(x)
    return np.array(pts)


def boundary_points(count=40, seed=13, n=3):
    pts = interior_points(count, seed, n)
    pts[:, -1] = 0.0
    keep = np.linalg.norm(pts, axis=1) > geometry.EXCISION_RADIUS + 0.75
    return pts[keep]
