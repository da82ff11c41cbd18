"""Half-sphere charge integrals against closed forms and invariance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfmass import charges, families, geometry
from halfmass.errors import DomainError


def test_flat_charges_vanish(flat_data):
    rep = charges.compute_charges(flat_data)
    assert abs(rep.energy.value) < 1e-14
    assert np.max(np.abs(rep.momentum_vector)) < 1e-14


def test_schwarzschild_energy_flux_closed_form(schwarzschild_data):
    # for g = (1 + m/2r)^4 delta the raw half-sphere flux at radius r is
    # exactly 8 pi m (1 + m/2r)^3: the integrand is radial and the corner
    # term vanishes on a diagonal metric
    for r in (16.0, 32.0, 64.0):
        u3 = (1.0 + 0.5 / r) ** 3
        flux = charges.adm_energy_flux(schwarzschild_data, r)
        assert abs(flux - 8.0 * np.pi * u3) < 1e-10


def test_schwarzschild_extrapolated_energy(schwarzschild_data):
    rep = charges.compute_charges(schwarzschild_data)
    assert abs(rep.energy.value - 8.0 * np.pi) / (8.0 * np.pi) < 1e-3
    assert not rep.energy.divergent
    assert np.max(np.abs(rep.momentum_vector)) < 1e-12


def test_synthetic_momentum_flux_is_exact(synthetic_data):
    a = families.DEFAULT_MOMENTUM_MATRIX
    target = 2.0 * np.pi * (a[:, 2] - np.array([0.0, 0.0, 1.0]) * np.trace(a))
    for r in (16.0, 128.0):
        p = charges.adm_momentum_flux(synthetic_data, r)
        assert np.max(np.abs(p - target)) < 1e-12
    rep = charges.compute_charges(synthetic_data)
    assert np.max(np.abs(rep.momentum_vector - target)) < 1e-12
    assert abs(rep.energy.value) < 1e-13


def test_charge_report_serializes(synthetic_data):
    rep = charges.compute_charges(synthetic_data, theta=0.4)
    d = rep.to_dict()
    assert set(d) >= {"radii", "quadrature_degree", "energy", "momentum",
                      "energy_values", "momentum_values", "minkowski_norm"}
    assert d["theta"] == 0.4
    e_t, p_t, norm = charges.tilted_vector(rep, 0.4)
    assert abs(d["tilted_energy"] - e_t) < 1e-15


def test_tilted_vector_matches_boost():
    rep = charges.compute_charges(families.synthetic_momentum(3).data)
    theta = 0.65
    e_t, p_t, norm = charges.tilted_vector(rep, theta)
    boost = charges.boost_frame(theta)
    pair = boost @ np.array([rep.energy.value, rep.momentum_vector[-1]])
    assert abs(e_t - pair[0]) < 1e-13
    assert np.allclose(p_t, rep.momentum_vector[:-1])
    assert abs(norm - (-e_t ** 2 + p_t @ p_t)) < 1e-10
    with pytest.raises(DomainError):
        charges.tilted_vector(rep, 0.0)
    with pytest.raises(DomainError):
        charges.boost_frame(np.pi)


def test_energy_momentum_functional_reproduces_charges(schwarzschild_data,
                                                       synthetic_data):
    e = charges.energy_momentum_functional(schwarzschild_data, 1.0,
                                           np.zeros(3))
    rep = charges.compute_charges(schwarzschild_data)
    assert abs(e.value - rep.energy.value) < 1e-10
    p2 = charges.energy_momentum_functional(synthetic_data, 0.0,
                                            np.array([0.0, 1.0, 0.0]))
    rep = charges.compute_charges(synthetic_data)
    assert abs(p2.value - rep.momentum_vector[1]) < 1e-10


def test_rotation_invariance_single(synthetic_data):
    ang = 0.8
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    out = charges.invariance_test(synthetic_data, rotation=rot)
    assert out["energy_drift"] < 1e-12
    assert out["normal_momentum_drift"] < 1e-12
    assert out["tangential_transform_error"] < 1e-12


def test_translation_invariance(synthetic_data):
    out = charges.invariance_test(synthetic_data,
                                  translation=np.array([0.6, -0.4]))
    assert out["energy_drift"] < 1e-3
    assert out["normal_momentum_drift"] < 1e-3
    assert out["tangential_transform_error"] < 1e-3


def test_chart_isometry_guards():
    with pytest.raises(DomainError):
        charges.chart_isometry(3, rotation=np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        charges.chart_isometry(3, rotation=np.diag([1.0, -1.0]))
    with pytest.raises(DomainError):
        charges.chart_isometry(3, translation=np.array([1.0, 0.0, 0.0]))
    a_mat, b = charges.chart_isometry(3, translation=np.array([1.0, 0.5]))
    assert np.allclose(a_mat, np.eye(3))
    assert b[2] == 0.0


def test_extrapolation_requires_three_rungs():
    with pytest.raises(DomainError):
        charges.extrapolate_ladder([8.0, 16.0], [1.0, 1.1])


def test_extrapolation_flags_divergent_ladders():
    radii = np.array([16.0, 32.0, 64.0, 128.0])
    out = charges.extrapolate_ladder(radii, np.log(radii))
    assert out.divergent


def test_extrapolation_constant_ladder_short_circuits():
    out = charges.extrapolate_ladder([16.0, 32.0, 64.0], [2.5, 2.5, 2.5])
    assert out.value == 2.5
    assert out.rate is None
    assert not out.divergent


@settings(max_examples=60, deadline=None)
@given(limit=st.floats(-5.0, 5.0),
       coeff=st.floats(0.5, 3.0),
       rate=st.floats(0.6, 3.0))
def test_extrapolation_recovers_power_law(limit, coeff, rate):
    radii = np.array([8.0, 16.0, 32.0, 64.0, 128.0])
    values = limit + coeff * radii ** (-rate)
    out = charges.extrapolate_ladder(radii, values)
    assert not out.divergent
    assert abs(out.value - limit) < 1e-5
    assert abs(out.rate - rate) < 1e-3
