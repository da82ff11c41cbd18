"""The bundled data-set catalog and its advertised energy conditions."""

import numpy as np
import pytest

from halfmass import constraints, families
from halfmass.errors import DomainError

from conftest import boundary_points, interior_points


def test_catalog_names():
    assert families.family_names() == ["conformal", "flat", "schwarzschild",
                                       "synthetic-momentum"]
    with pytest.raises(DomainError):
        families.make_family("wormhole")


def test_advertised_dec_flags_are_honest():
    pts = interior_points(count=20, seed=31)
    bpts = boundary_points(count=15, seed=32)
    for name in families.family_names():
        rec = families.make_family(name)
        interior = constraints.check_interior_dec(rec.data, pts)
        boundary = constraints.check_tilted_boundary_dec(rec.data, 0.0, 1, bpts)
        if rec.interior_dec:
            assert not interior.violation, name
        else:
            assert interior.violation, name
        if rec.boundary_dec:
            assert not boundary.violation, name


def test_conformal_family_is_vacuum():
    rec = families.make_family("conformal", amplitude=0.6, depth=2.0)
    assert rec.params["amplitude"] == 0.6
    for x in interior_points(count=5, seed=33):
        assert abs(constraints.energy_density(rec.data, x)) < 1e-9


def test_builder_guards():
    with pytest.raises(DomainError):
        families.schwarzschild(mass=-1.0)
    with pytest.raises(DomainError):
        families.conformal(depth=0.0)
    with pytest.raises(DomainError):
        families.synthetic_momentum(matrix=np.array([[0.0, 1.0, 0.0],
                                                     [0.0, 0.0, 0.0],
                                                     [0.0, 0.0, 0.0]]))
    with pytest.raises(DomainError):
        families.synthetic_momentum(decay=0.5)


def test_momentum_family_decay_parameter_scales_p():
    rec2 = families.synthetic_momentum(decay=2.0)
    rec3 = families.synthetic_momentum(decay=3.0)
    x = np.array([4.0, 0.0, 3.0])  # |x| = 5
    ratio = rec3.data.p(x) / rec2.data.p(x)
    assert np.allclose(ratio, 1.0 / 5.0)
