"""Second-order finite-difference stencils on uniform grids.

Interior nodes use central differences; nodes on a patch face fall back to
one-sided three-point (first derivative) or four-point (second derivative)
rules.  Every stencil here is exact on quadratics, which several tests rely
on to separate discretization error from algebra errors.
"""
from __future__ import annotations

import numpy as np

# offset/weight tables, h-scaling applied at use time
_D1_CENTRAL = ((-1, 1), (-0.5, 0.5))
_D1_LEFT = ((0, 1, 2), (-1.5, 2.0, -0.5))
_D1_RIGHT = ((0, -1, -2), (1.5, -2.0, 0.5))
_D2_CENTRAL = ((-1, 0, 1), (1.0, -2.0, 1.0))
_D2_LEFT = ((0, 1, 2, 3), (2.0, -5.0, 4.0, -1.0))
_D2_RIGHT = ((0, -1, -2, -3), (2.0, -5.0, 4.0, -1.0))


def d1_stencil(i: int, length: int):
    """Offsets and weights (unscaled by h) for d/dx at node ``i``."""
    if length < 3:
        raise ValueError("axis too short for a second-order first derivative")
    if i == 0:
        return _D1_LEFT
    if i == length - 1:
        return _D1_RIGHT
    return _D1_CENTRAL


def d2_stencil(i: int, length: int):
    """Offsets and weights (unscaled by h^2) for d2/dx2 at node ``i``."""
    if length < 4:
        raise ValueError("axis too short for a second-order second derivative")
    if i == 0:
        return _D2_LEFT
    if i == length - 1:
        return _D2_RIGHT
    return _D2_CENTRAL


def partial1(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """First partial along ``axis`` of a node-sampled array, same shape."""
    a = np.moveaxis(values, axis, 0)
    if a.shape[0] < 3:
        raise ValueError("axis too short for a second-order first derivative")
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
    out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def partial2(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second partial along a single axis, same shape as the input."""
    a = np.moveaxis(values, axis, 0)
    if a.shape[0] < 4:
        raise ValueError("axis too short for a second-order second derivative")
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / (h * h)
    out[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / (h * h)
    out[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def node_partial1(values: np.ndarray, idx, axis: int, h: float):
    """First partial at one node; ``values`` has node axes first."""
    offs, wts = d1_stencil(idx[axis], values.shape[axis])
    acc = None
    for o, w in zip(offs, wts):
        j = list(idx)
        j[axis] += o
        term = w * values[tuple(j)]
        acc = term if acc is None else acc + term
    return acc / h


def node_partial2(values: np.ndarray, idx, axis: int, h: float):
    offs, wts = d2_stencil(idx[axis], values.shape[axis])
    acc = None
    for o, w in zip(offs, wts):
        j = list(idx)
        j[axis] += o
        term = w * values[tuple(j)]
        acc = term if acc is None else acc + term
    return acc / (h * h)


def node_partial_mixed(values: np.ndarray, idx, axis_a: int, axis_b: int, h: float):
    """Mixed second partial at one node, composed from two first-derivative rules."""
    offs_a, wts_a = d1_stencil(idx[axis_a], values.shape[axis_a])
    acc = None
    for oa, wa in zip(offs_a, wts_a):
        j = list(idx)
        j[axis_a] += oa
        term = wa * node_partial1(values, tuple(j), axis_b, h)
        acc = term if acc is None else acc + term
    return acc / h
