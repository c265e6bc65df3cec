"""Geometric quantities of the graph interface z = h(x).

An :class:`InterfaceState` caches the slope, tangent angle, curvature and
line element of the interface.  Seminorms along the curve are obtained by
resampling onto a uniform arclength grid (:func:`to_arclength`) and reusing
the flat spectral calculus, which is valid as long as the slope stays
bounded by one.
"""

import numpy as np

from .errors import SlopeGateViolation
from .spectral import Grid, SpectralProfile, derivative


class InterfaceState:
    """Height profile plus cached geometric fields of the interface."""

    __slots__ = ("h", "slope", "angle", "curvature", "line_element")

    def __init__(self, h, slope, angle, curvature, line_element):
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "curvature", curvature)
        angle = np.ascontiguousarray(angle, dtype=float)
        line_element = np.ascontiguousarray(line_element, dtype=float)
        angle.setflags(write=False)
        line_element.setflags(write=False)
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "line_element", line_element)

    def __setattr__(self, name, value):
        raise AttributeError("InterfaceState is immutable")

    @property
    def grid(self):
        return self.h.grid


def build_state(h):
    """Populate all cached fields from a height profile.

    The slope is the exact spectral derivative of ``h``; the curvature is
    the spectral ``h_xx`` divided pointwise by the cubed line element.
    """
    slope = derivative(h, 1)
    hxx = derivative(h, 2)
    line_element = np.sqrt(1.0 + slope.samples**2)
    angle = np.arctan(slope.samples)
    curvature = SpectralProfile.from_samples(h.grid, hxx.samples / line_element**3)
    return InterfaceState(h, slope, angle, curvature, line_element)


def energy(state):
    """Excess arclength over the flat interface, integral of sqrt(1+h_x^2)-1.

    Evaluated with the (spectrally accurate) periodic rectangle rule.  The
    algebraically equivalent form integral h_x^2/(sqrt(1+h_x^2)+1) dx is
    used to avoid cancellation for small slopes.
    """
    hx2 = state.slope.samples ** 2
    return float(state.grid.spacing * np.sum(hx2 / (state.line_element + 1.0)))


def sup_slope(state):
    """Grid maximum of |h_x|, the quantity the slope gate acts on."""
    return state.slope.max_abs()


def sup_height(state):
    return state.h.max_abs()


def total_arclength(state):
    return float(state.grid.spacing * np.sum(state.line_element))


def arclength_coordinate(state, points):
    """s(x) = integral_0^x sqrt(1+h_y^2) dy at arbitrary points, spectrally."""
    le = SpectralProfile.from_samples(state.grid, state.line_element)
    k = state.grid.wavenumbers
    anti = np.zeros_like(le.coeffs)
    nz = k != 0.0
    anti[nz] = le.coeffs[nz] / (1j * k[nz])
    anti[state.grid.num_points // 2] = 0.0
    osc = SpectralProfile.from_coeffs(state.grid, anti)
    points = np.asarray(points, dtype=float)
    return le.mean * points + osc.evaluate(points) - osc.evaluate(0.0)


def to_arclength(state, q):
    """Resample a profile q(x) onto a uniform grid in arclength.

    The map x -> s(x) is inverted by Newton iteration (it is strictly
    increasing since the line element is >= 1) and ``q`` is evaluated at
    the preimages by trigonometric interpolation.  The returned profile
    lives on a grid whose length is the total arclength of the interface.
    """
    if sup_slope(state) > 1.0:
        raise SlopeGateViolation(
            "arclength resampling requires sup|h_x| <= 1, got "
            f"{sup_slope(state):.6f}"
        )
    n = state.grid.num_points
    le = SpectralProfile.from_samples(state.grid, state.line_element)
    s_total = le.mean * state.grid.length
    s_targets = (s_total / n) * np.arange(n)
    x = s_targets / le.mean
    for _ in range(30):
        res = s_targets - arclength_coordinate(state, x)
        x = x + res / np.maximum(le.evaluate(x), 1.0)
        if np.abs(res).max() <= 1e-13 * max(s_total, 1.0):
            break
    values = q.evaluate(x)
    return SpectralProfile.from_samples(Grid(s_total, n), values)
