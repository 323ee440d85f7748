"""Time polynomials: ring structure, calculus, substitutions, inversion."""

from fractions import Fraction as F

import pytest

from qakns.series import XSeries
from qakns.timepoly import TimePoly

VARS = ((1, 0), (1, 1), (2, 0))
TMAX = 4
N = 6


def const(c):
    return TimePoly.constant(c, VARS, TMAX, N)


def var(v):
    return TimePoly.variable(v, VARS, TMAX, N)


def test_ring_basics():
    t = var((1, 0))
    s = var((1, 1))
    p = (t + s) * (t - s)
    expect = t * t - s * s
    assert (p - expect).is_zero()
    assert (const(1) * p - p).is_zero()
    assert (p - p).is_zero()
    assert (-p + p).is_zero()


def test_total_degree_truncation_marks_validity():
    t = var((1, 0))
    p4 = t * t * t * t
    assert p4.is_exact
    p5 = p4 * t
    assert not p5.is_exact
    assert p5.tvalid == TMAX
    assert p5.is_zero()  # nothing stored survives within the cap


def test_t_derive():
    t, s = var((1, 0)), var((1, 1))
    p = t * t * s + s
    d = p.t_derive((1, 0))
    assert (d - (const(2) * t * s)).is_zero()
    ds = p.t_derive((1, 1))
    assert (ds - (t * t + const(1))).is_zero()
    assert p.t_derive((2, 0)).is_zero()


def test_shift_var_binomial():
    t = var((1, 0))
    x = XSeries.monomial(1, 1, N)
    p = t * t
    shifted = p.shift_var((1, 0), x)
    expect = t * t + const(2).scale_series(x) * t + const(1).scale_series(x * x)
    assert (shifted - expect).is_zero()


def test_shift_requires_exact_polynomial():
    t = var((1, 0))
    capped = (t * t).with_tvalid(1)
    with pytest.raises(ValueError):
        capped.shift_var((1, 0), XSeries.one(N))


def test_invert_geometric():
    t = var((1, 0))
    p = const(1) + t
    inv = p.invert()
    prod = p * inv
    assert (prod - const(1)).is_zero()
    assert inv.tvalid == TMAX
    # coefficients alternate sign
    for e, c in inv.terms.items():
        deg = sum(e)
        assert c.constant_term() == F(-1) ** deg


def test_invert_needs_unit_constant():
    t = var((1, 0))
    with pytest.raises(ZeroDivisionError):
        t.invert()


def test_invert_scaled_constant_is_exact():
    p = const(F(3, 2))
    inv = p.invert()
    assert inv.is_exact
    assert (p * inv - const(1)).is_zero()


def test_coefficient_x_validity_propagates():
    t = var((1, 0))
    limited = const(1).map_coeffs(lambda s: s.with_valid(2))
    p = t.scale_series(XSeries.monomial(1, 1, N)) + limited
    assert p.valid == 2
