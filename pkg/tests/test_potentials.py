import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgegap.errors import ConstantPotential
from edgegap.potentials import (EdgePotential, Perturbation,
                                finiteness_predicate, gap_condition,
                                step_potential, upper_envelope)

from conftest import rect


def test_step_values_and_limits():
    w = step_potential(-0.5, 1.5, 0.3)
    assert w(0.29) == -0.5
    assert w(0.3) == 1.5  # right-closed jump
    assert w.w_minus_limit == -0.5
    assert w.w_plus_limit == 1.5
    assert w.x_plus == 0.3


def test_constant_profile_rejected():
    with pytest.raises(ConstantPotential):
        step_potential(1.0, 1.0, 0.0)


def test_piecewise_constant_monotone_required():
    with pytest.raises(ValueError):
        EdgePotential(kind="piecewise_constant", breakpoints=(0.0, 1.0),
                      values=(0.0, 2.0, 1.0))
    w = EdgePotential(kind="piecewise_constant", breakpoints=(-1.0, 0.5),
                      values=(0.0, 0.25, 1.0))
    assert w(-2.0) == 0.0 and w(0.0) == 0.25 and w(1.0) == 1.0
    assert w.x_plus == 0.5


def test_smooth_monotone_never_attains_supremum():
    w = EdgePotential(kind="smooth_monotone", w_minus=0.0, w_plus=1.0,
                      center=0.0, width=0.7)
    assert w.x_plus == math.inf
    # strictly increasing where the transition is resolved in double precision
    xs = np.linspace(-6, 6, 101)
    vals = w(xs)
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] < 1.0 and w(1e6) <= 1.0


def test_cell_average_splits_jump_exactly():
    w = step_potential(0.0, 1.0, 0.0)
    h = 0.02
    # cell centered on the jump averages the two sides
    avg = w.cell_average(np.array([0.0, -1.0, 1.0, h / 4]), h)
    assert avg[0] == pytest.approx(0.5, abs=1e-14)
    assert avg[1] == 0.0 and avg[2] == 1.0
    assert avg[3] == pytest.approx(0.75, abs=1e-14)


@given(st.floats(-3, 3), st.floats(0.05, 2.5), st.floats(-2, 2))
def test_cell_average_matches_quadrature(x0, h, c):
    w = step_potential(0.0, 1.0, x0)
    t = np.linspace(c - h / 2, c + h / 2, 20001)
    brute = np.trapezoid(w(t), t) / h
    assert w.cell_average(np.array([c]), h)[0] == pytest.approx(brute, abs=5e-4)


def test_gap_condition():
    assert gap_condition(step_potential(0.0, 1.0, 0.0), 1.0)
    assert not gap_condition(step_potential(0.0, 2.0, 0.0), 1.0)
    assert gap_condition(step_potential(0.0, 2.0, 0.0), 1.01)


def test_upper_envelope_two_step():
    w = EdgePotential(kind="piecewise_constant", breakpoints=(-0.3, 0.0),
                      values=(0.0, 0.6, 1.0))
    env = upper_envelope(w, 0.1)
    assert env.kind == "two_step_upper"
    assert env(-0.11) == w(-0.1)  # W(-delta) is the lower plateau
    assert env(-0.1) == 1.0
    xs = np.linspace(-2, 2, 401)
    assert np.all(env(xs) >= w(xs) - 1e-15)


def test_upper_envelope_needs_room_below_saturation(step01):
    env = upper_envelope(step01, 0.1)
    assert env(-0.11) == 0.0 and env(-0.1) == 1.0
    # a profile already saturated at -delta leaves no envelope gap
    w2 = step_potential(0.0, 1.0, -0.5)
    with pytest.raises(ValueError):
        upper_envelope(w2, 0.1)


def test_perturbation_defaults_and_containment():
    v = Perturbation(support=rect(-1, 1, -1, 1), amplitude=3.0)
    assert v.omega_minus is v.support and v.omega_plus is v.support
    assert v.c0_minus == 3.0 and v.c0_plus == 3.0
    assert v.x_inf == -1.0 and v.x_sup == 1.0
    assert v(0.0, 0.0) == 3.0 and v(2.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        Perturbation(support=rect(-1, 1, -1, 1),
                     omega_minus=rect(-2, 0, 0, 1))


def test_sandwich_constants_bracket_amplitude():
    with pytest.raises(ValueError):
        Perturbation(support=rect(-1, 1, -1, 1), amplitude=1.0,
                     c0_minus=2.0, c0_plus=3.0)
    v = Perturbation(support=rect(-1, 1, -1, 1), amplitude=2.0,
                     omega_minus=rect(-0.5, 0.5, -0.5, 0.5),
                     omega_plus=rect(-2, 2, -2, 2),
                     c0_minus=1.0, c0_plus=4.0)
    assert v.c0_minus < v.amplitude < v.c0_plus


def test_finiteness_predicate(step01):
    left = Perturbation(support=rect(-2, -1, 0, 1))
    straddle = Perturbation(support=rect(-0.25, 0.4, -0.5, 0.5))
    assert finiteness_predicate(left, step01)
    assert not finiteness_predicate(straddle, step01)
