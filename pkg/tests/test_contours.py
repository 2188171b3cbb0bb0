import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susydos.contours import (
    EnergyRangeError,
    alpha_exponent,
    build_plan,
    choose_A,
    exponent_f,
    gamma1_path,
    saddle_points,
    verify_claim_alpha,
    verify_claim_alpha_on_contour,
    verify_claim_f,
    verify_claim_g,
)

bulk = st.floats(-1.95, 1.95, allow_nan=False)


def test_saddle_examples():
    s = saddle_points(0.0)
    assert (s.s_plus, s.s_minus, s.z_plus, s.z_minus) == (1, -1, 1, -1)
    s = saddle_points(1.0)
    assert abs(s.s_plus - complex(math.sqrt(3) / 2, -0.5)) < 1e-13
    assert abs(s.z_plus - complex(math.sqrt(3) / 2, 0.5)) < 1e-13
    assert abs(saddle_points(-1.0).s_plus - complex(math.sqrt(3) / 2, 0.5)) < 1e-13


@pytest.mark.parametrize("E", [2.0, -2.5, float("nan")])
def test_saddles_reject_edge(E):
    with pytest.raises(EnergyRangeError):
        saddle_points(E)


@given(bulk)
def test_saddle_invariants(E):
    s = saddle_points(E)
    assert abs(s.s_plus * s.s_minus + 1) < 1e-13
    assert abs(s.z_plus * s.z_minus + 1) < 1e-13
    assert abs(abs(s.z_plus) - 1) < 1e-13 and abs(abs(s.z_minus) - 1) < 1e-13
    assert abs(s.z_plus - s.s_plus.conjugate()) < 1e-13


@settings(max_examples=200)
@given(bulk)
def test_saddle_residuals(E):
    s = saddle_points(E)
    for x in (s.s_plus, s.s_minus):
        assert abs(1j * E + x - 1 / x) < 1e-12
    for z in (s.z_plus, s.z_minus):
        assert abs(1j * E - z + 1 / z) < 1e-12


def test_choose_A_examples():
    assert choose_A(1.0, "gue") == 2.0
    assert choose_A(1.9, "gue") == pytest.approx(1.2422360, abs=1e-7)
    assert choose_A(1.7, "goe") == pytest.approx(1 / math.sqrt(0.445), abs=1e-14)
    assert choose_A(1.7, "goe") == pytest.approx(1.4990627, abs=1e-6)
    assert choose_A(1.7, "interp") == choose_A(1.7, "goe")
    assert choose_A(math.sqrt(3), "gue") == 2.0
    with pytest.raises(EnergyRangeError):
        choose_A(2.0, "gue")


def test_gamma1_path_examples():
    assert gamma1_path(0.7, 2.0, 0.0) == 0
    assert gamma1_path(0.7, 2.0, 1.0) == saddle_points(0.7).s_plus
    assert gamma1_path(0.0, 2.0, 3.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        gamma1_path(0.0, 2.0, -1.0)


@given(bulk)
def test_gamma1_continuity(E):
    A = choose_A(E, "gue")
    h = 1e-7
    assert abs(gamma1_path(E, A, A + h) - gamma1_path(E, A, A - h)) < 1e-6
    # derivative jumps at A (unless the ray is already horizontal)
    left = (gamma1_path(E, A, A) - gamma1_path(E, A, A - h)) / h
    right = (gamma1_path(E, A, A + h) - gamma1_path(E, A, A)) / h
    assert abs(right - 1) < 1e-6 and abs(left - saddle_points(E).s_plus) < 1e-6


def test_plan_passes_through_effective_saddle():
    plan = build_plan("goe", 10, 0.4)
    assert plan.effective_saddle == 0.5 * saddle_points(0.4).s_plus
    assert plan.A == choose_A(0.4, "goe") and plan.alpha_order
    gue_plan = build_plan("gue", 10, 0.4)
    assert gue_plan.alpha_order is None and gue_plan.effective_saddle == saddle_points(0.4).s_plus
    finer = gue_plan.refined()
    assert len(finer.gamma2) == 2 * len(gue_plan.gamma2)
    assert plan.tail_bound < 1e-40


def test_plan_rejects_edge_by_default():
    with pytest.raises(EnergyRangeError):
        build_plan("gue", 4, 1.96)
    build_plan("gue", 4, 1.96, edge=2.0)


def test_claim_f_gue_examples():
    rep = verify_claim_f(0.0, "gue")
    assert rep.passed and abs(rep.minimum_at - 1) <= 1e-3
    assert rep.minimum_value == pytest.approx(0.5, abs=1e-6)
    assert verify_claim_f(1.9, "gue").passed


def test_claim_f_goe_minimum_on_real_axis():
    # s^2 - ln(s)/2 is stationary at s = 1/2, the scaled saddle
    rep = verify_claim_f(0.0, "goe")
    assert rep.passed
    assert rep.minimum_value == pytest.approx(0.25 + math.log(2) / 2, abs=1e-6)
    s = np.linspace(0.05, 2, 20001)
    vals = exponent_f("goe", 0.0, s).real
    assert s[np.argmin(vals)] == pytest.approx(0.5, abs=1e-4)


def test_claim_f_rejects_near_edge():
    with pytest.raises(EnergyRangeError):
        verify_claim_f(1.96, "gue")


def test_claim_g_examples():
    rep = verify_claim_g(0.0)
    assert rep.passed and sorted(rep.minimum_at) == pytest.approx([0.0, math.pi], abs=1e-3)
    rep = verify_claim_g(1.0)
    assert rep.passed and sorted(rep.minimum_at) == pytest.approx([math.pi / 6, 5 * math.pi / 6], abs=1e-3)
    assert max(abs(x) for x in rep.details["derivative_at_predicted"]) < 1e-10


def test_claim_alpha_examples():
    rep = verify_claim_alpha(0.0, 1.0, 1.0)
    assert rep.passed and rep.minimum_at == pytest.approx(0.0, abs=2e-4)
    assert rep.minimum_value == pytest.approx(0.0, abs=1e-6)
    rep = verify_claim_alpha(0.5, complex(0.8, 0.3), complex(0.6, -0.1))
    assert rep.details["stationary_alpha_sq"] > 1
    assert np.isinf(alpha_exponent(1.0, 1.0, 1.0))


def test_claim_alpha_detects_violation():
    # strongly negative Re(st) puts a minimum away from zero
    rep = verify_claim_alpha(0.0, 1j, 1j)
    assert not rep.passed


@pytest.mark.parametrize("E", [0.0, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 1.9, -1.9])
def test_claims_hold_on_panel(E):
    assert verify_claim_f(E, "gue").passed
    assert verify_claim_f(E, "goe").passed
    assert verify_claim_g(E).passed
    rep = verify_claim_alpha_on_contour(E, pairs_per_axis=10)
    assert rep.passed and rep.details["min_4re_st_plus_1"] >= -1e-12
