import math

import numpy as np
import pytest

from qpsl import floquet, potential
from qpsl.errors import BracketingFailed, IntegrationDrift
from qpsl.floquet import discriminant, integrate_fundamental, spectrum_shooting
from qpsl.galerkin import Method, PhaseParameter, spectrum_galerkin

from conftest import builtin_potentials

PI = math.pi


@pytest.mark.parametrize("lam, expected", [
    (PI ** 2, (-1.0, 0.0, 0.0, -1.0)),
    (0.0, (1.0, 1.0, 0.0, 1.0)),
    (-1.0, (math.cosh(1), math.sinh(1), math.sinh(1), math.cosh(1))),
])
def test_free_transfer_matrix(lam, expected):
    tm = integrate_fundamental(potential.zero(), lam)
    np.testing.assert_allclose((tm.c1, tm.s1, tm.dc1, tm.ds1), expected, rtol=0, atol=1e-9)
    assert abs(tm.wronskian - 1) <= 1e-9


def test_free_discriminant_closed_form():
    assert discriminant(potential.zero(), 4 * PI ** 2) == pytest.approx(2, abs=1e-9)
    assert discriminant(potential.zero(), PI ** 2) == pytest.approx(-2, abs=1e-9)
    for lam in np.linspace(0, 400, 81):
        assert abs(discriminant(potential.zero(), lam) - 2 * math.cos(math.sqrt(lam))) <= 1e-8
    for lam in np.linspace(-20, -0.5, 14):
        assert abs(discriminant(potential.zero(), lam) - 2 * math.cosh(math.sqrt(-lam))) <= 1e-8


@pytest.mark.parametrize("p", builtin_potentials(), ids=lambda p: p.name)
def test_wronskian_conserved(p):
    for lam in np.linspace(-2 * p.sup_bound() - 1, 1500, 40):
        tm = integrate_fundamental(p, lam)
        scale = max(1.0, abs(tm.c1 * tm.ds1) + abs(tm.s1 * tm.dc1))
        assert abs(tm.wronskian - 1) <= 1e-9 * scale


def test_loose_tolerance_trips_drift_check():
    with pytest.raises(IntegrationDrift):
        integrate_fundamental(potential.mathieu(1.0), 900.0, ode_tol=1e-2)


def test_lambda_derivatives_match_finite_differences():
    p = potential.two_mode(0.5, 0.25)
    args = floquet._kernel_args(p)
    lam, h = 37.0, 1e-5
    mid = floquet._integrate_checked(args, lam, 1e-12).y
    up = floquet._integrate_checked(args, lam + h, 1e-12).y
    down = floquet._integrate_checked(args, lam - h, 1e-12).y
    np.testing.assert_allclose(mid[4:], (up[:4] - down[:4]) / (2 * h), rtol=1e-6, atol=1e-8)


def test_free_spectrum_quarter_phase():
    s = spectrum_shooting(potential.zero(), PhaseParameter(PI / 2), 3)
    np.testing.assert_allclose(s.values, [(PI / 2) ** 2, (3 * PI / 2) ** 2, (5 * PI / 2) ** 2],
                               rtol=0, atol=1e-7)
    assert s.method is Method.SHOOTING


def test_free_spectrum_periodic_tangency():
    s = spectrum_shooting(potential.zero(), PhaseParameter(0.0), 3)
    np.testing.assert_allclose(s.values, [0, 4 * PI ** 2, 4 * PI ** 2], rtol=0, atol=1e-7)


def test_free_spectrum_antiperiodic_tangency():
    s = spectrum_shooting(potential.zero(), PhaseParameter.from_pi_fraction(1, 1), 4)
    np.testing.assert_allclose(s.values, [PI ** 2, PI ** 2, 9 * PI ** 2, 9 * PI ** 2],
                               rtol=0, atol=1e-7)


def test_open_gap_resolved_at_periodic_edge():
    # two-mode opens a periodic gap of width ~2|q_2| at 4 pi^2: both edges must be found
    p, t = potential.two_mode(0.5, 0.25), PhaseParameter(0.0)
    s = spectrum_shooting(p, t, 5)
    g = spectrum_galerkin(p, t, k=5)
    assert s.values[2] - s.values[1] > 0.3
    np.testing.assert_allclose(s.values, g.values, rtol=1e-6)


@pytest.mark.parametrize("p", builtin_potentials(), ids=lambda p: p.name)
@pytest.mark.parametrize("t", [0.3, PI / 2, 5.9, 2.0, 1.0])
def test_reflection_gives_identical_values(p, t):
    a = spectrum_shooting(p, PhaseParameter(t), 10)
    b = spectrum_shooting(p, PhaseParameter(2 * PI - t), 10)
    assert a.values == b.values


@pytest.mark.parametrize("t", [0.0, 0.3, PI / 2, PI, 5.9])
def test_root_count_below_threshold(t):
    phase = PhaseParameter(t)
    s = spectrum_shooting(potential.zero(), phase, 15)
    free = sorted((2 * PI * n + phase.t) ** 2 for n in range(-20, 21))
    for cap in (1.0, 50.0, 200.0, 700.0, 1200.0):
        assert sum(v < cap for v in s.values) == sum(v < cap for v in free)


@pytest.mark.parametrize("p", builtin_potentials(), ids=lambda p: p.name)
@pytest.mark.parametrize("t", [0.3, PI / 2, PI, 3 * PI / 2, 5.9])
def test_agrees_with_galerkin(p, t):
    phase = PhaseParameter(t)
    s = spectrum_shooting(p, phase, 10)
    g = spectrum_galerkin(p, phase, k=10)
    rel = np.abs(np.array(s.values) - g.values) / np.maximum(1.0, np.abs(g.values))
    assert rel.max() <= 1e-6


def test_constant_sampled_potential():
    p = potential.Potential.from_samples([2.5] * 8)
    s = spectrum_shooting(p, PhaseParameter(1.0), 5)
    free = sorted((2 * PI * n + 1.0) ** 2 + 2.5 for n in range(-5, 6))[:5]
    np.testing.assert_allclose(s.values, free, rtol=0, atol=1e-7)


def test_bracketing_failure(monkeypatch):
    monkeypatch.setattr(floquet, "scan_parameters", lambda p, tau, count: (-1.0, 0.5, 5.0))
    with pytest.raises(BracketingFailed):
        spectrum_shooting(potential.zero(), PhaseParameter(1.0), 3)


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        spectrum_shooting(potential.zero(), PhaseParameter(1.0), 0)
