import numpy as np
import pytest

from cbod.params import (
    Constant,
    DomainError,
    OscillatorParams,
    RampSchedule,
    as_coefficient,
    ramp_eval,
    validate,
)


def test_ramp_endpoint_values_exact():
    r = RampSchedule(50.0, 25.0, 1.0)
    assert ramp_eval(r, 0.0) == (50.0, 0.0, 0.0)
    assert ramp_eval(r, 1.0) == (75.0, 0.0, 0.0)


def test_ramp_midpoint():
    v, d1, d2 = ramp_eval(RampSchedule(50.0, 25.0, 1.0), 0.5)
    assert v == pytest.approx(62.5, abs=1e-12)
    assert d1 == pytest.approx(50.0, abs=1e-12)  # (k1/Tf)(1 - cos pi)
    assert abs(d2) < 1e-12


def test_ramp_endpoints_exact_for_awkward_durations():
    # the 1/Tf**2 derivative scale must not amplify trig roundoff
    for k0, k1, Tf in ((1.0, 30.0, 0.05), (100.0, -40.0, 2.5)):
        r = RampSchedule(k0, k1, Tf)
        assert ramp_eval(r, 0.0) == (k0, 0.0, 0.0)
        assert ramp_eval(r, Tf) == (k0 + k1, 0.0, 0.0)


def test_ramp_domain_error():
    r = RampSchedule(50.0, 25.0, 1.0)
    with pytest.raises(DomainError):
        ramp_eval(r, -0.01)
    with pytest.raises(DomainError):
        ramp_eval(r, 1.01)


def test_ramp_derivatives_match_finite_differences():
    rng = np.random.default_rng(7)
    r = RampSchedule(50.0, 25.0, 1.0)
    d2_scale = abs(r.k1) * 2.0 * np.pi / r.Tf**2
    for t in rng.uniform(0.05, 0.95, 100):
        v, d1, d2 = ramp_eval(r, t)
        h = 1e-6
        fd1 = (r.value(t + h) - r.value(t - h)) / (2 * h)
        assert d1 == pytest.approx(fd1, rel=1e-6, abs=1e-6)
        # the curvature needs a wider stencil to stay above roundoff
        h = 1e-4
        fd2 = (r.value(t + h) - 2 * v + r.value(t - h)) / h**2
        assert abs(d2 - fd2) <= 1e-6 * max(abs(d2), d2_scale)


def test_ramp_monotone_for_positive_strength():
    r = RampSchedule(50.0, 25.0, 1.0)
    ts = np.linspace(0.0, 1.0, 501)
    vals = r.value(ts)
    assert np.all(np.diff(vals) >= -1e-12)
    assert np.all(np.asarray(r.d1(ts)) >= -1e-15)


def test_constant_coefficient():
    c = Constant(4.0)
    assert (c.value(0.3), c.d1(0.3), c.d2(0.3)) == (4.0, 0.0, 0.0)
    assert as_coefficient(4.0).value(123.0) == 4.0


def test_params_coercion_and_validation():
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    ks, kf, ki = p.springs_at(0.0)
    assert (ks, kf, ki) == (100.0, 100.0, 50.0)
    assert p.mass_ratio == pytest.approx(0.1)
    with pytest.raises(ValueError):
        OscillatorParams(-1.0, 1.0, 100.0, 100.0, 50.0)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, 0.0, 100.0, 100.0, 50.0)


def test_validate_static_ok():
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    assert validate(p, 1.0).ok


def test_validate_coupling_ramp_violation_near_end():
    p = OscillatorParams(
        10.0, 1.0, 100.0, 100.0, RampSchedule(0.0, 101.0, 1.0)
    )
    report = validate(p, 1.0)
    assert not report.ok
    assert report.first_violation_time > 0.8
    assert "k_i" in report.reason


def test_validate_decoupled_ok():
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 0.0)
    assert validate(p, 1.0).ok
