import pytest

from monopole_cones.tolerances import (TOL_SCALE_ENV, AcceptanceTolerances,
                                       Tolerances, acceptance_from_env)


def test_defaults_are_frozen():
    tol = Tolerances()
    with pytest.raises(AttributeError):
        tol.zero_vector = 1.0


def test_scaled_multiplies_every_field():
    acc = AcceptanceTolerances()
    doubled = acc.scaled(2.0)
    assert doubled.yang_l_drift == 2.0 * acc.yang_l_drift
    assert doubled.exp_benchmark == 2.0 * acc.exp_benchmark
    assert doubled.rk4_order_window == 2.0 * acc.rk4_order_window


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        AcceptanceTolerances().scaled(0.0)
    with pytest.raises(ValueError):
        AcceptanceTolerances().scaled(-1.0)


def test_env_scale_applies(monkeypatch):
    monkeypatch.setenv(TOL_SCALE_ENV, "10")
    acc = acceptance_from_env()
    assert acc.dirac_l_drift == pytest.approx(1e-5)


def test_env_unset_gives_defaults(monkeypatch):
    monkeypatch.delenv(TOL_SCALE_ENV, raising=False)
    assert acceptance_from_env() == AcceptanceTolerances()


def test_env_garbage_rejected(monkeypatch):
    monkeypatch.setenv(TOL_SCALE_ENV, "fast")
    with pytest.raises(ValueError):
        acceptance_from_env()
