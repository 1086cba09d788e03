import numpy as np
import pytest

from slugsim import BiasPoint, DeviceParams, SimConfig


@pytest.fixture(scope="session")
def device():
    return DeviceParams()


@pytest.fixture(scope="session")
def shoulder_bias():
    # steep-slope working point on the rising side of the transfer curve
    return BiasPoint(I_b=27e-6, phi_a=0.2691)


@pytest.fixture(scope="session")
def falling_bias():
    # mirror point on the falling side, where the reverse coupling cancels
    return BiasPoint(I_b=27e-6, phi_a=0.7309)


@pytest.fixture(scope="session")
def fast_sim():
    return SimConfig(dt=0.02, t_total=4000.0, t_transient=500.0, seed=11)


@pytest.fixture(scope="session")
def quiet_sim():
    return SimConfig(dt=0.01, t_total=20000.0, t_transient=2000.0, seed=11,
                     noise_enabled=False)


def assert_close(actual, expected, rel, label=""):
    actual = float(actual)
    expected = float(expected)
    err = abs(actual - expected) / max(abs(expected), 1e-300)
    assert err <= rel, (f"{label or 'value'}: {actual:.6g} vs "
                        f"{expected:.6g} (rel err {err:.3g} > {rel:g})")


@pytest.fixture(scope="session")
def close():
    return assert_close


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(7)
