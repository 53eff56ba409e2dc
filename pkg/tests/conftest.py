import numpy as np
import pytest

from csicast.utils import ini_reader
from csicast.utils.core_types import (ChannelProfile, NoiseType,
                                      ScenarioDescriptor, SystemConfig)


@pytest.fixture
def system():
    """Small TDD system used across the test-suite."""
    return SystemConfig(n_tx=2, n_sc=8, n_guard=2, hist_len=6, pred_len=2)


@pytest.fixture
def fdd_system(system):
    return system.with_duplex('FDD')


@pytest.fixture
def scenario():
    return ScenarioDescriptor(10.0, 100e-9, ChannelProfile.NLOS_A,
                              NoiseType.NONE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j*rng.standard_normal(shape)


@pytest.fixture
def tiny_conf(tmp_path):
    """Flat run configuration small enough for end-to-end runs."""
    return ini_reader.override(
        ini_reader.default_config(),
        run__out=str(tmp_path / 'data'),
        system__n_tx=2, system__n_sc=4, system__n_guard=2,
        system__hist_len=6, system__pred_len=2,
        scenario__velocities=[1.0, 30.0],
        scenario__delay_spreads=[100e-9],
        scenario__profiles=['NLOS-A'],
        scenario__noise={'AWGN': [10, 20]},
        scenario__n_samples=4,
        model__kind='rnn',
        rnn__hidden_dim=4, rnn__n_layers=1,
        train__max_epochs=2, train__batch_size=8,
        eval__timing_reps=2, eval__timing_warmup=1, eval__acf_max_lag=3,
        report__plots=False)
