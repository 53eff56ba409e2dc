import numpy as np
import pytest
import torch
from numpy.testing import assert_allclose, assert_array_equal

from csicast.channel.channel_sim import make_dataset
from csicast.model import baselines as bs
from csicast.stats.metrics import evaluate_model
from csicast.utils.core_types import (CsiSequence, ScenarioDescriptor,
                                      SystemConfig, time_axis)
from csicast.utils.errors import ConfigError, EmptyHistory

from conftest import crandn


def _sigmoid(v):
    return 1/(1 + np.exp(-v))


def test_np_repeats_last_step(rng):
    dt = 1e-3
    hist = CsiSequence(crandn(rng, 2, 5, 4), time_axis(5, dt, 0.02))
    pred = bs.np_predict(hist, 3)
    assert pred.shape == (2, 3, 4)
    for k in range(3):
        assert_array_equal(pred.data[:, k], hist.data[:, -1])
    assert_allclose(pred.timestamps, 0.02 + dt*np.arange(5, 8))


def test_np_empty_history():
    with pytest.raises(EmptyHistory):
        bs.np_predict(CsiSequence(np.zeros((2, 0, 4), dtype=complex),
                                  np.zeros(0)), 2)


def test_np_module_matches_function(rng, system):
    model = bs.NoPrediction(system)
    x = torch.from_numpy(crandn(rng, 3, 2, 6, 8))
    y = model(x)
    assert y.shape == (3, 2, 2, 8)
    assert torch.equal(y[:, :, 1], x[:, :, -1])
    assert list(model.parameters()) == []
    assert model.real_dtype() is torch.float32


def test_np_is_exact_on_static_channel(system):
    sc = ScenarioDescriptor(0.0, 100e-9, 'NLOS-A')
    ds = make_dataset(sc, system, 3, 0)
    rec = evaluate_model(bs.NoPrediction(system), ds)
    assert rec.model == 'np'
    assert rec.nmse == pytest.approx(0.0, abs=1e-10)


def test_rnn_shapes(rng, system):
    model = bs.RnnBaseline(bs.RnnConfig(hidden_dim=5, n_layers=2), system)
    y = model(torch.from_numpy(crandn(rng, 3, 2, 6, 8)).to(torch.complex64))
    assert y.shape == (3, 2, 2, 8)


def test_rnn_zero_head(rng, system):
    model = bs.RnnBaseline(bs.RnnConfig(hidden_dim=4, n_layers=1), system)
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
        y = model(torch.from_numpy(crandn(rng, 2, 2, 6, 8))
                  .to(torch.complex64))
    assert not torch.any(y)


def test_rnn_single_unit_recurrence():
    system = SystemConfig(n_tx=1, n_sc=2, hist_len=3, pred_len=1)
    model = bs.RnnBaseline(bs.RnnConfig(hidden_dim=1, n_layers=1),
                           system).double()
    w_ih = np.array([[0.3, -0.2, 0.1, 0.5],
                     [-0.4, 0.25, 0.2, -0.1],
                     [0.6, 0.1, -0.3, 0.2]])
    w_hh = np.array([[0.7], [-0.5], [0.9]])
    b_ih = np.array([0.1, -0.1, 0.05])
    b_hh = np.array([0.0, 0.2, -0.15])
    head_w = np.array([[1.5], [-0.5], [0.25], [2.0]])
    head_b = np.array([0.1, 0.0, -0.2, 0.3])
    with torch.no_grad():
        model.gru.weight_ih_l0.copy_(torch.from_numpy(w_ih))
        model.gru.weight_hh_l0.copy_(torch.from_numpy(w_hh))
        model.gru.bias_ih_l0.copy_(torch.from_numpy(b_ih))
        model.gru.bias_hh_l0.copy_(torch.from_numpy(b_hh))
        model.head.weight.copy_(torch.from_numpy(head_w))
        model.head.bias.copy_(torch.from_numpy(head_b))

    x = np.array([[1 + 0.5j, -0.2 + 1j],
                  [0.3 - 0.7j, 0.8 + 0.1j],
                  [-1.1 + 0.2j, 0.4 - 0.6j]])
    h = 0.0
    for step in x:
        v = np.concatenate([step.real, step.imag])
        gi = w_ih @ v + b_ih
        gh = w_hh[:, 0]*h + b_hh
        r = _sigmoid(gi[0] + gh[0])
        z = _sigmoid(gi[1] + gh[1])
        n = np.tanh(gi[2] + r*gh[2])
        h = (1 - z)*n + z*h
    out = head_w[:, 0]*h + head_b
    expected = out[:2] + 1j*out[2:]

    with torch.no_grad():
        y = model(torch.from_numpy(x[None, None]))
    assert_allclose(y.numpy()[0, 0, 0], expected, rtol=0, atol=1e-12)


def test_cnn_shapes(rng, system):
    model = bs.CnnBaseline(bs.CnnConfig(num_filters=3, n_layers=2), system)
    y = model(torch.from_numpy(crandn(rng, 3, 2, 6, 8)).to(torch.complex64))
    assert y.shape == (3, 2, 2, 8)


def test_cnn_pointwise_by_hand():
    system = SystemConfig(n_tx=1, n_sc=2, hist_len=3, pred_len=1)
    cfg = bs.CnnConfig(num_filters=1, n_layers=1, kernel=(1, 1),
                       activation='none')
    model = bs.CnnBaseline(cfg, system).double()
    a_re, a_im, b = 0.5, -1.5, 0.2
    w2, b2 = np.array([2.0, -1.0]), np.array([0.1, 0.3])
    lin, lin_b = np.array([0.2, 0.3, 0.5]), -0.4
    with torch.no_grad():
        conv1, _, conv2 = model.features
        conv1.weight.copy_(torch.tensor([a_re, a_im]).reshape(1, 2, 1, 1))
        conv1.bias.fill_(b)
        conv2.weight.copy_(torch.from_numpy(w2).reshape(2, 1, 1, 1))
        conv2.bias.copy_(torch.from_numpy(b2))
        model.time_map.weight.copy_(torch.from_numpy(lin)[None])
        model.time_map.bias.fill_(lin_b)

    x = np.array([[1 + 1j, 2 - 1j],
                  [0.5j, -1.0],
                  [3 + 0j, 1 + 2j]])
    f = a_re*x.real + a_im*x.imag + b
    chans = [w2[c]*f + b2[c] for c in range(2)]
    y_c = [lin @ ch + lin_b for ch in chans]
    expected = y_c[0] + 1j*y_c[1]

    with torch.no_grad():
        y = model(torch.from_numpy(x[None, None]))
    assert_allclose(y.numpy()[0, 0, 0], expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize('cls, kw', [
    (bs.RnnConfig, {'hidden_dim': 0}), (bs.RnnConfig, {'dropout': 1.0}),
    (bs.CnnConfig, {'n_layers': 0}),
])
def test_config_validation(cls, kw):
    with pytest.raises(ConfigError):
        cls(**kw)


def test_config_from_dict():
    assert bs.CnnConfig.from_dict({'kernel': [5, 5]}).kernel == (5, 5)
    with pytest.raises(ConfigError):
        bs.RnnConfig.from_dict({'cell': 'lstm'})


def test_baseline_predict(rng, system):
    dt = system.report_interval
    hist = CsiSequence(crandn(rng, 2, 6, 8), time_axis(6, dt))
    rnn = bs.RnnBaseline(bs.RnnConfig(4, 1), system)
    cnn = bs.CnnBaseline(bs.CnnConfig(2, 1), system)
    for model, forward in ((rnn, bs.rnn_baseline_forward),
                           (cnn, bs.cnn_baseline_forward)):
        pred = forward(model, hist)
        assert pred.shape == (2, 2, 8)
        assert pred.data.dtype == np.complex64
        assert pred == model.predict(hist)
