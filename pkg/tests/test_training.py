import numpy as np
import pytest
import torch

from csicast.channel.channel_sim import make_dataset
from csicast.model import training as tr
from csicast.model.baselines import (CnnBaseline, CnnConfig, NoPrediction,
                                     RnnBaseline, RnnConfig)
from csicast.utils.core_types import ScenarioDescriptor, SystemConfig
from csicast.utils.errors import ConfigError, DimensionMismatch, ZeroTarget

from conftest import crandn


@pytest.fixture
def dataset(system, scenario):
    return make_dataset(scenario, system, 20, 0)


def _rnn(system, seed=0):
    torch.manual_seed(seed)
    return RnnBaseline(RnnConfig(hidden_dim=4, n_layers=1), system)


def test_nmse_loss(rng):
    y = torch.from_numpy(crandn(rng, 3, 2, 2, 4))
    assert tr.nmse_loss(y, y).item() == 0.0
    assert tr.nmse_loss(torch.zeros_like(y), y).item() == pytest.approx(1.0)
    assert tr.nmse_loss(2*y, y).item() == pytest.approx(1.0)
    assert tr.nmse_loss(1.5*y, y).item() == pytest.approx(0.25)


def test_nmse_loss_errors(rng):
    y = torch.from_numpy(crandn(rng, 2, 2, 2, 4))
    zero = y.clone()
    zero[1] = 0
    with pytest.raises(ZeroTarget):
        tr.nmse_loss(y, zero)
    with pytest.raises(DimensionMismatch):
        tr.nmse_loss(y[:, :1], y)


@pytest.mark.parametrize('n', [2, 3, 10, 100])
def test_split_indices(n):
    train_idx, val_idx = tr.split_indices(n, 0.1, seed=4)
    assert train_idx.size and val_idx.size
    assert not set(train_idx) & set(val_idx)
    assert sorted(set(train_idx) | set(val_idx)) == list(range(n))
    again = tr.split_indices(n, 0.1, seed=4)
    assert np.array_equal(again[1], val_idx)


def test_split_fraction():
    _, val_idx = tr.split_indices(5000, 0.1)
    assert 400 <= val_idx.size <= 600
    with pytest.raises(ConfigError):
        tr.split_indices(1)


@pytest.mark.parametrize('kw', [
    {'lr': -1e-3}, {'plateau_factor': 1.0}, {'val_fraction': 0.0},
    {'batch_size': 0}, {'max_epochs': 0}, {'patience': -1},
    {'optimizer': 'sgd'}, {'precision': 'float16'},
])
def test_train_config_validation(kw):
    with pytest.raises(ConfigError):
        tr.TrainConfig(**kw)


def test_train_config_from_dict():
    cfg = tr.TrainConfig.from_dict({'lr': 0.0, 'optimizer': 'AdamW'}, seed=7)
    assert cfg.seed == 7 and cfg.lr == 0.0
    with pytest.raises(ConfigError):
        tr.TrainConfig.from_dict({'learning_rate': 1.0})


def test_single_epoch(system, dataset):
    model, hist = tr.train(_rnn(system), dataset,
                           tr.TrainConfig(max_epochs=1, batch_size=4))
    assert hist.n_epochs == 1
    assert hist.best_epoch == 0
    assert np.isfinite(hist.best_val_nmse)
    assert not model.training
    assert list(hist.to_frame().columns) == ['epoch', 'train_loss',
                                             'val_nmse', 'lr']


def test_zero_learning_rate_keeps_parameters(system, dataset):
    model = _rnn(system)
    before = {k: v.clone() for k, v in model.state_dict().items()}
    cfg = tr.TrainConfig(max_epochs=3, batch_size=4, lr=0.0, patience=10)
    model, hist = tr.train(model, dataset, cfg)
    assert hist.n_epochs == 3
    assert len(set(hist.val_nmse)) == 1
    assert hist.lr == [0.0, 0.0, 0.0]
    for k, v in model.state_dict().items():
        assert torch.equal(v, before[k])


def test_early_stop(system, dataset):
    cfg = tr.TrainConfig(max_epochs=10, batch_size=4, lr=0.0, patience=2)
    _, hist = tr.train(_rnn(system), dataset, cfg)
    assert hist.n_epochs == 3
    assert hist.best_epoch == 0


def test_same_seed_same_history(system, dataset):
    cfg = tr.TrainConfig(max_epochs=2, batch_size=4, accumulate=2, seed=5)
    _, a = tr.train(_rnn(system), dataset, cfg)
    _, b = tr.train(_rnn(system), dataset, cfg)
    assert a.train_loss == b.train_loss
    assert a.val_nmse == b.val_nmse


def test_fresh_noise(system):
    sc = ScenarioDescriptor(10.0, 100e-9, 'NLOS-A', 'AWGN', 10.0)
    ds = make_dataset(sc, system, 12, 0)
    cfg = tr.TrainConfig(max_epochs=2, batch_size=4, fresh_noise=True)
    _, hist = tr.train(_rnn(system), ds, cfg, sim={'impute': True})
    assert hist.n_epochs == 2
    assert all(np.isfinite(hist.train_loss))


def test_fresh_noise_differs_per_epoch(system):
    sc = ScenarioDescriptor(10.0, 100e-9, 'NLOS-A', 'AWGN', 10.0)
    ds = make_dataset(sc, system, 4, 0)
    fresh = tr._FreshNoise(ds, [0, 1])
    a = fresh.histories(1, torch.complex64)
    b = fresh.histories(2, torch.complex64)
    assert a.shape == (2, 2, 6, 8)
    assert not torch.equal(a, b)
    assert torch.equal(a, fresh.histories(1, torch.complex64))


def test_rejects_untrainable_model(system, dataset):
    with pytest.raises(ConfigError):
        tr.train(NoPrediction(system), dataset, tr.TrainConfig())


def test_rejects_mismatched_system(system, dataset):
    other = SystemConfig(n_tx=2, n_sc=4, hist_len=6, pred_len=2)
    with pytest.raises(ConfigError):
        tr.train(_rnn(other), dataset, tr.TrainConfig())


def test_history_csv(tmp_path, system, dataset):
    _, hist = tr.train(_rnn(system), dataset,
                       tr.TrainConfig(max_epochs=2, batch_size=8))
    hist.write_csv(tmp_path / 'h.csv')
    lines = (tmp_path / 'h.csv').read_text().splitlines()
    assert lines[0] == 'epoch,train_loss,val_nmse,lr'
    assert len(lines) == 3


@pytest.mark.parametrize('n, k, expected', [
    (4, 2, [(0.5, False), (0.5, True), (0.5, False), (0.5, True)]),
    (5, 2, [(0.5, False), (0.5, True), (0.5, False), (0.5, True),
            (1.0, True)]),
    (5, 3, [(1/3, False), (1/3, False), (1/3, True), (0.5, False),
            (0.5, True)]),
    (3, 1, [(1.0, True)]*3),
])
def test_accumulation_schedule(n, k, expected):
    got = tr.accumulation_schedule(n, k)
    assert [s for _, s in got] == [s for _, s in expected]
    assert [c for c, _ in got] == pytest.approx([c for c, _ in expected])


def _grads(model):
    return [p.grad.clone() for p in model.parameters()]


@pytest.mark.parametrize('k, b', [(2, 2), (3, 2), (4, 1)])
def test_accumulated_micro_batches_match_full_batch(system, rng, k, b):
    model = _rnn(system).double()
    x = torch.from_numpy(crandn(rng, k*b, 2, 6, 8))
    y = torch.from_numpy(crandn(rng, k*b, 2, 2, 8))

    model.zero_grad()
    tr.backward_batch(model, x, y)
    full = _grads(model)

    model.zero_grad()
    for i in range(k):
        tr.backward_batch(model, x[i*b:(i + 1)*b], y[i*b:(i + 1)*b], 1.0/k)
    for g_acc, g_full in zip(_grads(model), full):
        torch.testing.assert_close(g_acc, g_full, rtol=1e-6, atol=1e-12)


def test_short_last_group_is_mean_reduced(system, rng):
    model = _rnn(system).double()
    x = torch.from_numpy(crandn(rng, 2, 2, 6, 8))
    y = torch.from_numpy(crandn(rng, 2, 2, 2, 8))
    (scale, step), = tr.accumulation_schedule(5, 4)[4:]
    assert step

    model.zero_grad()
    tr.backward_batch(model, x, y, scale)
    last = _grads(model)
    model.zero_grad()
    tr.backward_batch(model, x, y)
    for g_last, g_full in zip(last, _grads(model)):
        torch.testing.assert_close(g_last, g_full)


def test_learns_to_denoise_static_channel(system):
    sc = ScenarioDescriptor(0.0, 100e-9, 'NLOS-A', 'AWGN', 0.0)
    ds = make_dataset(sc, system, 200, 0)
    torch.manual_seed(0)
    model = CnnBaseline(CnnConfig(num_filters=4, n_layers=1,
                                  activation='none'), system)
    cfg = tr.TrainConfig(max_epochs=20, batch_size=16, lr=1e-2,
                         patience=20, precision='float64')
    model, hist = tr.train(model, ds, cfg)

    _, val_idx = tr.split_indices(len(ds), cfg.val_fraction, cfg.seed)
    x, y = tr.dataset_tensors(ds, torch.complex128)
    persistence = NoPrediction(system).double()
    np_nmse = tr.validation_nmse(persistence, x[val_idx], y[val_idx])
    assert np_nmse > 0.5
    assert hist.best_val_nmse < 0.5*np_nmse
