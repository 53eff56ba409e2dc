from dataclasses import asdict

import pytest
import torch

from csicast.model import checkpoint as ck
from csicast.model.csi4cast import tiny_config
from csicast.utils.errors import ConfigError, IoError
from csicast.utils.file_io import write_checkpoint

from conftest import crandn

CONFIGS = {
    'csi4cast': asdict(tiny_config()),
    'rnn': {'hidden_dim': 3, 'n_layers': 2},
    'cnn': {'num_filters': 2, 'n_layers': 1, 'kernel': [3, 1]},
}


@pytest.mark.parametrize('kind', sorted(CONFIGS))
def test_round_trip(tmp_path, rng, system, kind):
    torch.manual_seed(3)
    model = ck.build_model(kind, CONFIGS[kind], system, torch.float64)
    path = tmp_path / '{}.c4m'.format(kind)
    ck.save_checkpoint(model, path)
    back = ck.load_checkpoint(path)
    assert type(back) is type(model)
    assert back.config == model.config
    assert back.system == system
    assert back.real_dtype() is torch.float64
    assert not back.training
    for (n1, t1), (n2, t2) in zip(model.state_dict().items(),
                                  back.state_dict().items()):
        assert n1 == n2
        assert torch.equal(t1, t2)
    x = torch.from_numpy(crandn(rng, 2, 2, 6, 8))
    model.eval()
    with torch.no_grad():
        assert torch.equal(model(x), back(x))


def test_fdd_round_trip(tmp_path, fdd_system):
    model = ck.build_model('csi4cast', tiny_config(), fdd_system)
    ck.save_checkpoint(model, tmp_path / 'm.c4m')
    back = ck.load_checkpoint(tmp_path / 'm.c4m')
    assert back.acl_freq.subcarrier is not None
    assert back.real_dtype() is torch.float32


def test_np_checkpoint(tmp_path, system):
    model = ck.build_model('NP', None, system)
    assert model.kind == 'np'
    ck.save_checkpoint(model, tmp_path / 'np.c4m')
    assert ck.load_checkpoint(tmp_path / 'np.c4m').kind == 'np'


def test_unknown_kind(system):
    with pytest.raises(ConfigError):
        ck.build_model('lstm', None, system)
    with pytest.raises(ConfigError):
        ck.build_model('rnn', {'width': 3}, system)


def test_default_config(system):
    model = ck.build_model('rnn', None, system)
    assert model.config.hidden_dim == 64


def test_tensor_mismatch(tmp_path, system):
    rnn = ck.build_model('rnn', CONFIGS['rnn'], system)
    cnn = ck.build_model('cnn', CONFIGS['cnn'], system)
    header = rnn.describe()
    header['dtype'] = 'float32'
    write_checkpoint(tmp_path / 'x.c4m', header,
                     [(n, t.numpy()) for n, t in cnn.state_dict().items()])
    with pytest.raises(IoError):
        ck.load_checkpoint(tmp_path / 'x.c4m')


def test_invalid_header(tmp_path):
    write_checkpoint(tmp_path / 'x.c4m', {'kind': 'rnn'}, [])
    with pytest.raises(IoError):
        ck.load_checkpoint(tmp_path / 'x.c4m')
