import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

from csicast.channel.channel_sim import make_dataset
from csicast.utils import file_io as fio
from csicast.utils.core_types import NoiseType, ScenarioDescriptor
from csicast.utils.errors import (BadMagic, IoError, MissingData,
                                  VersionUnsupported)


@pytest.fixture
def dataset(system):
    sc = ScenarioDescriptor(10.0, 100e-9, 'LOS-D', 'AWGN', 15.0)
    return make_dataset(sc, system, 3, 42)


def test_dataset_save_load(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    assert fio.load_dataset(path) == dataset


def test_training_dataset_save_load(tmp_path, system, scenario):
    ds = make_dataset(scenario, system, 4, 1, snr_range=(0.0, 25.0),
                      dtype=np.complex128)
    path = tmp_path / 'train.c4c'
    fio.save_dataset(ds, path)
    back = fio.load_dataset(path)
    assert back == ds
    assert back.snr_range == (0.0, 25.0)
    assert all(s.scenario.noise_type is NoiseType.AWGN for s in back)


def test_dataset_header(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    cfg, sc, count = fio.read_dataset_header(path)
    assert cfg == dataset.config
    assert sc == dataset.scenario
    assert count == 3


def test_dataset_bytes_are_stable(tmp_path, dataset):
    fio.save_dataset(dataset, tmp_path / 'a.c4c')
    fio.save_dataset(fio.load_dataset(tmp_path / 'a.c4c'), tmp_path / 'b.c4c')
    assert (tmp_path / 'a.c4c').read_bytes() ==\
        (tmp_path / 'b.c4c').read_bytes()


def test_truncated_dataset(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(IoError):
        fio.load_dataset(path)


def test_trailing_bytes(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    path.write_bytes(path.read_bytes() + b'\x00')
    with pytest.raises(IoError):
        fio.load_dataset(path)


def test_bad_magic(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    path.write_bytes(b'XXXXXXXX' + path.read_bytes()[8:])
    with pytest.raises(BadMagic):
        fio.load_dataset(path)


def test_unsupported_version(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    raw = bytearray(path.read_bytes())
    raw[8:12] = (99).to_bytes(4, 'little')
    path.write_bytes(bytes(raw))
    with pytest.raises(VersionUnsupported):
        fio.load_dataset(path)


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        fio.load_dataset(tmp_path / 'nope.c4c')


def test_checkpoint_round_trip(tmp_path):
    header = {'kind': 'x', 'config': {'a': 1}}
    tensors = [('w', np.arange(6, dtype=np.float32).reshape(2, 3)),
               ('b', np.array([1.5, -2.0])),
               ('n', np.array(7, dtype=np.int64))]
    path = tmp_path / 'm.c4m'
    fio.write_checkpoint(path, header, tensors)
    head, back = fio.read_checkpoint(path)
    assert head == header
    assert [n for n, _ in back] == ['w', 'b', 'n']
    for (_, a), (_, b) in zip(tensors, back):
        assert a.dtype == b.dtype
        assert_array_equal(a, b)


def test_checkpoint_bad_magic(tmp_path, dataset):
    path = tmp_path / 'a.c4c'
    fio.save_dataset(dataset, path)
    with pytest.raises(BadMagic):
        fio.read_checkpoint(path)


def test_csv_helpers(tmp_path):
    df = pd.DataFrame({'a': [1, 2], 'x': [0.1, 1/3]})
    path = tmp_path / 't.csv'
    fio.write_csv(df, path)
    assert path.read_text() == 'a,x\n1,0.1\n2,0.3333333333\n'
    assert fio.read_csv(path)['a'].tolist() == [1, 2]
    with pytest.raises(MissingData):
        fio.read_csv(tmp_path / 'missing.csv')
