"""
Qualitative trends on the 27-scenario desk grid: learned predictors beat
persistence, errors grow with velocity, LOS is easier than NLOS and FDD is
harder than TDD.
"""
import os

import numpy as np
import pandas as pd
import pytest

import csicast
from csicast.runtime import CSI_main as cm
from csicast.utils import ini_reader

pytestmark = pytest.mark.slow

PRESETS = os.path.join(os.path.dirname(csicast.__file__), 'config',
                       'presets')
LEARNED = ('csi4cast', 'rnn', 'cnn')

DESK = dict(
    system__n_tx=2, system__n_sc=16, system__n_guard=4,
    system__hist_len=16, system__pred_len=4,
    csi4cast__acl_hidden=16, csi4cast__shuffle_maps=8,
    csi4cast__shuffle_groups=2, csi4cast__shuffle_blocks=1,
    csi4cast__shuffle_dropout=0.0, csi4cast__d_model=16,
    csi4cast__n_layers=1, csi4cast__n_heads=2, csi4cast__ffn_dim=32,
    csi4cast__dropout=0.0,
    rnn__hidden_dim=32, rnn__n_layers=1,
    cnn__num_filters=8, cnn__n_layers=2,
    train__max_epochs=20, train__batch_size=32, train__lr=3e-3,
    eval__timing_reps=2, eval__timing_warmup=1,
    report__plots=False)


@pytest.fixture(scope='module')
def records(tmp_path_factory):
    root = str(tmp_path_factory.mktemp('trends'))
    base = ini_reader.override(ini_reader.default_config(), **DESK)

    train_conf = ini_reader.get_config_dict(
        os.path.join(PRESETS, 'train.ini'), base=base)
    cm.cmd_generate(train_conf, os.path.join(root, 'train'))
    train_manifest = os.path.join(root, 'train', 'manifest.csv')
    checkpoints = []
    for duplex in ('TDD', 'FDD'):
        for kind in LEARNED:
            conf = ini_reader.override(train_conf, system__duplex=duplex,
                                       model__kind=kind)
            ckpt = os.path.join(root, 'models',
                                '{}_{}.c4m'.format(kind, duplex.lower()))
            cm.cmd_train(conf, train_manifest, ckpt)
            checkpoints.append(ckpt)

    test_conf = ini_reader.override(
        ini_reader.get_config_dict(os.path.join(PRESETS, 'regular.ini'),
                                   base=base),
        scenario__duplex=['TDD', 'FDD'])
    cm.cmd_generate(test_conf, os.path.join(root, 'regular'))
    out = os.path.join(root, 'eval')
    cm.cmd_evaluate(test_conf, checkpoints,
                    os.path.join(root, 'regular', 'manifest.csv'), out)
    return pd.read_csv(os.path.join(out, 'evaluation.csv'))


def test_grid(records):
    assert set(records['model']) == set(LEARNED) | {'np'}
    assert len(records) == 27*6*2*4


@pytest.mark.parametrize('duplex', ['TDD', 'FDD'])
def test_learned_models_beat_persistence(records, duplex):
    mean = records[records['duplex'] == duplex].groupby('model')['nmse']\
        .mean()
    for kind in LEARNED:
        assert mean[kind] < mean['np'], kind


@pytest.mark.parametrize('duplex', ['TDD', 'FDD'])
def test_nmse_grows_with_velocity(records, duplex):
    sub = records[records['duplex'] == duplex]
    for model, grp in sub.groupby('model'):
        by_v = grp.groupby('velocity')['nmse'].mean().sort_index()
        assert np.all(np.diff(by_v.values) >= 0), model


@pytest.mark.parametrize('duplex', ['TDD', 'FDD'])
def test_los_easier_than_nlos(records, duplex):
    sub = records[records['duplex'] == duplex]
    los = sub['profile'].str.startswith('LOS')
    for kind in LEARNED:
        is_model = sub['model'] == kind
        assert sub.loc[is_model & los, 'nmse'].mean() <\
            sub.loc[is_model & ~los, 'nmse'].mean(), kind


def test_fdd_harder_than_tdd(records):
    mean = records.groupby(['model', 'duplex'])['nmse'].mean()
    for model in records['model'].unique():
        assert mean[(model, 'FDD')] > mean[(model, 'TDD')], model
