import os

import pandas as pd
import pytest

from csicast.runtime import CSI_main as cm
from csicast.runtime import CSI_plots as rp
from csicast.runtime import CSI_stats as st
from csicast.utils import ini_reader
from csicast.utils.errors import ConfigError, IoError, MissingData


def _files(path):
    return {f: open(os.path.join(path, f), 'rb').read()
            for f in sorted(os.listdir(path))}


@pytest.fixture
def generated(tiny_conf):
    manifest = cm.cmd_generate(tiny_conf)
    return tiny_conf, manifest, os.path.join(tiny_conf['run.out'],
                                             'manifest.csv')


@pytest.fixture
def evaluated(tmp_path, generated):
    conf, _, manifest = generated
    ckpt = str(tmp_path / 'models' / 'rnn.c4m')
    cm.cmd_train(conf, manifest, ckpt)
    out = str(tmp_path / 'eval')
    cm.cmd_evaluate(conf, [ckpt], manifest, out)
    return conf, out


def test_get_args():
    args = cm.get_args(['evaluate', '-m', 'd/manifest.csv', '--checkpoints',
                        'a.c4m', 'b.c4m', '-j', '2', '-o', 'res'])
    assert args.command == 'evaluate'
    assert args.checkpoints == ['a.c4m', 'b.c4m']
    assert args.jobs == 2 and args.config is None
    conf = cm.get_settings(args)
    assert conf['run.jobs'] == 2 and conf['run.out'] == 'res'
    assert conf['system.n_tx'] == 4
    with pytest.raises(SystemExit):
        cm.get_args(['train'])


def test_enumerate_scenarios(tiny_conf):
    scenarios = cm.enumerate_scenarios(tiny_conf)
    assert len(scenarios) == 4
    assert {(s.velocity, s.noise_degree) for s in scenarios} ==\
        {(1.0, 10.0), (1.0, 20.0), (30.0, 10.0), (30.0, 20.0)}
    bad = ini_reader.override(tiny_conf, scenario__mode='eval')
    with pytest.raises(ConfigError):
        cm.enumerate_scenarios(bad)


def test_scenario_seed():
    assert cm.scenario_seed(0, 'regular', 3) ==\
        cm.scenario_seed(0, 'regular', 3)
    assert cm.scenario_seed(0, 'regular', 3) !=\
        cm.scenario_seed(0, 'robustness', 3)


def test_generate(generated):
    conf, manifest, path = generated
    files = os.listdir(conf['run.out'])
    assert len([f for f in files if f.endswith('.c4c')]) == 4
    assert 'config.ini' in files
    assert list(manifest.columns) == cm.MANIFEST_COLUMNS
    df, paths = cm.read_manifest(path)
    assert len(df) == 4 and all(os.path.isfile(p) for p in paths)
    assert (df['n_samples'] == 4).all()
    assert ini_reader.get_config_dict(
        os.path.join(conf['run.out'], 'config.ini')) == conf


def test_generate_is_reproducible(tmp_path, tiny_conf):
    cm.cmd_generate(tiny_conf, str(tmp_path / 'a'))
    cm.cmd_generate(tiny_conf, str(tmp_path / 'b'))
    a, b = _files(str(tmp_path / 'a')), _files(str(tmp_path / 'b'))
    assert a.keys() == b.keys()
    for f in a:
        if f != 'config.ini':
            assert a[f] == b[f], f


def _run_all(conf, root):
    data = os.path.join(root, 'data')
    cm.cmd_generate(conf, data)
    manifest = os.path.join(data, 'manifest.csv')
    ckpt = os.path.join(root, 'models', 'rnn.c4m')
    cm.cmd_train(conf, manifest, ckpt)
    cm.cmd_evaluate(conf, [ckpt], manifest, os.path.join(root, 'eval'))


@pytest.mark.slow
def test_train_evaluate_is_reproducible(tmp_path, tiny_conf):
    _run_all(tiny_conf, str(tmp_path / 'a'))
    _run_all(tiny_conf, str(tmp_path / 'b'))
    for sub, skip in (('data', {'config.ini'}), ('models', set()),
                      ('eval', {'efficiency.csv'})):
        a = _files(str(tmp_path / 'a' / sub))
        b = _files(str(tmp_path / 'b' / sub))
        assert a.keys() == b.keys()
        for f in sorted(set(a) - skip):
            assert a[f] == b[f], f
    models = os.listdir(tmp_path / 'a' / 'models')
    assert sorted(models) == ['rnn.c4m', 'rnn_history.csv']
    evals = os.listdir(tmp_path / 'a' / 'eval')
    assert {'evaluation.csv', 'ranks.csv', 'rank_summary.csv',
            'acf.csv'} <= set(evals)


def test_generate_training_mode(tmp_path, tiny_conf):
    conf = ini_reader.override(tiny_conf, scenario__mode='train',
                               scenario__track='train')
    manifest = cm.cmd_generate(conf, str(tmp_path / 'train'))
    assert len(manifest) == 2
    assert (manifest['noise_type'] == 'NONE').all()
    assert (manifest['snr_hi'] == 25.0).all()


def test_manifest_integrity(generated):
    conf, manifest, path = generated
    bad = manifest.copy()
    bad.loc[0, 'velocity'] = 99.0
    cm.write_manifest(bad, path)
    with pytest.raises(IoError):
        cm.read_manifest(path)
    cm.write_manifest(manifest, path)
    os.remove(os.path.join(conf['run.out'], manifest['file'][1]))
    with pytest.raises(MissingData):
        cm.read_manifest(path)
    df, _ = cm.read_manifest(path, check=False)
    assert len(df) == 4


def test_persistence_cannot_be_trained(tmp_path, generated):
    conf, _, manifest = generated
    conf = ini_reader.override(conf, model__kind='np')
    with pytest.raises(ConfigError):
        cm.cmd_train(conf, manifest, str(tmp_path / 'np.c4m'))


def test_train_needs_matching_duplex(tmp_path, generated):
    conf, _, manifest = generated
    conf = ini_reader.override(conf, system__duplex='FDD')
    with pytest.raises(MissingData):
        cm.cmd_train(conf, manifest, str(tmp_path / 'm.c4m'))


@pytest.mark.slow
def test_train_evaluate_report(tmp_path, evaluated):
    conf, out = evaluated
    assert os.path.isfile(tmp_path / 'models' / 'rnn_history.csv')
    for name in ('evaluation', 'ranks', 'rank_summary', 'efficiency', 'acf',
                 'stamp'):
        assert os.path.isfile(os.path.join(out, name + '.csv'))

    records = pd.read_csv(os.path.join(out, 'evaluation.csv'))
    assert len(records) == 4*2
    assert set(records['model']) == {'np', 'rnn'}
    assert (records['n_samples'] == 4).all()

    acf = pd.read_csv(os.path.join(out, 'acf.csv'))
    assert list(acf.columns) == st.ACF_COLUMNS
    assert len(acf) == 4*(3 + 1)
    assert (acf.loc[acf['lag'] == 0, 'acf'] == 1.0).all()

    eff = pd.read_csv(os.path.join(out, 'efficiency.csv'))
    np_row = eff[eff['model'] == 'np'].iloc[0]
    assert np_row['flops'] == 0 and np_row['eff_flops'] == 1.0

    stamp = pd.read_csv(os.path.join(out, 'stamp.csv'))
    assert 'config_sha256' in set(stamp['key'])

    report = cm.cmd_report(out, str(tmp_path / 'r1'), plots=False)
    cm.cmd_report(out, str(tmp_path / 'r2'), plots=False)
    assert len(report['nmse_vs_velocity']) == len(records)
    assert set(report['nmse_vs_velocity']['region']) == {'seen'}
    assert len(report['nmse_vs_snr']) == 2*2
    assert _files(str(tmp_path / 'r1')) == _files(str(tmp_path / 'r2'))


@pytest.mark.slow
def test_report_figures(tmp_path, evaluated):
    pytest.importorskip('matplotlib')
    _, out = evaluated
    report = cm.cmd_report(out, str(tmp_path / 'fig'))
    assert report['acf_stems']['lag'].max() == 3
    for name in ('nmse_vs_snr', 'nmse_vs_velocity', 'rank1_share',
                 'acf_stems'):
        assert os.path.isfile(tmp_path / 'fig' / (name + '.png'))


def test_velocity_region():
    tv = (1.0, 10.0, 30.0)
    assert rp.velocity_region(10.0, tv) == 'seen'
    assert rp.velocity_region(20.0, tv) == 'interpolation'
    assert rp.velocity_region(40.0, tv) == 'extrapolation'
    assert rp.velocity_region(0.5, tv) == 'extrapolation'


def test_report_needs_evaluation(tmp_path):
    with pytest.raises(MissingData):
        rp.read_eval_dir(str(tmp_path / 'nothing'))
    os.makedirs(tmp_path / 'empty')
    with pytest.raises(MissingData):
        rp.read_eval_dir(str(tmp_path / 'empty'))


def test_eval_config():
    cfg = st.mod_eval_config({'acf_max_lag': 2})
    assert cfg['acf_max_lag'] == 2 and cfg['se_snr_db'] == 10.0
    with pytest.raises(ConfigError):
        st.mod_eval_config({'bootstrap': 10})
    assert st.compute_scheduler(1) == {'scheduler': 'synchronous'}
    assert st.compute_scheduler(4)['num_workers'] == 4


def test_main_generate(tmp_path, tiny_conf):
    path = str(tmp_path / 'tiny.ini')
    ini_reader.write_config(tiny_conf, path)
    out = str(tmp_path / 'cli')
    assert cm.main(['generate', '-c', path, '--out', out]) == 0
    assert os.path.isfile(os.path.join(out, 'manifest.csv'))


def test_main_reports_errors(tmp_path, capsys):
    code = cm.main(['train', '-m', str(tmp_path / 'none.csv'),
                    '--checkpoint', str(tmp_path / 'm.c4m')])
    assert code == 1
    assert '*** ERROR ***' in capsys.readouterr().err
