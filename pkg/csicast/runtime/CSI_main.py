#!/usr/bin/env python
# coding: utf-8
"""
Main script of the CSI prediction workbench.

    csicast generate --config regular.ini --out data/regular
    csicast train    --config train.ini --manifest data/train/manifest.csv \
                     --checkpoint models/csi4cast.c4m
    csicast evaluate --config regular.ini --manifest data/regular/manifest.csv\
                     --checkpoints models/*.c4m --out results/regular
    csicast report   --eval-dir results/regular --out results/regular/report
"""

# Import modules
import logging
import os
import sys
import zlib
from itertools import product

import dask
import numpy as np
import pandas as pd

import csicast.runtime.CSI_plots as rp
import csicast.runtime.CSI_stats as st
from csicast.channel.channel_sim import make_dataset
from csicast.model.baselines import NoPrediction
from csicast.model.checkpoint import (TRAINABLE, build_model,
                                      load_checkpoint, save_checkpoint)
from csicast.model.csi4cast import default_dtype
from csicast.model.training import TrainConfig, seed_everything, train
from csicast.utils import ini_reader
from csicast.utils.core_types import (NoiseType, ScenarioDescriptor,
                                      SystemConfig, concat_datasets)
from csicast.utils.errors import (ConfigError, CsiCastError, DuplicateModel,
                                  IoError, MissingData)
from csicast.utils.file_io import (load_dataset, read_csv,
                                   read_dataset_header, save_dataset,
                                   write_csv)

logger = logging.getLogger(__name__)

DATA_DIR_ENV = 'CSI4CAST_DATA_DIR'
DATASET_SUFFIX = '.c4c'

MANIFEST_COLUMNS = ['file', 'track', 'mode', 'duplex', 'velocity',
                    'delay_spread', 'profile', 'noise_type', 'noise_degree',
                    'seed', 'n_samples', 'snr_lo', 'snr_hi']


# Functions
def get_args(argv=None):
    """
    Parse command line arguments

    Returns
    -------
    Input arguments
    """
    import argparse

    parser = argparse.ArgumentParser(
        prog='csicast',
        description='CSI prediction workbench: generate, train, evaluate, '
        'report')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', metavar='name config file',
                        type=str, default=None,
                        help='Path to configuration file (defaults apply '
                        'when omitted)')
    common.add_argument('--seed', type=int, default=None,
                        help='Overrides run.seed')
    common.add_argument('--jobs', '-j', type=int, default=None,
                        help='Overrides run.jobs')
    common.add_argument('--out', '-o', type=str, default=None,
                        help='Output directory or file')
    common.add_argument('--verbose', '-v', action='store_true')

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('generate', parents=[common],
                   help='Generate scenario datasets and a manifest')
    p_tr = sub.add_parser('train', parents=[common],
                          help='Train the configured model')
    p_tr.add_argument('--manifest', '-m', required=True)
    p_tr.add_argument('--checkpoint', type=str, default=None,
                      help='Checkpoint file to write (or use --out)')
    p_ev = sub.add_parser('evaluate', parents=[common],
                          help='Evaluate checkpoints on a manifest')
    p_ev.add_argument('--manifest', '-m', required=True)
    p_ev.add_argument('--checkpoints', nargs='*', default=[])
    p_rp = sub.add_parser('report', parents=[common],
                          help='Summary tables and figures')
    p_rp.add_argument('--eval-dir', required=True)
    return parser.parse_args(argv)


def get_settings(args):
    """
    Flat run configuration from the config file and command line overrides
    """
    conf = ini_reader.get_config_dict(args.config) if args.config else\
        ini_reader.default_config()
    if args.seed is not None:
        conf['run.seed'] = args.seed
    if args.jobs is not None:
        conf['run.jobs'] = args.jobs
    if args.out is not None:
        conf['run.out'] = args.out
    if args.verbose:
        conf['run.verbose'] = True
    return conf


def system_config(conf):
    try:
        return SystemConfig(**ini_reader.section(conf, 'system'))
    except TypeError as err:
        raise ConfigError("\n\tInvalid [system] section: {}\n".format(err))


def data_root():
    return os.environ.get(DATA_DIR_ENV, os.path.join(os.getcwd(), 'data'))


def _sim_settings(conf):
    sc = ini_reader.section(conf, 'scenario')
    return {k: sc[k] for k in ('n_paths', 'k_factor_db', 'burst_length',
                               'calib_tol_db', 'calib_ref_samples')}


def enumerate_scenarios(conf):
    """
    Cartesian product of the scenario grid.

    In training mode one noise-free descriptor is made per channel
    condition; noise is drawn per sample from the training SNR range.
    """
    sc = ini_reader.section(conf, 'scenario')
    if sc['mode'] not in ('train', 'test'):
        raise ConfigError("\n\tscenario.mode must be 'train' or 'test', got "
                          "'{}'\n".format(sc['mode']))
    if sc['mode'] == 'train':
        noise = [(NoiseType.NONE, float('inf'))]
    else:
        if not isinstance(sc['noise'], dict) or not sc['noise']:
            raise ConfigError(
                "\n\tscenario.noise must be a dictionary of noise type to "
                "list of degrees, e.g. {'AWGN': [0, 10, 20]}\n")
        noise = []
        for nt, degrees in sc['noise'].items():
            nt = NoiseType(nt)
            if nt is NoiseType.NONE:
                noise.append((nt, float('inf')))
            else:
                noise += [(nt, float(d)) for d in degrees]
    out = []
    for dup, prof, ds, v, (nt, deg) in product(
            sc['duplex'], sc['profiles'], sc['delay_spreads'],
            sc['velocities'], noise):
        out.append(ScenarioDescriptor(v, ds, prof, nt, deg, dup))
    return out


def scenario_seed(seed, track, index):
    """Base seed of scenario 'index' of a track."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(track.encode()),
                                 int(index)])
    return int(ss.generate_state(1)[0])


def _generate_one(scenario, system, n_samples, base_seed, snr_range, sc,
                  path):
    ds = make_dataset(scenario, system, n_samples, base_seed,
                      snr_range=snr_range, n_paths=sc['n_paths'],
                      k_factor_db=sc['k_factor_db'],
                      impute_drops=sc['impute_drops'],
                      burst_length=sc['burst_length'],
                      calib_tol_db=sc['calib_tol_db'],
                      calib_ref_samples=sc['calib_ref_samples'])
    save_dataset(ds, path)
    print("\tWrote {}".format(os.path.basename(path)))
    return path


def write_manifest(df, path):
    write_csv(df[MANIFEST_COLUMNS], path)


def read_manifest(path, check=True):
    """
    Read a manifest and resolve dataset paths relative to its directory.

    Returns
    -------
    manifest: pandas.DataFrame
    paths: list of str

    Raises
    ------
    MissingData
        If a listed dataset does not exist
    IoError
        If a dataset header disagrees with its manifest entry
    """
    df = read_csv(path)
    missing = set(MANIFEST_COLUMNS) - set(df.columns)
    if missing:
        raise IoError("\n\tManifest {} lacks columns {}\n".format(
            path, ', '.join(sorted(missing))))
    base = os.path.dirname(os.path.abspath(path))
    paths = [f if os.path.isabs(f) else os.path.join(base, f)
             for f in df['file']]
    if check:
        for (_, row), fpath in zip(df.iterrows(), paths):
            if not os.path.isfile(fpath):
                raise MissingData("\n\tDataset {} listed in {} is missing\n"
                                  .format(fpath, path))
            _, sc, count = read_dataset_header(fpath)
            ok = (sc.duplex.value == row['duplex']
                  and np.isclose(sc.velocity, row['velocity'])
                  and np.isclose(sc.delay_spread, row['delay_spread'])
                  and sc.channel_profile.value == row['profile']
                  and sc.noise_type.value == row['noise_type']
                  and count == row['n_samples'])
            if not ok:
                raise IoError(
                    "\n\tHeader of {} ({}, {} samples) does not match its "
                    "manifest entry\n".format(fpath, sc.label(), count))
    return df, paths


def cmd_generate(conf, out_path=None):
    """
    Generate one dataset file per scenario and a manifest.

    Returns
    -------
    manifest: pandas.DataFrame
    """
    print("\n=== GENERATE ===")
    out_path = out_path or conf['run.out'] or data_root()
    os.makedirs(out_path, exist_ok=True)
    system = system_config(conf)
    sc = ini_reader.section(conf, 'scenario')
    seed, track = conf['run.seed'], sc['track']
    train_mode = sc['mode'] == 'train'
    snr_range = tuple(float(x) for x in sc['train_snr_range'])\
        if train_mode else None
    scenarios = enumerate_scenarios(conf)
    print("\t{} scenarios in track '{}' ({} mode)".format(
        len(scenarios), track, sc['mode']))

    rows, tasks = [], []
    for i, s in enumerate(scenarios):
        fname = '{}_{:04d}_{}{}'.format(track, i, s.label(), DATASET_SUFFIX)
        base_seed = scenario_seed(seed, track, i)
        tasks.append(dask.delayed(_generate_one)(
            s, system, sc['n_samples'], base_seed, snr_range, sc,
            os.path.join(out_path, fname)))
        rows.append({
            'file': fname, 'track': track, 'mode': sc['mode'],
            'duplex': s.duplex.value, 'velocity': s.velocity,
            'delay_spread': s.delay_spread,
            'profile': s.channel_profile.value,
            'noise_type': s.noise_type.value, 'noise_degree': s.noise_degree,
            'seed': base_seed, 'n_samples': sc['n_samples'],
            'snr_lo': snr_range[0] if train_mode else np.nan,
            'snr_hi': snr_range[1] if train_mode else np.nan})
    dask.compute(*tasks, **st.compute_scheduler(conf['run.jobs']))

    manifest = pd.DataFrame(rows, columns=MANIFEST_COLUMNS)
    write_manifest(manifest, os.path.join(out_path, 'manifest.csv'))
    ini_reader.write_config(conf, os.path.join(out_path, 'config.ini'))
    return manifest


def cmd_train(conf, dataset_manifest, out_checkpoint):
    """
    Train the configured model on all manifest datasets matching the
    configured duplex mode.

    Returns
    -------
    model, history
    """
    print("\n=== TRAIN ===")
    kind = conf['model.kind'].lower()
    if kind not in TRAINABLE:
        raise ConfigError(
            "\n\tModel kind '{}' cannot be trained. Choose one of: {}\n"
            .format(kind, ', '.join(TRAINABLE)))
    system = system_config(conf)
    manifest, paths = read_manifest(dataset_manifest)
    use = [p for (_, row), p in zip(manifest.iterrows(), paths)
           if row['duplex'] == system.duplex.value]
    if not use:
        raise MissingData("\n\tNo {} datasets in {}\n".format(
            system.duplex.value, dataset_manifest))
    print("\tLoading {} datasets".format(len(use)))
    dataset = concat_datasets([load_dataset(p) for p in use])

    tcfg = TrainConfig.from_dict(ini_reader.section(conf, 'train'),
                                 seed=conf['run.seed'])
    seed_everything(tcfg.seed)
    model = build_model(kind, ini_reader.section(conf, kind),
                        dataset.config, default_dtype(tcfg.precision))
    sim = _sim_settings(conf)
    sim['impute'] = conf['scenario.impute_drops']
    print("\tTraining {} on {} samples".format(kind, len(dataset)))
    model, history = train(model, dataset, tcfg, sim)

    odir = os.path.dirname(os.path.abspath(out_checkpoint))
    os.makedirs(odir, exist_ok=True)
    save_checkpoint(model, out_checkpoint)
    history.write_csv(os.path.splitext(out_checkpoint)[0] + '_history.csv')
    print("\tBest validation NMSE {:.4g} at epoch {}".format(
        history.best_val_nmse, history.best_epoch + 1))
    return model, history


def load_models(checkpoints, duplexes, system):
    """
    Models per duplex mode, keyed by model kind. The NP baseline is added
    for every duplex mode in 'duplexes'.

    Returns
    -------
    dict
        duplex -> {kind: model}
    """
    models = {}
    for ck in checkpoints:
        m = load_checkpoint(ck)
        group = models.setdefault(m.system.duplex.value, {})
        if m.kind in group:
            raise DuplicateModel("\n\tMore than one {} checkpoint for {}\n"
                                 .format(m.kind, m.system.duplex.value))
        group[m.kind] = m
    for dup in sorted(duplexes):
        group = models.setdefault(dup, {})
        ref = next(iter(group.values()), None)
        group['np'] = NoPrediction(
            ref.system if ref is not None else system.with_duplex(dup))
    return models


def cmd_evaluate(conf, checkpoints, dataset_manifest, out_dir):
    """
    Evaluate all checkpoints and the NP baseline on every manifest dataset.

    Writes evaluation.csv, ranks.csv, rank_summary.csv, efficiency.csv,
    acf.csv and stamp.csv to out_dir.
    """
    print("\n=== EVALUATE ===")
    os.makedirs(out_dir, exist_ok=True)
    eval_conf = st.mod_eval_config(ini_reader.section(conf, 'eval'))
    manifest, paths = read_manifest(dataset_manifest)
    models = load_models(checkpoints, manifest['duplex'].unique(),
                         system_config(conf))
    for dup, group in sorted(models.items()):
        print("\t{}: {}".format(dup, ', '.join(sorted(group))))

    records, acf_df = [], []
    for dup, group in sorted(models.items()):
        sel = (manifest['duplex'] == dup).values
        if not sel.any():
            continue
        rec, a = st.evaluate_all(group, manifest[sel],
                                 [p for p, s in zip(paths, sel) if s],
                                 eval_conf, _sim_settings(conf),
                                 conf['run.jobs'])
        records.append(rec)
        acf_df.append(a)
    records = pd.concat(records, ignore_index=True).sort_values(
        ['track', 'duplex', 'scenario', 'model']).reset_index(drop=True)
    acf_df = pd.concat(acf_df, ignore_index=True)

    print("\n=== STATISTICS ===")
    summary = st.rank_summary_table(records, eval_conf['metrics'])
    ranks = st.scenario_ranks(records, eval_conf['metrics'])
    eff = st.efficiency_table(models, eval_conf)

    print("\n=== SAVE OUTPUT ===")
    files = [('manifest', dataset_manifest)] +\
        [('checkpoint:{}'.format(os.path.basename(c)), c)
         for c in checkpoints]
    stamp = st.stamp_table(ini_reader.config_to_text(conf), conf['run.seed'],
                           files)
    for name, df in (('evaluation', records), ('ranks', ranks),
                     ('rank_summary', summary), ('efficiency', eff),
                     ('acf', acf_df), ('stamp', stamp)):
        write_csv(df, os.path.join(out_dir, '{}.csv'.format(name)))
        print("\twrote {}.csv".format(name))
    return records, summary, eff


def cmd_report(eval_dir, out_dir, train_velocities=(1.0, 10.0, 30.0),
               plots=True):
    """
    Report tables (always) and figures (when matplotlib is available).

    Returns
    -------
    report: dict of pandas.DataFrame
    """
    print("\n=== REPORT ===")
    tables = rp.read_eval_dir(eval_dir)
    os.makedirs(out_dir, exist_ok=True)
    report = rp.report_tables(tables, train_velocities)
    rp.write_tables(report, out_dir)
    if plots:
        print('\n=== PLOTTING ===')
        for f in rp.plot_main(report, out_dir, train_velocities):
            print("\twrote {}".format(os.path.basename(f)))
    return report


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')


def main(argv=None):
    args = get_args(argv)
    try:
        conf = get_settings(args)
        _configure_logging(conf['run.verbose'])
        if args.command == 'generate':
            cmd_generate(conf)
        elif args.command == 'train':
            out = args.checkpoint or args.out
            if out is None:
                raise ConfigError("\n\tGive the checkpoint file with "
                                  "--checkpoint\n")
            cmd_train(conf, args.manifest, out)
        elif args.command == 'evaluate':
            cmd_evaluate(conf, args.checkpoints, args.manifest,
                         conf['run.out'] or os.path.join(data_root(),
                                                         'evaluation'))
        else:
            out = args.out or os.path.join(args.eval_dir, 'report')
            cmd_report(args.eval_dir, out, conf['report.train_velocities'],
                       conf['report.plots'])
    except CsiCastError as err:
        print("\n*** ERROR ***\n{}".format(err), file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
