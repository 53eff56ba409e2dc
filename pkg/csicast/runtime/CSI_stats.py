"""
Module script for the evaluation stage: per (model, scenario) records,
rank summaries, efficiency tables and ACF diagnostics.
"""
import hashlib
import logging

import dask
import numpy as np
import pandas as pd

from csicast.channel.channel_sim import clean_history
from csicast.stats import acf
from csicast.stats.efficiency import efficiency_frame, efficiency_record
from csicast.stats.metrics import RECORD_COLUMNS, evaluate_model
from csicast.stats.ranks import rank_table, track_summaries
from csicast.utils.errors import ConfigError
from csicast.utils.file_io import load_dataset

logger = logging.getLogger(__name__)

ACF_COLUMNS = ['track', 'scenario', 'duplex', 'velocity', 'delay_spread',
               'profile', 'lag', 'acf']


def default_eval_config():
    """
    Default settings of the evaluation stage. Values from the [eval] section
    of the run configuration are merged over these.
    """
    return {
        'se_snr_db': 10.0,
        'timing_reps': 20,
        'timing_warmup': 3,
        'acf_max_lag': 8,
        'metrics': ('nmse', 'se'),
    }


def mod_eval_config(eval_conf):
    """Merge [eval] settings over the defaults."""
    cfg = default_eval_config()
    unknown = set(eval_conf) - set(cfg)
    if unknown:
        raise ConfigError("\n\tUnknown evaluation settings: {}\n".format(
            ', '.join(sorted(unknown))))
    cfg.update(eval_conf)
    return cfg


def compute_scheduler(jobs):
    """dask scheduler arguments for a given number of workers."""
    if jobs <= 1:
        return {'scheduler': 'synchronous'}
    return {'scheduler': 'threads', 'num_workers': int(jobs)}


def applicable_models(models, system):
    """Models whose dimensions and duplex mode match a dataset config."""
    out = {}
    for mid, m in models.items():
        s = m.system
        if s.duplex is not system.duplex:
            continue
        if (s.n_tx, s.n_sc, s.hist_len, s.pred_len) !=\
                (system.n_tx, system.n_sc, system.hist_len, system.pred_len):
            raise ConfigError(
                "\n\tModel '{}' was built for {} but the dataset has {}. "
                "Check the [system] section used for training\n".format(
                    mid, s, system))
        out[mid] = m
    return out


def clean_histories(ds, n_paths=None, k_factor_db=None):
    """Noise-free histories of a dataset, resynthesized from the seeds."""
    return np.stack([clean_history(s.scenario, ds.config, s.seed, n_paths,
                                   k_factor_db) for s in ds.samples])


def scenario_acf(ds, track, max_lag, n_paths=None, k_factor_db=None):
    """Temporal ACF rows of one scenario's clean histories."""
    max_lag = min(max_lag, ds.config.hist_len - 1)
    r = acf.temporal_acf(clean_histories(ds, n_paths, k_factor_db), max_lag)
    sc = ds.scenario
    return pd.DataFrame({
        'track': track, 'scenario': sc.label(), 'duplex': sc.duplex.value,
        'velocity': sc.velocity, 'delay_spread': sc.delay_spread,
        'profile': sc.channel_profile.value, 'lag': r['lag'].values,
        'acf': r.values})


def evaluate_entry(entry, path, models, eval_conf, sim):
    """
    Evaluate all applicable models on one manifest entry.

    Returns
    -------
    rows: list of dict
        Evaluation records
    acf_rows: pandas.DataFrame
    """
    ds = load_dataset(path)
    track = entry['track']
    print("\tEvaluating {} ({})".format(entry['file'], track))
    rows = [evaluate_model(m, ds, mid, track, eval_conf['se_snr_db'])
            .to_row() for mid, m in applicable_models(models,
                                                      ds.config).items()]
    acf_rows = scenario_acf(ds, track, eval_conf['acf_max_lag'],
                            sim.get('n_paths'), sim.get('k_factor_db'))
    return rows, acf_rows


def evaluate_all(models, manifest, paths, eval_conf, sim, jobs=1):
    """
    Evaluation records and ACF rows over all manifest entries, one dask
    task per entry.
    """
    tasks = [dask.delayed(evaluate_entry)(entry, path, models, eval_conf,
                                          sim)
             for (_, entry), path in zip(manifest.iterrows(), paths)]
    results = dask.compute(*tasks, **compute_scheduler(jobs))
    records = pd.DataFrame([r for rows, _ in results for r in rows],
                           columns=RECORD_COLUMNS)
    acf_rows = [a for _, a in results]
    acf_df = pd.concat(acf_rows, ignore_index=True) if acf_rows else\
        pd.DataFrame(columns=ACF_COLUMNS)
    records = records.sort_values(['track', 'duplex', 'scenario', 'model'])
    return records.reset_index(drop=True), acf_df[ACF_COLUMNS]


def rank_summary_table(records, metrics=('nmse', 'se')):
    return track_summaries(records, metrics=metrics)


def scenario_ranks(records, metrics=('nmse', 'se')):
    """Rank of every model in every scenario, per track and duplex."""
    frames = []
    for (track, dup), sub in records.groupby(['track', 'duplex'], sort=True):
        for metric in metrics:
            rk = rank_table(sub, metric)
            rk.insert(0, 'metric', metric)
            rk.insert(0, 'duplex', dup)
            rk.insert(0, 'track', track)
            frames.append(rk)
    return pd.concat(frames, ignore_index=True)


def efficiency_table(models, eval_conf):
    """
    Efficiency records with efficiency scores, scored within each duplex
    group.

    Parameters
    ----------
    models: dict
        duplex -> {model id: model}
    """
    frames = []
    for dup, group in sorted(models.items()):
        recs = [efficiency_record(m, mid, eval_conf['timing_reps'],
                                  eval_conf['timing_warmup'])
                for mid, m in sorted(group.items())]
        df = efficiency_frame(recs)
        df.insert(1, 'duplex', dup)
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b''):
            h.update(chunk)
    return h.hexdigest()


def stamp_table(config_text, seed, files):
    """Reproducibility stamp: config hash, seed and input file hashes."""
    rows = [('config_sha256',
             hashlib.sha256(config_text.encode('utf-8')).hexdigest()),
            ('seed', str(seed))]
    rows += [('sha256:{}'.format(label), sha256_file(path))
             for label, path in files]
    return pd.DataFrame(rows, columns=['key', 'value'])
