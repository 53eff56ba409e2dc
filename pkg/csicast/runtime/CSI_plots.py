"""
Module script for the report stage: summary tables derived from the
evaluation CSVs and, when matplotlib is available, the figures.
"""
import logging
import os

import numpy as np
import pandas as pd

from csicast.stats.ranks import METRIC_ORDER, rank_table
from csicast.utils.errors import MissingData
from csicast.utils.file_io import read_csv, write_csv

logger = logging.getLogger(__name__)

REPORT_INPUTS = ('evaluation.csv', 'rank_summary.csv', 'acf.csv')


def read_eval_dir(eval_dir):
    """The evaluation tables the report is built from."""
    if not os.path.isdir(eval_dir):
        raise MissingData("\n\tEvaluation directory {} does not exist\n"
                          .format(eval_dir))
    tables = {f.split('.')[0]: read_csv(os.path.join(eval_dir, f))
              for f in REPORT_INPUTS}
    if tables['evaluation'].empty:
        raise MissingData("\n\tNo evaluation records in {}\n".format(
            eval_dir))
    return tables


def nmse_vs_snr(records):
    """Mean NMSE per AWGN SNR for every (track, duplex, model)."""
    awgn = records[records['noise_type'] == 'AWGN']
    keys = ['track', 'duplex', 'model', 'noise_degree']
    grp = awgn.groupby(keys, sort=True)
    out = grp['nmse'].agg(['mean', 'size']).reset_index()
    out.columns = ['track', 'duplex', 'model', 'snr_db', 'nmse',
                   'n_scenarios']
    out.insert(5, 'nmse_db', 10*np.log10(out['nmse']))
    return out


def velocity_region(v, train_velocities):
    """
    'seen' for training velocities, 'interpolation' inside their range
    and 'extrapolation' outside it.
    """
    tv = np.asarray(train_velocities, dtype=float)
    if np.any(np.isclose(v, tv)):
        return 'seen'
    if tv.min() < v < tv.max():
        return 'interpolation'
    return 'extrapolation'


def nmse_vs_velocity(records, train_velocities):
    """One row per evaluation record with its velocity region."""
    cols = ['track', 'duplex', 'model', 'velocity', 'scenario', 'nmse',
            'nmse_db']
    out = records[cols].copy()
    out['region'] = [velocity_region(v, train_velocities)
                     for v in out['velocity']]
    out = out.sort_values(['track', 'duplex', 'model', 'velocity',
                           'scenario'])
    return out.reset_index(drop=True)


def rank_distribution(records, metrics=tuple(METRIC_ORDER)):
    """Count and share of each rank per (track, duplex, metric, model)."""
    frames = []
    for (track, dup), sub in records.groupby(['track', 'duplex'],
                                             sort=True):
        for metric in metrics:
            rk = rank_table(sub, metric)
            cnt = rk.groupby(['model', 'rank']).size().rename('count')
            cnt = cnt.reset_index()
            n_sc = rk['scenario'].nunique()
            cnt['share'] = cnt['count']/n_sc
            cnt.insert(0, 'metric', metric)
            cnt.insert(0, 'duplex', dup)
            cnt.insert(0, 'track', track)
            frames.append(cnt)
    return pd.concat(frames, ignore_index=True)


def acf_stems(acf_df):
    """Mean temporal ACF per (duplex, velocity, lag)."""
    if acf_df.empty:
        return pd.DataFrame(columns=['duplex', 'velocity', 'lag', 'acf'])
    out = acf_df.groupby(['duplex', 'velocity', 'lag'], sort=True)['acf']
    return out.mean().reset_index()


def report_tables(tables, train_velocities):
    return {
        'nmse_vs_snr': nmse_vs_snr(tables['evaluation']),
        'nmse_vs_velocity': nmse_vs_velocity(tables['evaluation'],
                                             train_velocities),
        'rank_distribution': rank_distribution(tables['evaluation']),
        'acf_stems': acf_stems(tables['acf']),
    }


def write_tables(report, out_dir):
    for name, df in report.items():
        write_csv(df, os.path.join(out_dir, '{}.csv'.format(name)))


def plot_main(report, out_dir, train_velocities):
    """
    Render the report figures. Returns the written image paths; nothing is
    drawn when matplotlib cannot be imported.
    """
    try:
        import matplotlib
        matplotlib.use('Agg')
        import matplotlib.pyplot as plt
        import csicast.plot.plots as cpl
    except ImportError:
        logger.warning("matplotlib is not available; skipping figures")
        return []

    written = []

    def _save(fig, name):
        fpath = os.path.join(out_dir, '{}.png'.format(name))
        fig.savefig(fpath, bbox_inches='tight')
        plt.close(fig)
        written.append(fpath)

    # NMSE vs SNR, one panel per (track, duplex)
    snr = report['nmse_vs_snr']
    if not snr.empty:
        cpl.figure_init('line')
        groups = list(snr.groupby(['track', 'duplex'], sort=True))
        fig, axs = cpl.fig_grid_setup(
            figsize=(12, 8), fshape=cpl.get_nrow_ncol(len(groups)))
        for ax, ((track, dup), sub) in zip(axs, groups):
            mods = sorted(sub['model'].unique())
            cpl.make_line_plot(
                ax, [sub.loc[sub['model'] == m, 'nmse_db'].values
                     for m in mods],
                [sub.loc[sub['model'] == m, 'snr_db'].values for m in mods],
                labels=mods, marker='o')
            cpl.axes_settings(ax, figtitle='{} | {}'.format(track, dup),
                              xlabel='SNR (dB)', ylabel='NMSE (dB)')
        _save(fig, 'nmse_vs_snr')

    # NMSE vs velocity
    vel = report['nmse_vs_velocity']
    cpl.figure_init('line')
    duplexes = sorted(vel['duplex'].unique())
    fig, axs = cpl.fig_grid_setup(figsize=(12, 5),
                                  fshape=(1, len(duplexes)))
    tv = np.asarray(train_velocities, dtype=float)
    for ax, dup in zip(axs, duplexes):
        sub = vel[vel['duplex'] == dup]
        curve = sub.groupby(['model', 'velocity'])['nmse'].mean()
        mods = sorted(sub['model'].unique())
        cpl.make_line_plot(
            ax, [10*np.log10(curve[m].values) for m in mods],
            [curve[m].index.values for m in mods], labels=mods, marker='o')
        vmax = max(sub['velocity'].max(), tv.max())
        cpl.shade_regions(ax, {'interpolation': (tv.min(), tv.max()),
                               'extrapolation': (tv.max(), vmax)},
                          colors={'interpolation': 'tab:blue',
                                  'extrapolation': 'tab:red'})
        cpl.axes_settings(ax, figtitle=dup, xlabel='Velocity (m/s)',
                          ylabel='NMSE (dB)')
    _save(fig, 'nmse_vs_velocity')

    # Rank-1 shares
    dist = report['rank_distribution']
    first = dist[dist['rank'] == 1]
    if not first.empty:
        cpl.figure_init('bar')
        piv = first.pivot_table(index=['track', 'duplex', 'metric'],
                                columns='model', values='share',
                                fill_value=0.0)
        fig, axs = cpl.fig_grid_setup(figsize=(12, 5))
        cpl.make_bar_plot(axs[0], piv.values,
                          ['/'.join(map(str, k)) for k in piv.index],
                          leg_labels=list(piv.columns))
        cpl.axes_settings(axs[0], figtitle='Share of rank-1 scenarios',
                          ylabel='share')
        _save(fig, 'rank1_share')

    # ACF stems
    stems = report['acf_stems']
    if not stems.empty:
        cpl.figure_init('stem')
        vels = sorted(stems['velocity'].unique())
        fig, axs = cpl.fig_grid_setup(figsize=(12, 4),
                                      fshape=(1, len(vels)))
        for ax, v in zip(axs, vels):
            sub = stems[stems['velocity'] == v].groupby('lag')['acf'].mean()
            cpl.make_stem_plot(ax, sub.index.values, sub.values)
            cpl.axes_settings(ax, figtitle='v = {:g} m/s'.format(v),
                              xlabel='lag', ylabel='|ACF|', ylim=(0, 1.05))
        _save(fig, 'acf_stems')

    return written
