"""
Ranks
-----
Scenario-wise competition ranks of models, their summaries over scenario
subsets and cost-based efficiency scores.

Created: Autumn 2026
"""

import numpy as np
import pandas as pd

from csicast.utils.errors import (AllZeroCosts, ConfigError, DuplicateModel,
                                  EmptySubset)

# metric: ascending?
METRIC_ORDER = {
    'nmse': True,
    'se': False,
}

SUMMARY_COLUMNS = ['track', 'duplex', 'metric', 'model', 'mean_rank',
                   'rank_score', 'p_rank1', 'n_scenarios', 'n_models']


def _ascending(metric):
    try:
        return METRIC_ORDER[metric.lower()]
    except KeyError:
        raise ConfigError("\n\tUnknown rank metric '{}'. Available: {}\n"
                          .format(metric, ', '.join(METRIC_ORDER)))


def scenario_rank(values, metric='nmse'):
    """
    Competition ranks of models within one scenario; ties share the lowest
    rank ("1224").

    Parameters
    ----------
    values: pandas.Series or iterable of (model, value) pairs
        One value per model
    metric: str
        'nmse' ranks ascending, 'se' descending

    Returns
    -------
    pandas.Series
        Integer rank per model
    """
    if not isinstance(values, pd.Series):
        values = list(values)
        models = [m for m, _ in values]
        values = pd.Series([v for _, v in values], index=models,
                           dtype=float)
    dup = values.index[values.index.duplicated()]
    if len(dup):
        raise DuplicateModel("\n\tModel(s) {} appear more than once in one "
                             "scenario\n".format(', '.join(map(str, dup))))
    ranks = values.rank(method='min', ascending=_ascending(metric))
    return ranks.astype(int)


def rank_table(records, metric='nmse', scenario_col='scenario',
               model_col='model'):
    """
    Ranks of every model in every scenario.

    Parameters
    ----------
    records: pandas.DataFrame
        One row per (model, scenario) with a column named 'metric'

    Returns
    -------
    pandas.DataFrame
        Columns scenario, model, rank
    """
    dup = records.duplicated([scenario_col, model_col])
    if dup.any():
        bad = records.loc[dup, [scenario_col, model_col]].iloc[0]
        raise DuplicateModel(
            "\n\tModel {} has more than one record for scenario {}\n"
            .format(bad[model_col], bad[scenario_col]))
    col = metric.lower()
    ranks = records.groupby(scenario_col, sort=True)[col].rank(
        method='min', ascending=_ascending(metric)).astype(int)
    out = records[[scenario_col, model_col]].copy()
    out['rank'] = ranks
    return out.sort_values([scenario_col, model_col]).reset_index(drop=True)


def rank_summaries(ranks, n_models=None, model_col='model'):
    """
    Mean rank, rank score and share of rank-1 scenarios per model.

    Parameters
    ----------
    ranks: pandas.DataFrame
        Columns model and rank over a scenario subset
    n_models: int
        Size of the model set; counted from 'ranks' if None

    Returns
    -------
    pandas.DataFrame
        Indexed by model with columns mean_rank, rank_score, p_rank1,
        n_scenarios
    """
    if len(ranks) == 0:
        raise EmptySubset("Rank summaries need at least one scenario")
    n_models = n_models or ranks[model_col].nunique()
    grp = ranks.groupby(model_col, sort=True)['rank']
    out = pd.DataFrame({
        'mean_rank': grp.mean(),
        'p_rank1': grp.apply(lambda r: float(np.mean(r == 1))),
        'n_scenarios': grp.size(),
    })
    out.insert(1, 'rank_score', n_models - out['mean_rank'])
    return out


def track_summaries(records, metrics=('nmse', 'se'),
                    by=('track', 'duplex')):
    """
    Rank summaries for every (track, duplex) subset and metric.

    Returns
    -------
    pandas.DataFrame
        Columns as SUMMARY_COLUMNS
    """
    frames = []
    for key, sub in records.groupby(list(by), sort=True):
        n_models = sub['model'].nunique()
        for metric in metrics:
            summ = rank_summaries(rank_table(sub, metric), n_models)
            summ = summ.reset_index()
            for name, val in zip(by, key):
                summ[name] = val
            summ['metric'] = metric
            summ['n_models'] = n_models
            frames.append(summ)
    if not frames:
        raise EmptySubset("No evaluation records to summarize")
    return pd.concat(frames, ignore_index=True)[SUMMARY_COLUMNS]


def eff_score(costs):
    """
    Normalized saving relative to the most expensive model,
    1 - c/max(c).

    Parameters
    ----------
    costs: pandas.Series or dict
        Cost per model

    Returns
    -------
    pandas.Series
        Scores in [0, 1]
    """
    costs = pd.Series(costs, dtype=float)
    top = costs.max()
    if not top > 0:
        raise AllZeroCosts("\n\tEfficiency scores need at least one model "
                           "with a nonzero cost\n")
    return 1 - costs/top
