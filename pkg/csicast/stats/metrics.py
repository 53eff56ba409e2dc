"""
Metrics
-------
Prediction accuracy metrics: NMSE and spectral efficiency under matched
and predicted beamforming, and the per-(model, scenario) evaluation record.

Created: Autumn 2026
"""

import logging
from dataclasses import dataclass

import numpy as np
import torch

from csicast.model.base import complex_dtype
from csicast.utils.core_types import CsiSequence
from csicast.utils.errors import (DimensionMismatch, InvalidNoiseVar,
                                  InvalidRecord, ZeroTarget)

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ['model', 'track', 'scenario', 'duplex', 'velocity',
                  'delay_spread', 'profile', 'noise_type', 'noise_degree',
                  'nmse', 'nmse_db', 'se', 'se_true', 'n_samples']


def _arr(x):
    return x.data if isinstance(x, CsiSequence) else np.asarray(x)


def nmse_metric(pred, target):
    """
    Normalized squared error of one prediction.

    Parameters
    ----------
    pred, target: CsiSequence or complex array
        Same shape

    Returns
    -------
    float
        ||pred - target||^2 / ||target||^2
    """
    p, t = _arr(pred), _arr(target)
    if p.shape != t.shape:
        raise DimensionMismatch("Prediction {} and target {} differ in "
                                "shape".format(p.shape, t.shape))
    den = np.sum(np.abs(t)**2)
    if den == 0:
        raise ZeroTarget("NMSE is undefined for an all-zero target")
    return float(np.sum(np.abs(p - t)**2)/den)


def _check_noise_var(noise_var):
    if not noise_var > 0 or not np.isfinite(noise_var):
        raise InvalidNoiseVar(
            "\n\tNoise variance must be positive and finite, got {}\n"
            .format(noise_var))


def spectral_efficiency(h, noise_var):
    """
    Spectral efficiency with matched beamforming.

    Parameters
    ----------
    h: complex array
        Antennas on axis 0, subcarriers (and optionally time) on the
        remaining axes
    noise_var: float

    Returns
    -------
    float
        bits/s/Hz averaged over subcarriers
    """
    _check_noise_var(noise_var)
    h = _arr(h)
    power = np.sum(np.abs(h)**2, axis=0)
    return float(np.mean(np.log2(1 + power/noise_var)))


def predicted_se(pred, truth, noise_var):
    """
    Spectral efficiency when beamforming with the predicted channel.

    Subcarriers with a zero prediction carry no data.
    """
    _check_noise_var(noise_var)
    p, h = _arr(pred), _arr(truth)
    if p.shape != h.shape:
        raise DimensionMismatch("Prediction {} and truth {} differ in "
                                "shape".format(p.shape, h.shape))
    inner = np.abs(np.sum(np.conj(p)*h, axis=0))**2
    p_norm = np.sum(np.abs(p)**2, axis=0)
    ratio = np.divide(inner, noise_var*p_norm, out=np.zeros_like(inner),
                      where=p_norm > 0)
    return float(np.mean(np.log2(1 + ratio)))


def se_noise_var(targets, snr_db):
    """
    Noise variance that puts the mean per-subcarrier channel power
    'snr_db' above the noise.

    Parameters
    ----------
    targets: complex array (samples, n_tx, time, n_sc)
    """
    power = np.mean(np.sum(np.abs(np.asarray(targets))**2, axis=1))
    if power == 0:
        raise InvalidNoiseVar("All-zero targets give no SE reference power")
    return float(power*10**(-snr_db/10))


@dataclass(frozen=True)
class EvaluationRecord:
    model: str
    track: str
    scenario: object
    nmse: float
    se: float
    se_true: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidRecord("An evaluation record needs at least one "
                                "sample")
        if self.nmse < 0:
            raise InvalidRecord("NMSE cannot be negative")

    def to_row(self):
        sc = self.scenario
        return {
            'model': self.model, 'track': self.track,
            'scenario': sc.label(), 'duplex': sc.duplex.value,
            'velocity': sc.velocity, 'delay_spread': sc.delay_spread,
            'profile': sc.channel_profile.value,
            'noise_type': sc.noise_type.value,
            'noise_degree': sc.noise_degree, 'nmse': self.nmse,
            'nmse_db': 10*np.log10(self.nmse) if self.nmse > 0 else -np.inf,
            'se': self.se, 'se_true': self.se_true,
            'n_samples': self.n_samples,
        }


@torch.no_grad()
def predict_batch(model, histories, batch_size=256):
    """Predictions for stacked histories (samples, n_tx, T, N)."""
    cdtype = complex_dtype(model.real_dtype())
    x = torch.from_numpy(np.ascontiguousarray(histories)).to(cdtype)
    was_training = model.training
    model.eval()
    out = [model(x[i:i + batch_size]).cpu().numpy()
           for i in range(0, x.shape[0], batch_size)]
    model.train(was_training)
    return np.concatenate(out)


def evaluate_model(model, dataset, model_id=None, track='', se_snr_db=10.0):
    """
    Mean NMSE and mean predicted SE of 'model' over one scenario dataset.

    Returns
    -------
    EvaluationRecord
    """
    targets = dataset.targets()
    preds = predict_batch(model, dataset.histories())
    noise_var = se_noise_var(targets, se_snr_db)
    nmse = [nmse_metric(p, t) for p, t in zip(preds, targets)]
    se = [predicted_se(p, t, noise_var) for p, t in zip(preds, targets)]
    se_true = [spectral_efficiency(t, noise_var) for t in targets]
    scenario = dataset.scenario or dataset.samples[0].scenario
    rec = EvaluationRecord(model_id or model.kind, track, scenario,
                           float(np.mean(nmse)), float(np.mean(se)),
                           float(np.mean(se_true)), len(dataset))
    logger.debug("%s on %s: NMSE %.4g, SE %.4g", rec.model,
                 scenario.label(), rec.nmse, rec.se)
    return rec
