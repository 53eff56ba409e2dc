"""
Noise models
------------
Corruption models applied to historical CSI: additive white Gaussian
noise, phase noise, burst noise and packet drops. Also empirical SNR
measurement, calibration of the phase/burst noise degree against a target
SNR and imputation of dropped snapshots.

All functions are deterministic for a given seed.

Created: Autumn 2026
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from csicast.utils.core_types import CsiSequence, NoiseType, frobenius_norm_sq
from csicast.utils.errors import (CalibrationDiverged, DimensionMismatch,
                                  InvalidParams, ZeroNoise, ZeroSignal)

logger = logging.getLogger(__name__)

# Burst amplitude and occurrence probability are proportional to the noise
# degree nd: A = BURST_AMP_SCALE*nd, P = min(1, BURST_PROB_SCALE*nd)
BURST_AMP_SCALE = 1.0
BURST_PROB_SCALE = 0.05
BURST_LENGTH = 4

CALIB_MAX_ITER = 60
# Bisection brackets of the scalar noise degree
_BRACKETS = {
    NoiseType.PHASE: (0.0, np.pi),
    NoiseType.BURST: (1e-6, 1e4),
}


@dataclass(frozen=True)
class NoiseParams:
    """
    Parameters of one corruption model. Only the fields of the selected
    noise type are used.
    """
    noise_type: NoiseType = NoiseType.NONE
    snr_db: float = float('inf')
    sigma_rad: float = 0.0
    burst_amplitude: float = 0.0
    burst_prob: float = 0.0
    burst_length: int = BURST_LENGTH
    drop_prob: float = 0.0
    degree: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.noise_type, NoiseType):
            object.__setattr__(self, 'noise_type', NoiseType(self.noise_type))
        if self.sigma_rad < 0:
            raise InvalidParams("sigma_rad must be nonnegative")
        if not 0.0 <= self.burst_prob <= 1.0:
            raise InvalidParams(
                "\n\tBurst occurrence probability must be in [0, 1], got "
                "{}\n".format(self.burst_prob))
        if self.burst_length < 1:
            raise InvalidParams("Burst length must be at least 1 slot")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise InvalidParams(
                "\n\tDrop probability must be in [0, 1], got {}\n".format(
                    self.drop_prob))

    @classmethod
    def burst_from_degree(cls, nd, length=BURST_LENGTH):
        return cls(NoiseType.BURST, burst_amplitude=BURST_AMP_SCALE*nd,
                   burst_prob=min(1.0, BURST_PROB_SCALE*nd),
                   burst_length=length, degree=nd)


class DropMask(np.ndarray):
    """
    Boolean vector over time steps; True marks a dropped snapshot. The
    indices of dropped snapshots are known to the consumer.
    """

    def __new__(cls, values):
        return np.asarray(values, dtype=bool).view(cls)


def _rng(seed):
    return np.random.default_rng(seed)


def _complex_normal(rng, shape, var=1.0):
    """Circular complex Gaussian with variance split over re and im."""
    scale = np.sqrt(var/2.0)
    return scale*(rng.standard_normal(shape)
                  + 1j*rng.standard_normal(shape))


def _data(seq):
    return seq.data if isinstance(seq, CsiSequence) else np.asarray(seq)


def _wrap(like, data):
    if isinstance(like, CsiSequence):
        return like.with_data(data.astype(like.data.dtype, copy=False))
    return data


def snr_to_sigma2(clean, snr_db):
    """
    Per-element complex noise variance realizing 'snr_db' against the mean
    per-element power of 'clean'.
    """
    h = _data(clean)
    power = frobenius_norm_sq(h)
    if power == 0:
        raise ZeroSignal("\n\tCannot set an SNR against an all-zero "
                         "channel\n")
    return power/h.size*10**(-snr_db/10.)


def apply_awgn(clean, snr_db, rng_seed):
    """Add i.i.d. circular complex Gaussian noise at the given SNR."""
    h = _data(clean)
    sigma2 = snr_to_sigma2(h, snr_db)
    if sigma2 == 0:
        return _wrap(clean, h.copy())
    noise = _complex_normal(_rng(rng_seed), h.shape, sigma2)
    return _wrap(clean, h + noise)


def apply_phase_noise(clean, sigma_rad, rng_seed):
    """
    Perturb the phase of every element by a Gaussian angle with standard
    deviation 'sigma_rad'; magnitudes are kept.
    """
    if sigma_rad < 0:
        raise InvalidParams("sigma_rad must be nonnegative")
    h = _data(clean)
    if sigma_rad == 0:
        return _wrap(clean, h.copy())
    delta = sigma_rad*_rng(rng_seed).standard_normal(h.shape)
    return _wrap(clean, np.abs(h)*np.exp(1j*(np.angle(h) + delta)))


def burst_bell(tau, length):
    """Bell window exp(-(tau - c)^2/2) centred on c = (length - 1)/2."""
    c = (length - 1)/2.
    return np.exp(-(np.asarray(tau, dtype=float) - c)**2/2.)


def burst_envelope(n_steps, params, rng_seed, stream_shape):
    """
    Burst amplitude envelope and complex excitation per stream.

    Each stream (one per antenna and subcarrier) runs one Bernoulli trial
    with probability P per time slot; the first success marks the burst
    start s, which gives the truncated geometric start distribution and at
    most one burst per stream. The burst covers slots s..s+L_burst-1,
    clipped at the end of the window.

    Returns
    -------
    env: array (*stream_shape, n_steps)
        A*g(t - s) inside the burst window, zero elsewhere
    eps: complex array (*stream_shape, n_steps)
        Standard circular complex normal excitation
    """
    rng = _rng(rng_seed)
    trials = rng.random(stream_shape + (n_steps,)) < params.burst_prob
    has_burst = trials.any(axis=-1)
    start = np.argmax(trials, axis=-1)
    tau = np.arange(n_steps) - start[..., None]
    inside = (tau >= 0) & (tau < params.burst_length) & has_burst[..., None]
    env = np.where(inside,
                   params.burst_amplitude*burst_bell(tau, params.burst_length),
                   0.0)
    eps = _complex_normal(rng, stream_shape + (n_steps,))
    return env, eps


def apply_burst_noise(clean, params, rng_seed):
    """
    Add at most one bell-shaped noise burst per (antenna, subcarrier)
    stream.
    """
    if not 0.0 <= params.burst_prob <= 1.0:
        raise InvalidParams("Burst occurrence probability outside [0, 1]")
    h = _data(clean)
    if params.burst_prob == 0 or params.burst_amplitude == 0:
        return _wrap(clean, h.copy())
    n_tx, n_t, n_sc = h.shape
    env, eps = burst_envelope(n_t, params, rng_seed, (n_tx, n_sc))
    noise = np.transpose(env*eps, (0, 2, 1))
    return _wrap(clean, h + noise)


def draw_drop_mask(n_steps, p_d, rng_seed):
    if not 0.0 <= p_d <= 1.0:
        raise InvalidParams("Drop probability outside [0, 1]")
    return DropMask(_rng(rng_seed).random(n_steps) < p_d)


def apply_packet_drop(clean, p_d, rng_seed):
    """
    Drop whole snapshots: one Bernoulli(p_d) draw per time step, dropped
    steps are zeroed across antennas and subcarriers.

    Returns
    -------
    noisy: CsiSequence
    mask: DropMask
    """
    h = _data(clean)
    mask = draw_drop_mask(h.shape[1], p_d, rng_seed)
    out = h.copy()
    out[:, mask, :] = 0
    return _wrap(clean, out), mask


def impute_dropped(noisy, mask):
    """
    Replace dropped snapshots by the last observed one. Leading drops take
    the first observed snapshot; if every step is dropped the zeros stay.
    """
    h = _data(noisy)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (h.shape[1],):
        raise DimensionMismatch(
            "\n\tDrop mask of length {} for {} time steps\n".format(
                mask.size, h.shape[1]))
    observed = np.flatnonzero(~mask)
    if observed.size == 0 or observed.size == mask.size:
        return _wrap(noisy, h.copy())
    # index of the last observed step at or before t (forward fill)
    src = np.where(~mask, np.arange(mask.size), -1)
    src = np.maximum.accumulate(src)
    src[src < 0] = observed[0]
    return _wrap(noisy, h[:, src, :])


def empirical_snr(clean, noisy, allow_inf=False):
    """
    10*log10(||H||^2 / ||H_noisy - H||^2) in dB.

    Parameters
    ----------
    allow_inf: bool
        If True, identical inputs give +inf; otherwise ZeroNoise is raised.
    """
    h, hn = _data(clean), _data(noisy)
    if h.shape != hn.shape:
        raise DimensionMismatch("\n\tShapes {} and {} differ\n".format(
            h.shape, hn.shape))
    err = frobenius_norm_sq(hn - h)
    if err == 0:
        if allow_inf:
            return float('inf')
        raise ZeroNoise("\n\tNoisy and clean sequences are identical; the "
                        "SNR is infinite\n")
    return 10*np.log10(frobenius_norm_sq(h)/err)


def corrupt(clean, params, rng_seed, impute=True):
    """
    Apply the corruption described by 'params'.

    Returns
    -------
    noisy: same type as clean
    mask: DropMask or None
        Only set for packet drops
    """
    nt = params.noise_type
    if nt is NoiseType.NONE:
        return _wrap(clean, _data(clean).copy()), None
    if nt is NoiseType.AWGN:
        return apply_awgn(clean, params.snr_db, rng_seed), None
    if nt is NoiseType.PHASE:
        return apply_phase_noise(clean, params.sigma_rad, rng_seed), None
    if nt is NoiseType.BURST:
        return apply_burst_noise(clean, params, rng_seed), None
    noisy, mask = apply_packet_drop(clean, params.drop_prob, rng_seed)
    if impute:
        noisy = impute_dropped(noisy, mask)
    return noisy, mask


def _params_for_degree(noise_type, degree, burst_length):
    if noise_type is NoiseType.PHASE:
        return NoiseParams(NoiseType.PHASE, sigma_rad=degree, degree=degree)
    return NoiseParams.burst_from_degree(degree, burst_length)


def pooled_snr(clean, noisy):
    """
    Empirical SNR in dB of a set of sequences from the signal and error
    power summed over the set. +inf when no element is perturbed.
    """
    clean, noisy = list(clean), list(noisy)
    if len(clean) != len(noisy):
        raise DimensionMismatch("\n\t{} clean and {} noisy sequences\n"
                                .format(len(clean), len(noisy)))
    signal = err = 0.0
    for h, hn in zip(clean, noisy):
        h, hn = _data(h), _data(hn)
        if h.shape != hn.shape:
            raise DimensionMismatch("\n\tShapes {} and {} differ\n".format(
                h.shape, hn.shape))
        signal += frobenius_norm_sq(h)
        err += frobenius_norm_sq(hn - h)
    if err == 0:
        return float('inf')
    return float(10*np.log10(signal/err))


def _set_snr(noise_type, degree, clean, seeds, burst_length):
    params = _params_for_degree(noise_type, degree, burst_length)
    return pooled_snr(clean, [corrupt(h, params, s)[0]
                              for h, s in zip(clean, seeds)])


def calibrate_noise_degree(noise_type, target_snr_db, reference, tol_db=0.25,
                           burst_length=BURST_LENGTH, max_samples=None,
                           seed=0):
    """
    Find the phase-noise sigma or the burst degree nd whose pooled
    empirical SNR over 'reference' (see pooled_snr) matches
    'target_snr_db'.

    The SNR decreases monotonically in the degree, so plain bisection is
    used (log-spaced for burst). Noise draws use fixed seeds so the
    objective is deterministic.

    Parameters
    ----------
    noise_type: NoiseType
        PHASE or BURST
    target_snr_db: float
        Target SNR in dB
    reference: CsiDataset or sequence of arrays
        Clean channel sequences to calibrate against
    tol_db: float
        Accepted distance from the target in dB
    max_samples: int
        Use at most this many reference sequences

    Returns
    -------
    params: NoiseParams
    """
    noise_type = NoiseType(noise_type)
    if noise_type not in _BRACKETS:
        raise InvalidParams(
            "\n\tCalibration is defined for PHASE and BURST noise, not "
            "{}\n".format(noise_type.value))
    clean = [s.history.data if hasattr(s, 'history') else _data(s)
             for s in reference]
    if not clean:
        raise InvalidParams("Calibration needs a nonempty reference set")
    if max_samples is not None:
        clean = clean[:max_samples]
    seeds = [seed + i for i in range(len(clean))]

    lo, hi = _BRACKETS[noise_type]
    use_log = noise_type is NoiseType.BURST
    if use_log:
        lo, hi = np.log10(lo), np.log10(hi)

    def snr_at(x):
        deg = 10**x if use_log else x
        return deg, _set_snr(noise_type, deg, clean, seeds, burst_length)

    # SNR at the lower end is the largest reachable, at the upper end the
    # smallest
    _, snr_hi_end = snr_at(hi)
    if target_snr_db < snr_hi_end - tol_db:
        raise CalibrationDiverged(
            "\n\tTarget SNR {} dB is below the reachable minimum {:.2f} dB "
            "for {} noise\n".format(target_snr_db, snr_hi_end,
                                    noise_type.value))
    for it in range(CALIB_MAX_ITER):
        mid = 0.5*(lo + hi)
        deg, snr = snr_at(mid)
        if abs(snr - target_snr_db) <= tol_db:
            logger.debug("Calibrated %s noise to %.2f dB: degree %.5g "
                         "after %d iterations", noise_type.value, snr, deg,
                         it + 1)
            return _params_for_degree(noise_type, deg, burst_length)
        if snr > target_snr_db:
            lo = mid
        else:
            hi = mid
    raise CalibrationDiverged(
        "\n\tNo {} noise degree within {} dB of {} dB after {} "
        "iterations\n".format(noise_type.value, tol_db, target_snr_db,
                              CALIB_MAX_ITER))
