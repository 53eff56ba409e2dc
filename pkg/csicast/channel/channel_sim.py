"""
Channel simulator
-----------------
Time-varying MIMO-OFDM channels from a tapped-delay-line model:

    H[m, t, k] = sum_p a_p exp(j phi_mp) exp(j 2 pi fD_p t) exp(-j 2 pi f_k tau_p)

with exponentially distributed path delays rescaled to the requested RMS
delay spread, Jakes-style per-path Doppler, a planar array at the base
station and an optional line-of-sight ray.

Created: Autumn 2026
"""

import logging
from dataclasses import dataclass
from math import isqrt

import numpy as np
from scipy.constants import speed_of_light

from csicast.channel import noise as nz
from csicast.utils.core_types import (ChannelProfile, CsiDataset, CsiSample,
                                      CsiSequence, Duplex, NoiseType,
                                      ScenarioDescriptor, time_axis)
from csicast.utils.errors import (ConfigError, DimensionMismatch,
                                  InvalidScenario)

logger = logging.getLogger(__name__)


# Channel profile table: number of paths, LOS K-factor (dB, None for NLOS),
# fixed seed of the cluster angles and their spread (rad)
PROFILES = {
    ChannelProfile.NLOS_A: {'n_paths': 12, 'k_db': None, 'angle_seed': 101,
                            'angle_spread': 0.35},
    ChannelProfile.NLOS_B: {'n_paths': 16, 'k_db': None, 'angle_seed': 202,
                            'angle_spread': 0.25},
    ChannelProfile.NLOS_C: {'n_paths': 12, 'k_db': None, 'angle_seed': 303,
                            'angle_spread': 0.45},
    ChannelProfile.LOS_D: {'n_paths': 12, 'k_db': 10.0, 'angle_seed': 404,
                           'angle_spread': 0.30},
    ChannelProfile.LOS_E: {'n_paths': 12, 'k_db': 13.0, 'angle_seed': 505,
                           'angle_spread': 0.30},
}


@dataclass(frozen=True)
class PathSet:
    """
    Multipath components of one channel realization.

    delays: (P,) seconds; gains: (P,) complex; azimuth, elevation: (P,)
    angles of departure in radians; doppler: (P,) Hz.
    """
    delays: np.ndarray
    gains: np.ndarray
    azimuth: np.ndarray
    elevation: np.ndarray
    doppler: np.ndarray
    los_flag: bool = False
    k_factor_db: float = None

    @property
    def n_paths(self):
        return self.delays.size

    def rms_delay_spread(self):
        return rms_delay_spread(self.delays, np.abs(self.gains)**2)


def rms_delay_spread(delays, powers):
    """Power-weighted RMS width of a delay profile."""
    w = powers/np.sum(powers)
    mean = np.sum(w*delays)
    return float(np.sqrt(max(np.sum(w*delays**2) - mean**2, 0.0)))


def array_geometry(n_tx):
    """
    Element positions (rows, cols in half wavelengths) and polarization
    phase offsets of the base-station array.

    Dual polarization applies when n_tx is even and n_tx/2 is a perfect
    square: the square grid is duplicated with a pi/2 phase offset.
    Otherwise the antennas form one rows x cols grid with rows the largest
    divisor of n_tx not above sqrt(n_tx).
    """
    half = n_tx//2
    if n_tx % 2 == 0 and half > 0 and isqrt(half)**2 == half:
        side = isqrt(half)
        r, c = np.divmod(np.arange(half), side)
        rows = np.concatenate([r, r])
        cols = np.concatenate([c, c])
        pol = np.concatenate([np.zeros(half), np.full(half, np.pi/2)])
        return rows, cols, pol
    nrow = max(d for d in range(1, isqrt(n_tx) + 1) if n_tx % d == 0)
    ncol = n_tx//nrow
    rows, cols = np.divmod(np.arange(n_tx), ncol)
    return rows, cols, np.zeros(n_tx)


def array_phase(n_tx, azimuth, elevation):
    """
    Planar steering phases phi[m, p] for half-wavelength spacing.
    Broadside (zero azimuth and elevation) gives zero phase.
    """
    rows, cols, pol = array_geometry(n_tx)
    az = np.asarray(azimuth)[None, :]
    el = np.asarray(elevation)[None, :]
    phase = np.pi*(cols[:, None]*np.sin(az)*np.cos(el)
                   + rows[:, None]*np.sin(el))
    return phase + pol[:, None]


def subcarrier_offsets(config):
    """Baseband frequency offsets (Hz) centred on the simulated grid."""
    k = np.arange(config.n_total)
    return (k - (config.n_total - 1)/2.)*config.sc_spacing


def generate_path_set(scenario, config, rng_seed, n_paths=None,
                      k_factor_db=None):
    """
    Draw the multipath components of one channel realization.

    Parameters
    ----------
    scenario: ScenarioDescriptor
    config: SystemConfig
    rng_seed: int
        Seed of the realization
    n_paths: int
        Number of paths; the profile's default if None
    k_factor_db: float
        LOS power ratio for LOS profiles; the profile's default if None

    Returns
    -------
    paths: PathSet
    """
    if not scenario.delay_spread > 0:
        raise InvalidScenario(
            "\n\tDelay spread must be positive, got {}\n".format(
                scenario.delay_spread))
    prof = PROFILES[scenario.channel_profile]
    n_paths = prof['n_paths'] if n_paths is None else int(n_paths)
    if n_paths < 2:
        raise InvalidScenario("At least two paths are needed to realize a "
                              "delay spread")
    los = scenario.channel_profile.is_los
    k_db = (prof['k_db'] if k_factor_db is None else k_factor_db)\
        if los else None

    rng = np.random.default_rng(rng_seed)

    # Delays and powers; the LOS ray sits at zero delay
    delays = np.sort(rng.exponential(1.0, n_paths))
    if los:
        delays = np.concatenate([[0.0], np.sort(delays[1:])])
    powers = np.exp(-delays)*rng.uniform(0.5, 1.5, n_paths)
    if los:
        K = 10**(k_db/10.)
        nlos = powers[1:]/np.sum(powers[1:])
        powers = np.concatenate([[K/(K + 1)], nlos/(K + 1)])
    else:
        powers = powers/np.sum(powers)
    # Rescaling after the power draw keeps the delay spread exact
    delays = delays*scenario.delay_spread/rms_delay_spread(delays, powers)

    phases = rng.uniform(0, 2*np.pi, n_paths)
    gains = np.sqrt(powers)*np.exp(1j*phases)
    gains = gains/np.sqrt(np.sum(np.abs(gains)**2))

    # Cluster angles are fixed per profile, paths scatter around them
    arng = np.random.default_rng(prof['angle_seed'])
    az0 = arng.uniform(-np.pi/3, np.pi/3, n_paths)
    el0 = arng.uniform(-np.pi/12, np.pi/6, n_paths)
    azimuth = az0 + prof['angle_spread']*rng.standard_normal(n_paths)
    elevation = el0 + 0.5*prof['angle_spread']*rng.standard_normal(n_paths)

    psi = rng.uniform(0, 2*np.pi, n_paths)
    f_max = scenario.velocity/speed_of_light*config.carrier_freq
    doppler = f_max*np.cos(psi)

    return PathSet(delays=delays, gains=gains, azimuth=azimuth,
                   elevation=elevation, doppler=doppler, los_flag=los,
                   k_factor_db=k_db)


def synthesize_csi_sequence(paths, config, n_steps, t0=0.0):
    """
    Frequency response of a path set over the full simulated grid.

    Returns
    -------
    seq: CsiSequence
        complex128 data of shape (n_tx, n_steps, n_total)
    """
    t = time_axis(n_steps, config.report_interval, t0)
    f_k = subcarrier_offsets(config)
    spatial = paths.gains[None, :]*np.exp(
        1j*array_phase(config.n_tx, paths.azimuth, paths.elevation))
    temporal = np.exp(2j*np.pi*np.outer(t, paths.doppler))
    spectral = np.exp(-2j*np.pi*np.outer(paths.delays, f_k))
    data = np.einsum('mp,tp,pk->mtk', spatial, temporal, spectral)
    return CsiSequence(data, t)


def split_bands(seq, config):
    """
    UL and DL bands of a simulated grid. FDD drops the guard band between
    them; TDD returns the same band twice.
    """
    n_sc = seq.data.shape[2]
    if n_sc != config.n_total:
        raise DimensionMismatch(
            "\n\tGrid has {} subcarriers, the {} configuration expects "
            "{}\n".format(n_sc, config.duplex.value, config.n_total))
    if config.duplex is Duplex.TDD:
        return seq, seq
    ul = seq.with_data(seq.data[:, :, :config.n_sc])
    dl = seq.with_data(seq.data[:, :, config.n_sc + config.n_guard:])
    return ul, dl


def _clean_pair(scenario, config, seed, n_paths=None, k_factor_db=None):
    paths = generate_path_set(scenario, config, seed, n_paths, k_factor_db)
    seq = synthesize_csi_sequence(paths, config, config.seq_len)
    ul, dl = split_bands(seq, config)
    h = config.hist_len
    return ul.data[:, :h, :], dl.data[:, h:, :]


def clean_history(scenario, config, seed, n_paths=None, k_factor_db=None):
    """Noise-free history of sample 'seed', resynthesized from its seed."""
    return _clean_pair(scenario, config, seed, n_paths, k_factor_db)[0]


def noise_seed(seed, epoch=0):
    """Seed of the noise draw of one sample (and training epoch)."""
    return np.random.SeedSequence([int(seed), 7919, int(epoch)])


def scenario_noise(scenario, reference=None, calib_tol_db=0.25,
                   burst_length=nz.BURST_LENGTH):
    """
    NoiseParams of a scenario. PHASE and BURST degrees are SNR targets and
    are calibrated against 'reference' clean histories.
    """
    nt, deg = scenario.noise_type, scenario.noise_degree
    if nt is NoiseType.NONE:
        return nz.NoiseParams(NoiseType.NONE)
    if nt is NoiseType.AWGN:
        return nz.NoiseParams(NoiseType.AWGN, snr_db=deg, degree=deg)
    if nt is NoiseType.PACKET_DROP:
        return nz.NoiseParams(NoiseType.PACKET_DROP, drop_prob=deg,
                              degree=deg)
    return nz.calibrate_noise_degree(nt, deg, reference, tol_db=calib_tol_db,
                                     burst_length=burst_length)


def make_dataset(scenario, config, n_samples, base_seed, snr_range=None,
                 dtype=np.complex64, n_paths=None, k_factor_db=None,
                 impute_drops=True, burst_length=nz.BURST_LENGTH,
                 calib_tol_db=0.25, calib_ref_samples=32):
    """
    Generate (noisy history, clean target) pairs for one scenario.

    Sample i uses seed base_seed + i. Under TDD history and target come
    from the same band, under FDD the history is taken from the UL band and
    the target from the DL band. Only the history is corrupted.

    Parameters
    ----------
    snr_range: (float, float)
        Training mode: draw an AWGN SNR uniformly in this range for every
        sample; the scenario noise is ignored.
    dtype: numpy complex dtype
        Storage precision of the returned samples

    Returns
    -------
    ds: CsiDataset
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be at least 1")
    if scenario.duplex is not config.duplex:
        config = config.with_duplex(scenario.duplex)
    dtype = np.dtype(dtype)

    seeds = [int(base_seed) + i for i in range(n_samples)]
    pairs = [_clean_pair(scenario, config, s, n_paths, k_factor_db)
             for s in seeds]

    params = None
    if snr_range is None:
        reference = [h for h, _ in pairs[:calib_ref_samples]]
        params = scenario_noise(scenario, reference, calib_tol_db,
                                burst_length)
        logger.debug("Noise for %s: %s", scenario.label(), params)
    else:
        snr_rng = np.random.default_rng(
            np.random.SeedSequence([int(base_seed), 104729]))
        snrs = snr_rng.uniform(snr_range[0], snr_range[1], n_samples)

    t_hist = time_axis(config.hist_len, config.report_interval)
    t_pred = time_axis(config.pred_len, config.report_interval,
                       config.hist_len*config.report_interval)
    samples = []
    for i, (seed, (h_clean, target)) in enumerate(zip(seeds, pairs)):
        if snr_range is None:
            sc, p = scenario, params
        else:
            sc = ScenarioDescriptor(scenario.velocity, scenario.delay_spread,
                                    scenario.channel_profile, NoiseType.AWGN,
                                    float(snrs[i]), scenario.duplex)
            p = nz.NoiseParams(NoiseType.AWGN, snr_db=float(snrs[i]))
        noisy, _ = nz.corrupt(h_clean, p, noise_seed(seed),
                              impute=impute_drops)
        samples.append(CsiSample(
            history=CsiSequence(noisy.astype(dtype), t_hist),
            target=CsiSequence(target.astype(dtype), t_pred),
            scenario=sc, seed=seed))
    return CsiDataset(samples, config, dtype, scenario,
                      None if snr_range is None else tuple(snr_range))


def dataset_noise_params(ds, reference_dataset=None, calib_tol_db=0.25,
                         burst_length=nz.BURST_LENGTH, calib_ref_samples=32,
                         n_paths=None, k_factor_db=None):
    """
    NoiseParams per sample of a dataset, reconstructed from the stored
    scenarios. Used to draw fresh noise per training epoch.
    """
    cache = {}
    out = []
    for s in ds.samples:
        sc = s.scenario
        if sc not in cache:
            ref = None
            if sc.noise_type in (NoiseType.PHASE, NoiseType.BURST):
                ref = [clean_history(sc, ds.config, x.seed, n_paths,
                                     k_factor_db)
                       for x in ds.samples if x.scenario == sc]
                ref = ref[:calib_ref_samples]
            cache[sc] = scenario_noise(sc, ref, calib_tol_db, burst_length)
        out.append(cache[sc])
    return out
