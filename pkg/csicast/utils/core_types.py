"""
Core types
----------
Shared domain types and dimension conventions. All tensors drop the
receive-antenna axis (a single receive antenna is assumed) and are laid out
as (antenna, time, subcarrier).

Created: Autumn 2026
"""

import enum
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from csicast.utils.errors import (ConfigError, DimensionMismatch,
                                  EmptySubset, InvalidScenario,
                                  InvalidTimeAxis, NonFiniteValue)


class Duplex(enum.Enum):
    TDD = 'TDD'
    FDD = 'FDD'


class ChannelProfile(enum.Enum):
    NLOS_A = 'NLOS-A'
    NLOS_B = 'NLOS-B'
    NLOS_C = 'NLOS-C'
    LOS_D = 'LOS-D'
    LOS_E = 'LOS-E'

    @property
    def is_los(self):
        return self in (ChannelProfile.LOS_D, ChannelProfile.LOS_E)


class NoiseType(enum.Enum):
    AWGN = 'AWGN'
    PHASE = 'PHASE'
    BURST = 'BURST'
    PACKET_DROP = 'PACKET_DROP'
    NONE = 'NONE'


# Stable integer codes used by the binary file formats
DUPLEX_CODES = {Duplex.TDD: 0, Duplex.FDD: 1}
PROFILE_CODES = {p: i for i, p in enumerate(ChannelProfile)}
NOISE_CODES = {n: i for i, n in enumerate(NoiseType)}


@dataclass(frozen=True)
class SystemConfig:
    """
    Antenna, grid and timing dimensions of a simulated system.

    Parameters
    ----------
    n_tx: int
        Number of transmit antennas at the base station.
    n_rx: int
        Number of receive antennas; fixed to 1.
    n_sc: int
        Subcarriers per band.
    n_guard: int
        Guard subcarriers between the UL and DL bands (FDD only).
    hist_len, pred_len: int
        Lengths of the historical window and of the prediction horizon.
    carrier_freq: float
        Carrier frequency in Hz.
    sc_spacing: float
        Subcarrier spacing in Hz.
    report_interval: float
        Seconds between two CSI snapshots.
    duplex: Duplex
        TDD (intra-band) or FDD (UL history, DL target).
    """
    n_tx: int = 4
    n_rx: int = 1
    n_sc: int = 32
    n_guard: int = 8
    hist_len: int = 16
    pred_len: int = 4
    carrier_freq: float = 2.4e9
    sc_spacing: float = 30e3
    report_interval: float = 2.5e-3
    duplex: Duplex = Duplex.TDD

    def __post_init__(self):
        if not isinstance(self.duplex, Duplex):
            object.__setattr__(self, 'duplex', Duplex(self.duplex))
        errmsg = "\n\tInvalid system configuration: {}\n"
        if self.n_rx != 1:
            raise ConfigError(errmsg.format(
                "n_rx must be 1, got {}".format(self.n_rx)))
        if self.n_tx < 1:
            raise ConfigError(errmsg.format("n_tx must be at least 1"))
        if self.n_sc < 2:
            raise ConfigError(errmsg.format("n_sc must be at least 2"))
        if self.n_guard < 0:
            raise ConfigError(errmsg.format("n_guard must be nonnegative"))
        if not self.hist_len > self.pred_len >= 1:
            raise ConfigError(errmsg.format(
                "need hist_len > pred_len >= 1, got {} and {}".format(
                    self.hist_len, self.pred_len)))
        if not (self.carrier_freq > 0 and self.sc_spacing > 0
                and self.report_interval > 0):
            raise ConfigError(errmsg.format(
                "carrier_freq, sc_spacing and report_interval must be "
                "positive"))

    @property
    def n_total(self):
        """Size of the simulated subcarrier grid."""
        if self.duplex is Duplex.FDD:
            return 2*self.n_sc + self.n_guard
        return self.n_sc

    @property
    def seq_len(self):
        return self.hist_len + self.pred_len

    def with_duplex(self, duplex):
        return replace(self, duplex=Duplex(duplex))

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d['duplex'] = self.duplex.value
        return d


@dataclass(frozen=True)
class CsiSequence:
    """
    Complex channel tensor of shape (n_tx, seq_len, n_sc) with the time
    stamps (seconds) of its snapshots.
    """
    data: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if not np.iscomplexobj(data):
            data = data.astype(np.complex128)
        elif data.flags.writeable:
            data = data.copy()
        ts = np.array(self.timestamps, dtype=np.float64)
        if data.ndim != 3:
            raise DimensionMismatch(
                "\n\tCSI tensors are (antenna, time, subcarrier); got "
                "{} dimension(s)\n".format(data.ndim))
        if ts.shape != (data.shape[1],):
            raise DimensionMismatch(
                "\n\t{} time stamps given for {} snapshots\n".format(
                    ts.size, data.shape[1]))
        if ts.size > 1:
            step = np.diff(ts)
            if np.any(step <= 0) or not np.allclose(step, step[0],
                                                    rtol=1e-9, atol=0):
                raise InvalidTimeAxis(
                    "Time stamps must be strictly increasing with constant "
                    "spacing")
        data.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'timestamps', ts)

    @property
    def shape(self):
        return self.data.shape

    @property
    def n_steps(self):
        return self.data.shape[1]

    def with_data(self, data):
        """Same time axis, new values."""
        return CsiSequence(data, self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, CsiSequence):
            return NotImplemented
        return (self.data.dtype == other.data.dtype
                and np.array_equal(self.data, other.data)
                and np.array_equal(self.timestamps, other.timestamps))

    __hash__ = None


def time_axis(n_steps, interval, t0=0.0):
    """Time stamps t0 + n*interval, n = 0..n_steps-1."""
    return t0 + np.arange(n_steps)*interval


@dataclass(frozen=True)
class ScenarioDescriptor:
    """
    One element of the scenario set: velocity (m/s), delay spread (s),
    channel profile, noise type, noise degree and duplex mode.

    The noise degree is an SNR in dB for AWGN, PHASE and BURST and a drop
    probability for PACKET_DROP. It is ignored for NONE.
    """
    velocity: float
    delay_spread: float
    channel_profile: ChannelProfile = ChannelProfile.NLOS_A
    noise_type: NoiseType = NoiseType.NONE
    noise_degree: float = float('inf')
    duplex: Duplex = Duplex.TDD

    def __post_init__(self):
        for name, enum_cls in (('channel_profile', ChannelProfile),
                               ('noise_type', NoiseType),
                               ('duplex', Duplex)):
            val = getattr(self, name)
            if not isinstance(val, enum_cls):
                object.__setattr__(self, name, enum_cls(val))
        object.__setattr__(self, 'velocity', float(self.velocity))
        object.__setattr__(self, 'delay_spread', float(self.delay_spread))
        object.__setattr__(self, 'noise_degree', float(self.noise_degree))

        if self.velocity < 0 or not np.isfinite(self.velocity):
            raise InvalidScenario(
                "\n\tVelocity must be finite and nonnegative, got "
                "{}\n".format(self.velocity))
        if self.noise_type is NoiseType.PACKET_DROP:
            if not 0.0 <= self.noise_degree <= 1.0:
                raise InvalidScenario(
                    "\n\tPacket-drop noise degree is a probability in [0, 1]"
                    ", got {}\n".format(self.noise_degree))
        elif self.noise_type is not NoiseType.NONE:
            if not np.isfinite(self.noise_degree):
                raise InvalidScenario(
                    "\n\tNoise degree for {} must be finite\n".format(
                        self.noise_type.value))

    def label(self):
        """Compact textual identifier, used in file names and tables."""
        return "{}_v{:g}_ds{:g}ns_{}_{}_{:g}".format(
            self.duplex.value, self.velocity, self.delay_spread*1e9,
            self.channel_profile.value, self.noise_type.value,
            self.noise_degree)


@dataclass(frozen=True)
class CsiSample:
    """
    A (noisy history, clean target) pair together with the scenario it was
    drawn from and the seed used to generate it.
    """
    history: CsiSequence
    target: CsiSequence
    scenario: ScenarioDescriptor
    seed: int

    def __post_init__(self):
        h_ts, t_ts = self.history.timestamps, self.target.timestamps
        if h_ts.size > 1 and t_ts.size:
            step = h_ts[1] - h_ts[0]
            if not np.isclose(t_ts[0] - h_ts[-1], step, rtol=1e-9, atol=0):
                raise InvalidTimeAxis(
                    "Target time stamps must follow the history with the "
                    "same spacing")


@dataclass(frozen=True)
class CsiDataset:
    """
    Ordered samples sharing one system configuration.

    'scenario' is the scenario the dataset was generated for; with
    'snr_range' set, every sample carries its own AWGN SNR drawn from that
    range (training mode).
    """
    samples: List[CsiSample]
    config: SystemConfig
    dtype: np.dtype = field(default=np.dtype(np.complex64))
    scenario: Optional[ScenarioDescriptor] = None
    snr_range: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, 'samples', list(self.samples))
        object.__setattr__(self, 'dtype', np.dtype(self.dtype))
        cfg = self.config
        n_target_sc = cfg.n_sc
        for s in self.samples:
            if s.history.shape != (cfg.n_tx, cfg.hist_len, cfg.n_sc) or\
                    s.target.shape != (cfg.n_tx, cfg.pred_len, n_target_sc):
                raise DimensionMismatch(
                    "\n\tSample with seed {} has shapes {} / {}, dataset "
                    "config expects ({}, {}, {}) / ({}, {}, {})\n".format(
                        s.seed, s.history.shape, s.target.shape,
                        cfg.n_tx, cfg.hist_len, cfg.n_sc,
                        cfg.n_tx, cfg.pred_len, cfg.n_sc))

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def histories(self):
        """Stacked histories, shape (samples, n_tx, hist_len, n_sc)."""
        return np.stack([s.history.data for s in self.samples])

    def targets(self):
        """Stacked targets, shape (samples, n_tx, pred_len, n_sc)."""
        return np.stack([s.target.data for s in self.samples])

    def subset(self, indices):
        return CsiDataset([self.samples[i] for i in indices], self.config,
                          self.dtype, self.scenario, self.snr_range)


def concat_datasets(datasets: Sequence[CsiDataset]):
    """Join datasets sharing the same system dimensions."""
    if not datasets:
        raise EmptySubset("No datasets to concatenate")
    cfg = datasets[0].config
    for ds in datasets[1:]:
        if ds.config != cfg:
            raise DimensionMismatch(
                "\n\tCannot concatenate datasets with different system "
                "configurations:\n\t{}\n\t{}\n".format(cfg, ds.config))
    samples = [s for ds in datasets for s in ds.samples]
    return CsiDataset(samples, cfg, datasets[0].dtype)


def validate_shapes(seq, config, expected_len):
    """
    Check that a CSI sequence matches (n_tx, expected_len, n_sc) and holds
    finite values only.

    Raises
    ------
    DimensionMismatch
        If an axis has the wrong size.
    NonFiniteValue
        If any entry is NaN or infinite.
    """
    expected = (config.n_tx, expected_len, config.n_sc)
    if seq.data.shape != expected:
        raise DimensionMismatch(
            "\n\tCSI sequence has shape {}, expected {}\n".format(
                seq.data.shape, expected))
    if not np.all(np.isfinite(seq.data)):
        raise NonFiniteValue(
            "\n\tCSI sequence holds {} non-finite value(s)\n".format(
                np.count_nonzero(~np.isfinite(seq.data))))
    return True


def frobenius_norm_sq(seq):
    """Sum of squared magnitudes over all elements."""
    data = seq.data if isinstance(seq, CsiSequence) else np.asarray(seq)
    return float(np.sum(data.real**2 + data.imag**2))
