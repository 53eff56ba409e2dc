"""
CSI-4CAST
---------
Hybrid CSI predictor: CNN residual on the real-stacked input, frequency
and delay branches each with an adaptive correction layer and a
ShuffleNet stage, transformer encoder and a linear prediction head.

Every antenna is processed independently with shared weights.

Created: Autumn 2026
"""

from dataclasses import dataclass, fields
from typing import Optional, Tuple

import torch

from csicast.model import blocks as bl
from csicast.model.base import CsiPredictor, per_antenna, per_sample
from csicast.utils.core_types import Duplex
from csicast.utils.errors import ConfigError


@dataclass(frozen=True)
class Csi4CastConfig:
    """
    Architecture hyperparameters.

    cnn_channels overrides the schedule derived from cnn_depth; the ACL
    subcarrier stage is built for FDD systems only.
    """
    cnn_depth: int = 2
    cnn_kernel: Tuple[int, int] = (3, 3)
    cnn_residual: bool = True
    cnn_activation: str = 'relu'
    cnn_channels: Optional[Tuple[int, ...]] = None
    acl_layers: int = 2
    acl_hidden: int = 64
    acl_activation: str = 'relu'
    acl_out_activation: str = 'none'
    acl_combine: str = 'add'
    shuffle_maps: int = 16
    shuffle_groups: int = 4
    shuffle_kernel: int = 3
    shuffle_blocks: int = 2
    shuffle_activation: str = 'relu'
    shuffle_se_ratio: int = 4
    shuffle_dropout: float = 0.1
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    ffn_dim: int = 128
    tf_activation: str = 'gelu'
    dropout: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, 'cnn_kernel', tuple(self.cnn_kernel))
        if self.cnn_channels is not None:
            object.__setattr__(self, 'cnn_channels',
                               tuple(self.cnn_channels))
        if self.shuffle_maps % self.shuffle_groups:
            raise ConfigError(
                "\n\tshuffle_maps ({}) must be divisible by shuffle_groups "
                "({})\n".format(self.shuffle_maps, self.shuffle_groups))
        if self.d_model < 2:
            raise ConfigError("d_model must be at least 2")
        positive = ('cnn_depth', 'acl_layers', 'acl_hidden', 'shuffle_maps',
                    'shuffle_groups', 'shuffle_kernel', 'shuffle_se_ratio',
                    'd_model', 'n_layers', 'n_heads', 'ffn_dim')
        bad = [k for k in positive if getattr(self, k) < 1]
        if bad:
            raise ConfigError("\n\tMust be positive: {}\n".format(
                ', '.join(bad)))

    @property
    def channels(self):
        if self.cnn_channels is not None:
            return list(self.cnn_channels)
        return bl.cnn_schedule(self.cnn_depth)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError("\n\tUnknown CSI-4CAST settings: {}\n".format(
                ', '.join(sorted(unknown))))
        return cls(**d)


class Csi4CastModel(CsiPredictor):
    """
    Parameters
    ----------
    config: Csi4CastConfig
    system: SystemConfig
    """
    kind = 'csi4cast'

    def __init__(self, config, system):
        super().__init__(system, config)
        T, N = system.hist_len, system.n_sc
        fdd = system.duplex is Duplex.FDD
        self.cnn = bl.CnnResidual(config.channels, config.cnn_kernel,
                                  config.cnn_residual, config.cnn_activation)

        def acl():
            return bl.AclStage(T, N, config.acl_layers, config.acl_hidden,
                               config.acl_activation,
                               config.acl_out_activation,
                               config.acl_combine, subcarrier=fdd)

        def shuffle():
            return bl.ShuffleStage(config.shuffle_maps, config.shuffle_groups,
                                   config.shuffle_kernel,
                                   config.shuffle_blocks,
                                   config.shuffle_activation,
                                   config.shuffle_se_ratio,
                                   config.shuffle_dropout)

        self.acl_freq = acl()
        self.acl_delay = acl()
        self.shuffle_freq = shuffle()
        self.shuffle_delay = shuffle()
        self.encoder = bl.TransformerEncode(
            T, N, config.d_model, config.n_layers, config.n_heads,
            config.ffn_dim, config.dropout, config.tf_activation)
        self.head = bl.PredictionHead(T, system.pred_len, N, config.d_model)
        self.fdd = fdd

    def forward(self, x):
        self.check_input(x)
        batch = x.shape[0]
        x_r = bl.real_stack(per_antenna(x))
        x_f = bl.to_frequency_matrix(bl.cnn_residual(self.cnn, x_r))
        x_d = bl.idft_delay_transform(x_f)
        sb_f = bl.shuffle_stage(self.shuffle_freq,
                                bl.acl_forward(self.acl_freq, x_f, self.fdd))
        sb_d = bl.shuffle_stage(self.shuffle_delay,
                                bl.acl_forward(self.acl_delay, x_d, self.fdd))
        x_te = self.encoder.embed(sb_f + sb_d)
        x_tf = bl.transformer_encode(self.encoder, x_te,
                                     self.encoder.pe.to(x_te.dtype))
        return per_sample(bl.prediction_head(self.head, x_tf), batch)


def csi4cast_forward(model, history):
    """Predicted CsiSequence (pred_len steps) for one noisy history."""
    return model.predict(history)


def tiny_config(**kw):
    """Small smooth configuration used for gradient checks."""
    d = dict(cnn_depth=2, cnn_activation='tanh', acl_layers=2, acl_hidden=8,
             acl_activation='tanh', shuffle_maps=4, shuffle_groups=2,
             shuffle_blocks=1, shuffle_activation='tanh', shuffle_se_ratio=2,
             shuffle_dropout=0.0, d_model=8, n_layers=1, n_heads=2,
             ffn_dim=16, tf_activation='gelu', dropout=0.0)
    d.update(kw)
    return Csi4CastConfig(**d)


def default_dtype(precision):
    if precision not in ('float32', 'float64'):
        raise ConfigError("Precision must be float32 or float64")
    return torch.float64 if precision == 'float64' else torch.float32
