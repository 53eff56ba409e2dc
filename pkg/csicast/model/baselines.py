"""
Baselines
---------
Reference predictors CSI-4CAST is compared against: the persistence
predictor (NP), a gated recurrent baseline and a convolutional baseline.

Both learned baselines process each antenna independently with shared
weights and consume the full subcarrier vector of a time step jointly.

Created: Autumn 2026
"""

from dataclasses import dataclass, fields
from enum import Enum
from typing import Tuple

import numpy as np
import torch
import torch.nn as nn

from csicast.model import blocks as bl
from csicast.model.base import CsiPredictor, per_antenna, per_sample
from csicast.utils.core_types import CsiSequence, time_axis
from csicast.utils.errors import ConfigError, EmptyHistory


class BaselineKind(str, Enum):
    NP = 'np'
    RNN = 'rnn'
    CNN = 'cnn'


def _from_dict(cls, d, label):
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError("\n\tUnknown {} settings: {}\n".format(
            label, ', '.join(sorted(unknown))))
    return cls(**d)


def np_predict(history, pred_len):
    """
    Persistence prediction: repeat the last observed snapshot.

    Parameters
    ----------
    history: CsiSequence
    pred_len: int

    Returns
    -------
    CsiSequence
        pred_len copies of the final history step; time stamps continue the
        history
    """
    data = history.data
    if data.ndim != 3 or data.shape[1] == 0:
        raise EmptyHistory("Cannot repeat the last snapshot of an empty "
                           "history")
    out = np.repeat(data[:, -1:, :], pred_len, axis=1)
    ts = history.timestamps
    dt = ts[1] - ts[0] if ts.size > 1 else 1.0
    return CsiSequence(out, time_axis(pred_len, dt, ts[-1] + dt))


class NoPrediction(CsiPredictor):
    """Parameter-free persistence predictor."""
    kind = BaselineKind.NP.value

    def __init__(self, system, dtype=torch.float32):
        super().__init__(system)
        self._dtype = dtype

    def forward(self, x):
        self.check_input(x)
        return x[:, :, -1:, :].expand(-1, -1, self.system.pred_len, -1)\
            .clone()

    def predict(self, history):
        return np_predict(history, self.system.pred_len)


@dataclass(frozen=True)
class RnnConfig:
    hidden_dim: int = 64
    n_layers: int = 2
    dropout: float = 0.0

    def __post_init__(self):
        if self.hidden_dim < 1 or self.n_layers < 1:
            raise ConfigError("RNN hidden_dim and n_layers must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("RNN dropout must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, 'RNN')


class RnnBaseline(CsiPredictor):
    """
    GRU over time on the flattened (Re || Im) subcarrier vector; a linear
    head maps the last hidden state to the whole horizon.
    """
    kind = BaselineKind.RNN.value

    def __init__(self, config, system):
        super().__init__(system, config)
        n = system.n_sc
        self.gru = nn.GRU(2*n, config.hidden_dim, config.n_layers,
                          batch_first=True,
                          dropout=config.dropout if config.n_layers > 1
                          else 0.0)
        self.head = nn.Linear(config.hidden_dim, system.pred_len*2*n)
        bl.init_weights(self.head)

    def forward(self, x):
        self.check_input(x)
        batch = x.shape[0]
        seq = bl._as_real(per_antenna(x))
        out, _ = self.gru(seq)
        y = self.head(out[:, -1, :])
        y = y.reshape(-1, self.system.pred_len, 2*self.system.n_sc)
        return per_sample(bl._as_complex(y), batch)


def rnn_baseline_forward(model, history):
    return model.predict(history)


@dataclass(frozen=True)
class CnnConfig:
    num_filters: int = 16
    n_layers: int = 3
    kernel: Tuple[int, int] = (3, 3)
    activation: str = 'relu'

    def __post_init__(self):
        object.__setattr__(self, 'kernel', tuple(self.kernel))
        if self.num_filters < 1 or self.n_layers < 1:
            raise ConfigError(
                "CNN num_filters and n_layers must be positive")

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, 'CNN')


class CnnBaseline(CsiPredictor):
    """
    Same-padded 2D convolutions over (time, subcarrier) on the real stack,
    a 1x1 head back to two channels and a linear time map T -> P.
    """
    kind = BaselineKind.CNN.value

    def __init__(self, config, system):
        super().__init__(system, config)
        layers = []
        cin = 2
        for _ in range(config.n_layers):
            layers += [nn.Conv2d(cin, config.num_filters, config.kernel,
                                 padding='same'),
                       bl.activation(config.activation)]
            cin = config.num_filters
        layers.append(nn.Conv2d(cin, 2, 1))
        self.features = nn.Sequential(*layers)
        self.time_map = nn.Linear(system.hist_len, system.pred_len)
        self.apply(bl.init_weights)

    def forward(self, x):
        self.check_input(x)
        batch = x.shape[0]
        y = self.features(bl.real_stack(per_antenna(x)))
        y = self.time_map(y.transpose(-1, -2)).transpose(-1, -2)
        return per_sample(bl.complex_restack(y), batch)


def cnn_baseline_forward(model, history):
    return model.predict(history)
