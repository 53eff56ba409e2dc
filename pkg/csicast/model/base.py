"""
Predictor base
--------------
Common interface of all CSI predictors: a torch module mapping complex
histories (batch, n_tx, hist_len, n_sc) to predictions
(batch, n_tx, pred_len, n_sc), plus the single-sequence prediction used by
the evaluation.

Created: Autumn 2026
"""

from dataclasses import asdict

import numpy as np
import torch
import torch.nn as nn

from csicast.utils.core_types import CsiSequence, time_axis, validate_shapes
from csicast.utils.errors import DimensionMismatch


def complex_dtype(real_dtype):
    return torch.complex128 if real_dtype == torch.float64\
        else torch.complex64


class CsiPredictor(nn.Module):
    """
    Base class; subclasses set 'kind' and implement forward on complex
    tensors of shape (B, n_tx, hist_len, n_sc).
    """
    kind = None

    def __init__(self, system, config=None):
        super().__init__()
        self.system = system
        self.config = config

    def real_dtype(self):
        for p in self.parameters():
            return p.dtype
        for b in self.buffers():
            if b.is_floating_point():
                return b.dtype
        return getattr(self, '_dtype', torch.float32)

    def describe(self):
        """JSON-friendly description stored in checkpoints."""
        return {
            'kind': self.kind,
            'config': None if self.config is None else asdict(self.config),
            'system': self.system.to_dict(),
        }

    def check_input(self, x):
        exp = (self.system.n_tx, self.system.hist_len, self.system.n_sc)
        if tuple(x.shape[1:]) != exp:
            raise DimensionMismatch(
                "\n\tInput of shape {} does not match (batch, {}, {}, "
                "{})\n".format(tuple(x.shape), *exp))

    def predict(self, history):
        """
        Predict the next pred_len snapshots of one history.

        Parameters
        ----------
        history: CsiSequence
            Noisy history of length hist_len

        Returns
        -------
        pred: CsiSequence
            Time stamps continue the history
        """
        validate_shapes(history, self.system, self.system.hist_len)
        cdtype = complex_dtype(self.real_dtype())
        x = torch.from_numpy(np.array(history.data)).to(cdtype)[None]
        was_training = self.training
        self.eval()
        with torch.no_grad():
            y = self(x)[0].cpu().numpy()
        self.train(was_training)
        dt = self.system.report_interval
        ts = history.timestamps
        t0 = ts[-1] + dt if ts.size else 0.0
        return CsiSequence(y, time_axis(self.system.pred_len, dt, t0))


def per_antenna(x):
    """(B, M, T, N) to (B*M, T, N)."""
    return x.reshape(-1, *x.shape[2:])


def per_sample(y, batch):
    """(B*M, P, N) back to (B, M, P, N)."""
    return y.reshape(batch, -1, *y.shape[1:])
