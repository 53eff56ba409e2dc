"""
Gradient check
--------------
Compares autograd parameter gradients of the NMSE objective with central
finite differences, one parameter tensor at a time.

Created: Autumn 2026
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import pandas as pd
import torch

from csicast.model.baselines import CnnConfig, RnnConfig
from csicast.model.checkpoint import build_model
from csicast.model.csi4cast import tiny_config
from csicast.model.training import nmse_loss
from csicast.utils.core_types import SystemConfig

logger = logging.getLogger(__name__)

TINY_SYSTEM = SystemConfig(n_tx=1, n_sc=4, n_guard=0, hist_len=4, pred_len=2)

_TINY_CONFIGS = {
    'csi4cast': tiny_config,
    'rnn': lambda: RnnConfig(hidden_dim=4, n_layers=1),
    'cnn': lambda: CnnConfig(num_filters=2, n_layers=1, activation='tanh'),
}


@dataclass
class GradCheckReport:
    """Max relative error per parameter tensor."""
    errors: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-4

    @property
    def max_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self):
        return self.max_error < self.tolerance

    def to_frame(self):
        return pd.DataFrame({'tensor': list(self.errors),
                             'rel_error': list(self.errors.values())})


def _loss(model, x, y):
    return nmse_loss(model(x), y)


def check_gradients(model, x, y, step=1e-6, grad_hook=None,
                    tolerance=1e-4):
    """
    Parameters
    ----------
    model: torch.nn.Module
        Evaluated in eval mode; should be in double precision
    x, y: complex tensors
        Input batch and target batch
    step: float
        Finite-difference step
    grad_hook: callable(name, grad) -> grad
        Applied to the analytic gradients before comparison

    Returns
    -------
    GradCheckReport
    """
    model.eval()
    params = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    with torch.enable_grad():
        loss = _loss(model, x, y)
        grads = torch.autograd.grad(loss, [p for _, p in params],
                                    allow_unused=True)
    analytic = {}
    for (name, p), g in zip(params, grads):
        g = torch.zeros_like(p) if g is None else g.detach().clone()
        analytic[name] = grad_hook(name, g) if grad_hook else g

    numeric = {}
    with torch.enable_grad():
        for name, p in params:
            flat = p.data.view(-1)
            est = torch.zeros_like(flat)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + step
                lp = _loss(model, x, y).item()
                flat[i] = orig - step
                lm = _loss(model, x, y).item()
                flat[i] = orig
                est[i] = (lp - lm)/(2*step)
            numeric[name] = est.view_as(p)

    norms = {n: float(torch.linalg.vector_norm(g))
             for n, g in analytic.items()}
    floor = 1e-3*max(norms.values(), default=0.0)
    report = GradCheckReport(tolerance=tolerance)
    for name in analytic:
        a, n = analytic[name], numeric[name]
        diff = float(torch.linalg.vector_norm(a - n))
        den = max(norms[name], float(torch.linalg.vector_norm(n)), floor)
        report.errors[name] = diff/den if den > 0 else 0.0
    logger.info("Gradient check: max relative error %.3g over %d tensors",
                report.max_error, len(report.errors))
    return report


def gradient_check(model_config=None, tolerance=1e-4, kind='csi4cast',
                   system=TINY_SYSTEM, seed=0, step=1e-6, grad_hook=None,
                   perturb=0.1):
    """
    Build a tiny model in double precision and check its gradients on one
    random sample.

    Parameters
    ----------
    model_config: config dataclass or dict
        Defaults to a tiny smooth configuration for 'kind'
    perturb: float
        Std of Gaussian noise added to every parameter so zero-initialised
        layers do not hide gradients

    Returns
    -------
    GradCheckReport
    """
    if model_config is None:
        model_config = _TINY_CONFIGS[kind]()
    torch.manual_seed(seed)
    model = build_model(kind, model_config, system, torch.float64)
    with torch.no_grad():
        for p in model.parameters():
            p.add_(perturb*torch.randn_like(p))

    rng = np.random.default_rng(seed)

    def cnormal(shape):
        return torch.from_numpy(rng.standard_normal(shape)
                                + 1j*rng.standard_normal(shape))

    x = cnormal((1, system.n_tx, system.hist_len, system.n_sc))
    y = cnormal((1, system.n_tx, system.pred_len, system.n_sc))
    return check_gradients(model, x, y, step, grad_hook, tolerance)
