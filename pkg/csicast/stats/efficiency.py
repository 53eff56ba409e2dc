"""
Efficiency
----------
Parameter counts, closed-form FLOP counts and single-thread inference
time of predictors, for one full CSI sequence over all antennas.

FLOPs count 2 per multiply-accumulate. Counted layers:

    Linear                  rows*(2*in*out + out)
    Conv1d/Conv2d           numel(out)*(2*(C_in/groups)*prod(kernel) + 1)
    BatchNorm/LayerNorm     2*numel
    activations             numel
    average pooling         numel(input)
    GRU                     per step and layer 3*(2*in*h + 2*h*h + 2*h) + 6*h
    multi-head attention    projections, 2*L*L*E scores, H*L*L softmax,
                            2*L*L*E weighting
    encoder layer           L*ffn for the feed-forward activation

(the bias terms are dropped for layers without bias). Element-wise glue
such as residual sums, gating products and FFTs is not counted.

Created: Autumn 2026
"""

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
import torch
import torch.nn as nn

from csicast.model.base import complex_dtype
from csicast.stats.ranks import eff_score
from csicast.utils.errors import AllZeroCosts, InvalidRecord

logger = logging.getLogger(__name__)

_ACTIVATION_TYPES = (nn.ReLU, nn.GELU, nn.Tanh, nn.Sigmoid, nn.ELU)
_NORM_TYPES = (nn.BatchNorm1d, nn.BatchNorm2d, nn.LayerNorm)

EFFICIENCY_COLUMNS = ['model', 'trainable_params', 'total_params', 'flops',
                      'inference_ms', 'eff_params', 'eff_flops', 'eff_time']


@dataclass(frozen=True)
class EfficiencyRecord:
    model: str
    trainable_params: int
    total_params: int
    flops: int
    inference_ms: float

    def __post_init__(self):
        if self.trainable_params > self.total_params:
            raise InvalidRecord("Trainable parameters exceed the total")


def count_params(model):
    """(trainable, total) parameter element counts."""
    total = sum(p.numel() for p in model.parameters())
    trainable = sum(p.numel() for p in model.parameters() if p.requires_grad)
    return trainable, total


def _bias(m):
    return 1 if getattr(m, 'bias', None) is not None else 0


def _linear(m, inp, out):
    rows = inp[0].numel()//m.in_features
    return rows*(2*m.in_features*m.out_features + m.out_features*_bias(m))


def _conv(m, inp, out):
    per_out = 2*(m.in_channels//m.groups)*int(np.prod(m.kernel_size))
    return out.numel()*(per_out + _bias(m))


def _norm(m, inp, out):
    return 2*out.numel()


def _elementwise(m, inp, out):
    return out.numel()


def _pool(m, inp, out):
    return inp[0].numel()


def _gru(m, inp, out):
    x = inp[0]
    batch, steps = (x.shape[0], x.shape[1]) if m.batch_first else\
        (x.shape[1], x.shape[0])
    h = m.hidden_size
    b = 2*h if m.bias else 0
    total = 0
    for layer in range(m.num_layers):
        n_in = m.input_size if layer == 0 else h
        total += 3*(2*n_in*h + 2*h*h + b) + 6*h
    return batch*steps*total


def _attention(m, inp, out):
    q = inp[0]
    batch, length = (q.shape[0], q.shape[1]) if m.batch_first else\
        (q.shape[1], q.shape[0])
    e, heads = m.embed_dim, m.num_heads
    b = 1 if m.in_proj_bias is not None else 0
    proj = 3*length*(2*e*e + e*b) + length*(2*e*e + e*_bias(m.out_proj))
    attend = 2*length*length*e + heads*length*length + 2*length*length*e
    return batch*(proj + attend)


def _encoder_layer(m, inp, out):
    return out.numel()//out.shape[-1]*m.linear1.out_features


_RULES = [
    (nn.Linear, _linear),
    ((nn.Conv1d, nn.Conv2d), _conv),
    (_NORM_TYPES, _norm),
    (_ACTIVATION_TYPES, _elementwise),
    ((nn.AdaptiveAvgPool1d, nn.AdaptiveAvgPool2d), _pool),
    (nn.GRU, _gru),
    (nn.MultiheadAttention, _attention),
    (nn.TransformerEncoderLayer, _encoder_layer),
]


def _rule(module):
    for types, fn in _RULES:
        if isinstance(module, types):
            return fn
    return None


def _example_input(system, dtype, batch=1, seed=0):
    gen = torch.Generator().manual_seed(seed)
    shape = (batch, system.n_tx, system.hist_len, system.n_sc)
    return torch.randn(shape, generator=gen, dtype=dtype)


def count_flops(model, system=None):
    """
    FLOPs of one forward pass over a single CSI sequence (all antennas).

    Runs the model once with forward hooks. Grad mode stays enabled so the
    transformer layers take their regular, hookable path.
    """
    system = system or model.system
    counts = []
    handles = []
    for m in model.modules():
        fn = _rule(m)
        if fn is not None:
            handles.append(m.register_forward_hook(
                lambda mod, i, o, fn=fn: counts.append(
                    fn(mod, i, o[0] if isinstance(o, tuple) else o))))
    was_training = model.training
    model.eval()
    x = _example_input(system, complex_dtype(model.real_dtype()))
    try:
        with torch.enable_grad():
            model(x)
    finally:
        for h in handles:
            h.remove()
        model.train(was_training)
    return int(sum(counts))


def measure_inference_time(model, system=None, reps=20, warmup=3):
    """
    Median wall time in milliseconds of a single-sequence forward pass on
    one CPU thread. Parameter-free models report 0.
    """
    if count_params(model)[1] == 0:
        return 0.0
    system = system or model.system
    x = _example_input(system, complex_dtype(model.real_dtype()))
    n_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    was_training = model.training
    model.eval()
    times = []
    try:
        with torch.no_grad():
            for _ in range(warmup):
                model(x)
            for _ in range(reps):
                t0 = time.perf_counter()
                model(x)
                times.append(time.perf_counter() - t0)
    finally:
        torch.set_num_threads(n_threads)
        model.train(was_training)
    return float(np.median(times)*1e3)


def efficiency_record(model, model_id=None, reps=20, warmup=3):
    trainable, total = count_params(model)
    rec = EfficiencyRecord(model_id or model.kind, trainable, total,
                           count_flops(model),
                           measure_inference_time(model, reps=reps,
                                                  warmup=warmup))
    logger.debug("Efficiency of %s: %s", rec.model, rec)
    return rec


def efficiency_frame(records):
    """
    EfficiencyRecords as a table with efficiency scores for total
    parameters, FLOPs and inference time.
    """
    df = pd.DataFrame([asdict(r) for r in records])
    for cost, col in (('total_params', 'eff_params'), ('flops', 'eff_flops'),
                      ('inference_ms', 'eff_time')):
        try:
            df[col] = eff_score(df.set_index('model')[cost]).values
        except AllZeroCosts:
            df[col] = np.nan
    return df[EFFICIENCY_COLUMNS]
