"""
Training
--------
NMSE objective and minibatch training with a 9:1 hashed train/validation
split, gradient accumulation, plateau learning-rate decay and early
stopping on validation NMSE.

Created: Autumn 2026
"""

import copy
import logging
import time
import zlib
from dataclasses import dataclass, field, fields
from typing import List

import numpy as np
import pandas as pd
import torch

from csicast.channel import noise as nz
from csicast.channel.channel_sim import (clean_history, dataset_noise_params,
                                         noise_seed)
from csicast.model.base import complex_dtype
from csicast.model.csi4cast import default_dtype
from csicast.utils.errors import (ConfigError, DimensionMismatch,
                                  NonFiniteLoss, ZeroTarget)
from csicast.utils.file_io import write_csv

logger = logging.getLogger(__name__)

OPTIMIZERS = {
    'adam': torch.optim.Adam,
    'adamw': torch.optim.AdamW,
}


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    accumulate: int = 1
    max_epochs: int = 20
    patience: int = 5
    optimizer: str = 'adam'
    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    plateau_factor: float = 0.5
    plateau_patience: int = 2
    min_lr: float = 1e-6
    threshold: float = 1e-4
    seed: int = 0
    precision: str = 'float32'
    val_fraction: float = 0.1
    fresh_noise: bool = False

    def __post_init__(self):
        errs = []
        if self.lr < 0:
            errs.append("lr must not be negative (got {})".format(self.lr))
        if not 0 < self.plateau_factor < 1:
            errs.append("plateau_factor must lie in (0, 1)")
        if not 0 < self.val_fraction < 1:
            errs.append("val_fraction must lie in (0, 1)")
        if self.batch_size < 1 or self.accumulate < 1:
            errs.append("batch_size and accumulate must be positive")
        if self.max_epochs < 1 or self.patience < 0:
            errs.append("max_epochs must be positive and patience "
                        "non-negative")
        if self.optimizer.lower() not in OPTIMIZERS:
            errs.append("optimizer must be one of {}".format(
                ', '.join(OPTIMIZERS)))
        if self.precision not in ('float32', 'float64'):
            errs.append("precision must be float32 or float64")
        if errs:
            raise ConfigError("\n\t" + "\n\t".join(errs) + "\n")

    @classmethod
    def from_dict(cls, d, seed=0):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError("\n\tUnknown training settings: {}\n".format(
                ', '.join(sorted(unknown))))
        d = dict(d)
        d.setdefault('seed', seed)
        return cls(**d)


@dataclass
class TrainHistory:
    train_loss: List[float] = field(default_factory=list)
    val_nmse: List[float] = field(default_factory=list)
    lr: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    best_epoch: int = -1

    def record(self, train_loss, val_nmse, lr, seconds):
        self.train_loss.append(float(train_loss))
        self.val_nmse.append(float(val_nmse))
        self.lr.append(float(lr))
        self.seconds.append(float(seconds))

    @property
    def n_epochs(self):
        return len(self.val_nmse)

    @property
    def best_val_nmse(self):
        return self.val_nmse[self.best_epoch]

    def to_frame(self):
        """Per-epoch table without the wall-clock column."""
        return pd.DataFrame({
            'epoch': np.arange(1, self.n_epochs + 1),
            'train_loss': self.train_loss,
            'val_nmse': self.val_nmse,
            'lr': self.lr,
        })

    def write_csv(self, path):
        write_csv(self.to_frame(), path)


def nmse_loss(pred, target):
    """
    Per-sample NMSE averaged over the batch.

    Parameters
    ----------
    pred, target: complex torch tensors
        Shape (batch, ...); norms are taken over all trailing axes

    Returns
    -------
    loss: 0-d tensor
    """
    if pred.shape != target.shape:
        raise DimensionMismatch("Prediction {} and target {} differ in "
                                "shape".format(tuple(pred.shape),
                                               tuple(target.shape)))
    dims = tuple(range(1, target.ndim))
    num = (pred - target).abs().pow(2).sum(dim=dims)
    den = target.abs().pow(2).sum(dim=dims)
    if bool((den == 0).any()):
        raise ZeroTarget("NMSE is undefined for an all-zero target")
    return (num/den).mean()


def split_indices(n, val_fraction=0.1, seed=0):
    """
    Deterministic train/validation split by hashing sample indices.

    Returns
    -------
    train_idx, val_idx: numpy int arrays
        Both nonempty
    """
    if n < 2:
        raise ConfigError("At least two samples are needed for a "
                          "train/validation split")
    u = np.array([zlib.crc32('{}:{}'.format(seed, i).encode())/2**32
                  for i in range(n)])
    is_val = u < val_fraction
    if not is_val.any():
        is_val[np.argmin(u)] = True
    if is_val.all():
        is_val[np.argmax(u)] = False
    return np.flatnonzero(~is_val), np.flatnonzero(is_val)


def dataset_tensors(ds, dtype=torch.complex64):
    """Stacked (samples, n_tx, T, N) histories and (..., P, N) targets."""
    x = torch.from_numpy(np.ascontiguousarray(ds.histories())).to(dtype)
    y = torch.from_numpy(np.ascontiguousarray(ds.targets())).to(dtype)
    return x, y


def backward_batch(model, x, y, scale=1.0):
    """Forward, NMSE and backward of one micro-batch; returns the loss."""
    loss = nmse_loss(model(x), y)
    if not torch.isfinite(loss):
        raise NonFiniteLoss(
            "\n\tLoss became {} on a batch of {} samples. Lower the "
            "learning rate or check the data for extreme values\n".format(
                loss.item(), x.shape[0]))
    (loss*scale).backward()
    return loss.detach()


@torch.no_grad()
def validation_nmse(model, x, y, batch_size=256):
    was_training = model.training
    model.eval()
    vals = []
    for i in range(0, x.shape[0], batch_size):
        xb, yb = x[i:i + batch_size], y[i:i + batch_size]
        vals.append(nmse_loss(model(xb), yb)*xb.shape[0])
    model.train(was_training)
    return float(torch.stack(vals).sum()/x.shape[0])


def accumulation_schedule(n_batches, accumulate):
    """
    Loss scale and optimizer-step flag for every micro-batch.

    Micro-batches are grouped by 'accumulate'; each is scaled by one over
    its group size so a short last group is still mean-reduced.

    Returns
    -------
    list of (float, bool)
    """
    out = []
    for b in range(n_batches):
        start = b - b % accumulate
        size = min(accumulate, n_batches - start)
        out.append((1.0/size, b + 1 == start + size))
    return out


def seed_everything(seed):
    torch.manual_seed(int(seed))
    torch.use_deterministic_algorithms(True, warn_only=True)


class _FreshNoise:
    """Re-corrupts clean training histories with an epoch-dependent seed."""

    def __init__(self, ds, indices, impute=True, **sim):
        self.samples = [ds.samples[i] for i in indices]
        self.config = ds.config
        self.clean = [clean_history(s.scenario, ds.config, s.seed,
                                    sim.get('n_paths'),
                                    sim.get('k_factor_db'))
                      for s in self.samples]
        params = dataset_noise_params(ds, **sim)
        self.params = [params[i] for i in indices]
        self.impute = impute

    def histories(self, epoch, dtype):
        out = [nz.corrupt(h, p, noise_seed(s.seed, epoch),
                          impute=self.impute)[0]
               for h, p, s in zip(self.clean, self.params, self.samples)]
        return torch.from_numpy(np.stack(out)).to(dtype)


def train(model, dataset, cfg, sim=None):
    """
    Train 'model' on 'dataset'.

    Parameters
    ----------
    model: CsiPredictor
        Trainable model; its system config must match the dataset's
    dataset: CsiDataset
    cfg: TrainConfig
    sim: dict
        Simulator settings (n_paths, k_factor_db, burst_length,
        calib_tol_db, calib_ref_samples, impute) for fresh noise per epoch

    Returns
    -------
    model: CsiPredictor
        With the parameters of the epoch of lowest validation NMSE
    history: TrainHistory
    """
    if len(dataset) == 0:
        raise ConfigError("Cannot train on an empty dataset")
    if not any(p.requires_grad for p in model.parameters()):
        raise ConfigError("\n\tModel '{}' has no trainable parameters\n"
                          .format(model.kind))
    sys_m, sys_d = model.system, dataset.config
    if (sys_m.n_tx, sys_m.n_sc, sys_m.hist_len, sys_m.pred_len) !=\
            (sys_d.n_tx, sys_d.n_sc, sys_d.hist_len, sys_d.pred_len):
        raise ConfigError(
            "\n\tModel system config {} does not match the dataset's "
            "{}\n".format(sys_m, sys_d))

    seed_everything(cfg.seed)
    rdtype = default_dtype(cfg.precision)
    cdtype = complex_dtype(rdtype)
    model.to(rdtype)

    train_idx, val_idx = split_indices(len(dataset), cfg.val_fraction,
                                       cfg.seed)
    x_all, y_all = dataset_tensors(dataset, cdtype)
    x_tr, y_tr = x_all[train_idx], y_all[train_idx]
    x_val, y_val = x_all[val_idx], y_all[val_idx]
    logger.info("Training %s on %d samples, validating on %d",
                model.kind, len(train_idx), len(val_idx))

    fresh = None
    if cfg.fresh_noise:
        sim = dict(sim or {})
        impute = sim.pop('impute', True)
        fresh = _FreshNoise(dataset, train_idx, impute, **sim)

    opt_cls = OPTIMIZERS[cfg.optimizer.lower()]
    optimizer = opt_cls(model.parameters(), lr=cfg.lr,
                        betas=(cfg.beta1, cfg.beta2),
                        weight_decay=cfg.weight_decay)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode='min', factor=cfg.plateau_factor,
        patience=cfg.plateau_patience, threshold=cfg.threshold,
        min_lr=cfg.min_lr)
    order = torch.Generator().manual_seed(int(cfg.seed))
    loader = torch.utils.data.DataLoader(
        torch.arange(len(train_idx)), batch_size=cfg.batch_size,
        shuffle=True, generator=order)

    history = TrainHistory()
    best, best_state, stale = np.inf, None, 0
    for epoch in range(cfg.max_epochs):
        t_start = time.perf_counter()
        if fresh is not None and epoch > 0:
            x_tr = fresh.histories(epoch, cdtype)
        model.train()
        optimizer.zero_grad()
        losses = []
        schedule = accumulation_schedule(len(loader), cfg.accumulate)
        for idx, (scale, step) in zip(loader, schedule):
            losses.append(backward_batch(model, x_tr[idx], y_tr[idx], scale))
            if step:
                optimizer.step()
                optimizer.zero_grad()
        val = validation_nmse(model, x_val, y_val)
        lr = optimizer.param_groups[0]['lr']
        history.record(torch.stack(losses).mean(), val, lr,
                       time.perf_counter() - t_start)
        logger.info("epoch %d: train loss %.5g, val NMSE %.5g, lr %.3g",
                    epoch + 1, history.train_loss[-1], val, lr)
        if not np.isfinite(val):
            raise NonFiniteLoss("Validation NMSE is {} after epoch {}"
                                .format(val, epoch + 1))
        scheduler.step(val)

        if val < best*(1 - cfg.threshold) or best_state is None:
            best, stale = val, 0
            best_state = copy.deepcopy(model.state_dict())
            history.best_epoch = epoch
        else:
            stale += 1
            if val < best:
                best = val
                best_state = copy.deepcopy(model.state_dict())
                history.best_epoch = epoch
            if stale >= max(cfg.patience, 1):
                logger.info("Early stop after %d epochs", epoch + 1)
                break

    model.load_state_dict(best_state)
    model.eval()
    return model, history
