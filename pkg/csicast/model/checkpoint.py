"""
Checkpoints
-----------
Model registry and conversion between models and checkpoint files.

Created: Autumn 2026
"""

import logging

import numpy as np
import torch

from csicast.model.baselines import (CnnBaseline, CnnConfig, NoPrediction,
                                     RnnBaseline, RnnConfig)
from csicast.model.csi4cast import Csi4CastConfig, Csi4CastModel
from csicast.utils.core_types import SystemConfig
from csicast.utils.errors import ConfigError, IoError
from csicast.utils.file_io import read_checkpoint, write_checkpoint

logger = logging.getLogger(__name__)

# kind: (model class, config class)
MODELS = {
    'csi4cast': (Csi4CastModel, Csi4CastConfig),
    'rnn': (RnnBaseline, RnnConfig),
    'cnn': (CnnBaseline, CnnConfig),
}

TRAINABLE = tuple(MODELS)


def build_model(kind, config, system, dtype=torch.float32):
    """
    Construct a model of the given kind.

    Parameters
    ----------
    kind: str
        'csi4cast', 'rnn', 'cnn' or 'np'
    config: dict or config dataclass
        Hyperparameters; ignored for 'np'
    system: SystemConfig
    dtype: torch.dtype
        Parameter precision
    """
    kind = kind.lower()
    if kind == 'np':
        return NoPrediction(system, dtype)
    if kind not in MODELS:
        raise ConfigError(
            "\n\tUnknown model kind '{}'. Available: np, {}\n".format(
                kind, ', '.join(MODELS)))
    model_cls, config_cls = MODELS[kind]
    if isinstance(config, dict):
        config = config_cls.from_dict(config)
    elif config is None:
        config = config_cls()
    model = model_cls(config, system)
    return model.to(dtype)


def save_checkpoint(model, path):
    """Write parameters and buffers of 'model' in state order."""
    header = model.describe()
    header['dtype'] = str(model.real_dtype()).replace('torch.', '')
    tensors = [(name, t.detach().cpu().numpy())
               for name, t in model.state_dict().items()]
    write_checkpoint(path, header, tensors)
    logger.debug("Wrote %s checkpoint with %d tensors to %s",
                 model.kind, len(tensors), path)


def load_checkpoint(path):
    """
    Rebuild a model from a checkpoint file.

    Raises
    ------
    IoError
        If the tensors do not match the model described in the header.
    """
    header, tensors = read_checkpoint(path)
    try:
        system = SystemConfig(**header['system'])
        dtype = getattr(torch, header.get('dtype', 'float32'))
        model = build_model(header['kind'], header['config'], system, dtype)
    except (KeyError, TypeError) as err:
        raise IoError("\n\tCheckpoint {} has an invalid header: {}\n".format(
            path, err))
    state = model.state_dict()
    names = [n for n, _ in tensors]
    if names != list(state):
        raise IoError(
            "\n\tCheckpoint {} does not match a '{}' model: expected tensors"
            "\n\t{}\n\tgot\n\t{}\n".format(path, header['kind'], list(state),
                                           names))
    model.load_state_dict({n: torch.from_numpy(np.array(a))
                           for n, a in tensors})
    model.eval()
    return model
