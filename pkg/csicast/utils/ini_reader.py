"""
Config reader module
--------------------
Reads INI run configurations into a flat dictionary keyed by dotted
'section.key' names, merged over the documented defaults, and writes them
back as INI text.

Values are Python literals ('[1, 10, 30]', 'True', "'TDD'"); anything that
does not evaluate as a literal is kept as a plain string.

Created: Autumn 2026
"""

import ast
import configparser
import io
import os

from csicast.utils.errors import ConfigError


DEFAULTS = {
    'run': {
        'seed': 0,
        'jobs': 1,
        'out': None,
        'verbose': False,
    },
    'system': {
        'n_tx': 4,
        'n_rx': 1,
        'n_sc': 32,
        'n_guard': 8,
        'hist_len': 16,
        'pred_len': 4,
        'carrier_freq': 2.4e9,
        'sc_spacing': 30e3,
        'report_interval': 2.5e-3,
        'duplex': 'TDD',
    },
    'scenario': {
        'track': 'regular',
        'mode': 'test',
        'velocities': [1.0, 10.0, 30.0],
        'delay_spreads': [30e-9, 100e-9, 300e-9],
        'profiles': ['NLOS-A', 'NLOS-C', 'LOS-D'],
        'duplex': ['TDD'],
        'noise': {'AWGN': [0, 5, 10, 15, 20, 25]},
        'train_snr_range': [0.0, 25.0],
        'n_samples': 20,
        'n_paths': None,
        'k_factor_db': None,
        'burst_length': 4,
        'impute_drops': True,
        'calib_tol_db': 0.25,
        'calib_ref_samples': 32,
    },
    'model': {
        'kind': 'csi4cast',
    },
    'csi4cast': {
        'cnn_depth': 2,
        'cnn_kernel': [3, 3],
        'cnn_residual': True,
        'cnn_activation': 'relu',
        'acl_layers': 2,
        'acl_hidden': 64,
        'acl_activation': 'relu',
        'acl_out_activation': 'none',
        'acl_combine': 'add',
        'shuffle_maps': 16,
        'shuffle_groups': 4,
        'shuffle_kernel': 3,
        'shuffle_blocks': 2,
        'shuffle_activation': 'relu',
        'shuffle_se_ratio': 4,
        'shuffle_dropout': 0.1,
        'd_model': 64,
        'n_layers': 2,
        'n_heads': 4,
        'ffn_dim': 128,
        'tf_activation': 'gelu',
        'dropout': 0.1,
    },
    'rnn': {
        'hidden_dim': 64,
        'n_layers': 2,
        'dropout': 0.0,
    },
    'cnn': {
        'num_filters': 16,
        'n_layers': 3,
        'kernel': [3, 3],
        'activation': 'relu',
    },
    'train': {
        'batch_size': 32,
        'accumulate': 1,
        'max_epochs': 20,
        'patience': 5,
        'optimizer': 'adam',
        'lr': 1e-3,
        'weight_decay': 0.0,
        'beta1': 0.9,
        'beta2': 0.999,
        'plateau_factor': 0.5,
        'plateau_patience': 2,
        'min_lr': 1e-6,
        'threshold': 1e-4,
        'precision': 'float32',
        'val_fraction': 0.1,
        'fresh_noise': False,
    },
    'eval': {
        'se_snr_db': 10.0,
        'timing_reps': 20,
        'timing_warmup': 3,
        'acf_max_lag': 8,
    },
    'report': {
        'train_velocities': [1.0, 10.0, 30.0],
        'plots': True,
    },
}


def _check_vals(item):
    """
    Check if item is evaluatable and returns the value of it.
    Example 'False' should return False
            'ABC' should return 'ABC'
    """
    try:
        val = ast.literal_eval(item)
    except (ValueError, SyntaxError):
        val = item
    return val


def _get_items(lst):
    """
    Dictionary of evaluated values from a list of (key, value) tuples.
    """
    return {k: _check_vals(v) for k, v in lst}


def default_config():
    """Flat dictionary of all documented keys with their defaults."""
    return {'{}.{}'.format(sec, k): v
            for sec, items in DEFAULTS.items() for k, v in items.items()}


def _parser():
    parser = configparser.ConfigParser(interpolation=None)
    return parser


def parse_config(text, base=None):
    """
    Parse INI text and merge it over 'base' (default: the documented
    defaults).

    Raises
    ------
    ConfigError
        For unknown sections or keys and for malformed INI text.
    """
    parser = _parser()
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError("\n\tCould not parse configuration:\n\t{}\n".format(
            err))
    conf = dict(default_config() if base is None else base)
    for sec in parser.sections():
        if sec not in DEFAULTS:
            raise ConfigError(
                "\n\tUnknown configuration section [{}]. Available sections:"
                "\n\t{}\n".format(sec, ', '.join(DEFAULTS)))
        for k, v in _get_items(parser.items(sec)).items():
            if k not in DEFAULTS[sec]:
                raise ConfigError(
                    "\n\tUnknown configuration key '{}' in section [{}]. "
                    "Check the documented keys in docs/"
                    "README_configuration.md\n".format(k, sec))
            conf['{}.{}'.format(sec, k)] = v
    return conf


def get_config_dict(ini_file, base=None):
    """
    Create a flat configuration dictionary from an INI file.

    Parameters
    ----------
    ini_file: str
        Path to configuration file
    base: dict
        Configuration to merge onto; the documented defaults if None

    Returns
    -------
    conf: dict
        Keys are 'section.key' strings
    """
    if not os.path.isfile(ini_file):
        raise ConfigError(
            "\n\tConfiguration file {} does not exist\n".format(ini_file))
    with open(ini_file, 'r') as fh:
        return parse_config(fh.read(), base=base)


def override(conf, **items):
    """
    Return a copy of 'conf' with dotted keys replaced; keys use '__' in
    place of the dot, e.g. override(conf, train__lr=1e-4).
    """
    new = dict(conf)
    for k, v in items.items():
        key = k.replace('__', '.')
        if key not in new:
            raise ConfigError("\n\tUnknown configuration key '{}'\n".format(
                key))
        new[key] = v
    return new


def section(conf, name):
    """All keys of one section, without the section prefix."""
    prefix = name + '.'
    return {k[len(prefix):]: v for k, v in conf.items()
            if k.startswith(prefix)}


def config_to_text(conf):
    """
    Serialize a flat configuration to INI text. Sections and keys are
    written in the documented order so the text is stable.
    """
    parser = _parser()
    for sec, items in DEFAULTS.items():
        parser.add_section(sec)
        for k in items:
            parser.set(sec, k, repr(conf['{}.{}'.format(sec, k)]))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def write_config(conf, ini_file):
    with open(ini_file, 'w') as fh:
        fh.write(config_to_text(conf))
