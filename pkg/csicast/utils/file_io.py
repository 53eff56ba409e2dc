"""
File I/O
--------
Binary dataset and model checkpoint formats, plus CSV helpers for the
tables written by the runtime scripts.

Dataset file (all fields little-endian)::

    magic           8 bytes   b'CSI4CAST'
    version         u32
    system          6 x u32   n_tx n_rx n_sc n_guard hist_len pred_len
                    3 x f64   carrier_freq sc_spacing report_interval
                    u8        duplex
    scenario        f64 f64   velocity delay_spread
                    u8 u8     channel profile, noise type
                    f64       noise degree
                    u8        duplex
    sample_count    u64
    dtype code      u8        0 = complex64, 1 = complex128
    snr mode        u8        0 = scenario noise, 1 = per-sample AWGN SNR
    snr range       2 x f64
    sample table    sample_count x (u64 seed, f64 noise degree)
    samples         history then target per sample, interleaved (re, im),
                    row-major over (antenna, time, subcarrier)

Time stamps are not stored; histories start at t = 0 and targets follow on
with the report interval.

Checkpoint file::

    magic           8 bytes   b'C4CMODEL'
    version         u32
    header length   u32
    header          UTF-8 JSON (model kind, model config, system config)
    tensor count    u32
    tensors         name length u16, name UTF-8, dtype code u8, ndim u8,
                    ndim x u32 shape, little-endian data

Tensors follow the model's state order.

Created: Autumn 2026
"""

import json
import logging
import os
import struct

import numpy as np
import pandas as pd

from csicast.utils.core_types import (DUPLEX_CODES, NOISE_CODES,
                                      PROFILE_CODES, CsiDataset, CsiSample,
                                      CsiSequence, NoiseType,
                                      ScenarioDescriptor, SystemConfig,
                                      time_axis)
from csicast.utils.errors import (BadMagic, IoError, MissingData,
                                  VersionUnsupported)

logger = logging.getLogger(__name__)

DATASET_MAGIC = b'CSI4CAST'
DATASET_VERSION = 1
CHECKPOINT_MAGIC = b'C4CMODEL'
CHECKPOINT_VERSION = 1

_DS_HEADER = struct.Struct('<8sI6I3dBddBBdBQBBdd')
_DS_ENTRY = struct.Struct('<Qd')

_COMPLEX_CODES = {np.dtype(np.complex64): 0, np.dtype(np.complex128): 1}
_COMPLEX_DTYPES = {0: np.dtype('<c8'), 1: np.dtype('<c16')}

_TENSOR_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1,
                 np.dtype(np.int64): 2}
_TENSOR_DTYPES = {0: np.dtype('<f4'), 1: np.dtype('<f8'), 2: np.dtype('<i8')}

CSV_FLOAT_FORMAT = '%.10g'


def _invert(d):
    return {v: k for k, v in d.items()}


class _Reader:
    """Sequential reader over a byte buffer; short reads raise IoError."""

    def __init__(self, buf, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise IoError(
                "\n\tFile {} is truncated: needed {} bytes at offset {}, "
                "{} available\n".format(self.path, n, self.pos,
                                        len(self.buf) - self.pos))
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st):
        return st.unpack(self.take(st.size))

    def array(self, dtype, shape):
        count = int(np.prod(shape))
        raw = self.take(count*dtype.itemsize)
        return np.frombuffer(raw, dtype=dtype, count=count).reshape(shape)


def _read_bytes(path):
    try:
        with open(path, 'rb') as fh:
            return fh.read()
    except OSError as err:
        raise IoError("\n\tCould not read {}: {}\n".format(path, err))


def _write_bytes(path, chunks):
    try:
        with open(path, 'wb') as fh:
            for c in chunks:
                fh.write(c)
    except OSError as err:
        raise IoError("\n\tCould not write {}: {}\n".format(path, err))


def _check_magic(magic, expected, path):
    if magic != expected:
        raise BadMagic("\n\tFile {} starts with {!r}, expected {!r}\n".format(
            path, magic, expected))


def save_dataset(ds, path):
    """Write a CsiDataset in the binary dataset format."""
    cfg = ds.config
    sc = ds.scenario if ds.scenario is not None else ds.samples[0].scenario
    code = _COMPLEX_CODES[np.dtype(ds.dtype)]
    wire = _COMPLEX_DTYPES[code]
    lo, hi = ds.snr_range if ds.snr_range is not None else (0.0, 0.0)
    header = _DS_HEADER.pack(
        DATASET_MAGIC, DATASET_VERSION,
        cfg.n_tx, cfg.n_rx, cfg.n_sc, cfg.n_guard, cfg.hist_len,
        cfg.pred_len, cfg.carrier_freq, cfg.sc_spacing, cfg.report_interval,
        DUPLEX_CODES[cfg.duplex],
        sc.velocity, sc.delay_spread, PROFILE_CODES[sc.channel_profile],
        NOISE_CODES[sc.noise_type], sc.noise_degree, DUPLEX_CODES[sc.duplex],
        len(ds.samples), code, int(ds.snr_range is not None), lo, hi)
    table = b''.join(_DS_ENTRY.pack(s.seed, s.scenario.noise_degree)
                     for s in ds.samples)

    def body():
        for s in ds.samples:
            yield np.ascontiguousarray(s.history.data, dtype=wire).tobytes()
            yield np.ascontiguousarray(s.target.data, dtype=wire).tobytes()

    _write_bytes(path, [header, table, *body()])


def load_dataset(path):
    """
    Read a dataset file written by save_dataset.

    Raises
    ------
    BadMagic, VersionUnsupported, IoError
    """
    rd = _Reader(_read_bytes(path), path)
    magic = rd.take(8)
    _check_magic(magic, DATASET_MAGIC, path)
    rd.pos = 0
    fields = rd.unpack(_DS_HEADER)
    version = fields[1]
    if version != DATASET_VERSION:
        raise VersionUnsupported(
            "\n\tDataset {} has format version {}; this build reads version "
            "{}\n".format(path, version, DATASET_VERSION))
    (n_tx, n_rx, n_sc, n_guard, hist_len, pred_len) = fields[2:8]
    carrier, spacing, interval = fields[8:11]
    duplexes = _invert(DUPLEX_CODES)
    try:
        cfg = SystemConfig(n_tx, n_rx, n_sc, n_guard, hist_len, pred_len,
                           carrier, spacing, interval, duplexes[fields[11]])
        scenario = ScenarioDescriptor(
            fields[12], fields[13], _invert(PROFILE_CODES)[fields[14]],
            _invert(NOISE_CODES)[fields[15]], fields[16],
            duplexes[fields[17]])
        wire = _COMPLEX_DTYPES[fields[19]]
    except KeyError as err:
        raise IoError("\n\tDataset {} has an unknown code {}\n".format(
            path, err))
    count, per_sample = fields[18], bool(fields[20])
    snr_range = (fields[21], fields[22]) if per_sample else None
    entries = [rd.unpack(_DS_ENTRY) for _ in range(count)]

    dtype = np.dtype(wire.type)
    t_hist = time_axis(hist_len, interval)
    t_pred = time_axis(pred_len, interval, hist_len*interval)
    samples = []
    for seed, degree in entries:
        hist = rd.array(wire, (n_tx, hist_len, n_sc)).astype(dtype)
        targ = rd.array(wire, (n_tx, pred_len, n_sc)).astype(dtype)
        sc = scenario
        if per_sample:
            sc = ScenarioDescriptor(scenario.velocity, scenario.delay_spread,
                                    scenario.channel_profile, NoiseType.AWGN,
                                    degree, scenario.duplex)
        samples.append(CsiSample(CsiSequence(hist, t_hist),
                                 CsiSequence(targ, t_pred), sc, int(seed)))
    if rd.pos != len(rd.buf):
        raise IoError("\n\tDataset {} has {} trailing bytes\n".format(
            path, len(rd.buf) - rd.pos))
    return CsiDataset(samples, cfg, dtype, scenario, snr_range)


def read_dataset_header(path):
    """System config, scenario and sample count without reading samples."""
    with open(path, 'rb') as fh:
        buf = fh.read(_DS_HEADER.size)
    rd = _Reader(buf, path)
    _check_magic(rd.take(8), DATASET_MAGIC, path)
    rd.pos = 0
    f = rd.unpack(_DS_HEADER)
    if f[1] != DATASET_VERSION:
        raise VersionUnsupported("\n\tDataset {} has format version "
                                 "{}\n".format(path, f[1]))
    duplexes = _invert(DUPLEX_CODES)
    cfg = SystemConfig(*f[2:11], duplexes[f[11]])
    sc = ScenarioDescriptor(f[12], f[13], _invert(PROFILE_CODES)[f[14]],
                            _invert(NOISE_CODES)[f[15]], f[16],
                            duplexes[f[17]])
    return cfg, sc, f[18]


def write_checkpoint(path, header, tensors):
    """
    Write a model checkpoint.

    Parameters
    ----------
    header: dict
        JSON-serializable description of the model
    tensors: list of (name, numpy array)
        In state order
    """
    head = json.dumps(header, sort_keys=True).encode('utf-8')
    chunks = [CHECKPOINT_MAGIC, struct.pack('<II', CHECKPOINT_VERSION,
                                            len(head)),
              head, struct.pack('<I', len(tensors))]
    for name, arr in tensors:
        arr = np.asarray(arr)
        code = _TENSOR_CODES[arr.dtype]
        bname = name.encode('utf-8')
        chunks.append(struct.pack('<H', len(bname)) + bname)
        chunks.append(struct.pack('<BB', code, arr.ndim))
        chunks.append(struct.pack('<{}I'.format(arr.ndim), *arr.shape))
        chunks.append(np.ascontiguousarray(
            arr, dtype=_TENSOR_DTYPES[code]).tobytes())
    _write_bytes(path, chunks)


def read_checkpoint(path):
    """
    Returns
    -------
    header: dict
    tensors: list of (name, numpy array)
    """
    rd = _Reader(_read_bytes(path), path)
    _check_magic(rd.take(8), CHECKPOINT_MAGIC, path)
    version, hlen = struct.unpack('<II', rd.take(8))
    if version != CHECKPOINT_VERSION:
        raise VersionUnsupported(
            "\n\tCheckpoint {} has format version {}\n".format(path, version))
    try:
        header = json.loads(rd.take(hlen).decode('utf-8'))
    except ValueError as err:
        raise IoError("\n\tCorrupt checkpoint header in {}: {}\n".format(
            path, err))
    (count,) = struct.unpack('<I', rd.take(4))
    tensors = []
    for _ in range(count):
        (nlen,) = struct.unpack('<H', rd.take(2))
        name = rd.take(nlen).decode('utf-8')
        code, ndim = struct.unpack('<BB', rd.take(2))
        if code not in _TENSOR_DTYPES:
            raise IoError("\n\tUnknown tensor dtype code {} in {}\n".format(
                code, path))
        shape = struct.unpack('<{}I'.format(ndim), rd.take(4*ndim))
        wire = _TENSOR_DTYPES[code]
        arr = rd.array(wire, shape).astype(wire.newbyteorder('='))
        tensors.append((name, arr))
    return header, tensors


def write_csv(df, path):
    """Write a table with a fixed float format so reruns are byte-stable."""
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT,
              lineterminator='\n')


def read_csv(path):
    if not os.path.isfile(path):
        raise MissingData("\n\tExpected table {} is missing\n".format(path))
    return pd.read_csv(path)
