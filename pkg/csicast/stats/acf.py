"""
Autocorrelation
---------------
Sample autocorrelation of CSI along time, along subcarriers and jointly
over (time, subcarrier) lags.

Each series is mean-removed; the lag-l estimate averages the T-l
overlapping products and is normalized by the lag-0 power, so lag 0 is
exactly 1. A series with zero variance counts as perfectly correlated.
Magnitudes are averaged over all remaining axes.

Created: Autumn 2026
"""

import numpy as np
import xarray as xa

from csicast.utils.errors import DimensionMismatch, SeriesTooShort

DIMS = ('sample', 'antenna', 'time', 'subcarrier')


def to_dataarray(data):
    """
    Wrap a complex array (samples, antennas, time, subcarriers) as an
    xarray DataArray; a 3-D array is taken as a single sample.
    """
    if isinstance(data, xa.DataArray):
        return data
    data = np.asarray(data)
    if data.ndim == 3:
        data = data[None]
    if data.ndim != 4:
        raise DimensionMismatch("\n\tExpected data of shape (samples, "
                                "antennas, time, subcarriers), got {}\n"
                                .format(data.shape))
    return xa.DataArray(data, dims=DIMS)


def _normalize(prod, power):
    return np.divide(prod, power, out=np.ones_like(prod),
                     where=power > 0)


def _acf_1d(y, max_lag):
    """ACF along the last axis; lags on a new last axis."""
    n = y.shape[-1]
    y0 = y - y.mean(axis=-1, keepdims=True)
    prods = [np.mean(y0[..., lag:]*np.conj(y0[..., :n - lag]), axis=-1)
             for lag in range(max_lag + 1)]
    power = prods[0].real[..., None]
    out = np.abs(_normalize(np.stack(prods, axis=-1), power))
    out[..., 0] = 1.0
    return out


def _acf_2d(y, max_t_lag, max_f_lag):
    """ACF over the last two axes; lags on two new last axes."""
    nt, nf = y.shape[-2:]
    y0 = y - y.mean(axis=(-2, -1), keepdims=True)
    out = np.empty(y.shape[:-2] + (max_t_lag + 1, max_f_lag + 1),
                   dtype=np.result_type(y0, np.complex128))
    for lt in range(max_t_lag + 1):
        for lf in range(max_f_lag + 1):
            out[..., lt, lf] = np.mean(
                y0[..., lt:, lf:]*np.conj(y0[..., :nt - lt, :nf - lf]),
                axis=(-2, -1))
    power = out[..., :1, :1].real
    out = np.abs(_normalize(out, power))
    out[..., 0, 0] = 1.0
    return out


def _check_len(da, dim, max_lag):
    if max_lag < 0 or da.sizes[dim] <= max_lag:
        raise SeriesTooShort(
            "\n\tA maximum lag of {} needs series longer than {} along "
            "'{}' (have {})\n".format(max_lag, max_lag, dim, da.sizes[dim]))


def _along(data, dim, max_lag):
    da = to_dataarray(data)
    _check_len(da, dim, max_lag)
    acf = xa.apply_ufunc(_acf_1d, da, input_core_dims=[[dim]],
                         output_core_dims=[['lag']],
                         kwargs={'max_lag': max_lag})
    out = acf.mean(dim=[d for d in acf.dims if d != 'lag'])
    return out.assign_coords(lag=np.arange(max_lag + 1))


def temporal_acf(data, max_lag):
    """
    Mean |ACF| over time lags 0..max_lag.

    Parameters
    ----------
    data: complex array or DataArray
        Dims (sample, antenna, time, subcarrier)
    max_lag: int

    Returns
    -------
    xarray.DataArray
        Dimension 'lag'
    """
    return _along(data, 'time', max_lag)


def frequency_acf(data, max_lag):
    """Mean |ACF| over subcarrier lags 0..max_lag."""
    return _along(data, 'subcarrier', max_lag)


def acf_2d(data, max_t_lag, max_f_lag):
    """
    Mean |ACF| over joint (time, subcarrier) lags.

    Returns
    -------
    xarray.DataArray
        Dimensions ('t_lag', 'f_lag')
    """
    da = to_dataarray(data)
    _check_len(da, 'time', max_t_lag)
    _check_len(da, 'subcarrier', max_f_lag)
    acf = xa.apply_ufunc(_acf_2d, da,
                         input_core_dims=[['time', 'subcarrier']],
                         output_core_dims=[['t_lag', 'f_lag']],
                         kwargs={'max_t_lag': max_t_lag,
                                 'max_f_lag': max_f_lag})
    out = acf.mean(dim=['sample', 'antenna'])
    return out.assign_coords(t_lag=np.arange(max_t_lag + 1),
                             f_lag=np.arange(max_f_lag + 1))
