"""
Graphics module
---------------
Figure and axes setup plus the line, bar and stem plots used by the
report: NMSE curves, rank distributions and ACF stems.

Created: Autumn 2026
"""

# Global modules
import numpy as np
import matplotlib.pyplot as plt


# Functions
def figure_init(plottype='line', printtypes=False):
    """
    Setting up the plot style

    Parameters
    ----------
    plottype: string
        Type of plot to make
    printtypes: boolean
        If available plottypes should be printed on screen
    """

    pltypes = {
            'line': 'ggplot',
            'bar': 'ggplot',
            'stem': 'default',
            }

    if printtypes:
        print("Available plot types: \n", pltypes.keys())
    else:
        plt.style.use(pltypes[plottype])


def get_nrow_ncol(npanels):
    """
    Return number of rows and columns from a given total no
    of panels for a grid
    """

    from math import sqrt, floor, ceil
    nrow = max(1, floor(sqrt(npanels)))
    return (nrow, ceil(npanels/nrow))


def fig_grid_setup(figsize=(12, 12), fshape=(1, 1), direction='row',
                   **grid_kwargs):
    """
    Set up the plot axes using pyplot.subplots

    Parameters
    ----------
        figsize: tuple
            Size of figure in inches; (width, height)
        fshape: tuple
            setting the shape of figure (nrow, ncol)
        direction: string
            'row' or 'col'; rowwise or columnwise order of axes instances

    Returns
    -------
        fig: Figure object
        grid: Array with axes instances
    """

    fig, grid = plt.subplots(fshape[0], fshape[1], squeeze=False,
                             **grid_kwargs)
    fig.set_size_inches(figsize)

    if direction == 'row':
        return fig, grid.flatten()
    else:
        return fig, grid.flatten(order='F')


def axes_settings(ax, figtitle=None, xlabel=None, ylabel=None, xticks=None,
                  xtlabels=None, xlim=None, ylim=None, fontsize='large',
                  fontsize_title='x-large'):
    """
    Configuration of axes; titles and labels
    """

    if figtitle is not None:
        ax.set_title(figtitle, fontsize=fontsize_title)
    if ylabel is not None:
        ax.set_ylabel(ylabel, fontsize=fontsize)
    if xlabel is not None:
        ax.set_xlabel(xlabel, fontsize=fontsize)

    ((xticks is not None) and ax.set_xticks(xticks))
    ((xtlabels is not None) and ax.set_xticklabels(xtlabels))
    ((xlim is not None) and ax.set_xlim(xlim))
    ((ylim is not None) and ax.set_ylim(ylim))


def make_line_plot(ax, ydata, xdata, labels=None, lbl_fontsize='medium',
                   **lp_kwargs):
    """
    Draw one line per entry of ydata on a single axes object.

    Parameters
    ----------
        ydata, xdata: list of 1D arrays
        labels: list of str
        **lp_kwargs: keyword arguments passed to pyplot.plot

    Returns
    -------
        lines: list of Line2D
    """

    msg = "*** ERROR *** \n x and y data must be lists of equal length"
    assert len(ydata) == len(xdata), msg

    lines = [ax.plot(xx, yy, **lp_kwargs)[0] for xx, yy in zip(xdata, ydata)]
    if labels is not None:
        [line.set_label(lbl) for line, lbl in zip(lines, labels)]
        ax.legend(fontsize=lbl_fontsize)
    return lines


def shade_regions(ax, regions, colors=None, alpha=.15):
    """
    Shade x intervals of an axes, e.g. interpolation and extrapolation
    ranges.

    Parameters
    ----------
        regions: dict
            label: (x0, x1)
    """
    colors = colors or {}
    for lbl, (x0, x1) in regions.items():
        ax.axvspan(x0, x1, color=colors.get(lbl, 'grey'), alpha=alpha,
                   label=lbl)


def make_bar_plot(ax, data, labels, leg_labels=None, width=0.8):
    """
    Grouped bar plot.

    Parameters
    ----------
        data: 2D array
            Rows are bar groups (x positions), columns the bars per group
        labels: list
            xtick labels, one per group
        leg_labels: list
            Legend labels, one per column
    """
    data = np.atleast_2d(data)
    ngroups, nbars = data.shape
    bw = width/nbars
    x = np.arange(ngroups)
    for j in range(nbars):
        lbl = leg_labels[j] if leg_labels is not None else None
        ax.bar(x - width/2 + (j + .5)*bw, data[:, j], bw, label=lbl)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    if leg_labels is not None:
        ax.legend(fontsize='medium')


def make_stem_plot(ax, lags, values, label=None):
    """Stem plot of ACF magnitudes over lags."""
    cont = ax.stem(lags, values, label=label)
    ax.axhline(color='k', lw=1, alpha=.5)
    return cont
