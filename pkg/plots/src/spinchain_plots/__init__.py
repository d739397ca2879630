"""Figure generation for spinchain CSV/JSON outputs."""

__version__ = "0.1.0"

from .jobs import InsetSpec, PlotJob, load_job
from .render import InputError, plot_surface, plot_timeseries, render
