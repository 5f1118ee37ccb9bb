"""Batch figure rendering for mipt2d sweep and fit outputs."""

__version__ = "0.1.0"

from .inputs import (BoundaryCurve, InterpolationError, Landscape,
                     ProvenanceError, SchemaError, load_boundary,
                     load_datapoints, load_fit_report, load_landscape)
from .render import FigureJob, render_collapse, render_landscape, \
    render_phase_diagram

__all__ = [
    "BoundaryCurve", "FigureJob", "InterpolationError", "Landscape",
    "ProvenanceError", "SchemaError", "load_boundary", "load_datapoints",
    "load_fit_report", "load_landscape", "render_collapse",
    "render_landscape", "render_phase_diagram",
]
