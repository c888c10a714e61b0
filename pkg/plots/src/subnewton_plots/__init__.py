"""Render figures from subnewton experiment artifact directories.

This package reads only the published artifact contract (CSV run traces
plus summary JSON); it never imports the experiment runner.
"""

from .figspec import FigureSpec, Panel, SpecError, load_figure_specs
from .render import ArtifactError, load_artifacts, render

__all__ = [
    "ArtifactError",
    "FigureSpec",
    "Panel",
    "SpecError",
    "load_artifacts",
    "load_figure_specs",
    "render",
]
