from .bundle import RenderPlan, TargetBundle
from .coursera import render_coursera
from .leanpub import render_leanpub
from .pipeline import EPOCH_ENV, BuildResult, build, make_plan, resolve_timestamp, write_reports
from .site import render_site

__all__ = [
    "EPOCH_ENV", "BuildResult", "RenderPlan", "TargetBundle", "build", "make_plan", "render_coursera",
    "render_leanpub", "render_site", "resolve_timestamp", "write_reports",
]
