"""Numerical rectification of almost-cocycles on compact groups.

A cochain whose coboundary is uniformly close to the identity is deformed
into an exact cocycle by repeated Haar averaging of its defect.
"""
__version__ = "0.1.0"

from .cochain import Cochain, coboundary, defect, evaluation_set
from .groups import FiniteGroup, SU2Group, U1Group, small_groups
from .rectify import RectifyReport, RectifySettings, Status, fit_contraction, rectify, rectify_abelian
from .scenarios import load_scenario, run_scenario, template
from .target import GAction, TargetGroup

__all__ = [
    "__version__",
    "Cochain",
    "coboundary",
    "defect",
    "evaluation_set",
    "FiniteGroup",
    "SU2Group",
    "U1Group",
    "small_groups",
    "RectifyReport",
    "RectifySettings",
    "Status",
    "fit_contraction",
    "rectify",
    "rectify_abelian",
    "load_scenario",
    "run_scenario",
    "template",
    "GAction",
    "TargetGroup",
]
