"""Reduction of exact Courant algebroids and generalized complex structures on explicit charts."""

from .errors import (CheckFailure, CourantError, ExprSyntaxError, HypothesisError, PoleError,
                     SceneParseError, UnknownNameError)
from .expr import DiffField
from .forms import Chart, FormField
from .courant import GCSMatrix, GenSection, gauge_transform, twisted_bracket
from .patch import FramedSubbundle, PatchSetup
from .report import Report, emit
from .scene import load_scene, parse_scene, run, run_scene

__version__ = "0.1.0"

__all__ = ["CheckFailure", "CourantError", "ExprSyntaxError", "HypothesisError", "PoleError",
           "SceneParseError", "UnknownNameError", "DiffField", "Chart", "FormField", "GCSMatrix",
           "GenSection", "gauge_transform", "twisted_bracket", "FramedSubbundle", "PatchSetup",
           "Report", "emit", "load_scene", "parse_scene", "run", "run_scene"]
