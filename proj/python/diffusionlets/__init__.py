"""Diffusionlet solutions of drift-free diffusion PDEs and Gamma error propagation."""
import json

from ._core import *  # noqa: F401,F403
from ._core import SCHEMA, run_suite_json, suite_names


def run_suite(name, seed=20240601):
    """Run one validation suite and return its report as a dict."""
    return json.loads(run_suite_json(name, seed))
