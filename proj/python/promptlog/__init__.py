"""Prompt-driven log parsing and anomaly detection pipeline."""

from ._promptlog import *  # noqa: F401,F403
from ._promptlog import __doc__  # noqa: F401
