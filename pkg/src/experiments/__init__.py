"""
Experiments package - Config documents, the mode runner and CSV output.
"""

from .config import ExperimentConfig, ExperimentMode, parse_config, with_overrides
from .runner import run
