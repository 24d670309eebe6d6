"""
Core package - Settings, events and errors shared by every module.
"""

from .settings import *
from .events import EventSystem, RunEvent
from .errors import LabError, ValidationError, NumericalError, AcceptanceError
