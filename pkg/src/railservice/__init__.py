"""Service-based base station placement along high-speed railways."""

from ._backend import BACKEND

__version__ = "0.1.0"
