"""
Core base structures for ASSIST entities.
"""

from .entity import Entity

__all__ = ["Entity"]
