"""Graph linearization as segmented Eulerian neighborhood trails, with n-gram scoring
and linearization-uncertainty evaluation."""

from __future__ import annotations

__version__ = "0.1.0"
