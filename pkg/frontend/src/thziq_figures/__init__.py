"""Figure rendering for the simulator's CSV result tables."""

from .figures import KINDS, FigureSpec, curve_set, render, save
from .reader import Table, load_table

__version__ = "0.1.0"
