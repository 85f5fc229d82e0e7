"""Visualization of node grids: PGM heatmaps and plotly figures"""

from .heatmap import decode_heatmap, encode_heatmap, quantize, write_heatmap
from .plotter import GridPlotter

__all__ = ["GridPlotter", "decode_heatmap", "encode_heatmap", "quantize", "write_heatmap"]
