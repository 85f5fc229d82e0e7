"""Interactive plotly views of node grids"""

from pathlib import Path
from typing import Optional

import numpy as np
import plotly.graph_objects as go

from ..io.atomic import PathLike, atomic_write_text


class GridPlotter:
    """Create visualizations for score, importance and transition grids"""

    @staticmethod
    def create_heatmap(values: np.ndarray, title: str, marker: Optional[tuple] = None) -> go.Figure:
        """
        Heatmap of an h'×w' grid with row 0 at the top

        Args:
            values: 2-D array of node values
            title: Figure title
            marker: Optional (row, col) cell to highlight, e.g. the source node of a transition row

        Returns:
            Plotly figure object
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            return GridPlotter._create_empty_plot("Nothing to visualize")

        fig = go.Figure(
            go.Heatmap(
                z=values,
                colorscale="Greys",
                reversescale=True,
                hovertemplate="row %{y}, col %{x}: %{z:.4g}<extra></extra>",
            )
        )
        if marker is not None:
            row, col = marker
            fig.add_trace(
                go.Scatter(
                    x=[col],
                    y=[row],
                    mode="markers",
                    marker=dict(symbol="x", size=12, color="red"),
                    name="source node",
                )
            )

        fig.update_layout(
            title=title,
            xaxis_title="column",
            yaxis_title="row",
            yaxis=dict(autorange="reversed", scaleanchor="x"),
            showlegend=marker is not None,
        )
        return fig

    @staticmethod
    def _create_empty_plot(message: str) -> go.Figure:
        """Create empty plot with message"""
        return go.Figure().add_annotation(
            text=message,
            xref="paper",
            yref="paper",
            x=0.5,
            y=0.5,
            showarrow=False,
        )

    @staticmethod
    def write_html(fig: go.Figure, path: PathLike) -> Path:
        return atomic_write_text(path, fig.to_html(include_plotlyjs="cdn", full_html=True))
