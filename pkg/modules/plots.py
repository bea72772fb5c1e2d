"""
Plotly charts for feature profiles, runtime comparisons and confusion matrices.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import plotly.graph_objects as go
from plotly.subplots import make_subplots

from .benchmark import BenchReport
from .evaluation import ConfusionMatrix
from .feature_table import FeatureTable
from .glcm import FEATURE_NAMES
from .imaging import ClassMap

logger = logging.getLogger(__name__)


def feature_profile_figure(table: FeatureTable) -> go.Figure:
    """One panel per feature: value against window number."""
    fig = make_subplots(rows=len(FEATURE_NAMES), cols=1, shared_xaxes=True, subplot_titles=FEATURE_NAMES)
    index = list(range(len(table)))
    for row, name in enumerate(FEATURE_NAMES, start=1):
        fig.add_trace(go.Scatter(x=index, y=table.frame[name], mode="lines", name=name), row=row, col=1)
    fig.update_xaxes(title_text="window number", row=len(FEATURE_NAMES), col=1)
    fig.update_layout(height=250 * len(FEATURE_NAMES), showlegend=False, title="Texture features per window")
    return fig


def bench_figure(report: BenchReport) -> go.Figure:
    """Median seconds and window count per window size."""
    labels = [f"{row.size}x{row.size}" for row in report.rows]
    fig = make_subplots(specs=[[{"secondary_y": True}]])
    fig.add_trace(go.Bar(x=labels, y=[row.seconds for row in report.rows], name="median seconds"), secondary_y=False)
    fig.add_trace(go.Scatter(x=labels, y=[row.windows for row in report.rows], name="windows", mode="lines+markers"),
                  secondary_y=True)
    fig.update_yaxes(title_text="seconds", secondary_y=False)
    fig.update_yaxes(title_text="windows", secondary_y=True)
    fig.update_layout(title="Runtime by window size")
    return fig


def confusion_figure(cm: ConfusionMatrix, class_map: Optional[ClassMap] = None) -> go.Figure:
    names = class_map if class_map is not None else ClassMap.from_ids(list(cm.classes))
    labels = [names.name(c) for c in cm.classes]
    fig = go.Figure(go.Heatmap(z=cm.counts, x=labels, y=labels, colorscale="Blues", text=cm.counts,
                               texttemplate="%{text}"))
    fig.update_layout(title=f"Confusion matrix (accuracy {cm.accuracy:.2%})",
                      xaxis_title="prediction", yaxis_title="truth", yaxis_autorange="reversed")
    return fig


def write_figure(fig: go.Figure, path: Union[str, Path]) -> Path:
    path = Path(path)
    fig.write_html(path, include_plotlyjs="cdn")
    logger.info(f"✅ Wrote chart to {path}")
    return path
