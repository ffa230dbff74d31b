"""Figure rendering from experiment CSV files.

Consumes the sweep output schema: summary.csv feeds the bar and
gap-versus-kappa figures, per-run trace CSVs feed the error curves.
Rendering never touches pyplot, so no backend or global state is
involved; ``render`` returns the Figure and writes the image file.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from matplotlib.figure import Figure


class SchemaError(ValueError):
    """An input CSV is missing, malformed, or lacks a required column."""


class FigureKind(enum.Enum):
    BAR_VOLUME = "bar_volume"
    BAR_ROUNDS = "bar_rounds"
    GAP_VS_KAPPA = "gap_vs_kappa"
    ERROR_VS_VOLUME = "error_vs_volume"
    ERROR_VS_GRADS = "error_vs_grads"


# Summary-fed kinds and the y column each one reads.
_SUMMARY_Y = {
    FigureKind.BAR_VOLUME: "volume_median",
    FigureKind.BAR_ROUNDS: "rounds_median",
    FigureKind.GAP_VS_KAPPA: "mean_spectral_gap_mean",
}
# Trace-fed kinds and the x column each one reads.
_TRACE_X = {
    FigureKind.ERROR_VS_VOLUME: "comm_volume",
    FigureKind.ERROR_VS_GRADS: "k",
}
_X_LABEL = {
    FigureKind.ERROR_VS_VOLUME: "communication volume (vectors)",
    FigureKind.ERROR_VS_GRADS: "iteration",
}


@dataclass(frozen=True)
class Series:
    csv_path: str
    label: str


@dataclass(frozen=True)
class FigureSpec:
    kind: FigureKind
    series: tuple[Series, ...]
    out_path: str
    log_x: bool = False
    log_y: Optional[bool] = None  # None: log for error curves, linear otherwise

    def __post_init__(self) -> None:
        if not isinstance(self.kind, FigureKind):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.series:
            raise ValueError("figure needs at least one series")

    @property
    def effective_log_y(self) -> bool:
        if self.log_y is not None:
            return self.log_y
        return self.kind in _TRACE_X


def _read_rows(path: str, required: Sequence[str]) -> list[dict[str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise SchemaError(f"{path}: empty file")
            header = [h.strip() for h in header]
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path}: missing column {col!r}")
            rows = [dict(zip(header, row)) for row in reader if row]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _numeric(path: str, row_no: int, row: dict, col: str) -> float:
    cell = row.get(col, "")
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(
            f"{path}: row {row_no}: column {col!r} is not numeric ({cell!r})"
        ) from None


def _summary_points(path: str, y_col: str) -> list[tuple[float, float]]:
    rows = _read_rows(path, ("kappa", y_col))
    points = [
        (_numeric(path, i, row, "kappa"), _numeric(path, i, row, y_col))
        for i, row in enumerate(rows, start=2)
    ]
    return sorted(points)


def _trace_columns(path: str, x_col: str) -> tuple[list, list, Optional[list]]:
    """x values, consensus errors, and optimality errors when present."""
    rows = _read_rows(path, (x_col, "consensus_error", "optimality_error"))
    xs = [_numeric(path, i, row, x_col) for i, row in enumerate(rows, start=2)]
    cons = [_numeric(path, i, row, "consensus_error") for i, row in enumerate(rows, start=2)]
    opt_cells = [row["optimality_error"] for row in rows]
    if all(cell == "" for cell in opt_cells):
        return xs, cons, None
    opt = [
        _numeric(path, i, row, "optimality_error") if row["optimality_error"] != "" else math.nan
        for i, row in enumerate(rows, start=2)
    ]
    return xs, cons, opt


def _render_bars(spec: FigureSpec, fig: Figure) -> None:
    ax = fig.add_subplot(1, 1, 1)
    y_col = _SUMMARY_Y[spec.kind]
    tables = [_summary_points(s.csv_path, y_col) for s in spec.series]
    categories = sorted({kappa for table in tables for kappa, _ in table})
    index = {kappa: pos for pos, kappa in enumerate(categories)}
    width = 0.8 / len(spec.series)
    for i, (series, table) in enumerate(zip(spec.series, tables)):
        offset = (i - (len(spec.series) - 1) / 2.0) * width
        positions = [index[kappa] + offset for kappa, _ in table]
        heights = [value for _, value in table]
        ax.bar(positions, heights, width=width, label=series.label)
    ax.set_xticks(range(len(categories)), [f"{kappa:g}" for kappa in categories])
    ax.set_xlabel("pruning rate")
    ax.set_ylabel("volume (vectors)" if spec.kind is FigureKind.BAR_VOLUME else "rounds")
    if spec.effective_log_y:
        ax.set_yscale("log")
    ax.legend()


def _render_gap(spec: FigureSpec, fig: Figure) -> None:
    ax = fig.add_subplot(1, 1, 1)
    for series in spec.series:
        points = _summary_points(series.csv_path, _SUMMARY_Y[spec.kind])
        ax.plot([k for k, _ in points], [g for _, g in points], marker="o", label=series.label)
    ax.set_xlabel("pruning rate")
    ax.set_ylabel("mean spectral gap")
    if spec.log_x:
        ax.set_xscale("log")
    if spec.effective_log_y:
        ax.set_yscale("log")
    ax.legend()


def _render_curves(spec: FigureSpec, fig: Figure) -> None:
    x_col = _TRACE_X[spec.kind]
    traces = [_trace_columns(s.csv_path, x_col) for s in spec.series]
    two_panel = any(opt is not None for _, _, opt in traces)
    if two_panel:
        ax_opt, ax_cons = fig.subplots(2, 1, sharex=True)
    else:
        ax_opt, ax_cons = None, fig.add_subplot(1, 1, 1)
    for series, (xs, cons, opt) in zip(spec.series, traces):
        if ax_opt is not None and opt is not None:
            ax_opt.plot(xs, opt, label=series.label)
        ax_cons.plot(xs, cons, label=series.label)
    if ax_opt is not None:
        ax_opt.set_ylabel("optimality error")
        ax_opt.legend()
    ax_cons.set_ylabel("consensus error")
    ax_cons.set_xlabel(_X_LABEL[spec.kind])
    ax_cons.legend()
    for ax in fig.axes:
        if spec.log_x:
            ax.set_xscale("log")
        if spec.effective_log_y:
            ax.set_yscale("log")


def render(spec: FigureSpec) -> Figure:
    """Render one figure, write spec.out_path, return the Figure."""
    fig = Figure(figsize=(6.4, 4.8), dpi=150)
    if spec.kind in (FigureKind.BAR_VOLUME, FigureKind.BAR_ROUNDS):
        _render_bars(spec, fig)
    elif spec.kind is FigureKind.GAP_VS_KAPPA:
        _render_gap(spec, fig)
    else:
        _render_curves(spec, fig)
    fig.set_layout_engine("tight")
    out = Path(spec.out_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    return fig
