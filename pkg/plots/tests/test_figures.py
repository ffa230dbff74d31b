"""Series-extraction tests: rendered artists must carry the CSV values."""

import csv
import hashlib
import math
from pathlib import Path

import pytest

from acplots import FigureKind, FigureSpec, SchemaError, Series, render

DATA = Path(__file__).parent / "data"
CONSENSUS_SUMMARY = DATA / "consensus" / "summary.csv"
LINREG_SUMMARY = DATA / "linreg" / "summary.csv"
CONSENSUS_TRACE = DATA / "consensus" / "traces" / "consensus_pt000_trial000.csv"
LINREG_TRACES = sorted((DATA / "linreg" / "traces").glob("*.csv"))


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def column(path, name):
    return [float(row[name]) for row in read_rows(path)]


def by_kappa(path, name):
    pairs = sorted((float(r["kappa"]), float(r[name])) for r in read_rows(path))
    return [k for k, _ in pairs], [v for _, v in pairs]


def spec(kind, series, out, **kwargs):
    return FigureSpec(kind=kind, series=tuple(series), out_path=str(out), **kwargs)


class TestBars:
    def test_volume_heights_match_summary(self, tmp_path):
        fig = render(
            spec(
                FigureKind.BAR_VOLUME,
                [Series(str(CONSENSUS_SUMMARY), "adaptive")],
                tmp_path / "vol.png",
            )
        )
        kappas, volumes = by_kappa(CONSENSUS_SUMMARY, "volume_median")
        ax = fig.axes[0]
        heights = [patch.get_height() for patch in ax.containers[0]]
        assert heights == volumes
        assert [t.get_text() for t in ax.get_xticklabels()] == [f"{k:g}" for k in kappas]
        assert ax.get_legend_handles_labels()[1] == ["adaptive"]

    def test_rounds_heights_match_summary(self, tmp_path):
        fig = render(
            spec(
                FigureKind.BAR_ROUNDS,
                [Series(str(CONSENSUS_SUMMARY), "s")],
                tmp_path / "rounds.png",
            )
        )
        _, rounds = by_kappa(CONSENSUS_SUMMARY, "rounds_median")
        assert [p.get_height() for p in fig.axes[0].containers[0]] == rounds

    def test_two_series_grouped(self, tmp_path):
        fig = render(
            spec(
                FigureKind.BAR_VOLUME,
                [
                    Series(str(CONSENSUS_SUMMARY), "first"),
                    Series(str(LINREG_SUMMARY), "second"),
                ],
                tmp_path / "grouped.png",
            )
        )
        ax = fig.axes[0]
        assert len(ax.containers) == 2
        _, first = by_kappa(CONSENSUS_SUMMARY, "volume_median")
        _, second = by_kappa(LINREG_SUMMARY, "volume_median")
        assert [p.get_height() for p in ax.containers[0]] == first
        assert [p.get_height() for p in ax.containers[1]] == second
        assert ax.get_legend_handles_labels()[1] == ["first", "second"]


class TestGapVsKappa:
    def test_line_matches_summary(self, tmp_path):
        fig = render(
            spec(
                FigureKind.GAP_VS_KAPPA,
                [Series(str(CONSENSUS_SUMMARY), "G(8,0.8)")],
                tmp_path / "gap.png",
            )
        )
        kappas, gaps = by_kappa(CONSENSUS_SUMMARY, "mean_spectral_gap_mean")
        line = fig.axes[0].lines[0]
        assert [float(v) for v in line.get_xdata()] == kappas
        assert [float(v) for v in line.get_ydata()] == gaps
        assert fig.axes[0].get_yscale() == "linear"


class TestErrorCurves:
    def test_consensus_trace_single_panel(self, tmp_path):
        fig = render(
            spec(
                FigureKind.ERROR_VS_VOLUME,
                [Series(str(CONSENSUS_TRACE), "kappa=0")],
                tmp_path / "cons.png",
            )
        )
        assert len(fig.axes) == 1
        ax = fig.axes[0]
        line = ax.lines[0]
        assert [float(v) for v in line.get_xdata()] == column(CONSENSUS_TRACE, "comm_volume")
        assert [float(v) for v in line.get_ydata()] == column(CONSENSUS_TRACE, "consensus_error")
        assert ax.get_yscale() == "log"

    def test_optimality_traces_two_panels(self, tmp_path):
        series = [Series(str(p), p.stem) for p in LINREG_TRACES]
        fig = render(spec(FigureKind.ERROR_VS_VOLUME, series, tmp_path / "opt.png"))
        assert len(fig.axes) == 2
        top, bottom = fig.axes
        assert len(top.lines) == len(LINREG_TRACES)
        assert len(bottom.lines) == len(LINREG_TRACES)
        for line, path in zip(top.lines, LINREG_TRACES):
            assert [float(v) for v in line.get_ydata()] == column(path, "optimality_error")
        for line, path in zip(bottom.lines, LINREG_TRACES):
            assert [float(v) for v in line.get_ydata()] == column(path, "consensus_error")
        assert top.get_yscale() == "log" and bottom.get_yscale() == "log"
        assert top.get_legend_handles_labels()[1] == [p.stem for p in LINREG_TRACES]

    def test_grads_axis_is_iteration(self, tmp_path):
        path = LINREG_TRACES[0]
        fig = render(
            spec(FigureKind.ERROR_VS_GRADS, [Series(str(path), "run")], tmp_path / "it.png")
        )
        assert [float(v) for v in fig.axes[0].lines[0].get_xdata()] == column(path, "k")

    def test_log_y_override(self, tmp_path):
        fig = render(
            spec(
                FigureKind.ERROR_VS_VOLUME,
                [Series(str(CONSENSUS_TRACE), "s")],
                tmp_path / "lin.png",
                log_y=False,
            )
        )
        assert fig.axes[0].get_yscale() == "linear"


class TestContract:
    def test_writes_nonempty_image(self, tmp_path):
        out = tmp_path / "fig.png"
        render(spec(FigureKind.BAR_VOLUME, [Series(str(CONSENSUS_SUMMARY), "s")], out))
        assert out.exists() and out.stat().st_size > 0

    def test_empty_series_rejected_before_writing(self, tmp_path):
        out = tmp_path / "never.png"
        with pytest.raises(ValueError, match="at least one series"):
            FigureSpec(kind=FigureKind.BAR_VOLUME, series=(), out_path=str(out))
        assert not out.exists()

    def test_missing_column_is_named(self, tmp_path):
        rows = read_rows(CONSENSUS_SUMMARY)
        clipped = tmp_path / "clipped.csv"
        fields = [c for c in rows[0] if c != "volume_median"]
        with open(clipped, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fields, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        with pytest.raises(SchemaError, match="volume_median"):
            render(spec(FigureKind.BAR_VOLUME, [Series(str(clipped), "s")], tmp_path / "x.png"))

    def test_non_numeric_cell_is_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        text = CONSENSUS_SUMMARY.read_text().splitlines()
        parts = text[1].split(",")
        parts[4] = "half"  # header: scenario,algorithm,n,p,kappa,...
        bad.write_text("\n".join([text[0], ",".join(parts)] + text[2:]) + "\n")
        with pytest.raises(SchemaError, match="'kappa'"):
            render(spec(FigureKind.BAR_VOLUME, [Series(str(bad), "s")], tmp_path / "x.png"))

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(SchemaError, match="cannot read"):
            render(
                spec(
                    FigureKind.BAR_VOLUME,
                    [Series(str(tmp_path / "absent.csv"), "s")],
                    tmp_path / "x.png",
                )
            )

    def test_rerender_gives_identical_series(self, tmp_path):
        figure_spec = spec(
            FigureKind.ERROR_VS_VOLUME,
            [Series(str(LINREG_TRACES[0]), "run")],
            tmp_path / "same.png",
        )
        first = render(figure_spec)
        second = render(figure_spec)
        for ax_a, ax_b in zip(first.axes, second.axes):
            for line_a, line_b in zip(ax_a.lines, ax_b.lines):
                assert list(line_a.get_xdata()) == list(line_b.get_xdata())
                assert list(line_a.get_ydata()) == list(line_b.get_ydata())

    def test_inputs_not_mutated(self, tmp_path):
        before = hashlib.sha256(CONSENSUS_SUMMARY.read_bytes()).hexdigest()
        render(
            spec(FigureKind.BAR_VOLUME, [Series(str(CONSENSUS_SUMMARY), "s")], tmp_path / "m.png")
        )
        assert hashlib.sha256(CONSENSUS_SUMMARY.read_bytes()).hexdigest() == before

    def test_fixture_optimality_column_is_finite(self):
        # Guards the fixture itself: the two-panel path needs real values.
        for path in LINREG_TRACES:
            assert all(math.isfinite(v) for v in column(path, "optimality_error"))
