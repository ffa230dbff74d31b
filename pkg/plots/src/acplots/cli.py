"""Command line entry: render the figures described by a JSON spec file.

The spec file holds one figure object or {"figures": [...]}. Each figure:

    {
      "kind": "bar_volume" | "bar_rounds" | "gap_vs_kappa"
            | "error_vs_volume" | "error_vs_grads",
      "out": "volume.png",
      "series": [{"csv": "sweep/summary.csv", "label": "pruned"}],
      "log_x": false,           // optional
      "log_y": true             // optional; error curves default to log
    }

CSV paths are resolved relative to the spec file, output paths relative
to --out. Exit codes: 0 on success, 1 for spec errors, 2 for schema or
rendering failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FigureKind, FigureSpec, SchemaError, Series, render


class SpecError(ValueError):
    pass


def _figure_from_dict(obj: object, spec_dir: Path, out_dir: Path) -> FigureSpec:
    if not isinstance(obj, dict):
        raise SpecError(f"figure entry must be an object, got {type(obj).__name__}")
    unknown = set(obj) - {"kind", "out", "series", "log_x", "log_y"}
    if unknown:
        raise SpecError(f"unknown figure keys: {sorted(unknown)}")
    for key in ("kind", "out", "series"):
        if key not in obj:
            raise SpecError(f"figure entry needs {key!r}")
    try:
        kind = FigureKind(str(obj["kind"]).lower())
    except ValueError:
        names = ", ".join(k.value for k in FigureKind)
        raise SpecError(f"unknown figure kind {obj['kind']!r} (one of: {names})") from None
    raw_series = obj["series"]
    if not isinstance(raw_series, list):
        raise SpecError("series must be a list")
    series = []
    for entry in raw_series:
        if not isinstance(entry, dict) or "csv" not in entry or "label" not in entry:
            raise SpecError("each series needs csv and label")
        csv_path = Path(str(entry["csv"]))
        if not csv_path.is_absolute():
            csv_path = spec_dir / csv_path
        series.append(Series(csv_path=str(csv_path), label=str(entry["label"])))
    out_path = Path(str(obj["out"]))
    if not out_path.is_absolute():
        out_path = out_dir / out_path
    try:
        return FigureSpec(
            kind=kind,
            series=tuple(series),
            out_path=str(out_path),
            log_x=bool(obj.get("log_x", False)),
            log_y=None if obj.get("log_y") is None else bool(obj["log_y"]),
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def _load_figures(spec_path: str, out_dir: Path) -> list[FigureSpec]:
    try:
        with open(spec_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from None
    spec_dir = Path(spec_path).resolve().parent
    if isinstance(doc, dict) and "figures" in doc:
        entries = doc["figures"]
        if not isinstance(entries, list):
            raise SpecError("figures must be a list")
    elif isinstance(doc, list):
        entries = doc
    elif isinstance(doc, dict):
        entries = [doc]
    else:
        raise SpecError("spec must be a figure object or a list of them")
    if not entries:
        raise SpecError("spec contains no figures")
    return [_figure_from_dict(entry, spec_dir, out_dir) for entry in entries]


def main(argv: "list[str] | None" = None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description="Render figures from sweep CSVs.")
    parser.add_argument("--spec", required=True, help="JSON figure spec file")
    parser.add_argument("--out", required=True, help="output directory for images")
    args = parser.parse_args(argv)
    out_dir = Path(args.out)
    try:
        specs = _load_figures(args.spec, out_dir)
    except SpecError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 1
    try:
        for spec in specs:
            render(spec)
            print(spec.out_path)
    except SchemaError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
