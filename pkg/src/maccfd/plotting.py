"""SVG figures rendered from the aggregate CSVs (no recomputation)."""

import csv
from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("convergence", "error", "gain_vs_d", "rate_vs_d", "rate_vs_paths")

_REQUIRED = {
    "convergence": ("scheme", "mode", "sweep_value", "iteration", "fitness_mean"),
    "error": ("scheme", "mode", "sweep_value", "iteration", "error_mean"),
    "gain_vs_d": ("scheme", "mode", "sweep_value", "si_gain_mean", "soi_gain_mean"),
    "rate_vs_d": ("scheme", "mode", "sweep_value", "fitness_mean"),
    "rate_vs_paths": ("scheme", "mode", "sweep_var", "sweep_value", "fitness_mean"),
}


class SchemaError(ValueError):
    pass


def _read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        return columns, list(reader)


def _series(records, key_fields, x_field, y_field):
    series = OrderedDict()
    for rec in records:
        label = "-".join(str(rec[k]) for k in key_fields)
        y = rec[y_field]
        if y in ("", "nan"):
            continue
        series.setdefault(label, []).append((float(rec[x_field]), float(y)))
    return OrderedDict((k, sorted(v)) for k, v in series.items())


def _draw(ax, series, xlabel, ylabel, log_y=False):
    for i, (label, pts) in enumerate(series.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", markersize=3, label=label, gid=f"series{i}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if log_y:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend(fontsize=7)


def emit_plot(csv_path, kind: str, path) -> Path:
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {KINDS}")
    columns, records = _read(csv_path)
    for col in _REQUIRED[kind]:
        if col not in columns:
            raise SchemaError(f"{csv_path}: missing column {col!r} required for {kind} plot")

    plt.rcParams["svg.hashsalt"] = "maccfd"
    if kind == "gain_vs_d":
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        _draw(ax1, _series(records, ("scheme", "mode"), "sweep_value", "si_gain_mean"),
              "region size D / wavelength", "SI channel gain")
        ax1.set_title("SI channel gain")
        _draw(ax2, _series(records, ("scheme", "mode"), "sweep_value", "soi_gain_mean"),
              "region size D / wavelength", "SoI channel gain")
        ax2.set_title("SoI channel gain")
    else:
        fig, ax = plt.subplots(figsize=(5, 3.6))
        if kind == "convergence":
            _draw(ax, _series(records, ("scheme", "mode", "sweep_value"), "iteration", "fitness_mean"),
                  "iteration", "minimum achievable rate (bit/s/Hz)")
        elif kind == "error":
            _draw(ax, _series(records, ("scheme", "mode", "sweep_value"), "iteration", "error_mean"),
                  "iteration", "normalized cumulative error", log_y=True)
        elif kind == "rate_vs_d":
            _draw(ax, _series(records, ("scheme", "mode"), "sweep_value", "fitness_mean"),
                  "region size D / wavelength", "minimum achievable rate (bit/s/Hz)")
        else:
            var = records[0]["sweep_var"] if records else "paths"
            _draw(ax, _series(records, ("scheme", "mode"), "sweep_value", "fitness_mean"),
                  f"number of paths ({var})", "minimum achievable rate (bit/s/Hz)")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
