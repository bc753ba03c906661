"""Figure rendering for simulator results tables.

Consumes only the public results schema
(scheme,snr_db,sigma_e2,L,alpha_c,esr,std_err) and draws one error-bar curve
per scheme against a chosen grid axis. Three presets reproduce the standard
views: ESR versus SNR, ESR versus CSIT error variance, and ESR versus the
number of ordering branches.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__version__ = "0.1.0"

AXIS_LABELS = {
    "snr_db": "SNR (dB)",
    "sigma_e2": "CSIT error variance sigma_e^2",
    "L": "number of ordering branches L",
}
_NUMERIC = ("snr_db", "sigma_e2", "L", "alpha_c", "esr", "std_err")


class MissingColumn(ValueError):
    """The results file lacks a column the figure needs."""


class EmptySelection(ValueError):
    """No rows match the figure specification."""


@dataclass(frozen=True)
class FigureSpec:
    """What to plot: the x axis, fixed values for the other grid dimensions,
    and the schemes drawn as separate series."""

    x_axis: str
    filters: dict = field(default_factory=dict)
    series: tuple[str, ...] = ()
    output: str = "figure.png"
    image_format: str | None = None   # inferred from the output suffix if None

    def __post_init__(self):
        if self.x_axis not in AXIS_LABELS:
            raise ValueError(f"x_axis must be one of {sorted(AXIS_LABELS)}")


PRESETS = {
    "fig1": FigureSpec(
        x_axis="snr_db",
        filters={"sigma_e2": 0.15, "L": 1},
        series=("linearZF", "RS-linearZF", "RS-cTHP", "RS-dTHP"),
    ),
    "fig2": FigureSpec(
        x_axis="sigma_e2",
        filters={"snr_db": 20.0, "L": 1},
        series=("linearZF", "RS-linearZF", "RS-cTHP", "RS-dTHP"),
    ),
    "fig3": FigureSpec(
        x_axis="L",
        filters={"snr_db": 20.0, "sigma_e2": 0.15},
        series=("MB-RS-cTHP", "MB-RS-dTHP"),
    ),
}


def preset_spec(name: str, output: str) -> FigureSpec:
    base = PRESETS[name]
    return FigureSpec(base.x_axis, dict(base.filters), base.series, output)


def read_results(path) -> list[dict]:
    """Parse a results table into row dicts with numeric grid columns."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MissingColumn("results file has no header")
        for needed in ("scheme",) + _NUMERIC:
            if needed not in reader.fieldnames:
                raise MissingColumn(f"results file lacks column {needed!r}")
        rows = []
        for raw in reader:
            row = {"scheme": raw["scheme"]}
            for col in _NUMERIC:
                row[col] = float(raw[col])
            rows.append(row)
    return rows


def select_series(rows, spec: FigureSpec) -> dict[str, tuple[list, list, list]]:
    """Rows matching the spec, grouped per scheme and sorted along the x axis.

    Returns scheme -> (x, esr, std_err); schemes with no matching rows are
    dropped, and an entirely empty selection raises EmptySelection.
    """
    series: dict[str, tuple[list, list, list]] = {}
    for scheme in spec.series:
        matched = [
            r for r in rows
            if r["scheme"] == scheme
            and all(r[col] == float(val) for col, val in spec.filters.items())
        ]
        matched.sort(key=lambda r: r[spec.x_axis])
        if matched:
            series[scheme] = ([r[spec.x_axis] for r in matched],
                              [r["esr"] for r in matched],
                              [r["std_err"] for r in matched])
    if not series:
        raise EmptySelection("no rows match the requested schemes and filters")
    return series


def build_figure(rows, spec: FigureSpec):
    """Assemble the matplotlib figure: one error-bar line per scheme."""
    series = select_series(rows, spec)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for scheme, (x, y, yerr) in series.items():
        ax.errorbar(x, y, yerr=yerr, marker="o", capsize=3, label=scheme)
    ax.set_xlabel(AXIS_LABELS[spec.x_axis])
    ax.set_ylabel("ESR (bits/s/Hz)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fixed = ", ".join(f"{col}={val:g}" for col, val in sorted(spec.filters.items()))
    ax.set_title(f"Ergodic sum-rate ({fixed})")
    fig.tight_layout()
    return fig


def render(results_path, spec: FigureSpec) -> Path:
    """Render the figure for a results file and write it to spec.output."""
    rows = read_results(results_path)
    fig = build_figure(rows, spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format=spec.image_format, dpi=150)
    plt.close(fig)
    return out
