"""The six figure kinds and their curve styles.

Rendering is pure with respect to the CSV: every plotted point comes
straight from the parsed table, with no computation beyond axis labeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import Table

KINDS = ("slope", "se", "rate-thz", "rate-rayleigh", "null-thz", "null-rayleigh")

# (column, label, color, linestyle) for the fixed-layout kinds
_RATE_CURVES = (
    ("rate_noint", "No interference", "black", "solid"),
    ("rate_iui", "IUI only", "blue", "dashed"),
    ("rate_iqi", "IQI only", "red", "solid"),
    ("rate_iqi_iui", "IQI + IUI", "green", "dashed"),
)
_NULL_CURVES = (
    ("rate_fullband", "Full band", "black", "solid"),
    ("rate_nulled", "Subcarrier nulling", "red", "dashed"),
)
# cycled over the spectral-efficiency amplitude levels, worst first style
_SE_STYLES = (
    ("black", "solid"),
    ("blue", "dashed"),
    ("red", "dotted"),
    ("green", "dashdot"),
)


@dataclass(frozen=True)
class FigureSpec:
    """Axis layout for one figure kind."""

    kind: str
    x_column: str
    x_label: str
    y_label: str
    title: str
    band: str | None = None  # required scenario band, if any


_SPECS = {
    "slope": FigureSpec(
        "slope", "g", "Amplitude imbalance g", "Wideband slope (bits/s/Hz per 3 dB)",
        "Wideband slope vs. amplitude imbalance",
    ),
    "se": FigureSpec(
        "se", "ebn0_db", "Eb/N0 (dB)", "Spectral efficiency (bits/s/Hz)",
        "Spectral efficiency vs. Eb/N0",
    ),
    "rate-thz": FigureSpec(
        "rate-thz", "snr_db", "SNR (dB)", "Sum rate (bits/s/Hz)",
        "Impact of IQI on rate, THz band", band="thz",
    ),
    "rate-rayleigh": FigureSpec(
        "rate-rayleigh", "snr_db", "SNR (dB)", "Sum rate (bits/s/Hz)",
        "Impact of IQI on rate, Rayleigh fading", band="rayleigh",
    ),
    "null-thz": FigureSpec(
        "null-thz", "snr_db", "SNR (dB)", "Sum rate (bits/s/Hz)",
        "Subcarrier nulling vs. full band, THz band", band="thz",
    ),
    "null-rayleigh": FigureSpec(
        "null-rayleigh", "snr_db", "SNR (dB)", "Sum rate (bits/s/Hz)",
        "Subcarrier nulling vs. full band, Rayleigh fading", band="rayleigh",
    ),
}


def _se_curves(table: Table):
    """Dynamic curve set: one 'se_g<level>' column per amplitude level."""
    curves = []
    for i, col in enumerate(c for c in table.columns if c.startswith("se_g")):
        color, style = _SE_STYLES[i % len(_SE_STYLES)]
        curves.append((col, f"g = {col[len('se_g'):]}", color, style))
    if not curves:
        raise ValueError(f"{table.path}: no 'se_g*' columns found")
    return curves


def curve_set(kind: str, table: Table):
    """The (column, label, color, linestyle) tuples plotted for this kind."""
    if kind == "se":
        return _se_curves(table)
    if kind.startswith("rate-"):
        return _RATE_CURVES
    if kind.startswith("null-"):
        return _NULL_CURVES
    return (("slope_mean", "Wideband slope", "black", "solid"),)


def render(kind: str, table: Table) -> plt.Figure:
    """Build the figure for one table; raises ValueError on any mismatch."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind '{kind}'; expected one of {KINDS}")
    spec = _SPECS[kind]
    if spec.band is not None and table.band != spec.band:
        raise ValueError(
            f"{table.path}: kind '{kind}' expects band '{spec.band}', "
            f"CSV was produced for band '{table.band}'"
        )
    curves = curve_set(kind, table)
    x = table.column(spec.x_column)
    series = [(table.column(col), label, color, style)
              for col, label, color, style in curves]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for y, label, color, style in series:
        ax.plot(x, y, label=label, color=color, linestyle=style)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    # scenario echo so the figure is traceable to its exact input
    fig.text(
        0.01, 0.01,
        f"seed={table.seed} scenario={_compact_scenario(table.scenario)}",
        fontsize=4, family="monospace", va="bottom",
    )
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig


def _compact_scenario(scenario: dict) -> str:
    import json

    text = json.dumps(scenario, sort_keys=True, separators=(",", ":"))
    return text if len(text) <= 700 else text[:697] + "..."


def save(fig: plt.Figure, out_path: str) -> None:
    """Write the figure; only PNG and PDF outputs are supported."""
    ext = out_path.rsplit(".", 1)[-1].lower() if "." in out_path else ""
    if ext not in ("png", "pdf"):
        raise ValueError(f"output '{out_path}' must end in .png or .pdf")
    fig.savefig(out_path, format=ext, dpi=200)
    plt.close(fig)
