"""Render the three standard figures from experiment CSV files.

    rate_vs_snr       one-bit vs full-CSI weighted rate (simulate.csv)
    thresholds_vs_snr per-user threshold curves (optimize.csv); per-user
                      rate curves are added when rate_* columns are present
    peak_comparison   brute-force vs random vs heuristic region choice
                      (compare_peaks.csv)

Pure file-in/file-out: identical input yields an identical image.

Usage:
    onebit-render <kind> <input.csv> <output.png>
    python -m onebit_plots.render <kind> <input.csv> <output.png>
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["FigureSpec", "SchemaError", "render", "main"]

FIGURE_KINDS = ("rate_vs_snr", "thresholds_vs_snr", "peak_comparison")

# fixed metadata keeps the PNG bytes reproducible across reruns
_PNG_METADATA = {"Software": "onebit-plots"}


class SchemaError(ValueError):
    """The input CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_kind: str
    output_image: str

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.figure_kind!r}; expected one of {FIGURE_KINDS}"
            )


def _load_csv(path: str) -> tuple[list[str], list[dict[str, float]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if not header:
                raise SchemaError(f"{path}: empty CSV, no header row")
            rows = [{k: float(v) for k, v in row.items() if k != "region"} for row in reader]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return list(header), rows


def _require_columns(header: list[str], needed: list[str], path: str) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required column(s): {', '.join(missing)}")


def _series(rows: list[dict[str, float]], column: str) -> list[float]:
    return [row[column] for row in rows]


def render(spec: FigureSpec) -> None:
    """Draw the figure and write it to ``spec.output_image``."""
    header, rows = _load_csv(spec.input_csv)
    _require_columns(header, ["snr_db"], spec.input_csv)
    snr = _series(rows, "snr_db")

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if spec.figure_kind == "rate_vs_snr":
        _require_columns(header, ["phi_mc", "phi_full_csi"], spec.input_csv)
        ax.plot(snr, _series(rows, "phi_full_csi"), marker="s", label="full CSI")
        ax.plot(snr, _series(rows, "phi_mc"), marker="o", label="one-bit feedback")
        if "phi_analytic" in header:
            ax.plot(snr, _series(rows, "phi_analytic"), linestyle="--", label="one-bit analytic")
        ax.set_ylabel("average weighted rate (bits/s/Hz)")
        ax.set_title("One-bit feedback vs full-CSI scheduling")
    elif spec.figure_kind == "thresholds_vs_snr":
        thr_cols = [c for c in header if c.startswith("r_")]
        if not thr_cols:
            raise SchemaError(f"{spec.input_csv}: missing required column(s): r_1..r_M")
        for col in thr_cols:
            ax.plot(snr, _series(rows, col), marker="o", label=f"threshold user {col[2:]}")
        for col in (c for c in header if c.startswith("rate_")):
            ax.plot(snr, _series(rows, col), marker="x", linestyle="--", label=f"rate user {col[5:]}")
        ax.set_ylabel("rate (bits/s/Hz)")
        ax.set_title("Optimized thresholds vs average SNR")
    else:  # peak_comparison
        _require_columns(
            header, ["phi_bruteforce", "phi_random", "phi_heuristic"], spec.input_csv
        )
        ax.plot(snr, _series(rows, "phi_bruteforce"), marker="o", label="brute force")
        ax.plot(snr, _series(rows, "phi_random"), marker="s", label="random region (worst draw)")
        ax.plot(snr, _series(rows, "phi_heuristic"), marker="^", label="heuristic region")
        ax.set_ylabel("average weighted rate (bits/s/Hz)")
        ax.set_title("Peak-selection strategies")

    ax.set_xlabel("average SNR (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print(
            "usage: onebit-render <rate_vs_snr|thresholds_vs_snr|peak_comparison>"
            " <input.csv> <output.png>",
            file=sys.stderr,
        )
        return 2
    kind, input_csv, output_image = argv
    try:
        render(FigureSpec(input_csv=input_csv, figure_kind=kind, output_image=output_image))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {output_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
