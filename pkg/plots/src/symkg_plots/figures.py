"""Render figures from symkg experiment CSV files.

Three figure kinds mirror the experiment outputs:

  orders      log-log error vs step size, with dashed slope guide lines
  efficiency  log-log wall-clock seconds vs error, one curve per scheme
  drift       relative energy error vs time, linear axes

Rendering is a pure function of the CSV contents; schema mismatches fail
with a descriptive error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("orders", "efficiency", "drift")
_EXPECTED_HEADER = {
    "orders": "tau,err,seconds",
    "efficiency": "tau,err,seconds",
    "drift": "time,energy,rel_err",
}


class SchemaError(ValueError):
    """CSV header or shape does not match the experiment output format."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    out: str
    slopes: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def load_csv(path: str | Path, kind: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    lines = path.read_text().strip().splitlines()
    expected = _EXPECTED_HEADER[kind]
    if not lines or lines[0].strip() != expected:
        got = lines[0].strip() if lines else "<empty file>"
        raise SchemaError(
            f"{path}: header {got!r} does not match {expected!r} for kind {kind!r}"
        )
    if len(lines) == 1:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(x) for x in row.split(",")] for row in lines[1:]])
    except ValueError as exc:
        raise SchemaError(f"{path}: malformed data row ({exc})") from None
    if data.shape[1] != 3:
        raise SchemaError(f"{path}: expected 3 columns, got {data.shape[1]}")
    return data


def series_label(path: str | Path) -> str:
    # harness files are named <experiment>_<scheme>.csv
    stem = Path(path).stem
    return stem.split("_")[-1]


def guide_lines(taus: np.ndarray, errs: np.ndarray, slopes) -> list[tuple[float, np.ndarray]]:
    """Dashed reference lines anchored at the coarsest data point."""
    anchor_tau = taus[0]
    anchor_err = errs[0]
    return [(s, anchor_err * (taus / anchor_tau) ** s) for s in slopes]


def render(spec: FigureSpec) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if spec.kind == "orders":
        first = None
        for path in spec.inputs:
            data = load_csv(path, spec.kind)
            order = np.argsort(-data[:, 0])
            taus, errs = data[order, 0], data[order, 1]
            if first is None:
                first = (taus, errs)
            ax.loglog(taus, errs, marker="o", label=series_label(path))
        for slope, values in guide_lines(*first, spec.slopes):
            ax.loglog(first[0], values, "k--", linewidth=0.8,
                      label=f"slope {slope:g}")
        ax.set_xlabel("step size")
        ax.set_ylabel("relative error at final time")
    elif spec.kind == "efficiency":
        for path in spec.inputs:
            data = load_csv(path, spec.kind)
            order = np.argsort(data[:, 1])
            ax.loglog(data[order, 1], data[order, 2], marker="s",
                      label=series_label(path))
        ax.set_xlabel("relative error at final time")
        ax.set_ylabel("wall-clock seconds")
    else:
        for path in spec.inputs:
            data = load_csv(path, spec.kind)
            ax.plot(data[:, 0], data[:, 2], label=series_label(path))
        ax.set_xlabel("time")
        ax.set_ylabel("relative energy error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
