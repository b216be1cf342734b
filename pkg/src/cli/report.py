"""
Run Reports

Collects check rows, experiment series and an environment snapshot in
memory and writes them once at the end of a run. Nothing time-dependent
is recorded, so identical config and seed give identical files.
"""
import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src import __version__  # noqa: E402
from src.cli.config import RunConfig  # noqa: E402
from src.superop.residuals import Residual  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"
SVG_HASH_SALT = "oisd-lab"


@dataclass
class PlotSpec:
    """Which columns of a series to draw."""

    x: str
    ys: Sequence[str]
    log_y: bool = False
    title: str = ""


@dataclass
class RunReport:
    """Everything a command produced, written in the requested formats."""

    command: str
    config: RunConfig
    records: List[Dict[str, Any]] = field(default_factory=list)
    series: Dict[str, pd.DataFrame] = field(default_factory=dict)
    plots: Dict[str, PlotSpec] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def environment(self) -> Dict[str, Any]:
        return {
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "seed": self.config.seed,
            "config_hash": self.config.config_hash(),
        }

    @property
    def passed(self) -> bool:
        return all(record["passed"] for record in self.records)

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [record for record in self.records if not record["passed"]]

    def add_checks(self, residuals: Sequence[Residual]) -> None:
        self.records.extend(r.as_row() for r in residuals)

    def add_series(self, name: str, frame: pd.DataFrame, plot: Optional[PlotSpec] = None) -> None:
        self.series[name] = frame
        if plot is not None:
            self.plots[name] = plot
        for key, value in frame.attrs.items():
            self.summary[f"{name}.{key}"] = value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "environment": self.environment,
            "config": self.config.model_dump(mode="json", by_alias=True),
            "passed": self.passed,
            "checks": self.records,
            "summary": self.summary,
            "series": {name: frame.to_dict(orient="list") for name, frame in self.series.items()},
        }

    def write(self, out_dir: Optional[Path] = None, formats: Optional[Sequence[str]] = None) -> List[Path]:
        """
        Write the report files.

        Args:
            out_dir: Target directory, default the config's out_dir
            formats: Subset of csv, json, svg; default the config's formats

        Returns:
            Paths written, in a fixed order
        """
        out_dir = Path(out_dir if out_dir is not None else self.config.out_dir)
        formats = list(formats if formats is not None else self.config.formats)
        out_dir.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []
        if "csv" in formats:
            written.extend(self._write_csv(out_dir))
        if "json" in formats:
            path = out_dir / f"{self.command}_report.json"
            path.write_text(json.dumps(self.to_dict(), indent=2, default=_json_default) + "\n", encoding="utf-8")
            written.append(path)
        if "svg" in formats:
            written.extend(self._write_svg(out_dir))
        logger.info(f"Wrote {len(written)} files to {out_dir}")
        return written

    def _write_csv(self, out_dir: Path) -> List[Path]:
        written = []
        if self.records:
            path = out_dir / f"{self.command}_checks.csv"
            pd.DataFrame(self.records).to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
            written.append(path)
        for name, frame in self.series.items():
            path = out_dir / f"{name}.csv"
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
            written.append(path)
        return written

    def _write_svg(self, out_dir: Path) -> List[Path]:
        written = []
        with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
            for name, plot in self.plots.items():
                path = out_dir / f"{name}.svg"
                line_plot(self.series[name], plot, path)
                written.append(path)
        return written


def line_plot(frame: pd.DataFrame, plot: PlotSpec, path: Path) -> None:
    """One line per column in ``plot.ys`` against ``plot.x``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for column in plot.ys:
        values = frame[column].to_numpy(dtype=float)
        if plot.log_y:
            values = np.where(values > 0, values, np.nan)
        ax.plot(frame[plot.x], values, marker="o", markersize=3, label=column)
    if plot.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(plot.x)
    ax.set_title(plot.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialize {type(value).__name__}")


__all__ = ["RunReport", "PlotSpec", "line_plot", "FLOAT_FORMAT"]
