"""Curve records and their CSV serialisation."""
import logging
from typing import Any, Dict, Iterable, List

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from . import __version__

logger = logging.getLogger("cellcap.curves")

CSV_COLUMNS = ["x", "y", "series"]


class CurveData(BaseModel):
    """One (x, y) curve with the parameters that produced it."""

    x: List[float]
    y: List[float]
    series: str
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("x", "y", mode="before")
    @classmethod
    def to_list(cls, v):
        if isinstance(v, np.ndarray):
            return v.astype(float).tolist()
        return v

    @model_validator(mode="after")
    def same_length(self):
        if len(self.x) != len(self.y):
            raise ValueError(f"x and y lengths differ ({len(self.x)} != {len(self.y)})")
        return self


def format_value(value: Any) -> str:
    """Stable text form for CSV comment lines."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def curves_to_frame(curves: Iterable[CurveData]) -> pd.DataFrame:
    frames = [
        pd.DataFrame({"x": c.x, "y": c.y, "series": c.series})
        for c in curves
    ]
    if not frames:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return pd.concat(frames, ignore_index=True)[CSV_COLUMNS]


def write_curves_csv(curves: List[CurveData], path: str, params: Dict[str, Any]) -> None:
    """
    Write curves as `# key=value` comment lines followed by an x,y,series table.

    Args:
        curves: Curves in output order
        path: Destination file
        params: Resolved parameter set recorded in the comment block
    """
    header = dict(params)
    header["version"] = __version__
    frame = curves_to_frame(curves)

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key in sorted(header):
            f.write(f"# {key}={format_value(header[key])}\n")
        frame.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")
    logger.info(f"Wrote {len(curves)} curve(s), {len(frame)} rows to {path}")


def read_curves_csv(path: str) -> pd.DataFrame:
    """Read a curve CSV back, skipping the comment block."""
    return pd.read_csv(path, comment="#", float_precision="round_trip")
