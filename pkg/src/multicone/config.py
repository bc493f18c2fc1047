"""Job configuration loading and validation for the command line tools.

Config files are JSON. Matrices are written as row-major 4-arrays so any
language can emit them; 2x2 nested lists are also accepted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .semigroup import CapExceeded, MatrixTuple, SingularMatrix, WORD_CAP

DET_EPS = 1e-12


class ParseError(ValueError):
    """Config file is malformed; the message names the offending field."""

    def __init__(self, message, fieldname=None):
        super().__init__(message)
        self.fieldname = fieldname


@dataclass(frozen=True)
class JobConfig:
    matrices: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    s: float = 1.0
    enum_depth: int = 10
    cylinder_depth: int = 6
    horizon: int = 20
    seed: int = 0
    scan_depth: int = 6
    cloud_depth: int = 5
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.matrices)

    def tuple(self) -> MatrixTuple:
        return MatrixTuple([np.array(m, dtype=float) for m in self.matrices])

    def to_dict(self) -> dict:
        return {
            "matrices": [[m[0][0], m[0][1], m[1][0], m[1][1]]
                         for m in self.matrices],
            "s": self.s,
            "enum_depth": self.enum_depth,
            "cylinder_depth": self.cylinder_depth,
            "horizon": self.horizon,
            "seed": self.seed,
            "scan_depth": self.scan_depth,
            "cloud_depth": self.cloud_depth,
            "label": self.label,
        }

    def override(self, **kwargs) -> "JobConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)


def _as_matrix(entry, index):
    if isinstance(entry, (list, tuple)) and len(entry) == 4 and \
            all(isinstance(x, (int, float)) for x in entry):
        rows = ((float(entry[0]), float(entry[1])),
                (float(entry[2]), float(entry[3])))
    elif isinstance(entry, (list, tuple)) and len(entry) == 2 and \
            all(isinstance(r, (list, tuple)) and len(r) == 2 for r in entry):
        rows = ((float(entry[0][0]), float(entry[0][1])),
                (float(entry[1][0]), float(entry[1][1])))
    else:
        raise ParseError(
            f"matrices[{index}] must be a row-major 4-array or a 2x2 array",
            "matrices")
    return rows


def validate(raw: dict) -> JobConfig:
    if "matrices" not in raw or not isinstance(raw["matrices"], list) \
            or not raw["matrices"]:
        raise ParseError("matrices must be a nonempty list", "matrices")
    matrices = tuple(_as_matrix(m, i) for i, m in enumerate(raw["matrices"]))
    for i, m in enumerate(matrices):
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        scale = max(sum(x * x for row in m for x in row), 1e-300)
        if abs(det) <= DET_EPS * scale:
            err = SingularMatrix(f"matrix {i} is singular (det {det:g})")
            err.index = i
            raise err
    cfg = JobConfig(matrices)
    known = {"s": float, "enum_depth": int, "cylinder_depth": int,
             "horizon": int, "seed": int, "scan_depth": int,
             "cloud_depth": int, "label": str}
    overrides = {}
    for key, conv in known.items():
        if key in raw:
            try:
                overrides[key] = conv(raw[key])
            except (TypeError, ValueError):
                raise ParseError(f"{key} must be of type {conv.__name__}", key)
    cfg = cfg.override(**overrides)
    if not (cfg.s > 0.0) or not math.isfinite(cfg.s):
        raise ParseError("s must be > 0", "s")
    for key in ("enum_depth", "cylinder_depth", "horizon"):
        if getattr(cfg, key) < 1:
            raise ParseError(f"{key} must be >= 1", key)
    if cfg.n ** cfg.enum_depth > WORD_CAP:
        feasible = int(math.log(WORD_CAP) / math.log(max(cfg.n, 2)))
        raise CapExceeded(
            f"enum_depth {cfg.enum_depth} exceeds the word cap for {cfg.n} "
            f"generators (max {feasible})", feasible)
    if cfg.n ** cfg.cylinder_depth > 100_000:
        feasible = int(math.log(100_000) / math.log(max(cfg.n, 2)))
        raise CapExceeded(
            f"cylinder_depth {cfg.cylinder_depth} is too deep for {cfg.n} "
            f"generators (max {feasible})", feasible)
    unknown = set(raw) - set(known) - {"matrices"}
    if unknown:
        raise ParseError(f"unknown fields: {sorted(unknown)}", sorted(unknown)[0])
    return cfg


def load_config(path) -> JobConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ParseError("config root must be an object")
    return validate(raw)


# Demonstration fixtures used by the example subcommand and the test suite.
DEMO_POSITIVE_PAIR = (((2.0, 1.0), (1.0, 1.0)), ((2.0, 1.0), (1.0, 2.0)))
DEMO_PAIR_WITH_IDENTITY = DEMO_POSITIVE_PAIR + (((1.0, 0.0), (0.0, 1.0)),)
DEMO_DIAGONAL_SWAP = (((1.0, 0.0), (0.0, 2.0)), ((0.0, 1.0), (1.0, 0.0)))
DEMO_TRIANGULAR = (((2.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 3.0)))


def demo_config(matrices, label) -> JobConfig:
    return JobConfig(matrices=matrices, label=label)
