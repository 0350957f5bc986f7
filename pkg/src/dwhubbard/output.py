"""CSV/JSON writers for run results."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from dwhubbard import __version__

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    name: str
    table: dict[str, np.ndarray]
    summary: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def _plain(value):
    """numpy scalars/arrays → builtin types for YAML/JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _format(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _comment(text: str) -> list[str]:
    return [f"# {line}".rstrip() for line in text.rstrip("\n").splitlines()]


def render_csv(result: RunResult, command: str, config: dict) -> str:
    lines = [f"# dw-hubbard {__version__}", f"# command: {command}", "# config:"]
    lines += _comment(yaml.safe_dump(_plain(config), sort_keys=True, allow_unicode=True))
    if result.summary:
        lines.append("# summary:")
        lines += _comment(yaml.safe_dump(_plain(result.summary), sort_keys=True, allow_unicode=True))
    for warning in result.warnings:
        lines.append(f"# warning: {warning}")

    columns = list(result.table)
    lines.append(",".join(columns))
    values = [np.asarray(result.table[c], dtype=float) for c in columns]
    for row in zip(*values):
        lines.append(",".join(_format(x) for x in row))
    return "\n".join(lines) + "\n"


def render_json(result: RunResult, command: str, config: dict) -> str:
    document = {
        "version": __version__,
        "command": command,
        "config": _plain(config),
        "summary": _plain(result.summary),
        "warnings": list(result.warnings),
        "columns": {name: _plain(np.asarray(values, dtype=float)) for name, values in result.table.items()},
    }
    return json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def write_result(result: RunResult, command: str, config: dict, out_dir: str, fmt: str = "csv") -> Path:
    p = Path(out_dir) / f"{result.name}.{fmt}"
    p.parent.mkdir(parents=True, exist_ok=True)
    text = render_csv(result, command, config) if fmt == "csv" else render_json(result, command, config)
    p.write_text(text, encoding="utf-8")
    logger.info("Wrote %s (%d rows)", p, len(next(iter(result.table.values()), [])))
    return p
