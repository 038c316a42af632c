"""Report payloads: JSON-safe conversion and plain-text rendering."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

import numpy as np

from .gaussian import GaussianRational
from .poly import PolarizedPoly

SCHEMA = "crdegen/1"


def scalar(x) -> str:
    """Stable text for a number: exact values as ``a+b*i``, floats via repr."""
    if isinstance(x, GaussianRational):
        return str(x)
    if isinstance(x, (int, Fraction)):
        return str(x)
    c = complex(x)
    re_, im_ = c.real + 0.0, c.imag + 0.0  # drop negative zeros
    if im_ == 0:
        return repr(re_)
    if re_ == 0:
        return f"{im_!r}*i"
    return f"{re_!r}{'+' if im_ >= 0 else '-'}{abs(im_)!r}*i"


def matrix(m) -> list[list[str]]:
    return [[scalar(x) for x in row] for row in np.asarray(m, dtype=object)]


def vector(v) -> list[str]:
    return [scalar(x) for x in v]


def poly(p: PolarizedPoly, names) -> str:
    return p.format(names)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def to_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['input']['file']}"]
    _render(report["result"], lines, "")
    return "\n".join(lines) + "\n"


def _render(value, lines: list[str], indent: str, key: str | None = None):
    label = f"{indent}{key}: " if key is not None else indent
    if isinstance(value, dict):
        if key is not None:
            lines.append(f"{indent}{key}:")
            indent += "  "
        for k, v in value.items():
            _render(v, lines, indent, k)
    elif isinstance(value, list) and value and all(isinstance(r, list) for r in value):
        lines.append(f"{label.rstrip()}")
        for row in value:
            lines.append(f"{indent}  [{', '.join(str(x) for x in row)}]")
    elif isinstance(value, list) and any(isinstance(r, dict) for r in value):
        lines.append(f"{label.rstrip()}")
        for item in value:
            _render(item, lines, indent + "  ")
    elif isinstance(value, list):
        lines.append(f"{label}[{', '.join(str(x) for x in value)}]")
    else:
        lines.append(f"{label}{value}")
