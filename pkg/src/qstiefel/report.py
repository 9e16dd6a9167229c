"""Deterministic report rendering and angle conventions.

Reports must be byte-identical across runs on the same inputs: keys
are emitted sorted, floats carry 15 significant digits, and nothing
environment-dependent (timestamps, hostnames, versions of anything)
is ever included.  Angles are reported in turns: the fraction of a
full circle, normalized to [0, 1).
"""

from __future__ import annotations

import json as _json
import math

import numpy as np

__all__ = [
    "turns_to_phase",
    "phase_to_turns",
    "turns_distance",
    "render",
]


def turns_to_phase(x: float) -> complex:
    """exp(2πi x) for x in turns."""
    return complex(np.exp(2j * np.pi * float(x)))


def phase_to_turns(z: complex) -> float:
    """Argument of a phase in turns, normalized to [0, 1)."""
    z = complex(z)
    t = math.atan2(z.imag, z.real) / (2.0 * math.pi)
    if t < 0.0:
        t += 1.0
    if t >= 1.0:
        t -= 1.0
    return abs(t)


def turns_distance(x: float, y: float) -> float:
    """Circular distance between two angles in turns."""
    d = abs(float(x) - float(y)) % 1.0
    return min(d, 1.0 - d)


def _fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"reports cannot carry {x}")
    return format(x, ".15g")


def _scalar(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    if isinstance(v, str):
        return _json.dumps(v)
    if v is None:
        return "null"
    raise TypeError(f"cannot render {type(v).__name__} in a report")


def _is_scalar(v) -> bool:
    return v is None or isinstance(
        v, (bool, int, float, str, np.bool_, np.integer, np.floating)
    )


def _render(obj, indent: int) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        for k in obj:
            if not isinstance(k, str):
                raise TypeError(f"report keys must be strings, got {k!r}")
        parts = [
            f'{pad}  {_json.dumps(k)}: {_render(obj[k], indent + 1)}'
            for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        if all(_is_scalar(v) for v in items):
            return "[" + ", ".join(_scalar(v) for v in items) + "]"
        parts = [f"{pad}  {_render(v, indent + 1)}" for v in items]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _scalar(obj)


def render(obj) -> str:
    """Serialize a report to canonical JSON text (trailing newline)."""
    return _render(obj, 0) + "\n"
