"""Byte-stable JSON emission for pipeline artifacts.

Every float is rendered with exactly six fractional digits (round-half-even,
which is what Python's float formatting does), so re-running a command on the
same inputs produces byte-identical files and artifacts diff cleanly across
platforms.
"""

import json
import math


def format_float(x: float) -> str:
    """Fixed-point rendering with at least 6 fractional digits, extended
    just far enough that parsing the string recovers the exact float."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in artifact: {x!r}")
    for digits in (6, 9, 12, 17):
        s = f"{x:.{digits}f}"
        if float(s) == x:
            break
    else:
        s = repr(x)  # tiny magnitudes need more than 17 fractional digits
    # avoid the confusing "-0.000000"
    if float(s) == 0.0 and s.startswith("-"):
        s = s[1:]
    return s


def _emit(obj, out, indent):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f'{pad}  {json.dumps(str(k))}: ')
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} in artifact")


def dumps(obj) -> str:
    out: list[str] = []
    _emit(obj, out, 0)
    out.append("\n")
    return "".join(out)


def dump(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
