"""Canonical JSON and CSV output.

All file output flows through here so that identical inputs produce
byte-identical files: keys are sorted, floats are rendered with 17
significant digits, and no timestamps or environment data are embedded.
"""

import numpy as np

SCHEMA_VERSION = "codimctrl-1"


def format_float(x):
    """Render a float with 17 significant digits (round-trip exact)."""
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(float(x), ".17g")


def _canonical(obj, parts):
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(float(obj)))
    elif isinstance(obj, str):
        import json
        parts.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _canonical(obj.tolist(), parts)
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(", ")
            _canonical(item, parts)
        parts.append("]")
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                parts.append(", ")
            import json
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _canonical(obj[key], parts)
        parts.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_canonical_json(obj):
    """Deterministic JSON text: sorted keys, fixed float format."""
    parts = []
    _canonical(obj, parts)
    parts.append("\n")
    return "".join(parts)


def write_json(path, obj):
    text = to_canonical_json(obj)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def write_csv(path, header, rows):
    """CSV with the same float formatting as the JSON route."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text
