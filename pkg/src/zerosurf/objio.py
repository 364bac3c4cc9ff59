"""Minimal ASCII OBJ reading and writing (``v`` and ``f`` records only)."""

import numpy as np

from zerosurf.errors import ZeroSurfError


class ObjFormatError(ZeroSurfError, ValueError):
    pass


def format_float(x):
    # 17 significant digits round-trip every double exactly
    return f"{float(x):.17g}"


def dumps_obj(vertices, triangles, comment=None):
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    for v in np.asarray(vertices, dtype=float):
        lines.append("v " + " ".join(format_float(c) for c in v))
    for f in np.asarray(triangles, dtype=int):
        lines.append("f " + " ".join(str(int(i) + 1) for i in f))
    return "\n".join(lines) + "\n"


def write_obj(path, vertices, triangles, comment=None):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_obj(vertices, triangles, comment))


def loads_obj(text):
    """Parse OBJ text into ``(vertices, triangles)`` with 0-based indices.

    Polygonal faces are fan-triangulated. Texture/normal indices
    (``f 1/2/3``) are ignored.
    """
    vertices = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        tag = parts[0]
        try:
            if tag == "v":
                vertices.append([float(c) for c in parts[1:4]])
                if len(vertices[-1]) != 3:
                    raise ValueError("vertex needs 3 coordinates")
            elif tag == "f":
                idx = []
                for item in parts[1:]:
                    i = int(item.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
        except ValueError as exc:
            raise ObjFormatError(f"line {lineno}: {exc}") from None
    v = np.array(vertices, dtype=float).reshape(-1, 3)
    f = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if f.size and (f.min() < 0 or f.max() >= len(v)):
        raise ObjFormatError("face index out of range")
    return v, f


def read_obj(path):
    with open(path, encoding="ascii") as fh:
        return loads_obj(fh.read())
