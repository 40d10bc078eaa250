"""Minimal ASCII PLY reader for vertex positions."""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError, UnsupportedFormat


def load_ply_points(path) -> np.ndarray:
    """Read the ``x y z`` vertex coordinates of an ASCII PLY file.

    Only the ``vertex`` element is read; other per-vertex properties
    (normals, colors) are skipped, as is anything after the vertex block.
    List properties on the vertex element are not supported.

    Returns:
        (N, 3) float array in file order.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        UnsupportedFormat: for binary PLY.
        ParseError: malformed header or vertex line, with its line number.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    # binary bodies need not decode, so only the header is decoded up front
    head_end = raw.find(b"end_header")
    header_bytes = raw if head_end < 0 else raw[: head_end + len(b"end_header")]
    try:
        header_text = header_bytes.decode("ascii")
    except UnicodeDecodeError:
        raise ParseError("header is not ASCII", path) from None
    lines = header_text.splitlines()

    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", path, 1)

    n_vertices = None
    vertex_props = []
    current = None
    header_lines = 0
    saw_format = False
    for lineno, line in enumerate(lines[1:], start=2):
        tok = line.split()
        header_lines = lineno
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) != 3:
                raise ParseError("bad format line", path, lineno)
            if tok[1] != "ascii":
                raise UnsupportedFormat(f"unsupported PLY format '{tok[1]}'", path, lineno)
            if tok[2] != "1.0":
                raise UnsupportedFormat(f"unsupported PLY version '{tok[2]}'", path, lineno)
            saw_format = True
        elif tok[0] == "element":
            if len(tok) != 3:
                raise ParseError("bad element line", path, lineno)
            current = tok[1]
            if current == "vertex":
                if n_vertices is not None:
                    raise ParseError("duplicate vertex element", path, lineno)
                try:
                    n_vertices = int(tok[2])
                except ValueError:
                    raise ParseError(f"bad vertex count '{tok[2]}'", path, lineno) from None
                if n_vertices < 0:
                    raise ParseError("negative vertex count", path, lineno)
            elif n_vertices is None:
                raise ParseError("elements before 'vertex' are not supported", path, lineno)
        elif tok[0] == "property":
            if current is None:
                raise ParseError("property outside an element", path, lineno)
            if current == "vertex":
                if tok[1] == "list":
                    raise ParseError("list properties on vertices are not supported", path, lineno)
                if len(tok) != 3:
                    raise ParseError("bad property line", path, lineno)
                vertex_props.append(tok[2])
        elif tok[0] == "end_header":
            break
        else:
            raise ParseError(f"unexpected header keyword '{tok[0]}'", path, lineno)
    else:
        raise ParseError("missing end_header", path, len(lines))

    if not saw_format:
        raise ParseError("missing format line", path, header_lines)
    if n_vertices is None:
        raise ParseError("no vertex element", path, header_lines)
    try:
        cols = [vertex_props.index(name) for name in ("x", "y", "z")]
    except ValueError:
        raise ParseError("vertex element lacks x, y, z properties", path, header_lines) from None

    body = raw[head_end + len(b"end_header"):].decode("ascii", errors="replace").splitlines()
    # the remainder of the end_header line itself is body[0]
    body_start = header_lines + 1
    records = body[1:]
    points = np.empty((n_vertices, 3))
    k = 0
    for offset, line in enumerate(records):
        if k == n_vertices:
            break
        tok = line.split()
        if not tok:
            continue
        lineno = body_start + offset
        if len(tok) < len(vertex_props):
            raise ParseError(f"expected {len(vertex_props)} values, got {len(tok)}", path, lineno)
        try:
            points[k] = [float(tok[c]) for c in cols]
        except ValueError:
            raise ParseError("non-numeric vertex coordinate", path, lineno) from None
        k += 1
    if k < n_vertices:
        raise ParseError(f"expected {n_vertices} vertices, found {k}", path, body_start + len(records) - 1)
    return points


def save_ply_points(path, points):
    """Write points as a minimal ASCII PLY (``x y z`` only)."""
    points = np.asarray(points, dtype=float)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(points)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\nend_header\n")
        for p in points:
            fh.write(" ".join(repr(float(x)) for x in p) + "\n")
