"""Plain-text correspondence files.

One correspondence per line as whitespace-separated floats; ``#`` starts a
comment and blank lines are ignored.

* registration: ``ax ay az bx by bz``
* shape alignment: ``zx zy Bx By Bz``

Registration can also be given as two PLY clouds plus an index file whose
lines are ``i j`` (0-based vertex indices, source then target).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError
from .ply import load_ply_points

REGISTRATION_COLUMNS = 6
SHAPE_COLUMNS = 5


def _rows(path, columns, convert):
    path = os.fspath(path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) != columns:
                raise ParseError(f"expected {columns} values, got {len(tok)}", path, lineno)
            try:
                rows.append((lineno, [convert(t) for t in tok]))
            except ValueError:
                raise ParseError(f"could not parse '{line}'", path, lineno) from None
    if not rows:
        raise ParseError("no correspondences found", path)
    return rows


def load_correspondences(path, columns):
    """Read an (N, columns) float array.

    Raises:
        ParseError: wrong column count or non-numeric entry, naming the line.
    """
    arr = np.array([row for _, row in _rows(path, columns, float)], dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite value", os.fspath(path))
    return arr


def load_registration(path):
    """``(src, dst)`` arrays from a 6-column correspondence file."""
    arr = load_correspondences(path, REGISTRATION_COLUMNS)
    return arr[:, :3], arr[:, 3:]


def load_shape(path):
    """``(z, B)`` arrays from a 5-column correspondence file."""
    arr = load_correspondences(path, SHAPE_COLUMNS)
    return arr[:, :2], arr[:, 2:]


def load_registration_from_ply(source_ply, target_ply, index_path):
    """Correspondences picked out of two PLY clouds by an ``i j`` index file."""
    src_cloud = load_ply_points(source_ply)
    dst_cloud = load_ply_points(target_ply)
    pairs = _rows(index_path, 2, int)
    for lineno, (i, j) in pairs:
        if not (0 <= i < len(src_cloud) and 0 <= j < len(dst_cloud)):
            raise ParseError(f"index pair ({i}, {j}) out of range", os.fspath(index_path), lineno)
    idx = np.array([row for _, row in pairs])
    return src_cloud[idx[:, 0]], dst_cloud[idx[:, 1]]


def save_correspondences(path, *arrays, header=None):
    """Write column-stacked arrays in the format read by :func:`load_correspondences`."""
    table = np.hstack([np.asarray(a, dtype=float) for a in arrays])
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for row in table:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
