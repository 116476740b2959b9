"""JSON/CSV wire formats and atomic file output.

Operators and vectors::

    {"dim": D, "re": [[...], ...], "im": [[...], ...]}   # row-major
    {"dim": D, "re": [...], "im": [...]}

Floats go through ``repr`` (shortest round-trip form), so a dump followed by
a load reproduces every bit.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

import numpy as np

from .errors import ShapeError


def operator_to_json(op):
    op = np.asarray(op, dtype=complex)
    return {"dim": int(op.shape[0]), "re": op.real.tolist(), "im": op.imag.tolist()}


def operator_from_json(obj):
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    dim = int(obj["dim"])
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ShapeError(f"operator payload is not {dim}x{dim}")
    return re + 1j * im


def vector_to_json(vec):
    vec = np.asarray(vec, dtype=complex)
    return {"dim": int(vec.size), "re": vec.real.tolist(), "im": vec.imag.tolist()}


def vector_from_json(obj):
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != (int(obj["dim"]),) or im.shape != re.shape:
        raise ShapeError("vector payload has inconsistent length")
    return re + 1j * im


def load_operator(path):
    with open(path) as fh:
        return operator_from_json(json.load(fh))


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=False, allow_nan=False) + "\n"


def write_text(path, text):
    """Write ``text`` to ``path`` atomically; ``"-"`` means standard output."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def charfn_csv(z, F):
    """CSV with header ``z_re,z_im,F_re,F_im``; ``.`` decimal separator always."""
    z = np.asarray(z, dtype=complex).ravel()
    F = np.asarray(F, dtype=complex).ravel()
    lines = ["z_re,z_im,F_re,F_im"]
    lines += [f"{a.real!r},{a.imag!r},{b.real!r},{b.imag!r}" for a, b in zip(z.tolist(), F.tolist())]
    return "\n".join(lines) + "\n"


def read_charfn_csv(text):
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    return arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3]
