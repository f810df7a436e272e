"""Reader and writer for the TNS v1 text format.

::

    TNS 1
    dims: 2 2 2
    sym                      (optional)
    1.0 0.0 0.0 ...          (row-major values, any whitespace)
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TNSFormatError
from .tensor_core import is_symmetric


@dataclass
class TNSFile:
    tensor: np.ndarray
    sym: bool = False


def parse_tns(text: str, source: str = "<string>") -> TNSFile:
    lines = text.splitlines()
    if not lines or lines[0].split() != ["TNS", "1"]:
        raise TNSFormatError(f"{source}: line 1 must be 'TNS 1'")
    if len(lines) < 2 or not lines[1].startswith("dims:"):
        raise TNSFormatError(f"{source}: line 2 must be 'dims: n_1 ... n_d'")
    try:
        dims = tuple(int(tok) for tok in lines[1][len("dims:"):].split())
    except ValueError as exc:
        raise TNSFormatError(f"{source}: line 2: non-integer dimension ({exc})") from None
    if len(dims) < 2 or any(n < 1 for n in dims):
        raise TNSFormatError(f"{source}: line 2: need at least two positive dimensions, got {dims}")
    body_start = 2
    sym = False
    if len(lines) > 2 and lines[2].strip() == "sym":
        sym = True
        body_start = 3
    tokens = " ".join(lines[body_start:]).split()
    expected = math.prod(dims)
    if len(tokens) != expected:
        raise TNSFormatError(
            f"{source}: expected {expected} values for dims {dims}, found {len(tokens)}"
        )
    try:
        values = np.array([float(tok) for tok in tokens])
    except ValueError as exc:
        raise TNSFormatError(f"{source}: bad value ({exc})") from None
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        idx = tuple(int(i) + 1 for i in np.unravel_index(bad, dims))
        raise TNSFormatError(f"{source}: non-finite value at coordinate {idx}")
    T = values.reshape(dims)
    if sym and not is_symmetric(T, 1e-12 * max(1.0, float(np.abs(T).max()))):
        raise TNSFormatError(f"{source}: flagged 'sym' but the tensor is not symmetric")
    return TNSFile(T, sym)


def format_tns(T: np.ndarray, sym: bool = False) -> str:
    T = np.asarray(T, dtype=float)
    out = io.StringIO()
    out.write("TNS 1\n")
    out.write("dims: " + " ".join(str(n) for n in T.shape) + "\n")
    if sym:
        out.write("sym\n")
    row = T.shape[-1]
    flat = T.ravel()
    for start in range(0, flat.size, row):
        out.write(" ".join(f"{v:.17g}" for v in flat[start:start + row]) + "\n")
    return out.getvalue()


def read_tns(path) -> TNSFile:
    path = Path(path)
    return parse_tns(path.read_text(), source=str(path))


def write_tns(path, T: np.ndarray, sym: bool = False) -> None:
    Path(path).write_text(format_tns(T, sym))
