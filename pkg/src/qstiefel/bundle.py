"""Binary bundle files for generator rows.

Layout:

    line 1:  ASCII magic "QSTIEFEL-BUNDLE 1\\n"
    line 2:  one JSON object + "\\n" with keys
             n, m, q, dims, a (or null), t_turns (or null)
    then:    m * n dense matrices, one per grid entry, rows ascending
             (n-m+1 .. n) and columns 1..n within each row.  Each
             matrix is row-major complex128: little-endian float64
             (real, imaginary) pairs, total^2 entries.

Bundles are dense on disk by design; write them for spaces that fit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import BundleFormatError
from .fock import FactorShape, TruncOp
from .report import phase_to_turns, turns_to_phase
from .stiefel import StiefelGenerators, StiefelParams

__all__ = ["write_bundle", "read_bundle", "MAGIC"]

MAGIC = b"QSTIEFEL-BUNDLE 1\n"


def write_bundle(gens: StiefelGenerators, path) -> None:
    """Write generator rows (and build parameters, if known) to a file."""
    path = Path(path)
    head = {
        "n": gens.n,
        "m": gens.m,
        "q": gens.q,
        "dims": list(gens.shape.dims),
        "a": list(gens.meta.a) if gens.meta is not None else None,
        "t_turns": [phase_to_turns(z) for z in gens.meta.t]
        if gens.meta is not None
        else None,
    }
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(head, sort_keys=True).encode("ascii") + b"\n")
        for i in range(gens.n - gens.m + 1, gens.n + 1):
            for k in range(1, gens.n + 1):
                block = gens.w(i, k).dense().astype("<c16", copy=False)
                fh.write(np.ascontiguousarray(block).tobytes())


def read_bundle(path) -> StiefelGenerators:
    """Read a bundle back into generator rows."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.readline()
        if magic != MAGIC:
            raise BundleFormatError(f"{path}: not a bundle file (bad magic)")
        try:
            head = json.loads(fh.readline().decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BundleFormatError(f"{path}: unreadable header ({exc})") from exc
        try:
            n = int(head["n"])
            m = int(head["m"])
            q = float(head["q"])
            dims = tuple(int(d) for d in head["dims"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BundleFormatError(f"{path}: bad header fields ({exc})") from exc
        shape = FactorShape(dims)
        total = shape.total
        need = 16 * total * total
        rows: dict[int, list[TruncOp]] = {}
        for i in range(n - m + 1, n + 1):
            ops = []
            for k in range(1, n + 1):
                raw = fh.read(need)
                if len(raw) != need:
                    raise BundleFormatError(
                        f"{path}: truncated at entry ({i}, {k}): "
                        f"got {len(raw)} of {need} bytes"
                    )
                mat = np.frombuffer(raw, dtype="<c16").reshape(total, total)
                ops.append(TruncOp(sp.csr_matrix(mat), shape))
            rows[i] = ops
        if fh.read(1):
            raise BundleFormatError(f"{path}: trailing bytes after last entry")
    meta = None
    if head.get("a") is not None and head.get("t_turns") is not None:
        try:
            meta = StiefelParams(
                n,
                m,
                q,
                tuple(int(x) for x in head["a"]),
                tuple(turns_to_phase(x) for x in head["t_turns"]),
            )
        except (TypeError, ValueError) as exc:
            raise BundleFormatError(f"{path}: bad parameter metadata ({exc})") from exc
    return StiefelGenerators(n, m, q, shape, rows, meta=meta)
