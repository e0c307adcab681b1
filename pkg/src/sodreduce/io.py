"""Reading point matrices and writing reduced representations and coresets."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .coresets import WeightedCoreset
from .dimreduce import ReducedRep
from .errors import IngestError

__all__ = [
    "ingest",
    "read_csv",
    "read_matrix_market",
    "write_rep",
    "read_rep",
    "write_coreset",
    "read_coreset",
    "file_sha256",
]

# n, d, c, eps, seed (-1 when absent)
_HEADER = struct.Struct("<QQQdq")
_F8 = np.dtype("<f8")


def read_csv(path) -> np.ndarray:
    """Numeric CSV, one point per line; blank lines are skipped."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            try:
                vals = [float(cell) for cell in rec]
            except ValueError as exc:
                raise IngestError(f"{path}: line {lineno}: non-numeric cell ({exc})") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise IngestError(
                    f"{path}: line {lineno}: expected {width} columns, found {len(vals)}")
            rows.append(vals)
    if not rows:
        raise IngestError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def read_matrix_market(path):
    """Matrix Market file; coordinate format is returned as CSR."""
    try:
        M = scipy.io.mmread(str(path))
    except (ValueError, OSError, IndexError) as exc:
        raise IngestError(f"{path}: {exc}") from None
    if sp.issparse(M):
        return sp.csr_matrix(M, dtype=float)
    return np.asarray(M, dtype=float)


def ingest(path, fmt: str = "csv"):
    if fmt == "csv":
        return read_csv(path)
    if fmt in ("mm", "matrix_market"):
        return read_matrix_market(path)
    raise IngestError(f"unknown format {fmt!r}")


def write_rep(rep: ReducedRep, path) -> Path:
    """Binary file plus ``<path>.json`` sidecar mirroring the header.

    Layout: header ``(n, d, c, eps, seed)``, then the basis column-major,
    coordinates row-major, residuals; all little-endian 64-bit.
    """
    path = Path(path)
    seed = -1 if rep.seed is None else int(rep.seed)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(rep.n, rep.d, rep.c, float(rep.eps), seed))
        fh.write(np.asarray(rep.basis, dtype=_F8).tobytes(order="F"))
        fh.write(np.asarray(rep.coords, dtype=_F8).tobytes(order="C"))
        fh.write(np.asarray(rep.residuals, dtype=_F8).tobytes())
    meta = {"n": rep.n, "d": rep.d, "c": rep.c, "eps": rep.eps,
            "seed": rep.seed, "stats": _jsonable(rep.stats)}
    Path(str(path) + ".json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return path


def read_rep(path) -> ReducedRep:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise IngestError(f"{path}: truncated header")
    n, d, c, eps, seed = _HEADER.unpack_from(raw)
    need = _HEADER.size + 8 * (d * c + n * c + n)
    if len(raw) != need:
        raise IngestError(f"{path}: expected {need} bytes, found {len(raw)}")
    off = _HEADER.size
    B = np.frombuffer(raw, _F8, d * c, off).reshape((d, c), order="F").copy()
    off += 8 * d * c
    X = np.frombuffer(raw, _F8, n * c, off).reshape((n, c)).copy()
    off += 8 * n * c
    v = np.frombuffer(raw, _F8, n, off).copy()
    stats = {}
    side = Path(str(path) + ".json")
    if side.exists():
        stats = json.loads(side.read_text()).get("stats", {})
    return ReducedRep(B, X, v, eps, None if seed < 0 else seed, stats)


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_coreset(cs: WeightedCoreset, path, basis_path) -> Path:
    """JSON with a reference to the basis file and one record per coreset row."""
    doc = {
        "kind": cs.kind,
        "basis": {"path": str(basis_path), "sha256": file_sha256(basis_path)},
        "rows": [
            {"index": int(i), "weight": float(w), "coords": [float(x) for x in xs], "residual": float(r)}
            for i, w, xs, r in zip(cs.indices, cs.weights, cs.coords, cs.residuals)
        ],
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def read_coreset(path) -> WeightedCoreset:
    doc = json.loads(Path(path).read_text())
    ref = doc["basis"]
    if file_sha256(ref["path"]) != ref["sha256"]:
        raise IngestError(f"{path}: basis file {ref['path']} does not match its recorded hash")
    rep = read_rep(ref["path"])
    rows = doc["rows"]
    c = rep.c
    idx = np.array([r["index"] for r in rows], dtype=np.int64)
    w = np.array([r["weight"] for r in rows], dtype=float)
    X = np.array([r["coords"] for r in rows], dtype=float).reshape(len(rows), c)
    v = np.array([r["residual"] for r in rows], dtype=float)
    return WeightedCoreset(idx, w, X, v, rep.basis, doc.get("kind", ""))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
