"""Binary model checkpoints.

Layout (all integers little-endian):

    bytes 0-3   magic "LGNC"
    byte  4     format version (1)
    byte  5     aggregation (0 = concat, 1 = add)
    byte  6     relu flag
    byte  7     1 if the profile carries (l, d), else 0
    u32         c_in
    u32         k_max
    u32         num_classes
    [u32 l, f64 d]        only when byte 7 is 1
    u32 * k_max           per-hop dims
    f64 arrays            hop weights row-major, hop order, then classifier

A JSON sidecar at <path>.json holds the training config and final metrics.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import HopDimProfile, LadderModel, classifier_rows

MAGIC = b"LGNC"
VERSION = 1
_AGG = {"concat": 0, "add": 1}
_AGG_INV = {v: k for k, v in _AGG.items()}


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, model: LadderModel, *, config: dict | None = None,
                    metrics: dict | None = None) -> None:
    path = Path(path)
    p = model.profile
    has_ld = p.l is not None and p.d is not None
    parts = [MAGIC, struct.pack("<BBBB", VERSION, _AGG[model.aggregation],
                                int(model.relu), int(has_ld)),
             struct.pack("<III", p.c_in, p.k_max, model.num_classes)]
    if has_ld:
        parts.append(struct.pack("<Id", p.l, p.d))
    parts.append(struct.pack(f"<{p.k_max}I", *p.dims))
    for w in [*model.w_hops, model.w_out]:
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
    path.write_bytes(b"".join(parts))
    sidecar = {"config": config or {}, "metrics": metrics or {}}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_checkpoint(path) -> LadderModel:
    buf = Path(path).read_bytes()
    if buf[:4] != MAGIC:
        raise CheckpointError("bad magic")
    version, agg_code, relu, has_ld = struct.unpack_from("<BBBB", buf, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}")
    if agg_code not in _AGG_INV:
        raise CheckpointError(f"unknown aggregation code {agg_code}")
    off = 8
    c_in, k_max, num_classes = struct.unpack_from("<III", buf, off)
    off += 12
    l = d = None
    if has_ld:
        l, d = struct.unpack_from("<Id", buf, off)
        off += 12
    dims = struct.unpack_from(f"<{k_max}I", buf, off)
    off += 4 * k_max
    profile = HopDimProfile(c_in=c_in, k_max=k_max, dims=tuple(dims), l=l, d=d)

    def take(rows, cols):
        nonlocal off
        nbytes = rows * cols * 8
        if off + nbytes > len(buf):
            raise CheckpointError("truncated weight data")
        arr = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=off)
        off += nbytes
        return arr.reshape(rows, cols).copy()

    w_hops = [take(c_in, dim) for dim in dims]
    aggregation = _AGG_INV[agg_code]
    w_out = take(classifier_rows(profile, aggregation), num_classes)
    if off != len(buf):
        raise CheckpointError("trailing bytes after weight data")
    return LadderModel(profile, w_hops, w_out, num_classes, aggregation,
                       bool(relu))
