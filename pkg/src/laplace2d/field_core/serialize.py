"""JSON serialization of periodic fields.

Header {T1, T2, N1, N2, parity} plus samples, either as a nested list
(row-major, x index first) or as base64 of little-endian float64 /
complex128 bytes in C order.
"""

import base64
import json

import numpy as np

from .fields import Cell, PeriodicScalarField


def field_to_dict(f: PeriodicScalarField, binary=False):
    c = f.cell
    out = {"T1": c.T1, "T2": c.T2, "N1": c.N1, "N2": c.N2, "parity": f.parity}
    if binary:
        dtype = "<f8" if f.parity == "real" else "<c16"
        out["encoding"] = "base64-" + dtype
        out["data"] = base64.b64encode(np.ascontiguousarray(f.values, dtype=dtype).tobytes()).decode()
    elif f.parity == "real":
        out["encoding"] = "list"
        out["data"] = f.values.tolist()
    else:
        out["encoding"] = "list-complex"
        out["data"] = [f.values.real.tolist(), f.values.imag.tolist()]
    return out


def field_from_dict(d):
    cell = Cell(float(d["T1"]), float(d["T2"]), int(d["N1"]), int(d["N2"]))
    enc = d.get("encoding", "list")
    if enc.startswith("base64-"):
        raw = base64.b64decode(d["data"])
        vals = np.frombuffer(raw, dtype=enc[len("base64-"):]).reshape(cell.N1, cell.N2)
    elif enc == "list-complex":
        re, im = d["data"]
        vals = np.asarray(re) + 1j * np.asarray(im)
    else:
        vals = np.asarray(d["data"], dtype=float)
    return PeriodicScalarField(cell, vals.copy(), d.get("parity", "real"))


def dumps_field(f, binary=False):
    return json.dumps(field_to_dict(f, binary))


def loads_field(s):
    return field_from_dict(json.loads(s))
