"""JSON for exact site maps: rationals as "p/q" strings on an explicit window."""

import json
from fractions import Fraction

from .hyperbolic import HyperbolicOp
from .triangular import TriangularOp


def site_map_to_json(m: dict):
    if not m:
        return {"origin": [0, 0], "shape": [0, 0], "values": []}
    i0 = min(n[0] for n in m)
    j0 = min(n[1] for n in m)
    N1 = max(n[0] for n in m) - i0 + 1
    N2 = max(n[1] for n in m) - j0 + 1
    vals = [[None] * N2 for _ in range(N1)]
    for (i, j), v in m.items():
        v = Fraction(v)
        vals[i - i0][j - j0] = f"{v.numerator}/{v.denominator}"
    return {"origin": [i0, j0], "shape": [N1, N2], "values": vals}


def site_map_from_json(d):
    i0, j0 = d["origin"]
    out = {}
    for i, row in enumerate(d["values"]):
        for j, s in enumerate(row):
            if s is not None:
                out[(i0 + i, j0 + j)] = Fraction(s)
    return out


def operator_to_json(L) -> str:
    if isinstance(L, HyperbolicOp):
        kind, names = "hyperbolic", ("a", "b", "c")
    elif isinstance(L, TriangularOp):
        kind, names = "triangular", ("a", "b", "c", "d")
    else:
        raise TypeError(f"cannot serialize {type(L).__name__}")
    return json.dumps({"kind": kind, **{k: site_map_to_json(getattr(L, k)) for k in names}})


def operator_from_json(s: str):
    d = json.loads(s)
    if d["kind"] == "hyperbolic":
        return HyperbolicOp(*(site_map_from_json(d[k]) for k in ("a", "b", "c")))
    if d["kind"] == "triangular":
        return TriangularOp(*(site_map_from_json(d[k]) for k in ("a", "b", "c", "d")))
    raise ValueError(f"unknown operator kind {d['kind']!r}")
