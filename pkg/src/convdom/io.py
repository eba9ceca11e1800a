"""CSV and JSON formats for envelopes, matrices, sections and reports.

Floats are written with 17 significant digits, so every value survives a
round trip exactly.  Group elements are serialized as comma-separated
integers (quoted inside CSV files).
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .algebra import CDMatrix, DenseSection
from .envelopes import Envelope
from .groups import Ball, GroupSpec, parse_group


def fmt(x: float) -> str:
    """17-significant-digit rendering of a real number."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


class _Raw(float):
    """A float that JSON-encodes as its 17-digit representation."""

    def __repr__(self):
        return fmt(self)


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_prepare(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Raw(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _prepare(obj.to_dict())
    return str(obj)


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # the pure-Python path calls float.__repr__ through ``floatstr``;
        # route it through fmt instead
        return json.encoder._make_iterencode(
            {}, self.default, json.encoder.py_encode_basestring, self.indent,
            lambda f: fmt(f), self.key_separator, self.item_separator, self.sort_keys,
            self.skipkeys, _one_shot)(o, 0)


def dumps(obj, indent: int | None = 2) -> str:
    """Deterministic JSON with 17-digit floats."""
    return json.dumps(_prepare(obj), cls=_Encoder, indent=indent, sort_keys=False,
                      allow_nan=True)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _read_csv(path, header):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = next(r)
        if got != list(header):
            raise ValueError(f"{path}: expected header {header}, found {got}")
        return list(r)


# -- envelopes -------------------------------------------------------------------

def write_envelope(path, env: Envelope):
    """CSV ``element,value``."""
    g = env.group
    _write_csv(path, ["element", "value"], [(g.format_element(z), fmt(v)) for z, v in env.items()])


def read_envelope(path, group: GroupSpec) -> Envelope:
    rows = _read_csv(path, ["element", "value"])
    return Envelope(group, {group.parse_element(e): float(v) for e, v in rows})


def write_envelope_curve(path, env: Envelope):
    """CSV ``z,|z|,b_value`` (inverse-envelope curves)."""
    g = env.group
    _write_csv(path, ["z", "|z|", "b_value"],
               [(g.format_element(z), g.word_length(z), fmt(v)) for z, v in env.items()])


# -- matrices ----------------------------------------------------------------------

def write_matrix(path, a: CDMatrix):
    """CSV ``z,y,re,im`` of the nonzero diagonal entries plus a JSON sidecar."""
    g = a.group
    dball, cball = a.diag_ball, a.col_ball
    rows = []
    for i, j in zip(*np.nonzero(a.data)):
        v = a.data[i, j]
        rows.append((g.format_element(dball[i]), g.format_element(cball[j]), fmt(v.real), fmt(v.imag)))
    _write_csv(path, ["z", "y", "re", "im"], rows)
    write_json(_sidecar(path), {"group": g.name, "K": a.K, "N": a.N, "M": a.M,
                                "certified": a.certified})


def _sidecar(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".json")


def read_matrix(path, max_radius: int | None = None) -> CDMatrix:
    meta = read_json(_sidecar(path))
    g = parse_group(meta["group"], max_radius=max_radius, allow_out_of_hypothesis=True)
    dball, cball = g.ball(meta["K"]), g.ball(meta["N"])
    data = np.zeros((len(dball), len(cball)), dtype=complex)
    for z, y, re, im in _read_csv(path, ["z", "y", "re", "im"]):
        data[dball.index[g.parse_element(z)], cball.index[g.parse_element(y)]] = complex(float(re), float(im))
    return CDMatrix(g, data, row_radius=meta.get("M"), certified=meta.get("certified"))


def write_dense(path, section: DenseSection):
    """Row-major CSV of ``re,im`` pairs per entry plus a ball manifest."""
    ball = section.ball
    n = len(ball)
    header = [f"{k}{j}" for j in range(n) for k in ("re", "im")]
    rows = []
    for i in range(n):
        row = []
        for v in section.entries[i]:
            row += [fmt(v.real), fmt(v.imag)]
        rows.append(row)
    _write_csv(path, header, rows)
    write_ball_manifest(_manifest(path), ball)


def _manifest(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".ball.csv")


def read_dense(path, group: GroupSpec) -> DenseSection:
    with open(_manifest(path), newline="") as fh:
        r = csv.reader(fh)
        next(r)
        radius = max(int(row[2]) for row in r)
    ball = group.ball(radius)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        vals = np.array([[float(x) for x in row] for row in r])
    entries = vals[:, 0::2] + 1j * vals[:, 1::2]
    return DenseSection(ball, entries)


def write_ball_manifest(path, ball: Ball):
    """CSV ``index,element,length`` in canonical order."""
    g = ball.group
    _write_csv(path, ["index", "element", "length"],
               [(i, g.format_element(z), int(n)) for i, (z, n) in enumerate(zip(ball.elements, ball.lengths))])


__all__ = ["fmt", "dumps", "write_json", "read_json", "write_envelope", "read_envelope",
           "write_envelope_curve", "write_matrix", "read_matrix", "write_dense", "read_dense",
           "write_ball_manifest"]
